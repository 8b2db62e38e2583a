//! Classical jump process behind the eigenvalues of ρ(t).

use helstrom_flow::classical::{chapman_kolmogorov_check, classical_rates, pauli_evolve, spectral_track};
use helstrom_flow::propagator::integrate;
use helstrom_flow::{BuiltinGenerator, DensityMatrix, Result};

fn main() -> Result<()> {
    let spec = BuiltinGenerator::eternal().build()?;
    let table = integrate(&spec, 3.0, 1e-3)?;
    let rho0 = DensityMatrix::from_bloch([0.3, 0.1, 0.6])?;

    let traj = spectral_track(&table, &rho0)?;
    let process = classical_rates(&spec, &traj)?;
    let p = pauli_evolve(&process, &process.probabilities[0])?;
    let last = process.times.len() - 1;

    println!("W(0) = {}", process.rates[0]);
    println!("W(3) = {}", process.rates_left[last]);
    println!("smallest off-diagonal rate {:.6}", process.min_offdiag);
    println!("p(3) from the Pauli equation {:?}, spectrum {:?}", p[last], process.probabilities[last]);
    println!("Chapman-Kolmogorov residual {:.2e}", chapman_kolmogorov_check(&process, 0, last / 2, last)?);
    Ok(())
}

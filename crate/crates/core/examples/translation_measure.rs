//! Non-Markovianity of a contraction followed by a translation of the Bloch
//! ball: the optimal pair is biased and orthogonal.

use helstrom_flow::generator::TranslationDemoParams;
use helstrom_flow::measure::{measure_orthogonal_scan, ScanOptions};
use helstrom_flow::propagator::integrate;
use helstrom_flow::{BuiltinGenerator, Result};

fn main() -> Result<()> {
    let params = TranslationDemoParams::from_geometry(0.5, 0.3);
    let table = integrate(&BuiltinGenerator::TranslationDemo(params).build()?, params.t_final, 1e-3)?;
    let result = measure_orthogonal_scan(&table, &ScanOptions::default())?;

    println!("N = {:.6} (r·a = {:.6})", result.value, params.r() * params.a());
    println!("p1 = {:.4}, p2 = {:.4}", result.optimizer.p1, result.optimizer.p2);
    println!("ρ1 Bloch vector {:?}", result.optimizer.rho1.bloch_vector()?);
    println!("increase on {:?}", result.increasing_intervals);
    Ok(())
}

//! The measure from ensembles pinned to one interior state and a surface
//! around it.

use helstrom_flow::generator::TranslationDemoParams;
use helstrom_flow::measure::{enclosing_surface_point, measure_local, EnclosingSurface, ScanOptions};
use helstrom_flow::operator::pauli;
use helstrom_flow::propagator::integrate;
use helstrom_flow::{BuiltinGenerator, DensityMatrix, HermitianOperator, Result};

fn main() -> Result<()> {
    let surface = EnclosingSurface::around(DensityMatrix::from_bloch([0.0, 0.0, 0.2])?)?;
    let x = HermitianOperator::new(pauli::sigma_x())?;
    let point = enclosing_surface_point(&surface, &x)?;
    println!("σ_x ∝ Δ with λ = {:.4}, σ = {:?}", point.lambda, point.rho2.bloch_vector()?);

    let params = TranslationDemoParams::from_geometry(0.5, 0.3);
    let table = integrate(&BuiltinGenerator::TranslationDemo(params).build()?, params.t_final, 1e-3)?;
    let local = measure_local(&table, &EnclosingSurface::maximally_mixed(2)?, &ScanOptions::default())?;
    println!("local N = {:.6} with p = {:.4}", local.value, local.optimizer.p1);
    Ok(())
}

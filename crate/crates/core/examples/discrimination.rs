//! One-shot discrimination of two qubit states and the Helstrom form of an
//! arbitrary Hermitian operator.

use helstrom_flow::operator::{discrimination_success, hermitian_to_helstrom, jordan_hahn, trace_norm};
use helstrom_flow::{DensityMatrix, HelstromEnsemble, HermitianOperator, Result};

fn main() -> Result<()> {
    let plus_x = DensityMatrix::from_bloch([1.0, 0.0, 0.0])?;
    let up = DensityMatrix::from_bloch([0.0, 0.0, 1.0])?;

    for p1 in [0.5, 0.7, 0.9] {
        let e = HelstromEnsemble::with_weight(p1, plus_x.clone(), up.clone())?;
        println!(
            "p1 = {p1:.1}: ||Δ||₁ = {:.6}, P_success = {:.6}",
            trace_norm(&e.delta()),
            discrimination_success(&e)
        );
    }

    let x = HermitianOperator::from_real_diagonal(&[0.7, -0.2, 0.1]);
    let parts = jordan_hahn(&x);
    println!("Tr S = {:.3}, Tr Q = {:.3}", parts.positive.trace(), parts.negative.trace());
    let (lambda, e) = hermitian_to_helstrom(&x)?;
    println!("X = {lambda:.3}·Δ with p1 = {:.4}, p2 = {:.4}", e.p1, e.p2);
    Ok(())
}

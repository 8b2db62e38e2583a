//! The eternal model: a permanently negative rate, yet P-divisible.

use helstrom_flow::divisibility::{divisibility_report, DivisibilityOptions};
use helstrom_flow::propagator::integrate;
use helstrom_flow::scenarios::eternal_closed_form;
use helstrom_flow::{BuiltinGenerator, Result};

fn main() -> Result<()> {
    let spec = BuiltinGenerator::eternal().build()?;
    let table = integrate(&spec, 3.0, 1e-3)?;
    let report = divisibility_report(&spec, &table, &DivisibilityOptions::default());

    println!("CP-divisible: {} (Choi witness agrees: {})", report.verdict_cp, report.witness_verdict_cp);
    println!("P-divisible:  {} (contraction witness agrees: {})", report.verdict_p, report.witness_verdict_p);
    println!("worst CP margin {:.4}, worst P margin {:.4}", report.cp_rate_condition.worst_margin, report.p_rate_condition.worst_margin);

    let k = table.index_of(1.0)?;
    let (m, _) = table.map(k).bloch_affine()?;
    println!("v_x factor at t=1: {:.7} (closed form {:.7})", m[(0, 0)], eternal_closed_form(0.25, 1.0).0);
    Ok(())
}

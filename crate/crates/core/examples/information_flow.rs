//! Internal and external distinguishability for a qubit exchanging
//! excitations with a second qubit.

use helstrom_flow::scenarios::{run_dilation_demo, DilationDemoParams};
use helstrom_flow::Result;

fn main() -> Result<()> {
    let report = run_dilation_demo(&DilationDemoParams::default())?;
    for k in (0..report.times.len()).step_by(60) {
        println!(
            "t = {:5.2}  I_int = {:.6}  I_ext = {:.6}  sum = {:.6}",
            report.times[k], report.i_int[k], report.i_ext[k], report.sum[k]
        );
    }
    println!("max |I_int + I_ext - I_int(0)| = {:.2e}", report.max_residual);
    Ok(())
}

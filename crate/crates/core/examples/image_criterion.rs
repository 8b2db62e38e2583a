//! Does the image of the Bloch ball under Φ_T contain the maximally mixed
//! state?

use helstrom_flow::classical::max_mixed_in_image;
use helstrom_flow::generator::TranslationDemoParams;
use helstrom_flow::propagator::integrate;
use helstrom_flow::{BuiltinGenerator, Result};

fn main() -> Result<()> {
    for (r, a) in [(0.5, 0.3), (0.3, 0.45), (0.8, 0.15)] {
        let params = TranslationDemoParams::from_geometry(r, a);
        let table = integrate(&BuiltinGenerator::TranslationDemo(params).build()?, params.t_final, 1e-3)?;
        println!("r = {r}, a = {a}: I/2 in image = {}", max_mixed_in_image(&table, params.t_final)?);
    }
    Ok(())
}

//! Parse a JSON process description, expand it and run the pipeline.

use helstrom_flow::cli::ProcessConfig;
use helstrom_flow::divisibility::{divisibility_report, DivisibilityOptions};
use helstrom_flow::measure::{measure_orthogonal_scan, ScanOptions};
use helstrom_flow::propagator::integrate;

const CONFIG: &str = r#"{
    "dim": 2,
    "hamiltonian": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]],
    "channels": [
        {"operator": "sigma_minus", "rate": {"type": "piecewise-constant", "params": {"breaks": [1.0], "values": [0.8, -0.3]}}},
        {"operator": "sigma_z", "rate": {"type": "constant", "params": 0.1}}
    ],
    "time": {"T": 2.0, "dt": 0.005},
    "seed": 3
}"#;

fn main() {
    let config = match ProcessConfig::from_json(CONFIG) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let spec = config.spec().expect("validated");
    let table = integrate(&spec, config.time.t_final, config.time.dt).expect("integrates");
    let report = divisibility_report(&spec, &table, &DivisibilityOptions { seed: config.seed, ..Default::default() });
    let measure = measure_orthogonal_scan(&table, &ScanOptions::with_grid(16)).expect("qubit scan");
    println!("CP {} P {} N = {:.6}", report.verdict_cp, report.verdict_p, measure.value);
}

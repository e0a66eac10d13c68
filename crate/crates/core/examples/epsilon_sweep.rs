// A small ε sweep written as a results CSV to stdout.

use privcal::harness::{generate_synthetic, run_sweep, write_results, Factor, GridPreset, SweepConfig, SynthConfig};
use privcal::Method;

pub fn run_example() -> privcal::Result<()> {
    let data = generate_synthetic(&SynthConfig {
        samples: 8_000,
        seed: 2,
        ..SynthConfig::default()
    })?;
    let mut cfg = SweepConfig::from_preset(
        GridPreset::Desk,
        Factor::Epsilon,
        vec![Method::None, Method::HistBin, Method::AccT],
        2024,
    );
    cfg.grid = vec![0.2, 1.0, f64::INFINITY];
    cfg.trials = 10;
    let rows = run_sweep(&cfg, &data)?;
    write_results(std::io::stdout().lock(), &rows)
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

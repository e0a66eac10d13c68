// Private histogram binning: one noisy tally query per source, then a per-bin remap.
// Thin bins keep their original confidence under noise.

use privcal::harness::{generate_synthetic, split_sources, SynthConfig};
use privcal::recalibrate::{self, RecalibratedModel};
use privcal::{Epsilon, Method, RecalConfig};

pub fn run_example() -> privcal::Result<()> {
    let data = generate_synthetic(&SynthConfig {
        samples: 8_000,
        seed: 5,
        ..SynthConfig::default()
    })?;
    for epsilon in [Epsilon::INFINITE, Epsilon::new(2.0)?, Epsilon::new(0.2)?] {
        let mut split = split_sources(&data, 50, 60, epsilon, 9)?;
        let cfg = RecalConfig::default()
            .with_method(Method::HistBin)
            .with_epsilon(epsilon);
        let model = recalibrate::recalibrate(&mut split.sources, &cfg)?;
        let ece = model.ece(&split.test, &cfg.scheme)?;
        let raw = RecalibratedModel::identity().ece(&split.test, &cfg.scheme)?;
        println!("ε = {epsilon}: test ECE {ece:.4} (uncalibrated {raw:.4})");
        println!("  {model}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

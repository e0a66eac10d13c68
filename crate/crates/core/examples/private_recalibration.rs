// Every recalibration method on one split of synthetic data, at ε = 1 and ε = ∞.

use privcal::harness::{generate_synthetic, run_trial, SynthConfig, TrialConfig};
use privcal::{Epsilon, Method, RecalConfig};

pub fn run_example() -> privcal::Result<()> {
    let data = generate_synthetic(&SynthConfig {
        samples: 12_000,
        seed: 3,
        ..SynthConfig::default()
    })?;
    for epsilon in [Epsilon::new(1.0)?, Epsilon::INFINITE] {
        println!("ε = {epsilon}");
        for method in Method::ALL {
            let cfg = TrialConfig {
                recal: RecalConfig::default().with_method(method).with_epsilon(epsilon),
                sources: 100,
                samples: 50,
            };
            let out = run_trial(&data, &cfg, 11)?;
            let spent = out.epsilon_spent.iter().cloned().fold(0.0, f64::max);
            println!(
                "  {:<10} test ECE {:.4}  queries/source {:>2}  ε spent {:.3}  {}",
                method.name(),
                out.ece_test,
                out.charges[0],
                spent,
                out.model
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

// Binned ECE, accuracy and average confidence of a synthetic overconfident model,
// before and after dividing its logits by a temperature.

use privcal::calibration::{self, BinningScheme};
use privcal::harness::{generate_synthetic, SynthConfig};

pub fn run_example() -> privcal::Result<()> {
    // Logits inflated 2x: the model is overconfident until T is near 2.
    let data = generate_synthetic(&SynthConfig {
        samples: 5_000,
        seed: 1,
        ..SynthConfig::default()
    })?;
    let scheme = BinningScheme::default();
    let acc = calibration::accuracy(&data)?;
    println!("accuracy {acc:.4} on {} samples", data.len());
    println!("{:>5}  {:>8}  {:>8}  {:>9}", "T", "avg conf", "ECE", "NLL/n");
    for t in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
        let conf = calibration::average_confidence(&data, t)?;
        let ece = calibration::ece(&data, t, &scheme)?;
        let nll = calibration::nll_sum(&data, t, calibration::DEFAULT_NLL_CLIP)? / data.len() as f64;
        println!("{t:>5.2}  {conf:>8.4}  {ece:>8.4}  {nll:>9.4}");
    }

    // Per-bin view at T = 1.
    let stats = calibration::confidence_stats(&data, 1.0, &scheme)?;
    for b in 0..scheme.bins() {
        if stats.n_bin[b] > 0 {
            let (lo, hi) = scheme.bounds(b);
            let n = stats.n_bin[b] as f64;
            println!(
                "bin [{lo:.3}, {hi:.3}): n={:>5} acc={:.3} conf={:.3}",
                stats.n_bin[b],
                stats.n_correct[b] as f64 / n,
                stats.conf_sum[b] / n
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

// Golden-section search on a unimodal function, showing the shrinking bracket.

use std::convert::Infallible;

use privcal::search::{golden_section, InteriorRatio, SearchConfig};

pub fn run_example() -> privcal::Result<()> {
    let f = |t: f64| (t.ln() - 0.4).powi(2); // minimum at e^0.4 ≈ 1.4918
    for ratio in [InteriorRatio::Golden, InteriorRatio::Truncated] {
        let cfg = SearchConfig::minimize(0.5, 3.0, 8)?.with_ratio(ratio);
        let out = golden_section::<Infallible, _>(&cfg, |t| Ok(f(t))).unwrap_or_else(|e| match e {});
        println!("{ratio:?}: {} evaluations", out.evaluations);
        for (i, (lo, hi)) in out.intervals.iter().enumerate() {
            println!("  after {i:>2}: [{lo:.5}, {hi:.5}] width {:.5}", hi - lo);
        }
        println!(
            "  optimum {:.5} (true {:.5}, predicted width {:.5})",
            out.optimum,
            0.4f64.exp(),
            cfg.final_width()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

// A source answering noisy queries until its ε ledger runs dry.

use privcal::calibration::{BinningScheme, LabeledLogits};
use privcal::{Dataset, Epsilon, PrivateSource, QueryKind, QuerySpec};

pub fn run_example() -> privcal::Result<()> {
    let data = Dataset::new(vec![
        LabeledLogits::new(vec![2.0, 0.0, -1.0], 0)?,
        LabeledLogits::new(vec![0.5, 1.5, 0.0], 2)?,
        LabeledLogits::new(vec![3.0, -2.0, 0.0], 0)?,
        LabeledLogits::new(vec![0.0, 0.1, 0.2], 1)?,
    ])?;
    let mut source = PrivateSource::new(0, data, Epsilon::new(1.0)?, 42)?;

    // Four queries at ε/4 each; Δf = 1, so the Laplace scale is 4.
    let share = Epsilon::new(1.0)?.split(4);
    let q = QuerySpec::new(QueryKind::AccConfGap, 1.0, BinningScheme::default(), share);
    for i in 0..4 {
        let r = source.respond(&q, i)?;
        println!(
            "query {i}: noisy Σ(correct − conf) = {:+.3}, spent {:.2}/{}",
            r.values[0],
            source.budget().spent(),
            source.budget().total()
        );
    }
    match source.respond(&q, 4) {
        Err(e) => println!("fifth query refused: {e}"),
        Ok(_) => unreachable!("budget should be exhausted"),
    }

    // With ε = ∞ the same query is answered exactly and nothing is charged.
    let exact = QuerySpec::new(QueryKind::AccConfGap, 1.0, BinningScheme::default(), Epsilon::INFINITE);
    let mut open = PrivateSource::new(1, source_data()?, Epsilon::INFINITE, 0)?;
    println!("noiseless answer: {:+.6}", open.respond(&exact, 0)?.values[0]);
    Ok(())
}

fn source_data() -> privcal::Result<Dataset> {
    Dataset::new(vec![LabeledLogits::new(vec![1.0, 0.0], 0)?, LabeledLogits::new(vec![0.0, 1.0], 0)?])
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

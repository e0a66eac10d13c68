// Round-tripping a logit CSV and the errors reported for malformed files.

use std::io::Cursor;
use std::path::Path;

use privcal::harness::{generate_synthetic, load_logits, read_logits, save_logits, SynthConfig};

pub fn run_example() -> privcal::Result<()> {
    let data = generate_synthetic(&SynthConfig {
        classes: 4,
        samples: 100,
        seed: 8,
        ..SynthConfig::default()
    })?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("logits.csv");
    save_logits(&path, &data)?;
    let text = std::fs::read_to_string(&path)?;
    println!("{}", text.lines().take(3).collect::<Vec<_>>().join("\n"));
    let back = load_logits(&path)?;
    assert_eq!(back, data);
    println!("round trip: {} samples, {} classes", back.len(), back.classes().unwrap_or(0));

    for bad in [
        "label,logit_0,logit_1\n0,1.0\n",
        "label,logit_0,logit_1\n2,1.0,0.5\n",
        "label,logit_0,logit_1\n0,NaN,0.5\n",
    ] {
        match read_logits(Cursor::new(bad), Path::new("inline.csv")) {
            Err(e) => println!("rejected: {e}"),
            Ok(_) => unreachable!(),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> privcal::Result<()> {
    run_example()
}

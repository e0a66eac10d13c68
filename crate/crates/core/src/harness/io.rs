use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::calibration::{Dataset, LabeledLogits};
use crate::{Error, Result};

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a logit CSV: header `label,logit_0,…,logit_{m−1}`, then one sample per row.
pub fn load_logits(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    read_logits(File::open(path)?, path)
}

/// As [`load_logits`], from any reader; `origin` only labels error messages.
pub fn read_logits<R: Read>(reader: R, origin: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r?,
        None => return Err(parse_err(origin, 1, "missing header")),
    };
    let classes = header.len().saturating_sub(1);
    let header_ok = classes >= 2
        && &header[0] == "label"
        && (0..classes).all(|i| header[i + 1] == *format!("logit_{i}"));
    if !header_ok {
        return Err(parse_err(
            origin,
            1,
            "malformed header, expected label,logit_0,...,logit_{m-1} with m >= 2",
        ));
    }

    let mut samples = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != classes + 1 {
            return Err(parse_err(
                origin,
                line,
                format!("expected {} fields, found {}", classes + 1, record.len()),
            ));
        }
        let label: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(origin, line, format!("invalid label {:?}", &record[0])))?;
        if label >= classes {
            return Err(parse_err(
                origin,
                line,
                format!("label {label} out of range for {classes} classes"),
            ));
        }
        let logits = record
            .iter()
            .skip(1)
            .map(|f| {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(origin, line, format!("invalid logit {f:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(origin, line, format!("non-finite logit {f:?}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(LabeledLogits::new(logits, label)?);
    }
    Dataset::new(samples)
}

pub fn save_logits(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_logits(std::io::BufWriter::new(file), data)
}

/// Writes shortest round-trip float representations, so loading restores the data exactly.
pub fn write_logits<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let classes = data.classes().ok_or(Error::EmptyDataset)?;
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["label".to_string()];
    header.extend((0..classes).map(|i| format!("logit_{i}")));
    wtr.write_record(&header)?;
    for s in data.samples() {
        let mut row = Vec::with_capacity(classes + 1);
        row.push(s.label().to_string());
        row.extend(s.logits().iter().map(|l| l.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

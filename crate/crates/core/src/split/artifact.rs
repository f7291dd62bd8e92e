//! Text form of a share mask: one `index,variance,shared` row per parameter.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ShareMask, VarianceVector};
use crate::error::{check_len, Error, Result};

pub const MASK_HEADER: &str = "index,variance,shared";

#[derive(Serialize, Deserialize)]
struct MaskRecord {
    index: usize,
    variance: f64,
    shared: u8,
}

/// Writes the mask with its variance column. Without a metric (random
/// masks), the variance column is written as `NaN`.
pub fn write_mask_artifact<W: Write>(
    out: W,
    mask: &ShareMask,
    variance: Option<&VarianceVector>,
) -> Result<()> {
    if let Some(v) = variance {
        check_len("variance vector", mask.len(), v.len())?;
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(MASK_HEADER.split(','))?;
    for (index, &shared) in mask.flags().iter().enumerate() {
        w.serialize(MaskRecord {
            index,
            variance: variance.map_or(f64::NAN, |v| v.as_slice()[index]),
            shared: u8::from(shared),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_mask_artifact<R: Read>(
    input: R,
    path: &Path,
) -> Result<(ShareMask, Option<VarianceVector>)> {
    let bad = |reason: String| Error::Artifact {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_reader(input);
    if r.headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .ne(MASK_HEADER.split(','))
    {
        return Err(bad("missing header".into()));
    }
    let mut flags = Vec::new();
    let mut variances = Vec::new();
    for (n, rec) in r.deserialize::<MaskRecord>().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.index != flags.len() {
            return Err(bad(format!("row {}: index out of order", n + 1)));
        }
        let shared = match rec.shared {
            0 => false,
            1 => true,
            _ => return Err(bad(format!("row {}: shared must be 0 or 1", n + 1))),
        };
        flags.push(shared);
        variances.push(rec.variance);
    }
    let variance = if variances.iter().all(|v| v.is_nan()) {
        None
    } else {
        Some(VarianceVector::new(variances).map_err(|e| bad(e.to_string()))?)
    };
    Ok((ShareMask::from_flags(flags), variance))
}

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Echelon, SparseVec};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational};

pub const CHECKPOINT_VERSION: u32 = 1;

/// First line of a checkpoint file; the remaining lines hold one pivot row
/// each as `[[column, "p/q"], ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub ncols: usize,
    /// Index of the next input row to absorb.
    pub next_row: usize,
    pub rank: usize,
    /// Free-form job description used to refuse mismatched resumes.
    pub job: serde_json::Value,
}

/// Writes the echelon state atomically (temporary file, then rename).
pub fn write_checkpoint(path: &Path, header: &CheckpointHeader, echelon: &Echelon<BigRational>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
        writeln!(f, "{}", serde_json::to_string(header)?)?;
        for row in echelon.rows() {
            let items: Vec<serde_json::Value> =
                row.iter().map(|(c, x)| serde_json::json!([c, format_rational(x)])).collect();
            writeln!(f, "{}", serde_json::Value::Array(items))?;
        }
        f.flush()?;
        f.get_ref().sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a checkpoint, validating its structure and pivot invariants.
pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, Echelon<BigRational>)> {
    let f = BufReader::new(fs::File::open(path)?);
    let mut lines = f.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty checkpoint".into()))??;
    let header: CheckpointHeader = serde_json::from_str(&first)?;
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::Parse(format!("unsupported checkpoint version {}", header.version)));
    }
    let mut echelon = Echelon::new(header.ncols);
    for line in lines {
        let line = line?;
        let items: Vec<(usize, String)> = serde_json::from_str(&line)?;
        let row: SparseVec<BigRational> =
            items.iter().map(|(c, s)| Ok((*c, parse_rational(s)?))).collect::<Result<_>>()?;
        super::check_row(&row, header.ncols)?;
        let Some(&(pivot, ref lead)) = row.first() else {
            return Err(Error::Parse("empty row in checkpoint".into()));
        };
        if *lead != BigRational::from_integer(1.into()) || echelon.rows.contains_key(&pivot) {
            return Err(Error::Parse("checkpoint rows are not in reduced form".into()));
        }
        echelon.rows.insert(pivot, row);
    }
    if echelon.rank() != header.rank {
        return Err(Error::Parse(format!("checkpoint declares rank {} but holds {} rows", header.rank, echelon.rank())));
    }
    Ok((header, echelon))
}

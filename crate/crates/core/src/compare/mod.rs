//! Comparison of categorical maps with different legends.
//!
//! The chain runs from a [`ContingencyTable`] (pixel co-occurrence counts)
//! through [`harmonize`] (joint and conditional probabilities, thresholded
//! into a data-driven relation) and [`apply_overrides`] (expert review with
//! an audit log) to a binary [`LegendRelation`], scored by [`cvpai2`].
//! [`LegendCrosswalk`] translates maps between legends through a
//! one-to-many table plus a resolution file.

mod contingency;
mod crosswalk;
mod cvpai;
mod harmonize;

pub use contingency::{build_contingency, ContingencyTable};
pub use crosswalk::{translate_legend, LegendCrosswalk};
pub use cvpai::cvpai2;
pub use harmonize::{
    apply_overrides, harmonize, read_overrides, AuditEntry, HarmonizationTrace, Matrix, Override,
};

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Binary relation `CE[t, r]` between a test dictionary (rows) and a
/// reference dictionary (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendRelation {
    test: Vec<String>,
    reference: Vec<String>,
    cells: Vec<u8>,
}

impl LegendRelation {
    /// `cells` is row-major, `test.len() × reference.len()`, entries 0 or 1.
    pub fn new(test: Vec<String>, reference: Vec<String>, cells: Vec<u8>) -> Result<Self> {
        if test.is_empty() || reference.is_empty() {
            return Err(Error::Mapping(
                "a relation needs non-empty dictionaries".into(),
            ));
        }
        if cells.len() != test.len() * reference.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {}x{} relation",
                cells.len(),
                test.len(),
                reference.len()
            )));
        }
        if let Some(i) = cells.iter().position(|&c| c > 1) {
            return Err(Error::Data {
                row: i / reference.len(),
                col: i % reference.len(),
                msg: format!("relation entries must be 0 or 1, got {}", cells[i]),
            });
        }
        Ok(LegendRelation {
            test,
            reference,
            cells,
        })
    }

    /// Rows of 0/1 values with generic dictionary names.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let rc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != rc) {
            return Err(Error::DimensionMismatch("ragged relation rows".into()));
        }
        Self::new(
            (1..=rows.len()).map(|i| format!("t{i}")).collect(),
            (1..=rc).map(|i| format!("r{i}")).collect(),
            rows.concat(),
        )
    }

    pub fn tc(&self) -> usize {
        self.test.len()
    }

    pub fn rc(&self) -> usize {
        self.reference.len()
    }

    pub fn test_names(&self) -> &[String] {
        &self.test
    }

    pub fn reference_names(&self) -> &[String] {
        &self.reference
    }

    #[inline]
    pub fn get(&self, t: usize, r: usize) -> u8 {
        self.cells[t * self.reference.len() + r]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Number of correct entry pairs.
    pub fn ce(&self) -> usize {
        self.cells.iter().map(|&c| c as usize).sum()
    }

    pub fn row_sum(&self, t: usize) -> usize {
        (0..self.rc()).map(|r| self.get(t, r) as usize).sum()
    }

    pub fn col_sum(&self, r: usize) -> usize {
        (0..self.tc()).map(|t| self.get(t, r) as usize).sum()
    }

    pub fn test_index(&self, name: &str) -> Option<usize> {
        self.test.iter().position(|n| n == name)
    }

    pub fn reference_index(&self, name: &str) -> Option<usize> {
        self.reference.iter().position(|n| n == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(
            &self.test,
            &self.reference,
            |t, r| self.get(t, r).to_string(),
            out,
        )
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let (test, reference, values) = read_matrix_csv(input)?;
        let cells = values
            .iter()
            .map(|v| match v.as_str() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::Format(format!(
                    "relation entry `{other}` is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(test, reference, cells)
    }
}

/// Writes a labeled matrix: a header of column names after an empty corner
/// cell, then one row per row name.
pub(crate) fn write_matrix_csv<W: Write>(
    rows: &[String],
    cols: &[String],
    cell: impl Fn(usize, usize) -> String,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(cols.iter().cloned());
    w.write_record(&header)?;
    for (t, name) in rows.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend((0..cols.len()).map(|r| cell(t, r)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("matrix csv", e))?;
    Ok(())
}

pub(crate) fn read_matrix_csv<R: Read>(
    input: R,
) -> Result<(Vec<String>, Vec<String>, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Format("matrix csv is empty".into()))??;
    let cols: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec?;
        if rec.len() != cols.len() + 1 {
            return Err(Error::Format(format!(
                "row `{}` has {} values, expected {}",
                rec.get(0).unwrap_or(""),
                rec.len().saturating_sub(1),
                cols.len()
            )));
        }
        rows.push(rec[0].to_string());
        values.extend(rec.iter().skip(1).map(str::to_string));
    }
    Ok((rows, cols, values))
}

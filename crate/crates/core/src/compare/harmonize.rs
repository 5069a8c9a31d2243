use std::collections::HashSet;
use std::io::{Read, Write};

use super::{write_matrix_csv, ContingencyTable, LegendRelation};
use crate::error::{Error, Result};

/// Dense row-major real matrix with the table's dictionaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Matrix { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn write_csv<W: Write>(
        &self,
        row_names: &[String],
        col_names: &[String],
        out: W,
    ) -> Result<()> {
        write_matrix_csv(
            row_names,
            col_names,
            |r, c| format!("{:.9}", self.get(r, c)),
            out,
        )
    }
}

/// Intermediate results of the data-driven harmonization protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonizationTrace {
    pub th1: f64,
    pub th2: f64,
    /// Step 1: pixel counts.
    pub counts: ContingencyTable,
    /// Step 2: joint probability `p(t, r)`.
    pub joint: Matrix,
    /// Step 3: `p(r | t)`, each row divided by its marginal.
    pub reference_given_test: Matrix,
    /// Step 4: step 3 kept where `p ≥ TH1`.
    pub reference_given_test_crisp: LegendRelation,
    /// Step 5: `p(t | r)`, each column divided by its marginal.
    pub test_given_reference: Matrix,
    /// Step 6: step 5 kept where `p ≥ TH2`.
    pub test_given_reference_crisp: LegendRelation,
    /// Step 7: elementwise OR of steps 4 and 6.
    pub combined: LegendRelation,
}

fn crisp(table: &ContingencyTable, m: &Matrix, th: f64) -> LegendRelation {
    let cells = m
        .values()
        .iter()
        .map(|&p| u8::from(p > 0.0 && p >= th))
        .collect();
    LegendRelation::new(
        table.test_names().to_vec(),
        table.reference_names().to_vec(),
        cells,
    )
    .expect("dimensions come from the table")
}

/// Runs steps 2 to 7. Requires `0 ≤ th2 ≤ th1 ≤ 1`; a cell survives
/// thresholding when its probability is positive and at least the
/// threshold. Zero marginals give all-zero conditional rows or columns.
pub fn harmonize(table: &ContingencyTable, th1: f64, th2: f64) -> Result<HarmonizationTrace> {
    for (name, th) in [("TH1", th1), ("TH2", th2)] {
        if !(0.0..=1.0).contains(&th) {
            return Err(Error::Threshold(format!("{name} = {th} is outside [0, 1]")));
        }
    }
    if th2 > th1 {
        return Err(Error::Threshold(format!("TH2 = {th2} exceeds TH1 = {th1}")));
    }
    let n = table.total();
    if n == 0 {
        return Err(Error::EmptyOverlap);
    }
    let (tc, rc) = (table.tc(), table.rc());
    let rows: Vec<u64> = (0..tc).map(|t| table.row_total(t)).collect();
    let cols: Vec<u64> = (0..rc).map(|r| table.col_total(r)).collect();
    let ratio = |c: u64, d: u64| if d == 0 { 0.0 } else { c as f64 / d as f64 };

    let joint = Matrix::from_fn(tc, rc, |t, r| ratio(table.count(t, r), n));
    let rgt = Matrix::from_fn(tc, rc, |t, r| ratio(table.count(t, r), rows[t]));
    let tgr = Matrix::from_fn(tc, rc, |t, r| ratio(table.count(t, r), cols[r]));
    let step4 = crisp(table, &rgt, th1);
    let step6 = crisp(table, &tgr, th2);
    let cells = step4
        .cells()
        .iter()
        .zip(step6.cells())
        .map(|(a, b)| a | b)
        .collect();
    let combined = LegendRelation::new(
        table.test_names().to_vec(),
        table.reference_names().to_vec(),
        cells,
    )?;
    Ok(HarmonizationTrace {
        th1,
        th2,
        counts: table.clone(),
        joint,
        reference_given_test: rgt,
        reference_given_test_crisp: step4,
        test_given_reference: tgr,
        test_given_reference_crisp: step6,
        combined,
    })
}

/// An expert decision on one cell. Labels are dictionary names or, failing
/// that, numeric map labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub test: String,
    pub reference: String,
    pub value: u8,
    pub note: String,
}

/// One applied override as recorded in the audit log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    pub test: String,
    pub reference: String,
    pub previous: u8,
    pub value: u8,
    pub note: String,
}

/// Reads `test_label,reference_label,value,note` rows (with header).
pub fn read_overrides<R: Read>(input: R) -> Result<Vec<Override>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 4 {
            return Err(Error::Override(format!(
                "line {line}: expected 4 fields, got {}",
                rec.len()
            )));
        }
        let value = match &rec[2] {
            "0" => 0,
            "1" => 1,
            v => {
                return Err(Error::Override(format!(
                    "line {line}: value `{v}` must be 0 or 1"
                )))
            }
        };
        if rec[3].is_empty() {
            return Err(Error::Override(format!(
                "line {line}: every override needs a note"
            )));
        }
        out.push(Override {
            test: rec[0].to_string(),
            reference: rec[1].to_string(),
            value,
            note: rec[3].to_string(),
        });
    }
    Ok(out)
}

fn locate(names: &[String], labels: &[u16], key: &str, axis: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == key)
        .or_else(|| {
            key.parse::<u16>()
                .ok()
                .and_then(|l| labels.iter().position(|&x| x == l))
        })
        .ok_or_else(|| Error::Override(format!("{axis} label `{key}` is not in the dictionary")))
}

/// Step 8: replaces step-7 cells by expert decisions.
pub fn apply_overrides(
    trace: &HarmonizationTrace,
    overrides: &[Override],
) -> Result<(LegendRelation, Vec<AuditEntry>)> {
    let table = &trace.counts;
    let rc = table.rc();
    let mut cells = trace.combined.cells().to_vec();
    let mut seen = HashSet::new();
    let mut audit = Vec::with_capacity(overrides.len());
    for o in overrides {
        let t = locate(table.test_names(), table.test_labels(), &o.test, "test")?;
        let r = locate(
            table.reference_names(),
            table.reference_labels(),
            &o.reference,
            "reference",
        )?;
        if !seen.insert((t, r)) {
            return Err(Error::Override(format!(
                "cell ({}, {}) is overridden more than once",
                table.test_names()[t],
                table.reference_names()[r]
            )));
        }
        if o.value > 1 {
            return Err(Error::Override(format!(
                "override value {} must be 0 or 1",
                o.value
            )));
        }
        if o.note.trim().is_empty() {
            return Err(Error::Override("every override needs a note".into()));
        }
        audit.push(AuditEntry {
            test: table.test_names()[t].clone(),
            reference: table.reference_names()[r].clone(),
            previous: cells[t * rc + r],
            value: o.value,
            note: o.note.clone(),
        });
        cells[t * rc + r] = o.value;
    }
    let rel = LegendRelation::new(
        table.test_names().to_vec(),
        table.reference_names().to_vec(),
        cells,
    )?;
    Ok((rel, audit))
}

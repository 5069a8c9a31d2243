use std::io::{Read, Write};

use rayon::prelude::*;

use super::{read_matrix_csv, write_matrix_csv};
use crate::error::{Error, Result};
use crate::naming::{CategoricalMap, NODATA};
use crate::segment::check_dims;

/// Co-occurrence counts of test classes (rows) against reference classes
/// (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    test: Vec<String>,
    reference: Vec<String>,
    test_labels: Vec<u16>,
    reference_labels: Vec<u16>,
    counts: Vec<u64>,
}

impl ContingencyTable {
    /// Row-major counts with dictionary names; labels default to `1..`.
    pub fn from_counts(
        test: Vec<String>,
        reference: Vec<String>,
        counts: Vec<u64>,
    ) -> Result<Self> {
        if test.is_empty() || reference.is_empty() {
            return Err(Error::Mapping(
                "a contingency table needs non-empty dictionaries".into(),
            ));
        }
        if counts.len() != test.len() * reference.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for a {}x{} table",
                counts.len(),
                test.len(),
                reference.len()
            )));
        }
        Ok(ContingencyTable {
            test_labels: (1..=test.len() as u16).collect(),
            reference_labels: (1..=reference.len() as u16).collect(),
            test,
            reference,
            counts,
        })
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

    /// Map labels of the rows, in row order.
    pub fn test_labels(&self) -> &[u16] {
        &self.test_labels
    }

    pub fn reference_labels(&self) -> &[u16] {
        &self.reference_labels
    }

    #[inline]
    pub fn count(&self, t: usize, r: usize) -> u64 {
        self.counts[t * self.rc() + r]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_total(&self, t: usize) -> u64 {
        (0..self.rc()).map(|r| self.count(t, r)).sum()
    }

    pub fn col_total(&self, r: usize) -> u64 {
        (0..self.tc()).map(|t| self.count(t, r)).sum()
    }

    /// Swaps the roles of test and reference.
    pub fn transpose(&self) -> Self {
        let (tc, rc) = (self.tc(), self.rc());
        let counts = (0..rc)
            .flat_map(|r| (0..tc).map(move |t| (t, r)))
            .map(|(t, r)| self.count(t, r))
            .collect();
        ContingencyTable {
            test: self.reference.clone(),
            reference: self.test.clone(),
            test_labels: self.reference_labels.clone(),
            reference_labels: self.test_labels.clone(),
            counts,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(
            &self.test,
            &self.reference,
            |t, r| self.count(t, r).to_string(),
            out,
        )
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let (test, reference, values) = read_matrix_csv(input)?;
        let counts = values
            .iter()
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    Error::Format(format!("count `{v}` is not a non-negative integer"))
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        Self::from_counts(test, reference, counts)
    }
}

/// Tallies pixel pairs where both maps are valid. Rows and columns follow
/// the legends of `test` and `reference`.
pub fn build_contingency(
    test: &CategoricalMap,
    reference: &CategoricalMap,
) -> Result<ContingencyTable> {
    check_dims(
        "reference map",
        (test.width(), test.height()),
        (reference.width(), reference.height()),
    )?;
    let (tc, rc) = (test.cardinality(), reference.cardinality());
    let w = test.width();
    let position = |map: &CategoricalMap| -> Vec<usize> {
        let max = map.legend().last().map_or(0, |e| e.label as usize);
        let mut lut = vec![usize::MAX; max + 1];
        for (i, e) in map.legend().iter().enumerate() {
            lut[e.label as usize] = i;
        }
        lut
    };
    let (tp, rp) = (position(test), position(reference));
    let counts = test
        .labels()
        .par_chunks(w)
        .zip(reference.labels().par_chunks(w))
        .fold(
            || vec![0u64; tc * rc],
            |mut acc, (a, b)| {
                for (&t, &r) in a.iter().zip(b) {
                    if t != NODATA && r != NODATA {
                        acc[tp[t as usize] * rc + rp[r as usize]] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; tc * rc],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyOverlap);
    }
    Ok(ContingencyTable {
        test: test.legend().iter().map(|e| e.name.clone()).collect(),
        reference: reference.legend().iter().map(|e| e.name.clone()).collect(),
        test_labels: test.legend().iter().map(|e| e.label).collect(),
        reference_labels: reference.legend().iter().map(|e| e.label).collect(),
        counts,
    })
}

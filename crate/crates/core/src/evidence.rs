//! Convergence of evidence: a color name restricts the admissible classes
//! through a [`LegendRelation`], and the surviving classes are scored by the
//! fuzzy AND (minimum) of caller-supplied shape, texture and spatial
//! memberships.
//!
//! ```
//! use huemap_core::compare::LegendRelation;
//! use huemap_core::evidence::{combine, EvidenceVector};
//!
//! let rel = LegendRelation::new(
//!     vec!["green".into()],
//!     vec!["forest".into(), "water".into()],
//!     vec![1, 0],
//! )
//! .unwrap();
//! let ev = EvidenceVector::new("green", vec![0.6, 1.0], vec![0.9, 1.0], vec![0.7, 1.0]).unwrap();
//! let scores = combine(&ev, &rel).unwrap();
//! assert_eq!(scores.scores(), &[0.6, 0.0]);
//! ```

use std::collections::BTreeMap;
use std::io::Read;

use crate::compare::LegendRelation;
use crate::error::{Error, Result};

/// Memberships of one object, indexed like the relation's reference
/// dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector {
    pub color_name: String,
    pub shape: Vec<f64>,
    pub texture: Vec<f64>,
    pub spatial: Vec<f64>,
}

fn check_membership(what: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!(
            "{what} membership {v} is outside [0, 1]"
        )));
    }
    Ok(())
}

impl EvidenceVector {
    pub fn new(
        color_name: &str,
        shape: Vec<f64>,
        texture: Vec<f64>,
        spatial: Vec<f64>,
    ) -> Result<Self> {
        if shape.len() != texture.len() || shape.len() != spatial.len() {
            return Err(Error::DimensionMismatch(
                "shape, texture and spatial memberships differ in length".into(),
            ));
        }
        for (what, vs) in [
            ("shape", &shape),
            ("texture", &texture),
            ("spatial", &spatial),
        ] {
            for &v in vs.iter() {
                check_membership(what, v)?;
            }
        }
        Ok(EvidenceVector {
            color_name: color_name.to_string(),
            shape,
            texture,
            spatial,
        })
    }
}

/// Unnormalized per-class scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    classes: Vec<String>,
    scores: Vec<f64>,
}

impl ClassScores {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, class: &str) -> Option<f64> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| self.scores[i])
    }

    /// Highest-scoring class; ties go to the earlier class.
    pub fn best(&self) -> Option<(&str, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &s) in self.scores.iter().enumerate() {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        best.map(|(i, s)| (self.classes[i].as_str(), s))
    }
}

/// `score(c) = min(CE[color, c], shape(c), texture(c), spatial(c))`.
pub fn combine(ev: &EvidenceVector, rel: &LegendRelation) -> Result<ClassScores> {
    let t = rel
        .test_index(&ev.color_name)
        .ok_or_else(|| Error::Mapping(format!("unknown color name `{}`", ev.color_name)))?;
    if ev.shape.len() != rel.rc() {
        return Err(Error::DimensionMismatch(format!(
            "{} memberships for {} classes",
            ev.shape.len(),
            rel.rc()
        )));
    }
    let scores = (0..rel.rc())
        .map(|c| {
            f64::from(rel.get(t, c))
                .min(ev.shape[c])
                .min(ev.texture[c])
                .min(ev.spatial[c])
        })
        .collect();
    Ok(ClassScores {
        classes: rel.reference_names().to_vec(),
        scores,
    })
}

/// Reads long-format rows `object_id,color_name,class,shape,texture,spatial`
/// into one vector per object, in order of first appearance. Every object
/// must list every class of `rel` exactly once.
pub fn read_evidence_csv<R: Read>(
    input: R,
    rel: &LegendRelation,
) -> Result<Vec<(String, EvidenceVector)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let rc = rel.rc();
    let mut order: Vec<String> = Vec::new();
    type Pending = (String, Vec<Option<[f64; 3]>>);
    let mut objects: BTreeMap<String, Pending> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 6 {
            return Err(Error::Format(format!(
                "evidence line {line}: expected 6 fields"
            )));
        }
        let class = rel.reference_index(&rec[2]).ok_or_else(|| {
            Error::Mapping(format!("evidence line {line}: unknown class `{}`", &rec[2]))
        })?;
        let mut m = [0.0; 3];
        for (k, slot) in m.iter_mut().enumerate() {
            *slot = rec[3 + k].parse().map_err(|_| {
                Error::Format(format!(
                    "evidence line {line}: `{}` is not a number",
                    &rec[3 + k]
                ))
            })?;
            check_membership(["shape", "texture", "spatial"][k], *slot)?;
        }
        let id = rec[0].to_string();
        let entry = objects.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            (rec[1].to_string(), vec![None; rc])
        });
        if entry.0 != rec[1] {
            return Err(Error::Format(format!(
                "evidence line {line}: object `{id}` changes color name"
            )));
        }
        if entry.1[class].replace(m).is_some() {
            return Err(Error::Format(format!(
                "evidence line {line}: object `{id}` lists class `{}` twice",
                &rec[2]
            )));
        }
    }
    order
        .into_iter()
        .map(|id| {
            let (color, cells) = objects.remove(&id).expect("recorded");
            let mut shape = Vec::with_capacity(rc);
            let mut texture = Vec::with_capacity(rc);
            let mut spatial = Vec::with_capacity(rc);
            for (c, cell) in cells.into_iter().enumerate() {
                let [s, t, p] = cell.ok_or_else(|| {
                    Error::Format(format!(
                        "object `{id}` lacks class `{}`",
                        rel.reference_names()[c]
                    ))
                })?;
                shape.push(s);
                texture.push(t);
                spatial.push(p);
            }
            Ok((id, EvidenceVector::new(&color, shape, texture, spatial)?))
        })
        .collect()
}

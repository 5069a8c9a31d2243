use std::collections::BTreeMap;
use std::io::Read;

use super::{CategoricalMap, LegendEntry, NODATA};
use crate::error::{Error, Result};

/// Total child-to-parent label function between two legends.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendAggregation {
    mapping: BTreeMap<u16, u16>,
    parent_legend: Vec<LegendEntry>,
}

impl LegendAggregation {
    /// Checks totality over `child_labels` and that every parent label is in
    /// `parent_legend`.
    pub fn new(
        child_labels: impl IntoIterator<Item = u16>,
        mapping: BTreeMap<u16, u16>,
        mut parent_legend: Vec<LegendEntry>,
    ) -> Result<Self> {
        parent_legend.sort_by_key(|e| e.label);
        let children: Vec<u16> = child_labels.into_iter().collect();
        for c in &children {
            if !mapping.contains_key(c) {
                return Err(Error::Mapping(format!("child label {c} has no parent")));
            }
        }
        for (c, p) in &mapping {
            if *c == NODATA || *p == NODATA {
                return Err(Error::Mapping("label 0 is reserved for nodata".into()));
            }
            if parent_legend.binary_search_by_key(p, |e| e.label).is_err() {
                return Err(Error::Mapping(format!(
                    "parent label {p} (of child {c}) is not in the parent legend"
                )));
            }
        }
        if parent_legend.len() > mapping.len().max(children.len()) {
            return Err(Error::Mapping(format!(
                "parent legend ({}) is larger than the child legend ({})",
                parent_legend.len(),
                mapping.len()
            )));
        }
        Ok(LegendAggregation {
            mapping,
            parent_legend,
        })
    }

    pub fn identity(legend: &[LegendEntry]) -> Self {
        LegendAggregation {
            mapping: legend.iter().map(|e| (e.label, e.label)).collect(),
            parent_legend: legend.to_vec(),
        }
    }

    /// Reads CSV rows `child_label,parent_label[,parent_name]`. Parents
    /// without a name are called `class N`.
    pub fn from_csv<R: Read>(reader: R, child_legend: &[LegendEntry]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut mapping = BTreeMap::new();
        let mut names: BTreeMap<u16, String> = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<u16> {
                rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| {
                    Error::Mapping(format!("row {}: column {} must be a label", i + 2, k + 1))
                })
            };
            let (c, p) = (field(0)?, field(1)?);
            if mapping.insert(c, p).is_some() {
                return Err(Error::Mapping(format!(
                    "row {}: child label {c} mapped twice",
                    i + 2
                )));
            }
            if let Some(n) = rec.get(2).filter(|n| !n.is_empty()) {
                if let Some(prev) = names.insert(p, n.to_string()) {
                    if prev != n {
                        return Err(Error::Mapping(format!(
                            "parent {p} named both `{prev}` and `{n}`"
                        )));
                    }
                }
            }
        }
        let parents: std::collections::BTreeSet<u16> = mapping.values().copied().collect();
        let legend = parents
            .into_iter()
            .map(|p| {
                let name = names
                    .get(&p)
                    .cloned()
                    .unwrap_or_else(|| format!("class {p}"));
                LegendEntry::new(p, &name, [0, 0, 0])
            })
            .collect();
        Self::new(child_legend.iter().map(|e| e.label), mapping, legend)
    }

    pub fn parent(&self, child: u16) -> Option<u16> {
        self.mapping.get(&child).copied()
    }

    pub fn parent_legend(&self) -> &[LegendEntry] {
        &self.parent_legend
    }

    /// `then ∘ self`: maps a child through `self`, then through `then`.
    pub fn compose(&self, then: &LegendAggregation) -> Result<Self> {
        let mut mapping = BTreeMap::new();
        for (&c, &p) in &self.mapping {
            let g = then
                .parent(p)
                .ok_or_else(|| Error::Mapping(format!("intermediate label {p} has no parent")))?;
            mapping.insert(c, g);
        }
        let children: Vec<u16> = self.mapping.keys().copied().collect();
        Self::new(children, mapping, then.parent_legend.clone())
    }
}

/// Relabels every pixel through `agg`; nodata stays nodata.
pub fn aggregate(map: &CategoricalMap, agg: &LegendAggregation) -> Result<CategoricalMap> {
    for e in map.legend() {
        if agg.parent(e.label).is_none() {
            return Err(Error::Mapping(format!(
                "legend label {} (`{}`) is outside the aggregation domain",
                e.label, e.name
            )));
        }
    }
    let labels = map
        .labels()
        .iter()
        .map(|&l| if l == NODATA { NODATA } else { agg.mapping[&l] })
        .collect();
    CategoricalMap::new(map.width(), map.height(), labels, agg.parent_legend.clone())
}

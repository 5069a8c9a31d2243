use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use crate::error::{Error, Result};
use crate::naming::{aggregate, CategoricalMap, LegendAggregation, LegendEntry};

/// A child legend with one or more admissible parent classes per code.
/// Parent labels are numbered `1..` in sorted order of parent names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendCrosswalk {
    children: BTreeMap<u16, (String, Vec<String>)>,
    parents: Vec<String>,
}

const NLCD_LCCS_DP: &str = include_str!("../../data/nlcd_lccs_dp.csv");

impl LegendCrosswalk {
    /// Reads CSV rows `code,abbreviation,name,parents` where `parents` lists
    /// admissible parent names separated by `|`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut children = BTreeMap::new();
        let mut parents = BTreeSet::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != 4 {
                return Err(Error::Mapping(format!(
                    "crosswalk line {line}: expected 4 fields"
                )));
            }
            let code: u16 = rec[0].parse().map_err(|_| {
                Error::Mapping(format!("crosswalk line {line}: bad code `{}`", &rec[0]))
            })?;
            let options: Vec<String> = rec[3]
                .split('|')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .collect();
            if code == 0 || options.is_empty() {
                return Err(Error::Mapping(format!(
                    "crosswalk line {line}: code {code} needs a parent"
                )));
            }
            parents.extend(options.iter().cloned());
            if children
                .insert(code, (rec[2].to_string(), options))
                .is_some()
            {
                return Err(Error::Mapping(format!(
                    "crosswalk line {line}: code {code} listed twice"
                )));
            }
        }
        Ok(LegendCrosswalk {
            children,
            parents: parents.into_iter().collect(),
        })
    }

    /// The shipped land cover legend to dichotomous phase crosswalk.
    pub fn nlcd_lccs_dp() -> Self {
        Self::from_csv(NLCD_LCCS_DP.as_bytes()).expect("shipped crosswalk parses")
    }

    pub fn child_legend(&self) -> Vec<LegendEntry> {
        self.children
            .iter()
            .map(|(&code, (name, _))| LegendEntry::new(code, name, [0, 0, 0]))
            .collect()
    }

    pub fn options(&self, code: u16) -> Option<&[String]> {
        self.children.get(&code).map(|(_, p)| p.as_slice())
    }

    pub fn is_ambiguous(&self, code: u16) -> bool {
        self.options(code).is_some_and(|p| p.len() > 1)
    }

    pub fn parent_label(&self, name: &str) -> Option<u16> {
        self.parents
            .iter()
            .position(|p| p == name)
            .map(|i| i as u16 + 1)
    }

    pub fn parent_legend(&self) -> Vec<LegendEntry> {
        self.parents
            .iter()
            .enumerate()
            .map(|(i, p)| LegendEntry::new(i as u16 + 1, p, [0, 0, 0]))
            .collect()
    }

    /// Reads CSV rows `code,parent` choosing one parent per code.
    pub fn read_resolution<R: Read>(input: R) -> Result<BTreeMap<u16, String>> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut out = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let (Some(code), Some(parent)) = (rec.get(0), rec.get(1)) else {
                return Err(Error::Mapping(format!(
                    "resolution line {line}: expected code,parent"
                )));
            };
            let code: u16 = code.parse().map_err(|_| {
                Error::Mapping(format!("resolution line {line}: bad code `{code}`"))
            })?;
            if out.insert(code, parent.to_string()).is_some() {
                return Err(Error::Mapping(format!(
                    "resolution line {line}: code {code} resolved twice"
                )));
            }
        }
        Ok(out)
    }

    /// Builds the child-to-parent function over `codes`. Ambiguous codes
    /// must be settled by `resolution`, which may only pick admissible
    /// parents.
    pub fn aggregation(
        &self,
        codes: impl IntoIterator<Item = u16>,
        resolution: Option<&BTreeMap<u16, String>>,
    ) -> Result<LegendAggregation> {
        let mut mapping = BTreeMap::new();
        let mut unresolved = Vec::new();
        for code in codes {
            let options = self
                .options(code)
                .ok_or_else(|| Error::Mapping(format!("code {code} is not in the crosswalk")))?;
            let chosen = match resolution.and_then(|r| r.get(&code)) {
                Some(p) if options.contains(p) => p,
                Some(p) => {
                    return Err(Error::Mapping(format!(
                        "code {code} cannot resolve to `{p}`; admissible: {}",
                        options.join(", ")
                    )))
                }
                None if options.len() == 1 => &options[0],
                None => {
                    unresolved.push(code.to_string());
                    continue;
                }
            };
            mapping.insert(
                code,
                self.parent_label(chosen).expect("options are parents"),
            );
        }
        if !unresolved.is_empty() {
            return Err(Error::Mapping(format!(
                "ambiguous codes need a resolution file: {}",
                unresolved.join(", ")
            )));
        }
        let used: BTreeSet<u16> = mapping.values().copied().collect();
        let legend = self
            .parent_legend()
            .into_iter()
            .filter(|e| used.contains(&e.label))
            .collect();
        let children: Vec<u16> = mapping.keys().copied().collect();
        LegendAggregation::new(children, mapping, legend)
    }
}

/// Relabels `map` (whose labels are crosswalk codes) into the parent legend.
pub fn translate_legend(
    map: &CategoricalMap,
    crosswalk: &LegendCrosswalk,
    resolution: Option<&BTreeMap<u16, String>>,
) -> Result<CategoricalMap> {
    let agg = crosswalk.aggregation(map.legend().iter().map(|e| e.label), resolution)?;
    aggregate(map, &agg)
}

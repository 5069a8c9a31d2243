//! Color naming: categorical maps, rule-based per-pixel classification and
//! parent-child legend aggregation.

mod aggregate;
mod classify;

pub use aggregate::{aggregate, LegendAggregation};
pub use classify::{
    bind_bands, classify, classify_streamed, classify_strip, classify_with_stats, BandBinding,
    ClassifyStats, BAND_MATCH_TOLERANCE,
};

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{read_header, read_payload, write_raster_files, Header};

/// Label value reserved for pixels without a class.
pub const NODATA: u16 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegendEntry {
    pub label: u16,
    pub name: String,
    pub color: [u8; 3],
}

impl LegendEntry {
    pub fn new(label: u16, name: &str, color: [u8; 3]) -> Self {
        LegendEntry {
            label,
            name: name.to_string(),
            color,
        }
    }
}

/// Per-pixel class labels plus the legend they are drawn from. Label
/// [`NODATA`] marks invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalMap {
    width: usize,
    height: usize,
    labels: Vec<u16>,
    legend: Vec<LegendEntry>,
}

impl CategoricalMap {
    pub fn new(
        width: usize,
        height: usize,
        labels: Vec<u16>,
        mut legend: Vec<LegendEntry>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "map must be non-empty, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        legend.sort_by_key(|e| e.label);
        let mut known = BTreeSet::new();
        for e in &legend {
            if e.label == NODATA {
                return Err(Error::Mapping(
                    "legend label 0 is reserved for nodata".into(),
                ));
            }
            if !known.insert(e.label) {
                return Err(Error::Mapping(format!(
                    "legend label {} appears twice",
                    e.label
                )));
            }
        }
        if let Some(p) = labels
            .iter()
            .position(|l| *l != NODATA && !known.contains(l))
        {
            return Err(Error::Mapping(format!(
                "label {} at row {}, column {} is not in the legend",
                labels[p],
                p / width,
                p % width
            )));
        }
        Ok(CategoricalMap {
            width,
            height,
            labels,
            legend,
        })
    }

    /// Legend entries named `class N` for every label that occurs.
    pub fn with_generic_legend(width: usize, height: usize, labels: Vec<u16>) -> Result<Self> {
        let used: BTreeSet<u16> = labels.iter().copied().filter(|&l| l != NODATA).collect();
        let legend = used
            .into_iter()
            .map(|l| LegendEntry::new(l, &format!("class {l}"), [0, 0, 0]))
            .collect();
        Self::new(width, height, labels, legend)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.width + col]
    }

    /// Sorted by label.
    pub fn legend(&self) -> &[LegendEntry] {
        &self.legend
    }

    /// Number of legend classes (the color dictionary cardinality).
    pub fn cardinality(&self) -> usize {
        self.legend.len()
    }

    pub fn legend_position(&self, label: u16) -> Option<usize> {
        self.legend.binary_search_by_key(&label, |e| e.label).ok()
    }

    pub fn valid_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != NODATA).count()
    }

    pub fn write(&self, header_path: impl AsRef<Path>) -> Result<()> {
        let mut h = Header::new();
        h.set("width", self.width);
        h.set("height", self.height);
        h.set("bands", 1);
        h.set("dtype", "u16");
        h.set("interleave", "bsq");
        h.set("nodata", NODATA);
        h.set("classes", self.legend.len());
        for e in &self.legend {
            h.set(format!("legend.{}.name", e.label), &e.name);
            let [r, g, b] = e.color;
            h.set(
                format!("legend.{}.color", e.label),
                format!("#{r:02X}{g:02X}{b:02X}"),
            );
        }
        let payload: Vec<u8> = self.labels.iter().flat_map(|l| l.to_le_bytes()).collect();
        write_raster_files(header_path.as_ref(), &h, &payload)
    }

    pub fn read(header_path: impl AsRef<Path>) -> Result<Self> {
        let header_path = header_path.as_ref();
        let h = read_header(header_path)?;
        let width: usize = h.required("width")?;
        let height: usize = h.required("height")?;
        if h.require("dtype")? != "u16" {
            return Err(Error::Format("categorical maps are stored as u16".into()));
        }
        if h.parsed::<usize>("bands")?.unwrap_or(1) != 1 {
            return Err(Error::Format(
                "categorical maps have exactly one band".into(),
            ));
        }
        let mut legend = Vec::new();
        for (k, v) in h.entries() {
            let Some(rest) = k.strip_prefix("legend.") else {
                continue;
            };
            let Some(label) = rest.strip_suffix(".name") else {
                continue;
            };
            let label: u16 = label
                .parse()
                .map_err(|_| Error::Format(format!("bad legend key `{k}`")))?;
            let color = match h.get(&format!("legend.{label}.color")) {
                Some(c) => parse_color(c)?,
                None => [0, 0, 0],
            };
            legend.push(LegendEntry::new(label, v, color));
        }
        if let Some(k) = h.parsed::<usize>("classes")? {
            if k != legend.len() {
                return Err(Error::Format(format!(
                    "header declares {k} classes, legend has {}",
                    legend.len()
                )));
            }
        }
        let payload = read_payload(header_path, (width * height * 2) as u64)?;
        let labels = payload
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        Self::new(width, height, labels, legend)
    }
}

pub(crate) fn parse_color(s: &str) -> Result<[u8; 3]> {
    let hex = s
        .strip_prefix('#')
        .filter(|h| h.len() == 6 && h.chars().all(|c| c.is_ascii_hexdigit()))
        .ok_or_else(|| Error::Format(format!("bad color `{s}`, expected #RRGGBB")))?;
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).expect("validated hex");
    Ok([byte(0), byte(2), byte(4)])
}

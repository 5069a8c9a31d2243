//! Parameter-free superpixel detection on categorical maps: two-pass
//! connected-component labeling, cross-aura contour maps, superpixel
//! description tables, piecewise-constant reconstruction and per-pixel RMSE.

mod aura;
mod ccl;
mod stream;
mod table;
mod unionfind;

pub use aura::{cross_aura, cross_aura_with_stats, AuraStats, CrossAuraMap};
pub use ccl::{
    connected_components, connected_components_strips, connected_components_with_stats, CclStats,
};
pub use stream::{
    classify_and_segment_streamed, reconstruct_streamed, segment_streamed, StreamOptions,
    StreamedSegmentation,
};
pub use table::{
    build_superpixel_table, reconstruct, rmse_map, write_superpixel_csv, RmseMap, RmseStats,
    SuperpixelRecord,
};
pub use unionfind::DisjointSet;

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{read_header, read_payload, write_raster_files, Header};

/// Pixel neighborhood used for connectivity and contours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjacency {
    Four,
    #[default]
    Eight,
}

impl Adjacency {
    /// `(dr, dc)` offsets of neighbors scanned before the current pixel in
    /// row-major order.
    pub(crate) fn backward(self) -> &'static [(isize, isize)] {
        match self {
            Adjacency::Four => &[(0, -1), (-1, 0)],
            Adjacency::Eight => &[(0, -1), (-1, -1), (-1, 0), (-1, 1)],
        }
    }

    pub(crate) fn all(self) -> &'static [(isize, isize)] {
        match self {
            Adjacency::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Adjacency::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }

    pub fn count(self) -> usize {
        match self {
            Adjacency::Four => 4,
            Adjacency::Eight => 8,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Adjacency::Four),
            "8" => Ok(Adjacency::Eight),
            other => Err(Error::Config(format!(
                "adjacency must be 4 or 8, got `{other}`"
            ))),
        }
    }
}

/// Per-pixel segment ids. Id 0 marks nodata; ids `1..=segment_count` are
/// dense and assigned in row-major order of each segment's first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMap {
    width: usize,
    height: usize,
    ids: Vec<u32>,
    segment_count: u32,
}

impl SegmentationMap {
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        ids: Vec<u32>,
        segment_count: u32,
    ) -> Self {
        debug_assert_eq!(ids.len(), width * height);
        SegmentationMap {
            width,
            height,
            ids,
            segment_count,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    #[inline]
    pub fn id(&self, row: usize, col: usize) -> u32 {
        self.ids[row * self.width + col]
    }

    pub fn segment_count(&self) -> u32 {
        self.segment_count
    }

    pub fn write(&self, header_path: impl AsRef<Path>, adjacency: Adjacency) -> Result<()> {
        let mut h = Header::new();
        h.set("width", self.width);
        h.set("height", self.height);
        h.set("bands", 1);
        h.set("dtype", "u32");
        h.set("interleave", "bsq");
        h.set("nodata", 0);
        h.set("segments", self.segment_count);
        h.set("adjacency", adjacency.count());
        let payload: Vec<u8> = self.ids.iter().flat_map(|v| v.to_le_bytes()).collect();
        write_raster_files(header_path.as_ref(), &h, &payload)
    }

    pub fn read(header_path: impl AsRef<Path>) -> Result<Self> {
        let header_path = header_path.as_ref();
        let h = read_header(header_path)?;
        let width: usize = h.required("width")?;
        let height: usize = h.required("height")?;
        if h.require("dtype")? != "u32" {
            return Err(Error::Format("segmentation maps are stored as u32".into()));
        }
        let count: u32 = h.required("segments")?;
        let payload = read_payload(header_path, (width * height * 4) as u64)?;
        let ids: Vec<u32> = payload
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if ids.iter().any(|&i| i > count) {
            return Err(Error::Format(format!(
                "segment id exceeds declared count {count}"
            )));
        }
        Ok(Self::from_parts(width, height, ids, count))
    }
}

pub(crate) fn check_dims(what: &str, a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

use std::path::Path;

use rayon::prelude::*;

use super::Adjacency;
use crate::error::Result;
use crate::naming::{CategoricalMap, NODATA};
use crate::raster::{write_raster_files, Header};

/// Per-pixel count of neighbors carrying a different label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossAuraMap {
    width: usize,
    height: usize,
    counts: Vec<u8>,
    adjacency: Adjacency,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuraStats {
    /// In-image neighbor comparisons performed.
    pub neighbor_visits: usize,
}

impl CrossAuraMap {
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        counts: Vec<u8>,
        adjacency: Adjacency,
    ) -> Self {
        CrossAuraMap {
            width,
            height,
            counts,
            adjacency,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> u8 {
        self.counts[row * self.width + col]
    }

    pub fn adjacency(&self) -> Adjacency {
        self.adjacency
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn write(&self, header_path: impl AsRef<Path>) -> Result<()> {
        let mut h = Header::new();
        h.set("width", self.width);
        h.set("height", self.height);
        h.set("bands", 1);
        h.set("dtype", "u8");
        h.set("interleave", "bsq");
        h.set("adjacency", self.adjacency.count());
        write_raster_files(header_path.as_ref(), &h, &self.counts)
    }
}

/// Aura values for one row given its vertical neighbors (absent at the
/// image border). Nodata pixels score 0 and never count as different.
/// Returns the number of neighbor comparisons.
pub(crate) fn aura_row(
    above: Option<&[u16]>,
    row: &[u16],
    below: Option<&[u16]>,
    adjacency: Adjacency,
    out: &mut [u8],
) -> usize {
    let w = row.len();
    let mut visits = 0;
    for c in 0..w {
        let l = row[c];
        let mut n = 0u8;
        for &(dr, dc) in adjacency.all() {
            let line = match dr {
                -1 => above,
                1 => below,
                _ => Some(row),
            };
            let Some(line) = line else { continue };
            let nc = c as isize + dc;
            if nc < 0 || nc >= w as isize {
                continue;
            }
            visits += 1;
            let m = line[nc as usize];
            if l != NODATA && m != NODATA && m != l {
                n += 1;
            }
        }
        out[c] = n;
    }
    visits
}

pub fn cross_aura(map: &CategoricalMap, adjacency: Adjacency) -> CrossAuraMap {
    cross_aura_with_stats(map, adjacency).0
}

pub fn cross_aura_with_stats(
    map: &CategoricalMap,
    adjacency: Adjacency,
) -> (CrossAuraMap, AuraStats) {
    let (w, h) = (map.width(), map.height());
    let labels = map.labels();
    let mut counts = vec![0u8; w * h];
    let visits = counts
        .par_chunks_mut(w)
        .enumerate()
        .map(|(r, out)| {
            let above = (r > 0).then(|| &labels[(r - 1) * w..r * w]);
            let below = (r + 1 < h).then(|| &labels[(r + 1) * w..(r + 2) * w]);
            aura_row(above, &labels[r * w..(r + 1) * w], below, adjacency, out)
        })
        .sum();
    (
        CrossAuraMap::from_parts(w, h, counts, adjacency),
        AuraStats {
            neighbor_visits: visits,
        },
    )
}

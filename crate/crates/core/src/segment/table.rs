use std::io::Write;
use std::path::Path;

use super::{check_dims, CrossAuraMap, SegmentationMap};
use crate::error::{Error, Result};
use crate::naming::CategoricalMap;
use crate::raster::{write_raster_files, BandMetadata, Header, MultiSpectralImage};

/// One row of the superpixel description table.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelRecord {
    pub segment_id: u32,
    /// Class label shared by every member pixel.
    pub label: u16,
    pub pixel_count: u64,
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
    /// Per-band sums of member samples.
    pub sums: Vec<f64>,
    /// Sum of cross-aura values over member pixels.
    pub perimeter: u64,
    pub compactness: f64,
}

impl SuperpixelRecord {
    pub fn mean(&self, band: usize) -> f64 {
        self.sums[band] / self.pixel_count as f64
    }
}

/// Isoperimetric quotient `4πA/P²`, capped at 1; a segment without contour
/// scores 1.
pub(crate) fn compactness(area: u64, perimeter: u64) -> f64 {
    if perimeter == 0 {
        1.0
    } else {
        (4.0 * std::f64::consts::PI * area as f64 / (perimeter as f64).powi(2)).min(1.0)
    }
}

/// Builds records incrementally from pixels visited in row-major order.
#[derive(Debug)]
pub(crate) struct TableAccumulator {
    bands: usize,
    records: Vec<SuperpixelRecord>,
}

impl TableAccumulator {
    pub(crate) fn new(bands: usize) -> Self {
        TableAccumulator {
            bands,
            records: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn add(
        &mut self,
        id: u32,
        label: u16,
        row: usize,
        col: usize,
        aura: u8,
        samples: impl Iterator<Item = f32>,
    ) -> Result<()> {
        let idx = id as usize - 1;
        if idx == self.records.len() {
            self.records.push(SuperpixelRecord {
                segment_id: id,
                label,
                pixel_count: 0,
                min_row: row,
                min_col: col,
                max_row: row,
                max_col: col,
                sums: vec![0.0; self.bands],
                perimeter: 0,
                compactness: 1.0,
            });
        } else if idx > self.records.len() {
            return Err(Error::Data {
                row,
                col,
                msg: format!(
                    "segment id {id} appears before id {}",
                    self.records.len() + 1
                ),
            });
        }
        let r = &mut self.records[idx];
        if r.label != label {
            return Err(Error::Data {
                row,
                col,
                msg: format!("segment {id} spans labels {} and {label}", r.label),
            });
        }
        r.pixel_count += 1;
        r.min_row = r.min_row.min(row);
        r.min_col = r.min_col.min(col);
        r.max_row = r.max_row.max(row);
        r.max_col = r.max_col.max(col);
        r.perimeter += u64::from(aura);
        for (s, v) in r.sums.iter_mut().zip(samples) {
            *s += f64::from(v);
        }
        Ok(())
    }

    pub(crate) fn finish(mut self, segment_count: u32) -> Result<Vec<SuperpixelRecord>> {
        if self.records.len() != segment_count as usize {
            return Err(Error::Format(format!(
                "segmentation declares {segment_count} segments but {} occur",
                self.records.len()
            )));
        }
        for r in &mut self.records {
            r.compactness = compactness(r.pixel_count, r.perimeter);
        }
        Ok(self.records)
    }
}

pub fn build_superpixel_table(
    map: &CategoricalMap,
    seg: &SegmentationMap,
    image: &MultiSpectralImage,
    aura: &CrossAuraMap,
) -> Result<Vec<SuperpixelRecord>> {
    let dims = (map.width(), map.height());
    check_dims("segmentation", dims, (seg.width(), seg.height()))?;
    check_dims("image", dims, (image.width(), image.height()))?;
    check_dims("cross-aura map", dims, (aura.width(), aura.height()))?;
    let w = dims.0;
    let mut acc = TableAccumulator::new(image.band_count());
    for (p, &id) in seg.ids().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let samples = (0..image.band_count()).map(|b| image.band(b)[p]);
        acc.add(id, map.labels()[p], p / w, p % w, aura.counts()[p], samples)?;
    }
    acc.finish(seg.segment_count())
}

/// Writes the table as CSV with one `sum_b<id>` column per band.
pub fn write_superpixel_csv<W: Write>(
    records: &[SuperpixelRecord],
    bands: &[BandMetadata],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "segment_id",
        "label",
        "pixel_count",
        "min_row",
        "min_col",
        "max_row",
        "max_col",
        "perimeter",
        "compactness",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(bands.iter().map(|b| format!("sum_b{}", b.band_id)));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.segment_id.to_string(),
            r.label.to_string(),
            r.pixel_count.to_string(),
            r.min_row.to_string(),
            r.min_col.to_string(),
            r.max_row.to_string(),
            r.max_col.to_string(),
            r.perimeter.to_string(),
            r.compactness.to_string(),
        ];
        row.extend(r.sums.iter().map(|s| s.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("superpixel table", e))?;
    Ok(())
}

/// Superpixelwise-constant approximation: every member pixel takes its
/// segment's band means. Pixels outside any segment stay invalid.
pub fn reconstruct(
    seg: &SegmentationMap,
    table: &[SuperpixelRecord],
    image: &MultiSpectralImage,
) -> Result<MultiSpectralImage> {
    check_dims(
        "image",
        (seg.width(), seg.height()),
        (image.width(), image.height()),
    )?;
    if table.len() != seg.segment_count() as usize {
        return Err(Error::Format(format!(
            "table has {} records for {} segments",
            table.len(),
            seg.segment_count()
        )));
    }
    let plane = image.pixel_count();
    let nb = image.band_count();
    let means: Vec<f32> = table
        .iter()
        .flat_map(|r| (0..nb).map(move |b| r.mean(b) as f32))
        .collect();
    let mut samples = vec![0.0f32; plane * nb];
    let mut valid = vec![false; plane];
    for (p, &id) in seg.ids().iter().enumerate() {
        if id == 0 || !image.validity()[p] {
            continue;
        }
        valid[p] = true;
        let m = &means[(id as usize - 1) * nb..id as usize * nb];
        for b in 0..nb {
            samples[b * plane + p] = m[b];
        }
    }
    MultiSpectralImage::new(
        image.width(),
        image.height(),
        image.bands().to_vec(),
        samples,
        valid,
    )
}

/// Summary statistics over the valid pixels of an [`RmseMap`]. The standard
/// deviation is the population one.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RmseStats {
    pub pixels: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub stdev: f64,
}

impl RmseStats {
    pub(crate) fn from_values<'a>(values: impl Iterator<Item = &'a f64> + Clone) -> Self {
        let (mut n, mut sum, mut min, mut max) = (0u64, 0.0, f64::INFINITY, f64::NEG_INFINITY);
        for &v in values.clone() {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        if n == 0 {
            return RmseStats::default();
        }
        let mean = sum / n as f64;
        let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        RmseStats {
            pixels: n,
            min,
            max,
            mean,
            stdev: var.sqrt(),
        }
    }
}

/// Per-pixel root mean square difference across bands.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
    stats: RmseStats,
}

impl RmseMap {
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        values: Vec<f64>,
        valid: Vec<bool>,
    ) -> Self {
        let stats = RmseStats::from_values(
            values
                .iter()
                .zip(&valid)
                .filter(|(_, ok)| **ok)
                .map(|(v, _)| v),
        );
        RmseMap {
            width,
            height,
            values,
            valid,
            stats,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Zero where either input is invalid.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn stats(&self) -> RmseStats {
        self.stats
    }

    /// Writes an f32 raster with nodata `-1`.
    pub fn write(&self, header_path: impl AsRef<Path>) -> Result<()> {
        let mut h = Header::new();
        h.set("width", self.width);
        h.set("height", self.height);
        h.set("bands", 1);
        h.set("dtype", "f32");
        h.set("interleave", "bsq");
        h.set("nodata", -1);
        h.set("rmse.min", self.stats.min);
        h.set("rmse.max", self.stats.max);
        h.set("rmse.mean", self.stats.mean);
        h.set("rmse.stdev", self.stats.stdev);
        let payload: Vec<u8> = self
            .values
            .iter()
            .zip(&self.valid)
            .flat_map(|(&v, &ok)| (if ok { v as f32 } else { -1.0 }).to_le_bytes())
            .collect();
        write_raster_files(header_path.as_ref(), &h, &payload)
    }
}

/// RMSE of one pixel from per-band differences.
#[inline]
pub(crate) fn pixel_rmse(diffs: impl Iterator<Item = f64>, bands: usize) -> f64 {
    (diffs.map(|d| d * d).sum::<f64>() / bands as f64).sqrt()
}

pub fn rmse_map(
    original: &MultiSpectralImage,
    reconstruction: &MultiSpectralImage,
) -> Result<RmseMap> {
    check_dims(
        "reconstruction",
        (original.width(), original.height()),
        (reconstruction.width(), reconstruction.height()),
    )?;
    if original.band_count() != reconstruction.band_count() {
        return Err(Error::DimensionMismatch(format!(
            "band counts differ: {} vs {}",
            original.band_count(),
            reconstruction.band_count()
        )));
    }
    let nb = original.band_count();
    let plane = original.pixel_count();
    let mut values = vec![0.0; plane];
    let mut valid = vec![false; plane];
    for p in 0..plane {
        if original.validity()[p] && reconstruction.validity()[p] {
            valid[p] = true;
            let diffs = (0..nb)
                .map(|b| f64::from(original.band(b)[p]) - f64::from(reconstruction.band(b)[p]));
            values[p] = pixel_rmse(diffs, nb);
        }
    }
    Ok(RmseMap::from_parts(
        original.width(),
        original.height(),
        values,
        valid,
    ))
}

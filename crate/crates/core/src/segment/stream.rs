use super::aura::aura_row;
use super::ccl::{label_rows, resolve, union_seam};
use super::table::{pixel_rmse, TableAccumulator};
use super::{
    check_dims, Adjacency, CrossAuraMap, DisjointSet, RmseMap, SegmentationMap, SuperpixelRecord,
};
use crate::error::{Error, Result};
use crate::naming::{bind_bands, classify_strip, CategoricalMap, LegendEntry, NODATA};
use crate::raster::{
    stream_strips, MemoryMeter, MultiSpectralImage, Strip, StripSource, TrackedBuf,
};
use crate::rules::RuleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamOptions {
    pub strip_height: usize,
    pub ccl: Adjacency,
    pub aura: Adjacency,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            strip_height: 64,
            ccl: Adjacency::Eight,
            aura: Adjacency::Eight,
        }
    }
}

/// Everything produced by a streamed classify/segment run.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamedSegmentation {
    pub map: CategoricalMap,
    pub segmentation: SegmentationMap,
    pub aura: CrossAuraMap,
    pub table: Vec<SuperpixelRecord>,
}

/// Classifies, labels components, computes the cross-aura map and builds
/// the superpixel table while holding one strip of samples at a time.
pub fn classify_and_segment_streamed<S: StripSource + ?Sized>(
    source: &mut S,
    rules: &RuleSet,
    opts: StreamOptions,
    meter: Option<&MemoryMeter>,
) -> Result<StreamedSegmentation> {
    let binding = bind_bands(rules, source.bands())?;
    run(source, opts, meter, rules.legend(), |strip, out| {
        classify_strip(strip, &binding, rules, out)
    })
}

/// Segments an existing categorical map, streaming `source` for the band
/// sums of the superpixel table.
pub fn segment_streamed<S: StripSource + ?Sized>(
    map: &CategoricalMap,
    source: &mut S,
    opts: StreamOptions,
    meter: Option<&MemoryMeter>,
) -> Result<StreamedSegmentation> {
    check_dims(
        "image",
        (map.width(), map.height()),
        (source.width(), source.height()),
    )?;
    let w = map.width();
    run(source, opts, meter, map.legend().to_vec(), |strip, out| {
        let at = strip.core_start() * w;
        out.copy_from_slice(&map.labels()[at..at + out.len()]);
    })
}

fn run<S, F>(
    source: &mut S,
    opts: StreamOptions,
    meter: Option<&MemoryMeter>,
    legend: Vec<LegendEntry>,
    mut label: F,
) -> Result<StreamedSegmentation>
where
    S: StripSource + ?Sized,
    F: FnMut(&Strip, &mut [u16]),
{
    let (w, h, nb) = (source.width(), source.height(), source.bands().len());
    let mut labels = vec![NODATA; w * h];
    let mut ids = vec![0u32; w * h];
    let mut counts = vec![0u8; w * h];
    let mut uf = DisjointSet::new();

    {
        let mut stream = stream_strips(source, opts.strip_height, 0, meter)?;
        let mut buf = TrackedBuf::new(opts.strip_height.min(h) * w, NODATA, meter);
        while let Some(strip) = stream.next_strip()? {
            let (start, n) = (strip.core_start(), strip.core_rows());
            let span = start * w..(start + n) * w;
            label(strip, &mut buf[..n * w]);
            labels[span.clone()].copy_from_slice(&buf[..n * w]);

            let (done, rest) = ids.split_at_mut(start * w);
            let block = &mut rest[..n * w];
            label_rows(&labels[span.clone()], w, opts.ccl, &mut uf, block);
            if start > 0 {
                union_seam(
                    &labels[(start - 1) * w..start * w],
                    &done[(start - 1) * w..],
                    &labels[start * w..(start + 1) * w],
                    &block[..w],
                    opts.ccl,
                    &mut uf,
                );
            }

            let last = if start + n == h { h } else { start + n - 1 };
            for r in start.saturating_sub(1)..last {
                let above = (r > 0).then(|| &labels[(r - 1) * w..r * w]);
                let below = (r + 1 < h).then(|| &labels[(r + 1) * w..(r + 2) * w]);
                aura_row(
                    above,
                    &labels[r * w..(r + 1) * w],
                    below,
                    opts.aura,
                    &mut counts[r * w..(r + 1) * w],
                );
            }
        }
    }

    let mut root_final = Vec::new();
    let mut next = 0;
    let mut acc = TableAccumulator::new(nb);
    let mut stream = stream_strips(source, opts.strip_height, 0, meter)?;
    while let Some(strip) = stream.next_strip()? {
        let (start, n) = (strip.core_start(), strip.core_rows());
        let block = &mut ids[start * w..(start + n) * w];
        resolve(block, &mut uf, &mut root_final, &mut next);
        for r in 0..n {
            for c in 0..w {
                let p = (start + r) * w + c;
                let id = ids[p];
                if id != 0 {
                    let samples = (0..nb).map(|b| strip.sample(b, r, c));
                    acc.add(id, labels[p], start + r, c, counts[p], samples)?;
                }
            }
        }
    }
    let table = acc.finish(next)?;
    Ok(StreamedSegmentation {
        map: CategoricalMap::new(w, h, labels, legend)?,
        segmentation: SegmentationMap::from_parts(w, h, ids, next),
        aura: CrossAuraMap::from_parts(w, h, counts, opts.aura),
        table,
    })
}

/// Builds the superpixelwise-constant reconstruction and its RMSE map by
/// streaming the original image.
pub fn reconstruct_streamed<S: StripSource + ?Sized>(
    seg: &SegmentationMap,
    table: &[SuperpixelRecord],
    source: &mut S,
    strip_height: usize,
    meter: Option<&MemoryMeter>,
) -> Result<(MultiSpectralImage, RmseMap)> {
    let (w, h, nb) = (source.width(), source.height(), source.bands().len());
    check_dims("image", (seg.width(), seg.height()), (w, h))?;
    if table.len() != seg.segment_count() as usize {
        return Err(Error::Format(format!(
            "table has {} records for {} segments",
            table.len(),
            seg.segment_count()
        )));
    }
    let bands = source.bands().to_vec();
    let plane = w * h;
    let means: Vec<f32> = table
        .iter()
        .flat_map(|r| (0..nb).map(move |b| r.mean(b) as f32))
        .collect();
    let mut samples = vec![0.0f32; plane * nb];
    let mut valid = vec![false; plane];
    let mut rmse = vec![0.0f64; plane];
    let mut stream = stream_strips(source, strip_height, 0, meter)?;
    while let Some(strip) = stream.next_strip()? {
        let start = strip.core_start();
        for r in 0..strip.core_rows() {
            for c in 0..w {
                let p = (start + r) * w + c;
                let id = seg.ids()[p];
                if id == 0 || !strip.is_valid(r, c) {
                    continue;
                }
                valid[p] = true;
                let m = &means[(id as usize - 1) * nb..id as usize * nb];
                for b in 0..nb {
                    samples[b * plane + p] = m[b];
                }
                let diffs = (0..nb).map(|b| f64::from(strip.sample(b, r, c)) - f64::from(m[b]));
                rmse[p] = pixel_rmse(diffs, nb);
            }
        }
    }
    let image = MultiSpectralImage::new(w, h, bands, samples, valid.clone())?;
    Ok((image, RmseMap::from_parts(w, h, rmse, valid)))
}

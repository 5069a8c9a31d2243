use rayon::prelude::*;

use super::{CategoricalMap, NODATA};
use crate::error::{Error, Result};
use crate::raster::{
    stream_strips, BandMetadata, MemoryMeter, MultiSpectralImage, Strip, StripSource, TrackedBuf,
};
use crate::rules::{BandRef, RuleSet};

/// Largest wavelength difference (micrometers) at which a declared rule
/// band is matched to an image band.
pub const BAND_MATCH_TOLERANCE: f64 = 0.1;

/// Maps each declared rule band to an image band position, if present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandBinding {
    slots: Vec<Option<usize>>,
}

impl BandBinding {
    pub fn image_band(&self, b: BandRef) -> Option<usize> {
        self.slots[b.0]
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Matches declared bands to image bands by nearest center wavelength.
/// Fails if a band needed outside a `requires` guard has no match.
pub fn bind_bands(rules: &RuleSet, bands: &[BandMetadata]) -> Result<BandBinding> {
    let mut slots = Vec::with_capacity(rules.bands.len());
    let mut taken = vec![false; bands.len()];
    for decl in &rules.bands {
        let best = bands
            .iter()
            .enumerate()
            .filter(|(i, b)| {
                !taken[*i] && (b.center_wavelength - decl.wavelength).abs() <= BAND_MATCH_TOLERANCE
            })
            .min_by(|(_, a), (_, b)| {
                let da = (a.center_wavelength - decl.wavelength).abs();
                let db = (b.center_wavelength - decl.wavelength).abs();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i);
        if let Some(i) = best {
            taken[i] = true;
        }
        slots.push(best);
    }
    for b in rules.required_bands() {
        if slots[b.0].is_none() {
            let d = &rules.bands[b.0];
            return Err(Error::MissingBand(format!(
                "{} ({} µm)",
                d.symbol, d.wavelength
            )));
        }
    }
    Ok(BandBinding { slots })
}

/// Counters from one classification run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassifyStats {
    /// Pixels read, valid or not.
    pub pixels_visited: usize,
}

/// Labels every valid pixel with the rule set's winning class; invalid
/// pixels get [`NODATA`].
pub fn classify(image: &MultiSpectralImage, rules: &RuleSet) -> Result<CategoricalMap> {
    classify_with_stats(image, rules).map(|(m, _)| m)
}

pub fn classify_with_stats(
    image: &MultiSpectralImage,
    rules: &RuleSet,
) -> Result<(CategoricalMap, ClassifyStats)> {
    let binding = bind_bands(rules, image.bands())?;
    let w = image.width();
    let mut labels = vec![NODATA; image.pixel_count()];
    let visited: usize = labels
        .par_chunks_mut(w)
        .enumerate()
        .map(|(row, out)| {
            let mut px = vec![None; binding.len()];
            for (col, slot) in out.iter_mut().enumerate() {
                *slot = if image.is_valid(row, col) {
                    for (k, v) in px.iter_mut().enumerate() {
                        *v = binding.slots[k].map(|b| f64::from(image.sample(b, row, col)));
                    }
                    rules.label_pixel(&px)
                } else {
                    NODATA
                };
            }
            out.len()
        })
        .sum();
    let map = CategoricalMap::new(w, image.height(), labels, rules.legend())?;
    Ok((
        map,
        ClassifyStats {
            pixels_visited: visited,
        },
    ))
}

/// Classifies the core rows of `strip` into `out` (`core_rows * width`).
pub fn classify_strip(strip: &Strip, binding: &BandBinding, rules: &RuleSet, out: &mut [u16]) {
    let w = strip.width();
    let halo = strip.halo_rows();
    out[..strip.core_rows() * w]
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(r, row_out)| {
            let r = r + halo;
            let mut px = vec![None; binding.len()];
            for (col, slot) in row_out.iter_mut().enumerate() {
                *slot = if strip.is_valid(r, col) {
                    for (k, v) in px.iter_mut().enumerate() {
                        *v = binding.slots[k].map(|b| f64::from(strip.sample(b, r, col)));
                    }
                    rules.label_pixel(&px)
                } else {
                    NODATA
                };
            }
        });
}

/// Classifies a strip source holding one strip of samples at a time.
pub fn classify_streamed<S: StripSource + ?Sized>(
    source: &mut S,
    rules: &RuleSet,
    strip_height: usize,
    meter: Option<&MemoryMeter>,
) -> Result<CategoricalMap> {
    let binding = bind_bands(rules, source.bands())?;
    let (w, h) = (source.width(), source.height());
    let mut labels = vec![NODATA; w * h];
    let mut stream = stream_strips(source, strip_height, 0, meter)?;
    let mut buf = TrackedBuf::new(strip_height.min(h) * w, NODATA, meter);
    while let Some(strip) = stream.next_strip()? {
        let n = strip.core_rows() * w;
        classify_strip(strip, &binding, rules, &mut buf[..n]);
        let at = strip.core_start() * w;
        labels[at..at + n].copy_from_slice(&buf[..n]);
    }
    CategoricalMap::new(w, h, labels, rules.legend())
}

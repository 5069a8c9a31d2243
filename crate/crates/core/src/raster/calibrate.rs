use super::BandMetadata;
use crate::error::{Error, Result};

/// Output of [`apply_calibration`] for one band plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedPlane {
    pub values: Vec<f32>,
    pub valid: Vec<bool>,
    /// Samples whose calibrated value fell outside `[0, 1]` and were clamped.
    pub clamped: usize,
}

/// Converts raw digital numbers into reflectance: `raw * gain + offset`,
/// clamped to `[0, 1]`. Samples equal to the band's nodata value are
/// flagged invalid and set to zero.
pub fn apply_calibration(
    raw: &[f64],
    width: usize,
    meta: &BandMetadata,
) -> Result<CalibratedPlane> {
    meta.validate()?;
    let width = width.max(1);
    let mut values = Vec::with_capacity(raw.len());
    let mut valid = Vec::with_capacity(raw.len());
    let mut clamped = 0;
    for (i, &r) in raw.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::Data {
                row: i / width,
                col: i % width,
                msg: format!("non-finite raw value {r} in band {}", meta.band_id),
            });
        }
        match calibrate_sample(r, meta) {
            None => {
                values.push(0.0);
                valid.push(false);
            }
            Some((v, was_clamped)) => {
                clamped += usize::from(was_clamped);
                values.push(v);
                valid.push(true);
            }
        }
    }
    Ok(CalibratedPlane {
        values,
        valid,
        clamped,
    })
}

/// Calibrates one finite raw value; `None` for nodata.
#[inline]
pub(crate) fn calibrate_sample(raw: f64, meta: &BandMetadata) -> Option<(f32, bool)> {
    if meta.nodata == Some(raw) {
        return None;
    }
    let v = raw * meta.gain + meta.offset;
    let c = v.clamp(0.0, 1.0);
    Some((c as f32, c != v))
}

//! Raster data model: band metadata, calibrated multispectral images,
//! flat band-sequential file I/O and fixed-memory strip streaming.

mod calibrate;
mod header;
mod io;
mod meter;
mod strip;
pub mod synthetic;

pub(crate) use calibrate::calibrate_sample;
pub use calibrate::{apply_calibration, CalibratedPlane};
pub use header::Header;
pub use io::{payload_path, read_image, write_image, FileStripSource};
pub(crate) use io::{read_header, read_payload, write_raster_files};
pub use meter::{MemoryMeter, TrackedBuf};
pub use strip::{stream_strips, Strip, StripSource, StripStream};

use crate::error::{Error, Result};

/// Per-band sensor description and radiometric calibration coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMetadata {
    pub band_id: u16,
    /// Center wavelength in micrometers.
    pub center_wavelength: f64,
    pub gain: f64,
    pub offset: f64,
    /// Raw value marking a missing sample.
    pub nodata: Option<f64>,
}

impl BandMetadata {
    pub fn new(band_id: u16, center_wavelength: f64) -> Result<Self> {
        let meta = BandMetadata {
            band_id,
            center_wavelength,
            gain: 1.0,
            offset: 0.0,
            nodata: None,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn with_calibration(mut self, gain: f64, offset: f64) -> Result<Self> {
        self.gain = gain;
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nodata(mut self, nodata: f64) -> Self {
        self.nodata = Some(nodata);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength.is_finite() && self.center_wavelength > 0.0) {
            return Err(Error::Config(format!(
                "band {}: center wavelength must be positive, got {}",
                self.band_id, self.center_wavelength
            )));
        }
        if self.gain == 0.0 || !self.gain.is_finite() {
            return Err(Error::Config(format!(
                "band {}: gain must be finite and non-zero, got {}",
                self.band_id, self.gain
            )));
        }
        if !self.offset.is_finite() {
            return Err(Error::Config(format!(
                "band {}: offset must be finite",
                self.band_id
            )));
        }
        Ok(())
    }

    /// Landsat TM-like band set: b1..b5 and b7.
    pub fn landsat_tm() -> Vec<BandMetadata> {
        [
            (1, 0.48),
            (2, 0.56),
            (3, 0.66),
            (4, 0.83),
            (5, 1.6),
            (7, 2.2),
        ]
        .into_iter()
        .map(|(id, wl)| BandMetadata::new(id, wl).expect("static band table"))
        .collect()
    }
}

/// Storage encoding of raster samples on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleType {
    U8,
    U16,
    I16,
    U32,
    F32,
}

impl SampleType {
    pub fn size(self) -> usize {
        match self {
            SampleType::U8 => 1,
            SampleType::U16 | SampleType::I16 => 2,
            SampleType::U32 | SampleType::F32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SampleType::U8 => "u8",
            SampleType::U16 => "u16",
            SampleType::I16 => "i16",
            SampleType::U32 => "u32",
            SampleType::F32 => "f32",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "u8" => SampleType::U8,
            "u16" => SampleType::U16,
            "i16" => SampleType::I16,
            "u32" => SampleType::U32,
            "f32" => SampleType::F32,
            other => return Err(Error::Format(format!("unknown sample type `{other}`"))),
        })
    }

    pub(crate) fn decode(self, bytes: &[u8], out: &mut Vec<f64>) {
        out.clear();
        match self {
            SampleType::U8 => out.extend(bytes.iter().map(|&b| f64::from(b))),
            SampleType::U16 => out.extend(
                bytes
                    .chunks_exact(2)
                    .map(|c| f64::from(u16::from_le_bytes([c[0], c[1]]))),
            ),
            SampleType::I16 => out.extend(
                bytes
                    .chunks_exact(2)
                    .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]]))),
            ),
            SampleType::U32 => out.extend(
                bytes
                    .chunks_exact(4)
                    .map(|c| f64::from(u32::from_le_bytes([c[0], c[1], c[2], c[3]]))),
            ),
            SampleType::F32 => out.extend(
                bytes
                    .chunks_exact(4)
                    .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))),
            ),
        }
    }

    /// Encodes one raw value, rounding and saturating for integer types.
    pub(crate) fn encode(self, raw: f64, out: &mut Vec<u8>) {
        match self {
            SampleType::U8 => out.push(raw.round().clamp(0.0, 255.0) as u8),
            SampleType::U16 => {
                out.extend_from_slice(&(raw.round().clamp(0.0, 65535.0) as u16).to_le_bytes())
            }
            SampleType::I16 => {
                out.extend_from_slice(&(raw.round().clamp(-32768.0, 32767.0) as i16).to_le_bytes())
            }
            SampleType::U32 => out
                .extend_from_slice(&(raw.round().clamp(0.0, u32::MAX as f64) as u32).to_le_bytes()),
            SampleType::F32 => out.extend_from_slice(&(raw as f32).to_le_bytes()),
        }
    }
}

/// A calibrated multispectral raster held in memory.
///
/// Samples are stored band-sequential: plane `b` occupies
/// `samples[b * width * height..(b + 1) * width * height]`, row-major.
/// Invalid pixels carry a zero sample in every band.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSpectralImage {
    width: usize,
    height: usize,
    bands: Vec<BandMetadata>,
    dtype: SampleType,
    samples: Vec<f32>,
    valid: Vec<bool>,
    clamped: usize,
}

impl MultiSpectralImage {
    /// Builds an image from band-sequential samples and a validity mask.
    ///
    /// Values are not range-checked here; the `[0, 1]` reflectance domain is
    /// established by [`apply_calibration`] on the read path.
    pub fn new(
        width: usize,
        height: usize,
        bands: Vec<BandMetadata>,
        samples: Vec<f32>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "image must be non-empty, got {width}x{height}"
            )));
        }
        if bands.is_empty() {
            return Err(Error::Config("image needs at least one band".into()));
        }
        for b in &bands {
            b.validate()?;
        }
        let plane = width * height;
        if samples.len() != plane * bands.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} samples for {width}x{height}x{}, got {}",
                plane * bands.len(),
                bands.len(),
                samples.len()
            )));
        }
        if valid.len() != plane {
            return Err(Error::DimensionMismatch(format!(
                "validity mask has {} entries, expected {plane}",
                valid.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            let p = i % plane;
            return Err(Error::Data {
                row: p / width,
                col: p % width,
                msg: "non-finite sample".into(),
            });
        }
        let mut samples = samples;
        for (p, ok) in valid.iter().enumerate() {
            if !ok {
                for b in 0..bands.len() {
                    samples[b * plane + p] = 0.0;
                }
            }
        }
        Ok(MultiSpectralImage {
            width,
            height,
            bands,
            dtype: SampleType::F32,
            samples,
            valid,
            clamped: 0,
        })
    }

    /// Builds a fully valid image from one plane per band.
    pub fn from_planes(
        width: usize,
        height: usize,
        bands: Vec<BandMetadata>,
        planes: Vec<Vec<f32>>,
    ) -> Result<Self> {
        if planes.len() != bands.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} planes for {} bands",
                planes.len(),
                bands.len()
            )));
        }
        let samples = planes.concat();
        Self::new(width, height, bands, samples, vec![true; width * height])
    }

    pub(crate) fn set_storage(&mut self, dtype: SampleType, clamped: usize) {
        self.dtype = dtype;
        self.clamped = clamped;
    }

    pub fn with_dtype(mut self, dtype: SampleType) -> Self {
        self.dtype = dtype;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn bands(&self) -> &[BandMetadata] {
        &self.bands
    }

    pub fn dtype(&self) -> SampleType {
        self.dtype
    }

    /// Number of calibrated samples clamped into `[0, 1]` at read time.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn band(&self, b: usize) -> &[f32] {
        let plane = self.pixel_count();
        &self.samples[b * plane..(b + 1) * plane]
    }

    #[inline]
    pub fn sample(&self, b: usize, row: usize, col: usize) -> f32 {
        self.samples[b * self.pixel_count() + row * self.width + col]
    }

    #[inline]
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.width + col]
    }

    /// Copies the band vector of one pixel into `out`.
    pub fn pixel_into(&self, row: usize, col: usize, out: &mut [f32]) {
        let plane = self.pixel_count();
        let p = row * self.width + col;
        for (b, v) in out.iter_mut().enumerate().take(self.bands.len()) {
            *v = self.samples[b * plane + p];
        }
    }
}

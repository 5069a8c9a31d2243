use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use super::{
    apply_calibration, calibrate_sample, BandMetadata, Header, MemoryMeter, MultiSpectralImage,
    SampleType, StripSource, TrackedBuf,
};
use crate::error::{Error, Result};

/// Payload file paired with a header: same stem, `.bsq` extension.
pub fn payload_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bsq")
}

pub(crate) fn read_header(path: &Path) -> Result<Header> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Header::parse(&text)
}

/// Reads the payload next to `header_path`, checking its exact length.
pub(crate) fn read_payload(header_path: &Path, expected: u64) -> Result<Vec<u8>> {
    let path = payload_path(header_path);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    check_len(expected, bytes.len() as u64)?;
    Ok(bytes)
}

fn check_len(expected: u64, actual: u64) -> Result<()> {
    if actual < expected {
        return Err(Error::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(Error::Format(format!(
            "payload has {actual} bytes, header describes {expected}"
        )));
    }
    Ok(())
}

pub(crate) fn write_raster_files(
    header_path: &Path,
    header: &Header,
    payload: &[u8],
) -> Result<()> {
    fs::write(header_path, header.to_text()).map_err(|e| Error::io(header_path, e))?;
    let data = payload_path(header_path);
    fs::write(&data, payload).map_err(|e| Error::io(&data, e))
}

struct ImageLayout {
    width: usize,
    height: usize,
    dtype: SampleType,
    bands: Vec<BandMetadata>,
}

impl ImageLayout {
    fn from_header(h: &Header) -> Result<Self> {
        let width: usize = h.required("width")?;
        let height: usize = h.required("height")?;
        let count: usize = h.required("bands")?;
        let dtype = SampleType::parse(h.require("dtype")?)?;
        if let Some(il) = h.get("interleave") {
            if il != "bsq" {
                return Err(Error::Format(format!("unsupported interleave `{il}`")));
            }
        }
        if width == 0 || height == 0 || count == 0 {
            return Err(Error::Format(
                "width, height and bands must be positive".into(),
            ));
        }
        let mut bands = Vec::with_capacity(count);
        for n in 1..=count {
            let key = |field: &str| format!("band.{n}.{field}");
            let band_id = h.parsed::<u16>(&key("id"))?.unwrap_or(n as u16);
            let wavelength: f64 = h.required(&key("wavelength"))?;
            let meta = BandMetadata {
                band_id,
                center_wavelength: wavelength,
                gain: h.parsed(&key("gain"))?.unwrap_or(1.0),
                offset: h.parsed(&key("offset"))?.unwrap_or(0.0),
                nodata: h.parsed(&key("nodata"))?,
            };
            meta.validate()?;
            bands.push(meta);
        }
        Ok(ImageLayout {
            width,
            height,
            dtype,
            bands,
        })
    }

    fn plane_bytes(&self) -> u64 {
        (self.width * self.height * self.dtype.size()) as u64
    }
}

fn image_header(image: &MultiSpectralImage) -> Header {
    let mut h = Header::new();
    h.set("width", image.width());
    h.set("height", image.height());
    h.set("bands", image.band_count());
    h.set("dtype", image.dtype().name());
    h.set("interleave", "bsq");
    for (i, b) in image.bands().iter().enumerate() {
        let n = i + 1;
        h.set(format!("band.{n}.id"), b.band_id);
        h.set(format!("band.{n}.wavelength"), b.center_wavelength);
        h.set(format!("band.{n}.gain"), b.gain);
        h.set(format!("band.{n}.offset"), b.offset);
        if let Some(nd) = b.nodata {
            h.set(format!("band.{n}.nodata"), nd);
        }
    }
    h
}

/// Reads a band-sequential image and calibrates every band into reflectance.
pub fn read_image(header_path: impl AsRef<Path>) -> Result<MultiSpectralImage> {
    let header_path = header_path.as_ref();
    let layout = ImageLayout::from_header(&read_header(header_path)?)?;
    let plane_bytes = layout.plane_bytes() as usize;
    let payload = read_payload(header_path, plane_bytes as u64 * layout.bands.len() as u64)?;

    let npix = layout.width * layout.height;
    let mut samples = Vec::with_capacity(npix * layout.bands.len());
    let mut valid = vec![true; npix];
    let mut clamped = 0;
    let mut raw = Vec::with_capacity(npix);
    for (b, meta) in layout.bands.iter().enumerate() {
        layout
            .dtype
            .decode(&payload[b * plane_bytes..(b + 1) * plane_bytes], &mut raw);
        let plane = apply_calibration(&raw, layout.width, meta)?;
        clamped += plane.clamped;
        for (v, ok) in valid.iter_mut().zip(&plane.valid) {
            *v &= ok;
        }
        samples.extend_from_slice(&plane.values);
    }
    let mut image =
        MultiSpectralImage::new(layout.width, layout.height, layout.bands, samples, valid)?;
    image.set_storage(layout.dtype, clamped);
    Ok(image)
}

/// Writes `image` in its storage encoding, inverting each band's
/// calibration. Invalid pixels are written as the band's nodata value.
pub fn write_image(image: &MultiSpectralImage, header_path: impl AsRef<Path>) -> Result<()> {
    let header_path = header_path.as_ref();
    let dtype = image.dtype();
    let mut payload = Vec::with_capacity(image.pixel_count() * image.band_count() * dtype.size());
    for (b, meta) in image.bands().iter().enumerate() {
        for (&v, &ok) in image.band(b).iter().zip(image.validity()) {
            let raw = if ok {
                (f64::from(v) - meta.offset) / meta.gain
            } else {
                meta.nodata.unwrap_or(0.0)
            };
            dtype.encode(raw, &mut payload);
        }
    }
    write_raster_files(header_path, &image_header(image), &payload)
}

/// Strip source reading rows directly from a band-sequential file; holds
/// one strip of raw bytes at a time.
pub struct FileStripSource {
    path: PathBuf,
    file: File,
    layout: ImageLayout,
    raw: Option<TrackedBuf<u8>>,
    decoded: Vec<f64>,
    meter: Option<MemoryMeter>,
    clamped: usize,
}

impl FileStripSource {
    pub fn open(header_path: impl AsRef<Path>, meter: Option<&MemoryMeter>) -> Result<Self> {
        let header_path = header_path.as_ref();
        let layout = ImageLayout::from_header(&read_header(header_path)?)?;
        let path = payload_path(header_path);
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        check_len(layout.plane_bytes() * layout.bands.len() as u64, len)?;
        Ok(FileStripSource {
            path,
            file,
            layout,
            raw: None,
            decoded: Vec::new(),
            meter: meter.cloned(),
            clamped: 0,
        })
    }

    pub fn dtype(&self) -> SampleType {
        self.layout.dtype
    }

    /// Samples clamped into `[0, 1]` so far.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }
}

impl StripSource for FileStripSource {
    fn width(&self) -> usize {
        self.layout.width
    }

    fn height(&self) -> usize {
        self.layout.height
    }

    fn bands(&self) -> &[BandMetadata] {
        &self.layout.bands
    }

    fn read_rows(
        &mut self,
        row: usize,
        n: usize,
        samples: &mut [f32],
        band_stride: usize,
        valid: &mut [bool],
    ) -> Result<()> {
        let w = self.layout.width;
        let size = self.layout.dtype.size();
        let bytes = n * w * size;
        if self.raw.as_ref().is_none_or(|r| r.len() < bytes) {
            self.raw = None;
            self.raw = Some(TrackedBuf::new(bytes, 0, self.meter.as_ref()));
            self.decoded = Vec::with_capacity(n * w);
        }
        let raw = self.raw.as_mut().expect("allocated above");
        valid[..n * w].fill(true);
        for (b, meta) in self.layout.bands.iter().enumerate() {
            let pos = b as u64 * self.layout.plane_bytes() + (row * w * size) as u64;
            self.file
                .seek(SeekFrom::Start(pos))
                .and_then(|_| self.file.read_exact(&mut raw[..bytes]))
                .map_err(|e| Error::io(&self.path, e))?;
            self.layout.dtype.decode(&raw[..bytes], &mut self.decoded);
            let out = &mut samples[b * band_stride..b * band_stride + n * w];
            for (i, &r) in self.decoded.iter().enumerate() {
                if !r.is_finite() {
                    return Err(Error::Data {
                        row: row + i / w,
                        col: i % w,
                        msg: format!("non-finite raw value in band {}", meta.band_id),
                    });
                }
                match calibrate_sample(r, meta) {
                    Some((v, c)) => {
                        out[i] = v;
                        self.clamped += usize::from(c);
                    }
                    None => {
                        out[i] = 0.0;
                        valid[i] = false;
                    }
                }
            }
        }
        for (i, ok) in valid[..n * w].iter().enumerate() {
            if !ok {
                for b in 0..self.layout.bands.len() {
                    samples[b * band_stride + i] = 0.0;
                }
            }
        }
        Ok(())
    }
}

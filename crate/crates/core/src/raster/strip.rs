use super::{BandMetadata, MemoryMeter, MultiSpectralImage, TrackedBuf};
use crate::error::{Error, Result};

/// A row-addressable supplier of calibrated samples.
pub trait StripSource {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn bands(&self) -> &[BandMetadata];

    /// Reads rows `row..row + n`. Band `b` is written to
    /// `samples[b * band_stride..b * band_stride + n * width]`; `valid`
    /// receives one flag per pixel.
    fn read_rows(
        &mut self,
        row: usize,
        n: usize,
        samples: &mut [f32],
        band_stride: usize,
        valid: &mut [bool],
    ) -> Result<()>;
}

impl StripSource for MultiSpectralImage {
    fn width(&self) -> usize {
        MultiSpectralImage::width(self)
    }

    fn height(&self) -> usize {
        MultiSpectralImage::height(self)
    }

    fn bands(&self) -> &[BandMetadata] {
        MultiSpectralImage::bands(self)
    }

    fn read_rows(
        &mut self,
        row: usize,
        n: usize,
        samples: &mut [f32],
        band_stride: usize,
        valid: &mut [bool],
    ) -> Result<()> {
        let w = MultiSpectralImage::width(self);
        let span = row * w..(row + n) * w;
        for b in 0..self.band_count() {
            samples[b * band_stride..b * band_stride + n * w]
                .copy_from_slice(&self.band(b)[span.clone()]);
        }
        valid[..n * w].copy_from_slice(&self.validity()[span]);
        Ok(())
    }
}

/// A horizontal slab of the image: `halo` rows retained from the previous
/// strip followed by `rows` new rows.
#[derive(Debug)]
pub struct Strip {
    width: usize,
    band_count: usize,
    capacity: usize,
    first_row: usize,
    halo: usize,
    rows: usize,
    samples: TrackedBuf<f32>,
    valid: TrackedBuf<bool>,
}

impl Strip {
    fn new(width: usize, band_count: usize, capacity: usize, meter: Option<&MemoryMeter>) -> Self {
        Strip {
            width,
            band_count,
            capacity,
            first_row: 0,
            halo: 0,
            rows: 0,
            samples: TrackedBuf::new(capacity * width * band_count, 0.0, meter),
            valid: TrackedBuf::new(capacity * width, false, meter),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn band_count(&self) -> usize {
        self.band_count
    }

    /// Absolute image row of buffered row 0 (the first halo row, if any).
    pub fn first_row(&self) -> usize {
        self.first_row
    }

    /// Absolute image row of the first non-overlap row.
    pub fn core_start(&self) -> usize {
        self.first_row + self.halo
    }

    pub fn halo_rows(&self) -> usize {
        self.halo
    }

    pub fn core_rows(&self) -> usize {
        self.rows
    }

    pub fn buffered_rows(&self) -> usize {
        self.halo + self.rows
    }

    /// Buffered rows of band `b`, halo included.
    pub fn band(&self, b: usize) -> &[f32] {
        let stride = self.capacity * self.width;
        &self.samples[b * stride..b * stride + self.buffered_rows() * self.width]
    }

    /// Validity of the buffered rows, halo included.
    pub fn validity(&self) -> &[bool] {
        &self.valid[..self.buffered_rows() * self.width]
    }

    /// Sample at buffered row `r` (0 = first halo row).
    #[inline]
    pub fn sample(&self, b: usize, r: usize, col: usize) -> f32 {
        self.samples[b * self.capacity * self.width + r * self.width + col]
    }

    #[inline]
    pub fn is_valid(&self, r: usize, col: usize) -> bool {
        self.valid[r * self.width + col]
    }

    /// Tracked bytes held by this strip.
    pub fn footprint(&self) -> usize {
        self.samples.bytes() + self.valid.bytes()
    }
}

/// Iterates an image as consecutive strips with a fixed buffer.
pub struct StripStream<'s, S: StripSource + ?Sized> {
    source: &'s mut S,
    strip_height: usize,
    overlap: usize,
    next_row: usize,
    strip: Strip,
}

/// Partitions `source` into strips of `strip_height` rows, each preceded by
/// up to `overlap` rows carried over from the previous strip. A
/// `strip_height` larger than the image yields one strip.
pub fn stream_strips<'s, S: StripSource + ?Sized>(
    source: &'s mut S,
    strip_height: usize,
    overlap: usize,
    meter: Option<&MemoryMeter>,
) -> Result<StripStream<'s, S>> {
    if strip_height == 0 {
        return Err(Error::Config("strip height must be at least 1".into()));
    }
    let h = source.height();
    let capacity = strip_height.min(h) + overlap.min(h);
    let strip = Strip::new(source.width(), source.bands().len(), capacity, meter);
    Ok(StripStream {
        source,
        strip_height,
        overlap,
        next_row: 0,
        strip,
    })
}

impl<S: StripSource + ?Sized> StripStream<'_, S> {
    pub fn next_strip(&mut self) -> Result<Option<&Strip>> {
        let height = self.source.height();
        if self.next_row >= height {
            return Ok(None);
        }
        let w = self.strip.width;
        let stride = self.strip.capacity * w;
        let halo = self.overlap.min(self.strip.buffered_rows());
        let keep_from = self.strip.buffered_rows() - halo;
        if halo > 0 {
            for b in 0..self.strip.band_count {
                let base = b * stride;
                self.strip
                    .samples
                    .copy_within(base + keep_from * w..base + (keep_from + halo) * w, base);
            }
            self.strip
                .valid
                .copy_within(keep_from * w..(keep_from + halo) * w, 0);
        }
        let n = self.strip_height.min(height - self.next_row);
        let at = halo * w;
        self.source.read_rows(
            self.next_row,
            n,
            &mut self.strip.samples[at..],
            stride,
            &mut self.strip.valid[at..at + n * w],
        )?;
        self.strip.first_row = self.next_row - halo;
        self.strip.halo = halo;
        self.strip.rows = n;
        self.next_row += n;
        Ok(Some(&self.strip))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(width: usize, height: usize) -> MultiSpectralImage {
        let n = width * height;
        let planes = (0..2)
            .map(|b| (0..n).map(|i| (i + b * 1000) as f32).collect())
            .collect();
        MultiSpectralImage::from_planes(
            width,
            height,
            BandMetadata::landsat_tm()[..2].to_vec(),
            planes,
        )
        .unwrap()
    }

    fn partition(height: usize, strip_height: usize, overlap: usize) -> Vec<(usize, usize, usize)> {
        let mut img = ramp(3, height);
        let mut stream = stream_strips(&mut img, strip_height, overlap, None).unwrap();
        let mut out = vec![];
        while let Some(s) = stream.next_strip().unwrap() {
            out.push((s.core_start(), s.halo_rows(), s.core_rows()));
        }
        out
    }

    #[test]
    fn partitions_rows() {
        assert_eq!(partition(10, 4, 0), vec![(0, 0, 4), (4, 0, 4), (8, 0, 2)]);
        assert_eq!(partition(10, 10, 0), vec![(0, 0, 10)]);
        assert_eq!(partition(10, 25, 0), vec![(0, 0, 10)]);
        assert_eq!(partition(10, 4, 1), vec![(0, 0, 4), (4, 1, 4), (8, 1, 2)]);
    }

    #[test]
    fn zero_strip_height_is_rejected() {
        let mut img = ramp(2, 2);
        assert!(stream_strips(&mut img, 0, 0, None).is_err());
    }

    #[test]
    fn halo_rows_repeat_previous_strip() {
        let img = ramp(3, 9);
        let mut src = img.clone();
        let mut stream = stream_strips(&mut src, 2, 2, None).unwrap();
        while let Some(s) = stream.next_strip().unwrap() {
            for r in 0..s.buffered_rows() {
                for c in 0..3 {
                    for b in 0..2 {
                        assert_eq!(s.sample(b, r, c), img.sample(b, s.first_row() + r, c));
                    }
                }
            }
        }
    }

    #[test]
    fn meter_sees_strip_buffer() {
        let mut img = ramp(5, 100);
        let meter = MemoryMeter::new();
        {
            let mut stream = stream_strips(&mut img, 8, 1, Some(&meter)).unwrap();
            while stream.next_strip().unwrap().is_some() {}
        }
        assert_eq!(meter.peak(), 9 * 5 * 2 * 4 + 9 * 5);
        assert_eq!(meter.current(), 0);
    }
}

//! Deterministic synthetic scenes for tests, benchmarks and demos.

use super::{BandMetadata, MultiSpectralImage, StripSource};
use crate::error::Result;

/// Reflectance signatures (b1, b2, b3, b4, b5, b7) of typical surfaces.
const ARCHETYPES: [[f32; 6]; 10] = [
    [0.03, 0.02, 0.01, 0.01, 0.005, 0.003], // clear water
    [0.08, 0.07, 0.06, 0.08, 0.03, 0.02],   // turbid water
    [0.04, 0.08, 0.05, 0.50, 0.20, 0.10],   // bright vegetation
    [0.03, 0.06, 0.04, 0.35, 0.15, 0.07],   // average vegetation
    [0.02, 0.04, 0.03, 0.20, 0.08, 0.04],   // dark vegetation
    [0.12, 0.15, 0.18, 0.30, 0.35, 0.28],   // soil
    [0.50, 0.50, 0.50, 0.50, 0.40, 0.30],   // cloud
    [0.80, 0.80, 0.80, 0.70, 0.05, 0.03],   // snow
    [0.09, 0.10, 0.11, 0.12, 0.14, 0.12],   // asphalt
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.00],   // placeholder for uniform noise
];

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn unit(h: u64) -> f32 {
    (h >> 40) as f32 / (1u64 << 24) as f32
}

/// Blocky six-band Landsat-like scene computed on demand, so arbitrarily
/// tall scenes can be streamed without being materialized.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    width: usize,
    height: usize,
    seed: u64,
    block: usize,
    /// Probability that a pixel ignores its block and picks its own surface.
    pub speckle: f32,
    /// Probability that a pixel is invalid.
    pub invalid_rate: f32,
    bands: Vec<BandMetadata>,
}

impl SyntheticScene {
    pub fn new(width: usize, height: usize, seed: u64) -> Self {
        SyntheticScene {
            width,
            height,
            seed,
            block: 8,
            speckle: 0.05,
            invalid_rate: 0.002,
            bands: BandMetadata::landsat_tm(),
        }
    }

    pub fn with_block(mut self, block: usize) -> Self {
        self.block = block.max(1);
        self
    }

    fn hash(&self, a: u64, b: u64, salt: u64) -> u64 {
        splitmix(self.seed ^ splitmix(a ^ splitmix(b ^ splitmix(salt))))
    }

    /// Writes the six band values of pixel (row, col); returns validity.
    pub fn pixel(&self, row: usize, col: usize, out: &mut [f32; 6]) -> bool {
        let (r, c) = (row as u64, col as u64);
        if unit(self.hash(r, c, 1)) < self.invalid_rate {
            *out = [0.0; 6];
            return false;
        }
        let block = self.block as u64;
        let kind = if unit(self.hash(r, c, 2)) < self.speckle {
            self.hash(r, c, 3) % ARCHETYPES.len() as u64
        } else {
            self.hash(r / block, c / block, 4) % ARCHETYPES.len() as u64
        } as usize;
        for (b, v) in out.iter_mut().enumerate() {
            let jitter = unit(self.hash(r, c, 10 + b as u64));
            *v = if kind == ARCHETYPES.len() - 1 {
                jitter
            } else {
                (ARCHETYPES[kind][b] + (jitter - 0.5) * 0.02).clamp(0.0, 1.0)
            };
        }
        true
    }

    pub fn to_image(&self) -> Result<MultiSpectralImage> {
        let n = self.width * self.height;
        let mut samples = vec![0.0; n * 6];
        let mut valid = vec![false; n];
        self.clone()
            .read_rows(0, self.height, &mut samples, n, &mut valid)?;
        MultiSpectralImage::new(self.width, self.height, self.bands.clone(), samples, valid)
    }
}

impl StripSource for SyntheticScene {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn bands(&self) -> &[BandMetadata] {
        &self.bands
    }

    fn read_rows(
        &mut self,
        row: usize,
        n: usize,
        samples: &mut [f32],
        band_stride: usize,
        valid: &mut [bool],
    ) -> Result<()> {
        let mut px = [0.0; 6];
        for r in 0..n {
            for c in 0..self.width {
                let i = r * self.width + c;
                valid[i] = self.pixel(row + r, c, &mut px);
                for (b, &v) in px.iter().enumerate() {
                    samples[b * band_stride + i] = v;
                }
            }
        }
        Ok(())
    }
}

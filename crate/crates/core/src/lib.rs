//! Spectral color naming, superpixel segmentation and categorical map
//! comparison for radiometrically calibrated multispectral rasters.
//!
//! The crate is organized along the processing chain:
//!
//! * [`raster`]: calibrated images, flat band-sequential I/O, strip streaming.
//! * [`rules`]: the spectral rule language and the shipped SPECL rule set.
//! * [`naming`]: per-pixel color naming into a [`CategoricalMap`].
//! * [`segment`]: connected components, cross-aura contours, superpixel
//!   tables, piecewise-constant reconstruction and RMSE.
//! * [`compare`]: contingency tables, legend harmonization and the CVPAI2
//!   association index.
//! * [`evidence`]: fuzzy-AND combination of color, shape, texture and
//!   spatial evidence.

pub mod compare;
pub mod error;
pub mod evidence;
pub mod naming;
pub mod raster;
pub mod rules;
pub mod segment;

pub use error::{Error, Result};
pub use naming::{CategoricalMap, LegendEntry};
pub use raster::{BandMetadata, MultiSpectralImage, SampleType};
pub use rules::{MatchPolicy, RuleSet};
pub use segment::{Adjacency, SegmentationMap};

//! Shared inputs for the benchmarks.

use huemap_core::compare::LegendRelation;
use huemap_core::naming::classify;
use huemap_core::raster::synthetic::SyntheticScene;
use huemap_core::rules::specl;
use huemap_core::{CategoricalMap, MultiSpectralImage};

/// A square synthetic scene of `side × side` pixels.
pub fn scene(side: usize) -> MultiSpectralImage {
    SyntheticScene::new(side, side, 7)
        .with_block(12)
        .to_image()
        .expect("synthetic scenes are valid")
}

/// The SPECL color map of [`scene`].
pub fn color_map(side: usize) -> CategoricalMap {
    classify(&scene(side), &specl()).expect("SPECL binds to the synthetic bands")
}

/// A dense pseudo-random `n × n` relation.
pub fn relation(n: usize) -> LegendRelation {
    let cells = (0..n * n)
        .map(|i| u8::from((i * 2654435761) % 7 < 3))
        .collect();
    LegendRelation::new(
        (0..n).map(|i| format!("t{i}")).collect(),
        (0..n).map(|i| format!("r{i}")).collect(),
        cells,
    )
    .expect("square relation")
}

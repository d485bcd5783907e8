//! Shared inputs for the imaging benchmarks.

use gcs_core::imaging::{GrayImage, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic noise image; every call with the same arguments yields the same bytes.
pub fn random_rgb(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0u8; width * height * 3];
    rng.fill(&mut data[..]);
    RgbImage::new(width, height, data).expect("sized buffer")
}

/// Smooth gradient with a bright square, closer to a real frame than pure noise.
pub fn scene_gray(width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        let inside = x > width / 4 && x < 3 * width / 4 && y > height / 4 && y < 3 * height / 4;
        let base = ((x + y) * 255 / (width + height)) as u8;
        [if inside { base.saturating_add(90) } else { base }]
    })
    .expect("non-empty")
}

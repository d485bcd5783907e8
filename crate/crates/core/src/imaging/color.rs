use super::{GrayImage, ImagingError, Raster, RgbImage};

/// Luma weights for R, G and B.
pub const GRAY_WEIGHTS: [f64; 3] = [0.2989, 0.5870, 0.1140];

/// Size in bits of an uncompressed raster.
pub fn raw_image_bits(width: u64, height: u64, bits_per_pixel: u64) -> Result<u64, ImagingError> {
    if width == 0 || height == 0 || bits_per_pixel == 0 {
        return Err(ImagingError::EmptyImage);
    }
    width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bits_per_pixel))
        .ok_or(ImagingError::Overflow)
}

/// Luminance conversion that drops hue and saturation.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    // 256-entry tables per channel; the sum is formed in the same order as
    // the direct expression so results match it bit for bit.
    let lut: [[f64; 256]; 3] = GRAY_WEIGHTS.map(|w| std::array::from_fn(|v| w * v as f64));
    let data = img
        .as_bytes()
        .chunks_exact(3)
        .map(|px| {
            let y = lut[0][px[0] as usize] + lut[1][px[1] as usize] + lut[2][px[2] as usize];
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(img.width(), img.height(), data).expect("dimensions carried over")
}

/// Maps every channel value `v` to `255 - v`.
pub fn complement<const CH: usize>(img: &Raster<CH>) -> Raster<CH> {
    let mut out = img.clone();
    for v in out.as_bytes_mut() {
        *v = !*v;
    }
    out
}

use super::{ImagingError, Raster};

/// Lossless clockwise rotation by `turns` quarter turns.
///
/// One turn sends source pixel `(x, y)` to `(height - 1 - y, x)` in a
/// `height x width` destination.
pub fn rotate_quarter<const CH: usize>(img: &Raster<CH>, turns: u8) -> Result<Raster<CH>, ImagingError> {
    if turns > 3 {
        return Err(ImagingError::BadTurns(turns));
    }
    let (w, h) = (img.width(), img.height());
    let src = img.as_bytes();
    let (dw, dh) = if turns.is_multiple_of(2) { (w, h) } else { (h, w) };
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = match turns {
                0 => (x, y),
                1 => (h - 1 - y, x),
                2 => (w - 1 - x, h - 1 - y),
                _ => (y, w - 1 - x),
            };
            let s = (y * w + x) * CH;
            let d = (dy * dw + dx) * CH;
            out[d..d + CH].copy_from_slice(&src[s..s + CH]);
        }
    }
    Raster::new(dw, dh, out)
}

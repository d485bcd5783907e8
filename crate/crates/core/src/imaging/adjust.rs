use serde::{Deserialize, Serialize};

use super::{GrayImage, ImagingError};

/// Input intensity window and gamma for [`gray_adjust`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrayWindow {
    pub low_in: f64,
    pub high_in: f64,
    pub gamma: f64,
}

impl Default for GrayWindow {
    fn default() -> Self {
        Self {
            low_in: 0.0,
            high_in: 1.0,
            gamma: 1.0,
        }
    }
}

impl GrayWindow {
    pub fn validate(&self) -> Result<(), ImagingError> {
        let GrayWindow {
            low_in,
            high_in,
            gamma,
        } = *self;
        if !(0.0..=1.0).contains(&low_in) || !(0.0..=1.0).contains(&high_in) {
            return Err(ImagingError::InvalidWindow(format!(
                "limits must lie in [0, 1], got [{low_in}, {high_in}]"
            )));
        }
        if low_in >= high_in {
            return Err(ImagingError::InvalidWindow(format!(
                "low_in {low_in} must be below high_in {high_in}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ImagingError::InvalidWindow(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(())
    }

    /// Output level for one input level.
    pub fn map(&self, v: u8) -> u8 {
        let x = (v as f64 / 255.0).clamp(self.low_in, self.high_in);
        let t = ((x - self.low_in) / (self.high_in - self.low_in)).powf(self.gamma);
        (255.0 * t).round().clamp(0.0, 255.0) as u8
    }
}

/// Stretches `[low_in, high_in]` onto the full range with a gamma curve.
pub fn gray_adjust(img: &GrayImage, window: GrayWindow) -> Result<GrayImage, ImagingError> {
    window.validate()?;
    let mut lut = [0u8; 256];
    for (v, out) in lut.iter_mut().enumerate() {
        *out = window.map(v as u8);
    }
    let mut out = img.clone();
    for v in out.as_bytes_mut() {
        *v = lut[*v as usize];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(low_in: f64, high_in: f64, gamma: f64) -> GrayWindow {
        GrayWindow {
            low_in,
            high_in,
            gamma,
        }
    }

    #[test]
    fn identity_window() {
        let g = GrayImage::new(256, 1, (0..=255).collect()).unwrap();
        assert_eq!(gray_adjust(&g, GrayWindow::default()).unwrap(), g);
    }

    #[test]
    fn mid_gray_stretch() {
        // (128/255 - 0.2) / 0.6 = 0.50327 -> 128.33
        assert_eq!(win(0.2, 0.8, 1.0).map(128), 128);
    }

    #[test]
    fn below_window_goes_black() {
        let w = win(0.2, 0.8, 1.0);
        for v in 0..=51u8 {
            assert!(v as f64 / 255.0 <= 0.2 + 1e-12);
            assert_eq!(w.map(v), 0, "v={v}");
        }
        assert_eq!(w.map(255), 255);
    }

    #[test]
    fn rejects_bad_windows() {
        let g = GrayImage::filled(2, 2, [1]).unwrap();
        for w in [
            win(0.5, 0.5, 1.0),
            win(0.6, 0.2, 1.0),
            win(-0.1, 0.5, 1.0),
            win(0.0, 1.2, 1.0),
            win(0.0, 1.0, 0.0),
            win(0.0, 1.0, f64::NAN),
        ] {
            assert!(matches!(
                gray_adjust(&g, w),
                Err(ImagingError::InvalidWindow(_))
            ));
        }
    }
}

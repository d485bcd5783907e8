use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::imaging::{gaussian_kernel, RgbImage};

/// Degradations seen on airborne imagery: impulse specks, defocus blur and sensor grain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    /// Each pixel independently becomes black or white with probability `p`.
    SaltPepper { p: f64 },
    GaussianBlur { sigma: f64 },
    /// Zero-mean Gaussian added to every channel, in gray levels.
    AdditiveGaussian { sigma: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match self.kind {
            NoiseKind::SaltPepper { p } if !(0.0..=1.0).contains(&p) => Err(
                SimError::InvalidNoise(format!("probability must be in [0, 1], got {p}")),
            ),
            NoiseKind::GaussianBlur { sigma } | NoiseKind::AdditiveGaussian { sigma }
                if !(sigma >= 0.0 && sigma.is_finite()) =>
            {
                Err(SimError::InvalidNoise(format!(
                    "sigma must be non-negative, got {sigma}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Corrupts `img` reproducibly: the same image and spec give the same bytes.
pub fn inject_noise(img: &RgbImage, spec: &NoiseSpec) -> Result<RgbImage, SimError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = img.clone();
    match spec.kind {
        NoiseKind::None => {}
        NoiseKind::SaltPepper { p } => {
            for px in out.as_bytes_mut().chunks_exact_mut(3) {
                if rng.random_bool(p) {
                    let v = if rng.random_bool(0.5) { 255 } else { 0 };
                    px.fill(v);
                }
            }
        }
        NoiseKind::AdditiveGaussian { sigma } if sigma > 0.0 => {
            let normal = Normal::new(0.0, sigma).expect("validated sigma");
            for v in out.as_bytes_mut() {
                let n: f64 = normal.sample(&mut rng);
                *v = (*v as f64 + n).round().clamp(0.0, 255.0) as u8;
            }
        }
        NoiseKind::GaussianBlur { sigma } if sigma > 0.0 => out = blur(img, sigma),
        NoiseKind::AdditiveGaussian { .. } | NoiseKind::GaussianBlur { .. } => {}
    }
    Ok(out)
}

fn blur(img: &RgbImage, sigma: f64) -> RgbImage {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let src = img.as_bytes();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0;
                for (i, wt) in k.iter().enumerate() {
                    let sx = clamp(x as isize + i as isize - r, w);
                    acc += wt * src[(y * w + sx) * 3 + c] as f64;
                }
                tmp[(y * w + x) * 3 + c] = acc;
            }
        }
    }
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0;
                for (i, wt) in k.iter().enumerate() {
                    let sy = clamp(y as isize + i as isize - r, h);
                    acc += wt * tmp[(sy * w + x) * 3 + c];
                }
                out[(y * w + x) * 3 + c] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    RgbImage::new(w, h, out).expect("same dimensions")
}

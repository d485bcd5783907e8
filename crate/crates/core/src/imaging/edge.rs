use serde::{Deserialize, Serialize};

use super::filter::Padded;
use super::{GrayImage, ImagingError};

/// Default fraction of the peak gradient magnitude used as the Sobel/Prewitt cut.
pub const DEFAULT_THRESHOLD_FRAC: f64 = 0.25;

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD_FRAC
}

fn default_sigma() -> f64 {
    1.4
}

fn default_low() -> f64 {
    0.1
}

fn default_high() -> f64 {
    0.3
}

/// Gradient operator and its parameters.
///
/// Thresholds are fractions of the largest gradient magnitude in the image,
/// so the same parameters work for dim and bright scenes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "lowercase")]
pub enum EdgeOperator {
    Sobel {
        #[serde(default = "default_threshold")]
        threshold_frac: f64,
    },
    Prewitt {
        #[serde(default = "default_threshold")]
        threshold_frac: f64,
    },
    Canny {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_high")]
        high: f64,
    },
}

impl EdgeOperator {
    pub fn sobel() -> Self {
        EdgeOperator::Sobel {
            threshold_frac: DEFAULT_THRESHOLD_FRAC,
        }
    }

    pub fn prewitt() -> Self {
        EdgeOperator::Prewitt {
            threshold_frac: DEFAULT_THRESHOLD_FRAC,
        }
    }

    pub fn canny() -> Self {
        EdgeOperator::Canny {
            sigma: default_sigma(),
            low: default_low(),
            high: default_high(),
        }
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        match *self {
            EdgeOperator::Sobel { threshold_frac } | EdgeOperator::Prewitt { threshold_frac } => {
                if !(threshold_frac > 0.0 && threshold_frac <= 1.0) {
                    return Err(ImagingError::BadParams(format!(
                        "threshold_frac must be in (0, 1], got {threshold_frac}"
                    )));
                }
            }
            EdgeOperator::Canny { sigma, low, high } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(ImagingError::BadParams(format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
                if !(low > 0.0 && low < high && high <= 1.0) {
                    return Err(ImagingError::BadParams(format!(
                        "hysteresis fractions need 0 < low < high <= 1, got {low} / {high}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Binary edge map: 255 on edges, 0 elsewhere.
pub fn edge_detect(img: &GrayImage, op: EdgeOperator) -> Result<GrayImage, ImagingError> {
    op.validate()?;
    let data = match op {
        EdgeOperator::Sobel { threshold_frac } => gradient_threshold(img, 2, threshold_frac),
        EdgeOperator::Prewitt { threshold_frac } => gradient_threshold(img, 1, threshold_frac),
        EdgeOperator::Canny { sigma, low, high } => canny(img, sigma, low, high),
    };
    Ok(GrayImage::new(img.width(), img.height(), data).expect("same dimensions"))
}

/// 3x3 derivative kernels `[1, c, 1]^T [-1, 0, 1]`; `c` is 2 for Sobel, 1 for Prewitt.
fn gradient_threshold(img: &GrayImage, center: i32, frac: f64) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let p = Padded::new(img, 1);
    let s = p.stride;
    let mut mag2 = Vec::with_capacity(w * h);
    for y in 0..h {
        let top = &p.data[y * s..(y + 1) * s];
        let mid = &p.data[(y + 1) * s..(y + 2) * s];
        let bot = &p.data[(y + 2) * s..(y + 3) * s];
        for x in 0..w {
            let px = |row: &[u8], dx: usize| row[x + dx] as i32;
            let gx = (px(top, 2) + center * px(mid, 2) + px(bot, 2))
                - (px(top, 0) + center * px(mid, 0) + px(bot, 0));
            let gy = (px(bot, 0) + center * px(bot, 1) + px(bot, 2))
                - (px(top, 0) + center * px(top, 1) + px(top, 2));
            mag2.push((gx * gx + gy * gy) as u32);
        }
    }
    let peak = mag2.iter().copied().max().unwrap_or(0);
    if peak == 0 {
        return vec![0; w * h];
    }
    let cut = frac * (peak as f64).sqrt();
    mag2.into_iter()
        .map(|m| if (m as f64).sqrt() >= cut { 255 } else { 0 })
        .collect()
}

/// Normalised 1-D Gaussian with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

fn canny(img: &GrayImage, sigma: f64, low: f64, high: f64) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;

    // Precomputed replicated column/row offsets for each tap.
    let col_idx: Vec<Vec<usize>> = (0..w)
        .map(|x| {
            (0..kernel.len())
                .map(|i| clamp_index(x as isize + i as isize - r, w))
                .collect()
        })
        .collect();
    let src = img.as_bytes();
    let mut horiz = vec![0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (wt, &xi) in kernel.iter().zip(&col_idx[x]) {
                acc += wt * row[xi] as f64;
            }
            horiz[y * w + x] = acc;
        }
    }
    let mut smooth = vec![0f64; w * h];
    for y in 0..h {
        let rows: Vec<usize> = (0..kernel.len())
            .map(|i| clamp_index(y as isize + i as isize - r, h))
            .collect();
        for x in 0..w {
            let mut acc = 0.0;
            for (wt, &yi) in kernel.iter().zip(&rows) {
                acc += wt * horiz[yi * w + x];
            }
            smooth[y * w + x] = acc;
        }
    }

    let at = |x: isize, y: isize| smooth[clamp_index(y, h) * w + clamp_index(x, w)];
    let mut mag = vec![0f64; w * h];
    let mut angle = vec![0f64; w * h];
    let mut peak = 0f64;
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let m = (gx * gx + gy * gy).sqrt();
            let i = y as usize * w + x as usize;
            mag[i] = m;
            angle[i] = gy.atan2(gx).to_degrees();
            if m > peak {
                peak = m;
            }
        }
    }
    if peak == 0.0 {
        return vec![0; w * h];
    }

    let mag_at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let (hi_t, lo_t) = (high * peak, low * peak);
    // 0 = suppressed, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    let mut stack = Vec::new();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let m = mag[i];
            if m <= 0.0 || m < lo_t {
                continue;
            }
            let (dx, dy) = nms_direction(angle[i]);
            if m >= mag_at(x + dx, y + dy) && m >= mag_at(x - dx, y - dy) {
                if m >= hi_t {
                    class[i] = 2;
                    stack.push(i);
                } else {
                    class[i] = 1;
                }
            }
        }
    }

    let mut out = vec![0u8; w * h];
    for &i in &stack {
        out[i] = 255;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 && out[j] == 0 {
                    out[j] = 255;
                    stack.push(j);
                }
            }
        }
    }
    out
}

/// Neighbour offset along the gradient, quantised to 45 degree sectors.
/// Image y grows downward.
pub(crate) fn nms_direction(angle_deg: f64) -> (isize, isize) {
    let a = if angle_deg < 0.0 {
        angle_deg + 180.0
    } else {
        angle_deg
    };
    if !(22.5..157.5).contains(&a) {
        (1, 0)
    } else if a < 67.5 {
        (1, 1)
    } else if a < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

use serde::{Deserialize, Serialize};

use super::{GrayImage, ImagingError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Mean,
    Median,
}

/// k x k mean or median smoothing with replicated borders.
pub fn noise_filter(img: &GrayImage, kind: FilterKind, k: usize) -> Result<GrayImage, ImagingError> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(ImagingError::BadKernel(format!(
            "window must be odd and at least 3, got {k}"
        )));
    }
    if k > img.width().min(img.height()) {
        return Err(ImagingError::BadKernel(format!(
            "window {k} exceeds image size {}x{}",
            img.width(),
            img.height()
        )));
    }
    let padded = Padded::new(img, k / 2);
    let data = match kind {
        FilterKind::Mean => box_mean(&padded, img.width(), img.height(), k),
        FilterKind::Median => sliding_median(&padded, img.width(), img.height(), k),
    };
    Ok(GrayImage::new(img.width(), img.height(), data).expect("same dimensions"))
}

/// Copy of an image with `r` replicated pixels on every side.
pub(crate) struct Padded {
    pub(crate) stride: usize,
    pub(crate) data: Vec<u8>,
}

impl Padded {
    pub(crate) fn new(img: &GrayImage, r: usize) -> Self {
        let stride = img.width() + 2 * r;
        let rows = img.height() + 2 * r;
        let mut data = Vec::with_capacity(stride * rows);
        for py in 0..rows {
            let y = py as isize - r as isize;
            for px in 0..stride {
                data.push(img.get_clamped(px as isize - r as isize, y));
            }
        }
        Self { stride, data }
    }

    #[inline]
    fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.stride..(y + 1) * self.stride]
    }
}

fn box_mean(p: &Padded, width: usize, height: usize, k: usize) -> Vec<u8> {
    let n = (k * k) as u32;
    let mut out = Vec::with_capacity(width * height);
    // Vertical sums over the current k rows, one per padded column.
    let mut col = vec![0u32; p.stride];
    for y in 0..k {
        for (c, &v) in col.iter_mut().zip(p.row(y)) {
            *c += v as u32;
        }
    }
    for y in 0..height {
        if y > 0 {
            for ((c, &old), &new) in col.iter_mut().zip(p.row(y - 1)).zip(p.row(y + k - 1)) {
                *c = *c - old as u32 + new as u32;
            }
        }
        let mut sum: u32 = col[..k].iter().sum();
        for x in 0..width {
            if x > 0 {
                sum = sum - col[x - 1] + col[x + k - 1];
            }
            out.push(((2 * sum + n) / (2 * n)) as u8);
        }
    }
    out
}

fn sliding_median(p: &Padded, width: usize, height: usize, k: usize) -> Vec<u8> {
    let rank = (k * k / 2 + 1) as u32;
    let mut out = Vec::with_capacity(width * height);
    let mut hist = [0u32; 256];
    for y in 0..height {
        hist.fill(0);
        for wy in y..y + k {
            for &v in &p.row(wy)[..k] {
                hist[v as usize] += 1;
            }
        }
        for x in 0..width {
            if x > 0 {
                for wy in y..y + k {
                    let row = p.row(wy);
                    hist[row[x - 1] as usize] -= 1;
                    hist[row[x + k - 1] as usize] += 1;
                }
            }
            let mut seen = 0;
            let mut level = 0;
            for (g, &c) in hist.iter().enumerate() {
                seen += c;
                if seen >= rank {
                    level = g;
                    break;
                }
            }
            out.push(level as u8);
        }
    }
    out
}

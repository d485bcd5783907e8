//! Naive reference implementations of the imaging operations.
//!
//! Written directly from the operation definitions with nested per-pixel
//! loops over 2-D vectors and no shared code with the library kernels.
#![allow(dead_code, clippy::needless_range_loop, clippy::manual_range_contains)]

pub type Plane = Vec<Vec<u8>>;

pub fn plane_from(width: usize, height: usize, bytes: &[u8]) -> Plane {
    (0..height)
        .map(|y| bytes[y * width..(y + 1) * width].to_vec())
        .collect()
}

pub fn flatten(p: &Plane) -> Vec<u8> {
    p.iter().flatten().copied().collect()
}

fn at(p: &Plane, x: i64, y: i64) -> u8 {
    let h = p.len() as i64;
    let w = p[0].len() as i64;
    let cx = if x < 0 { 0 } else if x >= w { w - 1 } else { x };
    let cy = if y < 0 { 0 } else if y >= h { h - 1 } else { y };
    p[cy as usize][cx as usize]
}

pub fn raw_bits(w: u64, h: u64, bpp: u64) -> u64 {
    let mut total = 0u64;
    for _ in 0..h {
        total += w * bpp;
    }
    total
}

/// Interleaved RGB bytes to gray plane.
pub fn gray(width: usize, height: usize, rgb: &[u8]) -> Plane {
    let mut out = vec![vec![0u8; width]; height];
    for y in 0..height {
        for x in 0..width {
            let i = (y * width + x) * 3;
            let (r, g, b) = (rgb[i] as f64, rgb[i + 1] as f64, rgb[i + 2] as f64);
            let v = 0.2989 * r + 0.5870 * g + 0.1140 * b;
            out[y][x] = round_half_away(v).clamp(0.0, 255.0) as u8;
        }
    }
    out
}

fn round_half_away(v: f64) -> f64 {
    let f = v.abs().floor();
    let frac = v.abs() - f;
    let m = if frac >= 0.5 { f + 1.0 } else { f };
    if v < 0.0 {
        -m
    } else {
        m
    }
}

pub fn complement_bytes(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().map(|&v| 255 - v).collect()
}

pub fn histogram(p: &Plane) -> Vec<u64> {
    let mut bins = vec![0u64; 256];
    for g in 0..256usize {
        for row in p {
            for &v in row {
                if v as usize == g {
                    bins[g] += 1;
                }
            }
        }
    }
    bins
}

pub fn gray_adjust(p: &Plane, low: f64, high: f64, gamma: f64) -> Plane {
    p.iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    let mut x = v as f64 / 255.0;
                    if x < low {
                        x = low;
                    }
                    if x > high {
                        x = high;
                    }
                    let t = ((x - low) / (high - low)).powf(gamma);
                    round_half_away(255.0 * t).clamp(0.0, 255.0) as u8
                })
                .collect()
        })
        .collect()
}

fn window(p: &Plane, x: usize, y: usize, k: usize) -> Vec<u8> {
    let r = (k / 2) as i64;
    let mut vals = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            vals.push(at(p, x as i64 + dx, y as i64 + dy));
        }
    }
    vals
}

pub fn mean_filter(p: &Plane, k: usize) -> Plane {
    let (h, w) = (p.len(), p[0].len());
    let mut out = vec![vec![0u8; w]; h];
    for y in 0..h {
        for x in 0..w {
            let vals = window(p, x, y, k);
            let sum: u64 = vals.iter().map(|&v| v as u64).sum();
            out[y][x] = round_half_away(sum as f64 / vals.len() as f64) as u8;
        }
    }
    out
}

pub fn median_filter(p: &Plane, k: usize) -> Plane {
    let (h, w) = (p.len(), p[0].len());
    let mut out = vec![vec![0u8; w]; h];
    for y in 0..h {
        for x in 0..w {
            let mut vals = window(p, x, y, k);
            vals.sort_unstable();
            out[y][x] = vals[vals.len() / 2];
        }
    }
    out
}

/// Sobel (`center = 2`) or Prewitt (`center = 1`) gradient magnitude threshold.
pub fn gradient_edges(p: &Plane, center: i64, frac: f64) -> Plane {
    let (h, w) = (p.len(), p[0].len());
    let gx_k = [[-1, 0, 1], [-center, 0, center], [-1, 0, 1]];
    let gy_k = [[-1, -center, -1], [0, 0, 0], [1, center, 1]];
    let mut mag = vec![vec![0f64; w]; h];
    let mut peak = 0f64;
    for y in 0..h {
        for x in 0..w {
            let (mut gx, mut gy) = (0i64, 0i64);
            for ky in 0..3 {
                for kx in 0..3 {
                    let v = at(p, x as i64 + kx as i64 - 1, y as i64 + ky as i64 - 1) as i64;
                    gx += gx_k[ky][kx] * v;
                    gy += gy_k[ky][kx] * v;
                }
            }
            let m = ((gx * gx + gy * gy) as f64).sqrt();
            mag[y][x] = m;
            if m > peak {
                peak = m;
            }
        }
    }
    let mut out = vec![vec![0u8; w]; h];
    if peak == 0.0 {
        return out;
    }
    for y in 0..h {
        for x in 0..w {
            if mag[y][x] >= frac * peak {
                out[y][x] = 255;
            }
        }
    }
    out
}

/// Canny: separable Gaussian, Sobel gradient, sector non-maximum suppression,
/// hysteresis by repeated relaxation until stable.
pub fn canny(p: &Plane, sigma: f64, low: f64, high: f64) -> Plane {
    let (h, w) = (p.len() as i64, p[0].len() as i64);
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut kern = Vec::new();
    for i in -r..=r {
        kern.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let total: f64 = kern.iter().sum();
    let kern: Vec<f64> = kern.iter().map(|v| v / total).collect();

    let clampi = |v: i64, n: i64| v.max(0).min(n - 1) as usize;
    let mut horiz = vec![vec![0f64; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for i in 0..kern.len() as i64 {
                acc += kern[i as usize] * p[y as usize][clampi(x + i - r, w)] as f64;
            }
            horiz[y as usize][x as usize] = acc;
        }
    }
    let mut s = vec![vec![0f64; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for i in 0..kern.len() as i64 {
                acc += kern[i as usize] * horiz[clampi(y + i - r, h)][x as usize];
            }
            s[y as usize][x as usize] = acc;
        }
    }
    let sv = |x: i64, y: i64| s[clampi(y, h)][clampi(x, w)];
    let mut mag = vec![vec![0f64; w as usize]; h as usize];
    let mut ang = vec![vec![0f64; w as usize]; h as usize];
    let mut peak = 0f64;
    for y in 0..h {
        for x in 0..w {
            let gx = (sv(x + 1, y - 1) + 2.0 * sv(x + 1, y) + sv(x + 1, y + 1))
                - (sv(x - 1, y - 1) + 2.0 * sv(x - 1, y) + sv(x - 1, y + 1));
            let gy = (sv(x - 1, y + 1) + 2.0 * sv(x, y + 1) + sv(x + 1, y + 1))
                - (sv(x - 1, y - 1) + 2.0 * sv(x, y - 1) + sv(x + 1, y - 1));
            let m = (gx * gx + gy * gy).sqrt();
            mag[y as usize][x as usize] = m;
            ang[y as usize][x as usize] = gy.atan2(gx).to_degrees();
            peak = peak.max(m);
        }
    }
    let mut out = vec![vec![0u8; w as usize]; h as usize];
    if peak == 0.0 {
        return out;
    }
    let mv = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            mag[y as usize][x as usize]
        }
    };
    let mut strong = vec![vec![false; w as usize]; h as usize];
    let mut weak = vec![vec![false; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            let m = mag[y as usize][x as usize];
            let mut a = ang[y as usize][x as usize];
            if a < 0.0 {
                a += 180.0;
            }
            let (dx, dy) = if a < 22.5 || a >= 157.5 {
                (1, 0)
            } else if a < 67.5 {
                (1, 1)
            } else if a < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let is_max = m > 0.0 && m >= mv(x + dx, y + dy) && m >= mv(x - dx, y - dy);
            if is_max && m >= high * peak {
                strong[y as usize][x as usize] = true;
            } else if is_max && m >= low * peak {
                weak[y as usize][x as usize] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                if !weak[y as usize][x as usize] || strong[y as usize][x as usize] {
                    continue;
                }
                let mut touches = false;
                for ny in y - 1..=y + 1 {
                    for nx in x - 1..=x + 1 {
                        if nx >= 0 && ny >= 0 && nx < w && ny < h && strong[ny as usize][nx as usize]
                        {
                            touches = true;
                        }
                    }
                }
                if touches {
                    strong[y as usize][x as usize] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for y in 0..h as usize {
        for x in 0..w as usize {
            if strong[y][x] {
                out[y][x] = 255;
            }
        }
    }
    out
}

/// One clockwise quarter turn of interleaved bytes with `ch` channels.
pub fn rotate_cw(width: usize, height: usize, ch: usize, bytes: &[u8]) -> (usize, usize, Vec<u8>) {
    let (nw, nh) = (height, width);
    let mut out = vec![0u8; bytes.len()];
    for ny in 0..nh {
        for nx in 0..nw {
            // destination (nx, ny) came from source (x, y) = (ny, height - 1 - nx)
            let (sx, sy) = (ny, height - 1 - nx);
            for c in 0..ch {
                out[(ny * nw + nx) * ch + c] = bytes[(sy * width + sx) * ch + c];
            }
        }
    }
    (nw, nh, out)
}

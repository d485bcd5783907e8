//! Binary PPM (P6), 8 bits per channel.

use std::path::Path;

use super::StoreError;
use crate::imaging::RgbImage;

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.as_bytes().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_bytes());
    out
}

struct Header<'a> {
    rest: &'a [u8],
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        loop {
            match self.rest.first() {
                Some(c) if c.is_ascii_whitespace() => self.rest = &self.rest[1..],
                Some(b'#') => {
                    let end = self
                        .rest
                        .iter()
                        .position(|&c| c == b'\n')
                        .unwrap_or(self.rest.len());
                    self.rest = &self.rest[end..];
                }
                _ => return,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, StoreError> {
        self.skip_space_and_comments();
        let digits = self.rest.iter().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Err(StoreError::MalformedPpm(format!("missing {what}")));
        }
        let text = std::str::from_utf8(&self.rest[..digits]).expect("ascii digits");
        self.rest = &self.rest[digits..];
        text.parse()
            .map_err(|_| StoreError::MalformedPpm(format!("{what} out of range")))
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, StoreError> {
    let rest = bytes
        .strip_prefix(b"P6")
        .ok_or_else(|| StoreError::MalformedPpm("not a binary PPM (P6)".into()))?;
    let mut h = Header { rest };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(StoreError::MalformedPpm(format!(
            "maxval {maxval} unsupported; only 8-bit (255) images"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match h.rest.first() {
        Some(c) if c.is_ascii_whitespace() => {}
        _ => return Err(StoreError::MalformedPpm("no separator after maxval".into())),
    }
    let pixels = &h.rest[1..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| StoreError::MalformedPpm("dimensions overflow".into()))?;
    if pixels.len() != expected {
        return Err(StoreError::MalformedPpm(format!(
            "{width}x{height} raster needs {expected} bytes, file has {}",
            pixels.len()
        )));
    }
    RgbImage::new(width, height, pixels.to_vec()).map_err(|e| StoreError::MalformedPpm(e.to_string()))
}

pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    std::fs::write(path, encode_ppm(img)).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage, StoreError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_ppm(&bytes)
}

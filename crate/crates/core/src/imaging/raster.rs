use super::ImagingError;

/// Row-major 8-bit raster with `CH` interleaved channels per pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Raster<const CH: usize> {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// 24-bit RGB image, channels in R, G, B order.
pub type RgbImage = Raster<3>;

/// 8-bit single channel image. A binary image is a gray image holding only 0 and 255.
pub type GrayImage = Raster<1>;

impl<const CH: usize> Raster<CH> {
    pub const CHANNELS: usize = CH;

    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyImage);
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(CH))
            .ok_or(ImagingError::Overflow)?;
        if data.len() != expected {
            return Err(ImagingError::BufferSize {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// An image with every channel of every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: [u8; CH]) -> Result<Self, ImagingError> {
        let n = width.checked_mul(height).ok_or(ImagingError::Overflow)?;
        let mut data = Vec::with_capacity(n * CH);
        for _ in 0..n {
            data.extend_from_slice(&value);
        }
        Self::new(width, height, data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; CH],
    ) -> Result<Self, ImagingError> {
        let n = width.checked_mul(height).ok_or(ImagingError::Overflow)?;
        let mut data = Vec::with_capacity(n * CH);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; CH] {
        let i = (y * self.width + x) * CH;
        let mut px = [0u8; CH];
        px.copy_from_slice(&self.data[i..i + CH]);
        px
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, px: [u8; CH]) {
        let i = (y * self.width + x) * CH;
        self.data[i..i + CH].copy_from_slice(&px);
    }

    /// Pixel lookup with coordinates clamped into the image (edge replication).
    pub fn pixel_clamped(&self, x: isize, y: isize) -> [u8; CH] {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixel(cx, cy)
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, u8> {
        self.data.chunks_exact(self.width * CH)
    }
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Edge-replicated read.
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0 || v == 255)
    }

    /// Replicates the gray channel into R, G and B.
    pub fn to_rgb(&self) -> RgbImage {
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v]);
        }
        RgbImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

impl<const CH: usize> std::fmt::Debug for Raster<CH> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("channels", &CH)
            .field("width", &self.width)
            .field("height", &self.height)
            .field("bytes", &self.data.len())
            .finish()
    }
}

/// Either flavour of raster; the value threaded through an enhancement pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyImage {
    Rgb(RgbImage),
    Gray(GrayImage),
}

impl AnyImage {
    pub fn width(&self) -> usize {
        match self {
            AnyImage::Rgb(i) => i.width(),
            AnyImage::Gray(i) => i.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            AnyImage::Rgb(i) => i.height(),
            AnyImage::Gray(i) => i.height(),
        }
    }

    /// RGB view of the image; gray values are replicated across channels.
    pub fn to_rgb(&self) -> RgbImage {
        match self {
            AnyImage::Rgb(i) => i.clone(),
            AnyImage::Gray(g) => g.to_rgb(),
        }
    }

    pub fn is_gray(&self) -> bool {
        matches!(self, AnyImage::Gray(_))
    }
}

impl From<RgbImage> for AnyImage {
    fn from(img: RgbImage) -> Self {
        AnyImage::Rgb(img)
    }
}

impl From<GrayImage> for AnyImage {
    fn from(img: GrayImage) -> Self {
        AnyImage::Gray(img)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            RgbImage::new(2, 2, vec![0; 11]),
            Err(ImagingError::BufferSize {
                expected: 12,
                actual: 11
            })
        ));
        assert!(matches!(
            GrayImage::new(0, 3, vec![]),
            Err(ImagingError::EmptyImage)
        ));
    }

    #[test]
    fn clamped_reads_replicate_edges() {
        let g = GrayImage::new(3, 1, vec![1, 2, 3]).unwrap();
        assert_eq!(g.get_clamped(-5, 0), 1);
        assert_eq!(g.get_clamped(9, 4), 3);
    }

    #[test]
    fn gray_to_rgb_replicates() {
        let g = GrayImage::new(2, 1, vec![9, 200]).unwrap();
        assert_eq!(g.to_rgb().as_bytes(), &[9, 9, 9, 200, 200, 200]);
    }
}

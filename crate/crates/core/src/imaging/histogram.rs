use serde::{Deserialize, Serialize};

use super::GrayImage;

/// Frequency of each gray level in an 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Histogram256 {
    #[serde(with = "bins_serde")]
    bins: [u64; 256],
}

impl Histogram256 {
    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Gray level with the highest count; lowest level wins ties.
    pub fn mode(&self) -> u8 {
        let mut best = 0;
        for g in 1..256 {
            if self.bins[g] > self.bins[best] {
                best = g;
            }
        }
        best as u8
    }
}

impl std::ops::Index<u8> for Histogram256 {
    type Output = u64;

    fn index(&self, level: u8) -> &u64 {
        &self.bins[level as usize]
    }
}

pub fn histogram(img: &GrayImage) -> Histogram256 {
    // Four interleaved tables break the store-to-load dependency on runs of
    // equal pixels.
    let mut parts = [[0u64; 256]; 4];
    let mut chunks = img.as_bytes().chunks_exact(4);
    for c in &mut chunks {
        parts[0][c[0] as usize] += 1;
        parts[1][c[1] as usize] += 1;
        parts[2][c[2] as usize] += 1;
        parts[3][c[3] as usize] += 1;
    }
    for &v in chunks.remainder() {
        parts[0][v as usize] += 1;
    }
    let mut bins = [0u64; 256];
    for (g, bin) in bins.iter_mut().enumerate() {
        *bin = parts[0][g] + parts[1][g] + parts[2][g] + parts[3][g];
    }
    Histogram256 { bins }
}

mod bins_serde {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(bins: &[u64; 256], s: S) -> Result<S::Ok, S::Error> {
        bins.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u64; 256], D::Error> {
        let v = Vec::<u64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<u64>| D::Error::invalid_length(v.len(), &"256 bins"))
    }
}

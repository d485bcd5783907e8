use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::info;
use serde::{Deserialize, Serialize};

use super::ppm::{encode_ppm, load_image};
use super::{Frame, FrameBuffer, StoreError};
use crate::imaging::{EnhancementOp, RgbImage};

/// Mission label used for snaps taken by hand.
pub const MANUAL: &str = "manual";

/// Sidecar metadata written next to every stored image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub id: String,
    /// Position in snap order within the data directory.
    pub index: u64,
    /// Sequence number of the source frame.
    pub seq: u64,
    pub timestamp_ms: u64,
    pub mission: String,
    pub width: usize,
    pub height: usize,
    /// Enhancement steps applied to produce this image; empty for raw captures.
    #[serde(default)]
    pub lineage: Vec<EnhancementOp>,
    /// Snapshot this one was processed from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub image: RgbImage,
    pub path: PathBuf,
}

/// Directory of `<id>.ppm` images with `<id>.json` sidecars.
#[derive(Debug)]
pub struct SnapshotStore {
    dir: PathBuf,
    next_index: Mutex<u64>,
}

impl SnapshotStore {
    /// Opens (creating if needed) `<data_dir>/snapshots`.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = data_dir.as_ref().join("snapshots");
        fs::create_dir_all(&dir).map_err(|source| StoreError::Io {
            path: dir.clone(),
            source,
        })?;
        let store = Self {
            dir,
            next_index: Mutex::new(0),
        };
        let next = store.list()?.last().map_or(1, |m| m.index + 1);
        *store.next_index.lock().unwrap() = next;
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Copies the latest frame in `frames` into the store.
    pub fn snap(&self, frames: &FrameBuffer, mission: &str) -> Result<Snapshot, StoreError> {
        let frame = frames.latest().ok_or(StoreError::NoFrameYet)?;
        self.save_frame(&frame, mission)
    }

    pub fn save_frame(&self, frame: &Frame, mission: &str) -> Result<Snapshot, StoreError> {
        self.save(
            &frame.image,
            frame.seq,
            frame.timestamp_ms,
            mission,
            Vec::new(),
            None,
        )
    }

    /// Stores a processed image derived from `source`.
    pub fn save_processed(
        &self,
        source: &SnapshotMeta,
        image: &RgbImage,
        lineage: Vec<EnhancementOp>,
    ) -> Result<Snapshot, StoreError> {
        let mut full = source.lineage.clone();
        full.extend(lineage);
        self.save(
            image,
            source.seq,
            source.timestamp_ms,
            &source.mission,
            full,
            Some(source.id.clone()),
        )
    }

    fn save(
        &self,
        image: &RgbImage,
        seq: u64,
        timestamp_ms: u64,
        mission: &str,
        lineage: Vec<EnhancementOp>,
        source_id: Option<String>,
    ) -> Result<Snapshot, StoreError> {
        let mut next = self.next_index.lock().unwrap();
        let index = *next;
        let id = format!("snap-{index:06}");
        let meta = SnapshotMeta {
            id: id.clone(),
            index,
            seq,
            timestamp_ms,
            mission: mission.to_string(),
            width: image.width(),
            height: image.height(),
            lineage,
            source_id,
        };
        let path = self.image_path(&id);
        self.write_atomic(&path, &encode_ppm(image))?;
        let json = serde_json::to_vec_pretty(&meta)?;
        self.write_atomic(&self.meta_path(&id), &json)?;
        *next += 1;
        info!("stored snapshot {id} ({mission})");
        Ok(Snapshot {
            meta,
            image: image.clone(),
            path,
        })
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let tmp = path.with_extension("tmp");
        let io = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        fs::write(&tmp, bytes).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    fn image_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.ppm"))
    }

    fn meta_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn check_id(id: &str) -> Result<(), StoreError> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(StoreError::NotFound(id.to_string()));
        }
        Ok(())
    }

    /// All snapshots in snap order.
    pub fn list(&self) -> Result<Vec<SnapshotMeta>, StoreError> {
        let entries = fs::read_dir(&self.dir).map_err(|source| StoreError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let mut metas = Vec::new();
        for entry in entries {
            let path = entry
                .map_err(|source| StoreError::Io {
                    path: self.dir.clone(),
                    source,
                })?
                .path();
            if path.extension().is_some_and(|e| e == "json") {
                let bytes = fs::read(&path).map_err(|source| StoreError::Io {
                    path: path.clone(),
                    source,
                })?;
                metas.push(serde_json::from_slice::<SnapshotMeta>(&bytes)?);
            }
        }
        metas.sort_by_key(|m| m.index);
        Ok(metas)
    }

    pub fn meta(&self, id: &str) -> Result<SnapshotMeta, StoreError> {
        Self::check_id(id)?;
        let path = self.meta_path(id);
        let bytes = fs::read(&path).map_err(|source| match source.kind() {
            std::io::ErrorKind::NotFound => StoreError::NotFound(id.to_string()),
            _ => StoreError::Io { path, source },
        })?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    /// Raw PPM file bytes.
    pub fn ppm_bytes(&self, id: &str) -> Result<Vec<u8>, StoreError> {
        self.meta(id)?;
        let path = self.image_path(id);
        fs::read(&path).map_err(|source| StoreError::Io { path, source })
    }

    pub fn get(&self, id: &str) -> Result<Snapshot, StoreError> {
        let meta = self.meta(id)?;
        let path = self.image_path(id);
        let image = load_image(&path)?;
        Ok(Snapshot { meta, image, path })
    }
}

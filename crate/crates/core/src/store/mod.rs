//! Frame ingest, latest-frame holding and on-disk snapshots.

mod frame;
mod ppm;
mod snapshot;

use std::path::PathBuf;

use thiserror::Error;

pub use frame::{
    decode_record, encode_record, Frame, FrameBuffer, FrameError, FrameReceiver, FRAME_HEADER_LEN,
    FRAME_MAGIC, MAX_RECORD_LEN,
};
pub use ppm::{decode_ppm, encode_ppm, load_image, save_image};
pub use snapshot::{Snapshot, SnapshotMeta, SnapshotStore, MANUAL};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no frame has been received yet")]
    NoFrameYet,
    #[error("snapshot `{0}` not found")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed PPM: {0}")]
    MalformedPpm(String),
    #[error("snapshot metadata: {0}")]
    Metadata(#[from] serde_json::Error),
}

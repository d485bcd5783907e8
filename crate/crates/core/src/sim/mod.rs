//! Software stand-in for the drone: the command state machine, a synthetic
//! nadir camera and a UDP endpoint speaking the same protocol.

mod noise;
mod scene;
mod server;
mod state;

use thiserror::Error;

pub use noise::{inject_noise, NoiseKind, NoiseSpec};
pub use scene::{render_frame, SceneKind, SimScene};
pub use server::{
    serve_endpoint, FaultAction, FaultRule, SimConfig, SimHandle, TranscriptEntry,
    DEFAULT_FRAME_PORT,
};
pub use state::{displacement, step_command, Arena, FlightPhase, Position, SimDroneState, SimRules};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("video stream is off")]
    StreamOff,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid noise: {0}")]
    InvalidNoise(String),
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

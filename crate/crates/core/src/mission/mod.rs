//! Mission scripts and their sequential execution over a link session.

mod exec;
mod plan;

pub use exec::{
    connect_with_retry, execute_mission, EventKind, FrameSource, MissionEvent, MissionOptions,
    MissionReport, MissionStatus, Outcome, SnapshotSink,
};
pub use plan::{build_square_mission, MissionPlan, MissionStep, PlanError, MAX_LEG_CM, SQUARE_SIDE_RANGE};

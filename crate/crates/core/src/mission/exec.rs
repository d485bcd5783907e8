use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{MissionPlan, MissionStep};
use crate::link::{open_session, Command, LinkEndpoint, LinkError, LinkSession};
use crate::store::{Frame, FrameBuffer, SnapshotStore};

/// Where Capture steps get frames from.
pub trait FrameSource {
    /// Newest frame with `seq > after_seq`, waiting up to `timeout`.
    fn wait_newer(&self, after_seq: u64, timeout: Duration) -> Option<Arc<Frame>>;
    /// Sequence number of the frame held right now, 0 if none.
    fn latest_seq(&self) -> u64;
}

impl FrameSource for FrameBuffer {
    fn wait_newer(&self, after_seq: u64, timeout: Duration) -> Option<Arc<Frame>> {
        FrameBuffer::wait_newer(self, after_seq, timeout)
    }

    fn latest_seq(&self) -> u64 {
        self.latest().map_or(0, |f| f.seq)
    }
}

/// Where captured frames go. Returns an identifier for the event log.
pub trait SnapshotSink {
    fn store(&mut self, frame: &Frame, mission: &str) -> Result<String, String>;
}

impl SnapshotSink for &SnapshotStore {
    fn store(&mut self, frame: &Frame, mission: &str) -> Result<String, String> {
        self.save_frame(frame, mission)
            .map(|s| s.meta.id)
            .map_err(|e| e.to_string())
    }
}

impl SnapshotSink for Vec<Arc<Frame>> {
    fn store(&mut self, frame: &Frame, _mission: &str) -> Result<String, String> {
        self.push(Arc::new(frame.clone()));
        Ok(format!("frame-{}", frame.seq))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionOptions {
    /// Pause after every accepted motion command.
    #[serde(with = "millis")]
    pub settle: Duration,
    /// How long a Capture waits for a frame newer than the last motion.
    #[serde(with = "millis")]
    pub capture_timeout: Duration,
}

impl Default for MissionOptions {
    fn default() -> Self {
        Self {
            settle: Duration::from_millis(500),
            capture_timeout: Duration::from_secs(3),
        }
    }
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Connect,
    Fly,
    Capture,
    Wait,
    /// Landing attempted after a failed step.
    Land,
    Stop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "reason", rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionEvent {
    /// Milliseconds since execution began.
    pub at_ms: u64,
    /// 1-based plan step, absent for connect/land/stop.
    pub step: Option<usize>,
    pub kind: EventKind,
    pub detail: String,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "lowercase")]
pub enum MissionStatus {
    Completed,
    Aborted(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionReport {
    pub mission: String,
    pub events: Vec<MissionEvent>,
    pub frames_captured: usize,
    pub status: MissionStatus,
}

impl MissionReport {
    pub fn is_completed(&self) -> bool {
        self.status == MissionStatus::Completed
    }

    /// Identifiers returned by the sink for successful captures, in order.
    pub fn captured_ids(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Capture && e.outcome == Outcome::Ok)
            .map(|e| e.detail.as_str())
            .collect()
    }

    /// `connect (fly|capture|wait)* stop`.
    pub fn follows_connect_stop_pattern(&self) -> bool {
        let kinds: Vec<EventKind> = self.events.iter().map(|e| e.kind).collect();
        match kinds.as_slice() {
            [EventKind::Connect, middle @ .., EventKind::Stop] => middle
                .iter()
                .all(|k| matches!(k, EventKind::Fly | EventKind::Capture | EventKind::Wait)),
            _ => false,
        }
    }
}

/// Opens a session, making up to `n` single-handshake attempts.
pub fn connect_with_retry(ep: &LinkEndpoint, n: u32) -> Result<LinkSession, LinkError> {
    let n = n.max(1);
    let single = LinkEndpoint {
        max_retries: 1,
        ..ep.clone()
    };
    let mut last = None;
    for attempt in 1..=n {
        match open_session(&single) {
            Ok(mut s) => {
                s.set_attempts(attempt);
                info!("connected to {} on attempt {attempt}", ep.drone_addr);
                return Ok(s);
            }
            Err(e @ (LinkError::BindFailure { .. } | LinkError::InvalidEndpoint(_))) => return Err(e),
            Err(e) => {
                warn!("connect attempt {attempt}/{n} failed: {e}");
                last = Some(e);
            }
        }
    }
    match last {
        Some(LinkError::DroneError { command, reply }) => Err(LinkError::DroneError { command, reply }),
        _ => Err(LinkError::ConnectTimeout { attempts: n }),
    }
}

struct Log {
    started: Instant,
    events: Vec<MissionEvent>,
}

impl Log {
    fn push(&mut self, step: Option<usize>, kind: EventKind, detail: String, outcome: Outcome) {
        self.events.push(MissionEvent {
            at_ms: self.started.elapsed().as_millis() as u64,
            step,
            kind,
            detail,
            outcome,
        });
    }
}

/// Runs `plan` step by step. Failures are reported, never returned.
pub fn execute_mission(
    session: &mut LinkSession,
    plan: &MissionPlan,
    frames: &dyn FrameSource,
    sink: &mut dyn SnapshotSink,
    opts: &MissionOptions,
) -> MissionReport {
    let mut log = Log {
        started: Instant::now(),
        events: Vec::new(),
    };
    log.push(
        None,
        EventKind::Connect,
        format!(
            "{} after {} attempt(s)",
            session.endpoint().drone_addr,
            session.attempts()
        ),
        if session.sdk_mode() {
            Outcome::Ok
        } else {
            Outcome::Failed("session not in SDK mode".into())
        },
    );
    let mut frames_captured = 0;
    let status = match plan.validate() {
        Err(e) => MissionStatus::Aborted(format!("invalid plan: {e}")),
        Ok(()) if !session.sdk_mode() => MissionStatus::Aborted("session not in SDK mode".into()),
        Ok(()) => run_steps(session, plan, frames, sink, opts, &mut log, &mut frames_captured),
    };
    log.push(
        None,
        EventKind::Stop,
        plan.name.clone(),
        match &status {
            MissionStatus::Completed => Outcome::Ok,
            MissionStatus::Aborted(r) => Outcome::Failed(r.clone()),
        },
    );
    info!("mission {} finished: {status:?}", plan.name);
    MissionReport {
        mission: plan.name.clone(),
        events: log.events,
        frames_captured,
        status,
    }
}

fn run_steps(
    session: &mut LinkSession,
    plan: &MissionPlan,
    frames: &dyn FrameSource,
    sink: &mut dyn SnapshotSink,
    opts: &MissionOptions,
    log: &mut Log,
    frames_captured: &mut usize,
) -> MissionStatus {
    let mut mark = frames.latest_seq();
    for (i, step) in plan.steps.iter().enumerate() {
        let n = i + 1;
        match step {
            MissionStep::Fly(cmd) => match session.send_command(cmd) {
                Ok(reply) => {
                    log.push(Some(n), EventKind::Fly, cmd.to_string(), Outcome::Ok);
                    if cmd.kind().is_motion() {
                        if !opts.settle.is_zero() {
                            std::thread::sleep(opts.settle);
                        }
                        mark = frames.latest_seq();
                    }
                    let _ = reply;
                }
                Err(e) => {
                    let reason = format!("step {n} `{cmd}`: {e}");
                    log.push(Some(n), EventKind::Fly, cmd.to_string(), Outcome::Failed(e.to_string()));
                    let landing = match session.send_command(&Command::Land) {
                        Ok(_) => Outcome::Ok,
                        Err(e) => Outcome::Failed(e.to_string()),
                    };
                    log.push(None, EventKind::Land, "land".into(), landing);
                    return MissionStatus::Aborted(reason);
                }
            },
            MissionStep::Capture => {
                let outcome = match frames.wait_newer(mark, opts.capture_timeout) {
                    None => Err("no fresh frame".to_string()),
                    Some(frame) => sink.store(&frame, &plan.name),
                };
                match outcome {
                    Ok(id) => {
                        *frames_captured += 1;
                        log.push(Some(n), EventKind::Capture, id, Outcome::Ok);
                    }
                    Err(e) => log.push(Some(n), EventKind::Capture, String::new(), Outcome::Failed(e)),
                }
            }
            MissionStep::Wait(ms) => {
                std::thread::sleep(Duration::from_millis(*ms));
                log.push(Some(n), EventKind::Wait, format!("{ms} ms"), Outcome::Ok);
            }
        }
    }
    MissionStatus::Completed
}

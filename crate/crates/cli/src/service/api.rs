use std::net::SocketAddrV4;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::Json;
use gcs_core::imaging::{apply_pipeline, check_pipeline, EnhancementOp, Histogram256};
use gcs_core::link::{Command, LinkEvent, Response};
use gcs_core::mission::{
    build_square_mission, connect_with_retry, execute_mission, MissionPlan, MissionReport,
};
use gcs_core::sim::SimDroneState;
use gcs_core::store::SnapshotMeta;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::error::{ApiError, ErrorCode};
use super::{AppState, AuditEntry};

type ApiResult<T> = Result<Json<T>, ApiError>;

/// JSON body parser that reports failures as [`ApiError`]. An empty body
/// parses as `{}`.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let raw: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(raw).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn audited<T>(state: &AppState, action: &str, r: Result<T, ApiError>) -> Result<T, ApiError> {
    match &r {
        Ok(_) => state.audit(action, "ok"),
        Err(e) => state.audit(action, format!("{:?}: {}", e.code, e.detail)),
    }
    r
}

pub async fn health() -> Json<Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

pub async fn fallback() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such endpoint")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FrameStats {
    pub ingested: u64,
    pub malformed: u64,
    pub latest_seq: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateView {
    pub connected: bool,
    pub sdk_mode: bool,
    pub sim_mode: bool,
    pub drone_addr: SocketAddrV4,
    pub telemetry: SimDroneState,
    pub frames: FrameStats,
    pub snapshots: usize,
}

pub async fn state(State(st): State<AppState>) -> ApiResult<StateView> {
    let link = st.executor.status();
    let snapshots = st.store.list()?.len();
    Ok(Json(StateView {
        connected: link.connected,
        sdk_mode: link.sdk_mode,
        sim_mode: st.sim.is_some(),
        drone_addr: st.endpoint.drone_addr,
        telemetry: st.drone_state(),
        frames: FrameStats {
            ingested: st.frames.ingested(),
            malformed: st.frames.malformed(),
            latest_seq: st.frames.latest().map(|f| f.seq),
        },
        snapshots,
    }))
}

#[derive(Serialize)]
pub struct EventsView {
    audit: Vec<AuditEntry>,
    link: Vec<LinkEvent>,
}

pub async fn events(State(st): State<AppState>) -> Json<EventsView> {
    Json(EventsView {
        audit: st.audit_log(),
        link: st.executor.status().events,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConnectBody {
    retries: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConnectInfo {
    pub sdk_mode: bool,
    pub attempts: u32,
    pub drone_addr: SocketAddrV4,
}

pub async fn connect(State(st): State<AppState>, body: Bytes) -> ApiResult<ConnectInfo> {
    let r = async {
        let req: ConnectBody = parse_body(&body)?;
        let n = req.retries.unwrap_or(st.cfg.connect_retries);
        if n == 0 {
            return Err(ApiError::bad_request("retries must be at least 1"));
        }
        let ep = st.endpoint.clone();
        st.executor
            .run(move |ctx| {
                if ctx.session.is_some() {
                    return Err(ApiError::bad_request("already connected"));
                }
                let s = connect_with_retry(&ep, n)?;
                let info = ConnectInfo {
                    sdk_mode: s.sdk_mode(),
                    attempts: s.attempts(),
                    drone_addr: ep.drone_addr,
                };
                ctx.session = Some(s);
                Ok(info)
            })
            .await
    }
    .await;
    audited(&st, "connect", r).map(Json)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandBody {
    command: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CommandReply {
    pub command: String,
    pub reply: Response,
}

pub async fn command(State(st): State<AppState>, body: Bytes) -> ApiResult<CommandReply> {
    let r = async {
        let req: CommandBody = parse_body(&body)?;
        let cmd: Command = req
            .command
            .parse()
            .map_err(|e| ApiError::bad_request(format!("{e}")))?;
        cmd.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
        st.executor
            .run(move |ctx| {
                let s = ctx.session.as_mut().ok_or_else(ApiError::not_connected)?;
                let reply = s.send_command(&cmd)?;
                Ok(CommandReply {
                    command: cmd.to_string(),
                    reply,
                })
            })
            .await
    }
    .await;
    audited(&st, &format!("command {}", req_text(&body)), r).map(Json)
}

fn req_text(body: &Bytes) -> String {
    serde_json::from_slice::<Value>(body)
        .ok()
        .and_then(|v| v.get("command").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_default()
}

async fn fly(st: &AppState, plan: MissionPlan) -> Result<MissionReport, ApiError> {
    let frames = st.frames.clone();
    let store = st.store.clone();
    let opts = st.cfg.mission;
    let streaming = st.drone_state().streaming;
    st.executor
        .run(move |ctx| {
            let s = ctx.session.as_mut().ok_or_else(ApiError::not_connected)?;
            if !streaming && plan.capture_steps() > 0 {
                s.send_command(&Command::StreamOn)?;
            }
            let mut sink = &*store;
            Ok(execute_mission(s, &plan, &*frames, &mut sink, &opts))
        })
        .await
}

fn audit_report(st: &AppState, r: &Result<MissionReport, ApiError>, name: &str) {
    match r {
        Ok(rep) => st.audit(
            format!("mission {name}"),
            format!("{:?}, {} frame(s), {} event(s)", rep.status, rep.frames_captured, rep.events.len()),
        ),
        Err(e) => st.audit(format!("mission {name}"), format!("{:?}: {}", e.code, e.detail)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareBody {
    side_cm: u32,
}

pub async fn mission_square(State(st): State<AppState>, body: Bytes) -> ApiResult<MissionReport> {
    let r = async {
        let req: SquareBody = parse_body(&body)?;
        let plan = build_square_mission(req.side_cm)?;
        fly(&st, plan).await
    }
    .await;
    audit_report(&st, &r, "square");
    r.map(Json)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptBody {
    #[serde(default = "default_script_name")]
    name: String,
    script: String,
}

fn default_script_name() -> String {
    "script".into()
}

pub async fn mission_script(State(st): State<AppState>, body: Bytes) -> ApiResult<MissionReport> {
    let r = async {
        let req: ScriptBody = parse_body(&body)?;
        let plan = MissionPlan::parse_script(req.name, &req.script)?;
        fly(&st, plan).await
    }
    .await;
    audit_report(&st, &r, "script");
    r.map(Json)
}

pub async fn snap(State(st): State<AppState>) -> ApiResult<SnapshotMeta> {
    let store = st.store.clone();
    let frames = st.frames.clone();
    let r = tokio::task::spawn_blocking(move || store.snap(&frames, gcs_core::store::MANUAL))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))
        .and_then(|r| r.map_err(ApiError::from))
        .map(|s| s.meta);
    audited(&st, "snap", r).map(Json)
}

pub async fn list_snapshots(State(st): State<AppState>) -> ApiResult<Vec<SnapshotMeta>> {
    Ok(Json(st.store.list()?))
}

pub async fn snapshot_meta(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<SnapshotMeta> {
    Ok(Json(st.store.meta(&id)?))
}

pub async fn snapshot_ppm(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let bytes = st.store.ppm_bytes(&id)?;
    Ok(([(header::CONTENT_TYPE, "image/x-portable-pixmap")], bytes))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessBody {
    snapshot_id: String,
    pipeline: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StepHistogram {
    pub step: usize,
    pub bins: Histogram256,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProcessResponse {
    pub snapshot: SnapshotMeta,
    /// The pipeline ended on a single-channel image (stored with the value replicated).
    pub gray: bool,
    pub histograms: Vec<StepHistogram>,
}

fn parse_pipeline(raw: Vec<Value>) -> Result<Vec<EnhancementOp>, ApiError> {
    raw.into_iter()
        .enumerate()
        .map(|(i, v)| {
            let op: EnhancementOp = serde_json::from_value(v).map_err(|e| ApiError {
                code: ErrorCode::BadRequest,
                detail: format!("step {}: {e}", i + 1),
                step: Some(i + 1),
            })?;
            op.validate().map_err(|e| ApiError {
                code: ErrorCode::BadRequest,
                detail: format!("step {}: {e}", i + 1),
                step: Some(i + 1),
            })?;
            Ok(op)
        })
        .collect()
}

pub async fn process(State(st): State<AppState>, body: Bytes) -> ApiResult<ProcessResponse> {
    let r = async {
        let req: ProcessBody = parse_body(&body)?;
        let ops = parse_pipeline(req.pipeline)?;
        check_pipeline(false, &ops)?;
        let store = st.store.clone();
        tokio::task::spawn_blocking(move || {
            let src = store.get(&req.snapshot_id)?;
            let out = apply_pipeline(src.image, &ops)?;
            let histograms = out
                .histograms()
                .map(|(step, h)| StepHistogram { step, bins: h.clone() })
                .collect();
            let gray = out.image.is_gray();
            let saved = store.save_processed(&src.meta, &out.image.to_rgb(), ops)?;
            Ok(ProcessResponse {
                snapshot: saved.meta,
                gray,
                histograms,
            })
        })
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?
    }
    .await;
    audited(&st, "process", r).map(Json)
}

use std::collections::HashMap;
use std::io;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::{inject_noise, render_frame, step_command, NoiseSpec, SimDroneState, SimError, SimRules, SimScene};
use crate::link::{Command, CommandKind, ProtocolError, Response};
use crate::store::encode_record;

/// Port the real drone streams video to.
pub const DEFAULT_FRAME_PORT: u16 = 11111;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultAction {
    /// Answer `error Injected fault` without touching the state.
    Error,
    /// Drop the datagram without a reply.
    Silent,
}

/// Misbehaves on the `occurrence`-th receipt (1-based) of a command kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRule {
    pub kind: CommandKind,
    pub occurrence: u32,
    pub action: FaultAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub bind: SocketAddrV4,
    pub rules: SimRules,
    pub initial: SimDroneState,
    pub scene: SimScene,
    pub noise: NoiseSpec,
    pub fps: u32,
    /// Where frames go once streaming; defaults to the `streamon` sender's IP on port 11111.
    pub frame_dest: Option<SocketAddr>,
    pub faults: Vec<FaultRule>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            bind: SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0),
            rules: SimRules::default(),
            initial: SimDroneState::default(),
            scene: SimScene::default(),
            noise: NoiseSpec::default(),
            fps: 5,
            frame_dest: None,
            faults: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.scene.validate()?;
        self.noise.validate()?;
        if self.fps == 0 || self.fps > 60 {
            return Err(SimError::InvalidConfig(format!("fps must be in [1, 60], got {}", self.fps)));
        }
        if self.faults.iter().any(|f| f.occurrence == 0) {
            return Err(SimError::InvalidConfig("fault occurrence is 1-based".into()));
        }
        Ok(())
    }
}

/// One received datagram and what the simulator did with it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub from: SocketAddr,
    pub text: String,
    /// `None` when the datagram was deliberately left unanswered.
    pub reply: Option<String>,
}

#[derive(Debug)]
struct Shared {
    state: SimDroneState,
    transcript: Vec<TranscriptEntry>,
    frame_dest: Option<SocketAddr>,
    seen: HashMap<CommandKind, u32>,
}

/// A running simulator. Dropping it stops both threads.
pub struct SimHandle {
    local_addr: SocketAddr,
    shared: Arc<Mutex<Shared>>,
    frames_sent: Arc<AtomicU64>,
    running: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl SimHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Drone address a [`crate::link::LinkEndpoint`] should target.
    pub fn drone_addr(&self) -> SocketAddrV4 {
        match self.local_addr {
            SocketAddr::V4(a) => a,
            SocketAddr::V6(_) => unreachable!("simulator binds IPv4"),
        }
    }

    pub fn state(&self) -> SimDroneState {
        self.shared.lock().unwrap().state
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.shared.lock().unwrap().transcript.clone()
    }

    pub fn frames_sent(&self) -> u64 {
        self.frames_sent.load(Ordering::Relaxed)
    }

    /// Stops the simulator and returns its final state.
    pub fn stop(mut self) -> SimDroneState {
        self.halt();
        self.state()
    }

    fn halt(&mut self) {
        self.running.store(false, Ordering::Relaxed);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for SimHandle {
    fn drop(&mut self) {
        self.halt();
    }
}

fn reply_for_decode_error(e: &ProtocolError) -> Response {
    match e {
        ProtocolError::InvalidMagnitude { .. } => Response::error("Invalid magnitude"),
        ProtocolError::UnknownCommand(_) => Response::error("Unknown command"),
        _ => Response::error("Malformed command"),
    }
}

/// Binds `cfg.bind` and starts answering commands and streaming frames.
pub fn serve_endpoint(cfg: SimConfig) -> Result<SimHandle, SimError> {
    cfg.validate()?;
    let socket = UdpSocket::bind(cfg.bind)?;
    socket.set_read_timeout(Some(Duration::from_millis(20)))?;
    let local_addr = socket.local_addr()?;
    let shared = Arc::new(Mutex::new(Shared {
        state: cfg.initial,
        transcript: Vec::new(),
        frame_dest: None,
        seen: HashMap::new(),
    }));
    let running = Arc::new(AtomicBool::new(true));
    let frames_sent = Arc::new(AtomicU64::new(0));
    info!("simulator listening on {local_addr}");

    let cmd_thread = {
        let (socket, shared, running, cfg) = (socket.try_clone()?, shared.clone(), running.clone(), cfg.clone());
        std::thread::Builder::new()
            .name("sim-cmd".into())
            .spawn(move || command_loop(socket, &shared, &running, &cfg))?
    };
    let frame_thread = {
        let (shared, running, sent) = (shared.clone(), running.clone(), frames_sent.clone());
        std::thread::Builder::new()
            .name("sim-video".into())
            .spawn(move || frame_loop(socket, &shared, &running, &sent, &cfg))?
    };
    Ok(SimHandle {
        local_addr,
        shared,
        frames_sent,
        running,
        threads: vec![cmd_thread, frame_thread],
    })
}

fn command_loop(socket: UdpSocket, shared: &Mutex<Shared>, running: &AtomicBool, cfg: &SimConfig) {
    let mut buf = [0u8; 2048];
    while running.load(Ordering::Relaxed) {
        let (n, from) = match socket.recv_from(&mut buf) {
            Ok(x) => x,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            Err(e) if e.kind() == io::ErrorKind::ConnectionRefused => continue,
            Err(e) => {
                warn!("simulator socket error: {e}");
                continue;
            }
        };
        let text = String::from_utf8_lossy(&buf[..n]).trim().to_string();
        let reply = {
            let mut sh = shared.lock().unwrap();
            let reply = handle(&mut sh, &buf[..n], from, cfg);
            sh.transcript.push(TranscriptEntry {
                from,
                text: text.clone(),
                reply: reply.as_ref().map(|r| r.to_string()),
            });
            reply
        };
        debug!("sim <- `{text}` -> {reply:?}");
        if let Some(r) = reply {
            if let Err(e) = socket.send_to(&r.encode(), from) {
                warn!("simulator reply to {from} failed: {e}");
            }
        }
    }
}

fn handle(sh: &mut Shared, raw: &[u8], from: SocketAddr, cfg: &SimConfig) -> Option<Response> {
    let cmd = match Command::decode(raw) {
        Ok(c) => c,
        Err(e) => return Some(reply_for_decode_error(&e)),
    };
    let count = sh.seen.entry(cmd.kind()).or_insert(0);
    *count += 1;
    let count = *count;
    if let Some(f) = cfg.faults.iter().find(|f| f.kind == cmd.kind() && f.occurrence == count) {
        return match f.action {
            FaultAction::Error => Some(Response::error("Injected fault")),
            FaultAction::Silent => None,
        };
    }
    let (next, reply) = step_command(&sh.state, &cmd, &cfg.rules);
    if cmd == Command::StreamOn && reply.is_ok() {
        sh.frame_dest = Some(
            cfg.frame_dest
                .unwrap_or_else(|| SocketAddr::new(from.ip(), DEFAULT_FRAME_PORT)),
        );
    }
    sh.state = next;
    Some(reply)
}

fn frame_loop(
    socket: UdpSocket,
    shared: &Mutex<Shared>,
    running: &AtomicBool,
    sent: &AtomicU64,
    cfg: &SimConfig,
) {
    let period = Duration::from_secs_f64(1.0 / cfg.fps as f64);
    let mut next_tick = Instant::now();
    let mut index: u64 = 0;
    while running.load(Ordering::Relaxed) {
        let now = Instant::now();
        if now < next_tick {
            std::thread::sleep((next_tick - now).min(Duration::from_millis(20)));
            continue;
        }
        next_tick += period;
        if next_tick < now {
            next_tick = now + period;
        }
        let (state, dest) = {
            let sh = shared.lock().unwrap();
            (sh.state, sh.frame_dest)
        };
        let Some(dest) = dest else { continue };
        let Ok(clean) = render_frame(&state, &cfg.scene) else { continue };
        let spec = NoiseSpec::new(cfg.noise.kind, cfg.noise.seed.wrapping_add(index));
        index += 1;
        let noisy = match inject_noise(&clean, &spec) {
            Ok(img) => img,
            Err(e) => {
                warn!("noise injection failed: {e}");
                continue;
            }
        };
        let record = match encode_record(&noisy) {
            Ok(r) => r,
            Err(e) => {
                warn!("frame encoding failed: {e}");
                continue;
            }
        };
        match socket.send_to(&record, dest) {
            Ok(_) => {
                sent.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => debug!("frame to {dest} dropped: {e}"),
        }
    }
}

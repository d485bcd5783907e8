//! Single owner of the drone link. Every request that touches the session is
//! queued here and runs to completion before the next one starts.

use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;

use gcs_core::link::{parse_response, Command, Direction, LinkEvent, LinkSession};
use gcs_core::sim::{step_command, SimDroneState, SimRules};
use log::debug;
use tokio::sync::oneshot;

type Job = Box<dyn FnOnce(&mut LinkCtx) + Send>;

pub struct LinkCtx {
    pub session: Option<LinkSession>,
}

/// What the rest of the service may read about the link without queueing.
#[derive(Clone, Debug, Default)]
pub struct LinkStatus {
    pub connected: bool,
    pub sdk_mode: bool,
    pub attempts: u32,
    /// Drone state replayed from acknowledged commands.
    pub shadow: SimDroneState,
    pub events: Vec<LinkEvent>,
}

#[derive(Clone)]
pub struct Executor {
    tx: mpsc::Sender<Job>,
    status: Arc<Mutex<LinkStatus>>,
}

impl Executor {
    pub fn spawn() -> std::io::Result<Self> {
        let (tx, rx) = mpsc::channel::<Job>();
        let status = Arc::new(Mutex::new(LinkStatus::default()));
        let shared = status.clone();
        thread::Builder::new().name("link-exec".into()).spawn(move || {
            let mut ctx = LinkCtx { session: None };
            let mut replay = Replay::default();
            for job in rx {
                job(&mut ctx);
                let mut st = shared.lock().unwrap();
                match &ctx.session {
                    Some(s) => {
                        replay.advance(s.events());
                        st.connected = true;
                        st.sdk_mode = s.sdk_mode();
                        st.attempts = s.attempts();
                        st.events = s.events().to_vec();
                    }
                    None => {
                        replay = Replay::default();
                        *st = LinkStatus::default();
                    }
                }
                st.shadow = replay.state;
            }
            debug!("link executor stopped");
        })?;
        Ok(Self { tx, status })
    }

    /// Runs `f` on the executor thread and waits for its result.
    pub async fn run<R: Send + 'static>(
        &self,
        f: impl FnOnce(&mut LinkCtx) -> R + Send + 'static,
    ) -> R {
        let (tx, rx) = oneshot::channel();
        self.tx
            .send(Box::new(move |ctx| {
                let _ = tx.send(f(ctx));
            }))
            .expect("link executor thread is gone");
        rx.await.expect("link executor dropped a job")
    }

    pub fn status(&self) -> LinkStatus {
        self.status.lock().unwrap().clone()
    }
}

/// Tracks drone state by feeding acknowledged commands through the simulator's
/// transition table.
#[derive(Default)]
struct Replay {
    seen: usize,
    pending: Option<Command>,
    state: SimDroneState,
}

impl Replay {
    fn advance(&mut self, events: &[LinkEvent]) {
        let rules = SimRules::default();
        for e in &events[self.seen.min(events.len())..] {
            match e.direction {
                Direction::Outbound => self.pending = e.text.parse().ok(),
                Direction::Inbound => {
                    if let (Some(cmd), Ok(reply)) = (self.pending.take(), parse_response(e.text.as_bytes())) {
                        if reply.is_ok() {
                            self.state = step_command(&self.state, &cmd, &rules).0;
                        }
                    }
                }
                Direction::Timeout => self.pending = None,
                Direction::Stale => {}
            }
        }
        self.seen = events.len();
    }
}

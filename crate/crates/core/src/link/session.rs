use std::io;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{encode_command, parse_response, Command, ProtocolError, Response};

pub const DEFAULT_DRONE_ADDR: SocketAddrV4 = SocketAddrV4::new(Ipv4Addr::new(192, 168, 10, 1), 8889);
pub const DEFAULT_LOCAL_BIND: SocketAddrV4 = SocketAddrV4::new(Ipv4Addr::UNSPECIFIED, 9000);
pub const DEFAULT_REPLY_TIMEOUT: Duration = Duration::from_millis(7000);
pub const DEFAULT_MAX_RETRIES: u32 = 3;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("invalid endpoint: {0}")]
    InvalidEndpoint(String),
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddrV4, source: io::Error },
    #[error("no reply to `command` after {attempts} attempt(s)")]
    ConnectTimeout { attempts: u32 },
    #[error("no reply to `{command}` within {timeout:?}")]
    ReplyTimeout { command: String, timeout: Duration },
    #[error("drone rejected `{command}`: {reply}")]
    DroneError { command: String, reply: String },
    #[error("`{0}` requires SDK mode; send `command` first")]
    NotInSdkMode(String),
    #[error("link i/o: {0}")]
    Io(#[from] io::Error),
}

/// Where the drone listens and how patiently to wait for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEndpoint {
    pub drone_addr: SocketAddrV4,
    /// Port 0 lets the OS pick a free local port.
    pub local_bind: SocketAddrV4,
    #[serde(with = "millis")]
    pub reply_timeout: Duration,
    pub max_retries: u32,
}

impl Default for LinkEndpoint {
    fn default() -> Self {
        Self {
            drone_addr: DEFAULT_DRONE_ADDR,
            local_bind: DEFAULT_LOCAL_BIND,
            reply_timeout: DEFAULT_REPLY_TIMEOUT,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

impl LinkEndpoint {
    pub fn new(drone_addr: SocketAddrV4) -> Self {
        Self {
            drone_addr,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if self.drone_addr.port() == 0 {
            return Err(LinkError::InvalidEndpoint("drone port must be 1..=65535".into()));
        }
        if self.drone_addr.ip().is_unspecified() {
            return Err(LinkError::InvalidEndpoint(
                "drone address must be a concrete host".into(),
            ));
        }
        if self.reply_timeout.is_zero() {
            return Err(LinkError::InvalidEndpoint("reply_timeout must be positive".into()));
        }
        if self.max_retries == 0 {
            return Err(LinkError::InvalidEndpoint("max_retries must be at least 1".into()));
        }
        Ok(())
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outbound,
    Inbound,
    /// The awaited reply did not arrive in time.
    Timeout,
    /// A late datagram discarded before the next send.
    Stale,
}

/// One line of the session's wire log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEvent {
    /// Milliseconds since the session socket was bound.
    pub at_ms: u64,
    /// Sequence number of the command this record belongs to.
    pub seq: u64,
    pub direction: Direction,
    pub text: String,
}

/// A bound socket talking to one drone.
///
/// Methods take `&mut self`, so at most one command is ever awaiting its
/// reply; replies are matched to commands purely by order.
#[derive(Debug)]
pub struct LinkSession {
    endpoint: LinkEndpoint,
    socket: UdpSocket,
    sdk_mode: bool,
    last_seq: u64,
    attempts: u32,
    started: Instant,
    events: Vec<LinkEvent>,
}

/// Binds `local_bind` and puts the drone into SDK mode, resending `command`
/// up to `max_retries` times.
pub fn open_session(ep: &LinkEndpoint) -> Result<LinkSession, LinkError> {
    ep.validate()?;
    let socket = UdpSocket::bind(ep.local_bind).map_err(|source| LinkError::BindFailure {
        addr: ep.local_bind,
        source,
    })?;
    let mut session = LinkSession {
        endpoint: ep.clone(),
        socket,
        sdk_mode: false,
        last_seq: 0,
        attempts: 1,
        started: Instant::now(),
        events: Vec::new(),
    };
    for attempt in 1..=ep.max_retries {
        debug!("sdk handshake attempt {attempt} to {}", ep.drone_addr);
        match session.transact(&Command::EnterSdkMode)? {
            Some(Response::Ok) => {
                session.sdk_mode = true;
                return Ok(session);
            }
            Some(other) => {
                return Err(LinkError::DroneError {
                    command: Command::EnterSdkMode.to_string(),
                    reply: other.to_string(),
                })
            }
            None => continue,
        }
    }
    Err(LinkError::ConnectTimeout {
        attempts: ep.max_retries,
    })
}

impl LinkSession {
    pub fn endpoint(&self) -> &LinkEndpoint {
        &self.endpoint
    }

    pub fn sdk_mode(&self) -> bool {
        self.sdk_mode
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn events(&self) -> &[LinkEvent] {
        &self.events
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    /// Number of connection attempts it took to establish this session.
    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    pub(crate) fn set_attempts(&mut self, attempts: u32) {
        self.attempts = attempts;
    }

    /// Sends `cmd` and waits for its reply.
    ///
    /// `Ok` carries an `ok` or integer reply; an `error` reply becomes
    /// [`LinkError::DroneError`]. Timeouts and drone errors leave the session usable.
    pub fn send_command(&mut self, cmd: &Command) -> Result<Response, LinkError> {
        cmd.validate()?;
        if !self.sdk_mode && *cmd != Command::EnterSdkMode {
            return Err(LinkError::NotInSdkMode(cmd.to_string()));
        }
        match self.transact(cmd)? {
            Some(Response::Error(reply)) => Err(LinkError::DroneError {
                command: cmd.to_string(),
                reply,
            }),
            Some(reply) => {
                if *cmd == Command::EnterSdkMode {
                    self.sdk_mode = true;
                }
                Ok(reply)
            }
            None => Err(LinkError::ReplyTimeout {
                command: cmd.to_string(),
                timeout: self.endpoint.reply_timeout,
            }),
        }
    }

    fn log(&mut self, direction: Direction, text: String) {
        self.events.push(LinkEvent {
            at_ms: self.started.elapsed().as_millis() as u64,
            seq: self.last_seq,
            direction,
            text,
        });
    }

    fn drain_stale(&mut self) -> io::Result<()> {
        let mut buf = [0u8; 2048];
        self.socket.set_nonblocking(true)?;
        let result = loop {
            match self.socket.recv_from(&mut buf) {
                Ok((n, from)) if from == SocketAddr::V4(self.endpoint.drone_addr) => {
                    let text = String::from_utf8_lossy(&buf[..n]).into_owned();
                    warn!("discarding late reply `{}`", text.trim());
                    self.log(Direction::Stale, text);
                }
                Ok(_) => {}
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => break Ok(()),
                Err(e) if e.kind() == io::ErrorKind::ConnectionRefused => {}
                Err(e) => break Err(e),
            }
        };
        self.socket.set_nonblocking(false)?;
        result
    }

    /// One request/reply exchange. `Ok(None)` means the reply timed out.
    fn transact(&mut self, cmd: &Command) -> Result<Option<Response>, LinkError> {
        let payload = encode_command(cmd)?;
        self.drain_stale()?;
        self.last_seq += 1;
        self.socket.send_to(&payload, self.endpoint.drone_addr)?;
        self.log(Direction::Outbound, cmd.to_string());

        let deadline = Instant::now() + self.endpoint.reply_timeout;
        let mut buf = [0u8; 2048];
        loop {
            let now = Instant::now();
            if now >= deadline {
                self.log(Direction::Timeout, String::new());
                return Ok(None);
            }
            self.socket.set_read_timeout(Some(deadline - now))?;
            match self.socket.recv_from(&mut buf) {
                Ok((n, from)) => {
                    if from != SocketAddr::V4(self.endpoint.drone_addr) {
                        debug!("ignoring datagram from {from}");
                        continue;
                    }
                    let text = String::from_utf8_lossy(&buf[..n]).into_owned();
                    self.log(Direction::Inbound, text);
                    return Ok(Some(parse_response(&buf[..n])?));
                }
                Err(e)
                    if matches!(
                        e.kind(),
                        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                    ) =>
                {
                    continue
                }
                // ICMP port unreachable from a previous send; keep waiting out the timeout.
                Err(e) if e.kind() == io::ErrorKind::ConnectionRefused => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
}

/// Checks the one-in-flight rule over a wire log: every outbound record is
/// followed by an inbound or timeout record before the next outbound one.
pub fn is_serialized(events: &[LinkEvent]) -> bool {
    let mut awaiting = false;
    for e in events {
        match e.direction {
            Direction::Outbound if awaiting => return false,
            Direction::Outbound => awaiting = true,
            Direction::Inbound | Direction::Timeout => awaiting = false,
            Direction::Stale => {}
        }
    }
    true
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Translation limits in centimetres.
pub const TRANSLATION_RANGE: (u32, u32) = (20, 500);
/// Rotation limits in degrees.
pub const ROTATION_RANGE: (u32, u32) = (1, 360);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("{kind} magnitude {value} outside [{min}, {max}]")]
    InvalidMagnitude {
        kind: CommandKind,
        value: u32,
        min: u32,
        max: u32,
    },
    #[error("{0} needs a magnitude")]
    MissingMagnitude(CommandKind),
    #[error("{0} takes no magnitude")]
    UnexpectedMagnitude(CommandKind),
    #[error("unknown command word `{0}`")]
    UnknownCommand(String),
    #[error("malformed command `{0}`")]
    Malformed(String),
    #[error("empty datagram")]
    EmptyDatagram,
}

/// Command vocabulary without magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CommandKind {
    EnterSdkMode,
    Takeoff,
    Land,
    Forward,
    Back,
    Left,
    Right,
    Up,
    Down,
    RotateCw,
    RotateCcw,
    StreamOn,
    StreamOff,
    QueryBattery,
}

impl CommandKind {
    pub const ALL: [CommandKind; 14] = [
        CommandKind::EnterSdkMode,
        CommandKind::Takeoff,
        CommandKind::Land,
        CommandKind::Forward,
        CommandKind::Back,
        CommandKind::Left,
        CommandKind::Right,
        CommandKind::Up,
        CommandKind::Down,
        CommandKind::RotateCw,
        CommandKind::RotateCcw,
        CommandKind::StreamOn,
        CommandKind::StreamOff,
        CommandKind::QueryBattery,
    ];

    /// The ASCII word that starts this command on the wire.
    pub fn word(self) -> &'static str {
        match self {
            CommandKind::EnterSdkMode => "command",
            CommandKind::Takeoff => "takeoff",
            CommandKind::Land => "land",
            CommandKind::Forward => "forward",
            CommandKind::Back => "back",
            CommandKind::Left => "left",
            CommandKind::Right => "right",
            CommandKind::Up => "up",
            CommandKind::Down => "down",
            CommandKind::RotateCw => "cw",
            CommandKind::RotateCcw => "ccw",
            CommandKind::StreamOn => "streamon",
            CommandKind::StreamOff => "streamoff",
            CommandKind::QueryBattery => "battery?",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.word() == word)
    }

    /// Allowed magnitude range, or `None` for kinds that carry no magnitude.
    pub fn magnitude_range(self) -> Option<(u32, u32)> {
        match self {
            CommandKind::Forward
            | CommandKind::Back
            | CommandKind::Left
            | CommandKind::Right
            | CommandKind::Up
            | CommandKind::Down => Some(TRANSLATION_RANGE),
            CommandKind::RotateCw | CommandKind::RotateCcw => Some(ROTATION_RANGE),
            _ => None,
        }
    }

    pub fn is_query(self) -> bool {
        matches!(self, CommandKind::QueryBattery)
    }

    /// Commands that move the airframe (and cost battery).
    pub fn is_motion(self) -> bool {
        !matches!(
            self,
            CommandKind::EnterSdkMode
                | CommandKind::StreamOn
                | CommandKind::StreamOff
                | CommandKind::QueryBattery
        )
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

/// A request to the drone. Translations are in cm, rotations in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    EnterSdkMode,
    Takeoff,
    Land,
    Forward(u32),
    Back(u32),
    Left(u32),
    Right(u32),
    Up(u32),
    Down(u32),
    RotateCw(u32),
    RotateCcw(u32),
    StreamOn,
    StreamOff,
    QueryBattery,
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::EnterSdkMode => CommandKind::EnterSdkMode,
            Command::Takeoff => CommandKind::Takeoff,
            Command::Land => CommandKind::Land,
            Command::Forward(_) => CommandKind::Forward,
            Command::Back(_) => CommandKind::Back,
            Command::Left(_) => CommandKind::Left,
            Command::Right(_) => CommandKind::Right,
            Command::Up(_) => CommandKind::Up,
            Command::Down(_) => CommandKind::Down,
            Command::RotateCw(_) => CommandKind::RotateCw,
            Command::RotateCcw(_) => CommandKind::RotateCcw,
            Command::StreamOn => CommandKind::StreamOn,
            Command::StreamOff => CommandKind::StreamOff,
            Command::QueryBattery => CommandKind::QueryBattery,
        }
    }

    pub fn magnitude(&self) -> Option<u32> {
        match *self {
            Command::Forward(m)
            | Command::Back(m)
            | Command::Left(m)
            | Command::Right(m)
            | Command::Up(m)
            | Command::Down(m)
            | Command::RotateCw(m)
            | Command::RotateCcw(m) => Some(m),
            _ => None,
        }
    }

    /// Builds a command from a kind and optional magnitude, checking both.
    pub fn from_parts(kind: CommandKind, magnitude: Option<u32>) -> Result<Self, ProtocolError> {
        let cmd = match (kind, magnitude) {
            (CommandKind::EnterSdkMode, None) => Command::EnterSdkMode,
            (CommandKind::Takeoff, None) => Command::Takeoff,
            (CommandKind::Land, None) => Command::Land,
            (CommandKind::StreamOn, None) => Command::StreamOn,
            (CommandKind::StreamOff, None) => Command::StreamOff,
            (CommandKind::QueryBattery, None) => Command::QueryBattery,
            (CommandKind::Forward, Some(m)) => Command::Forward(m),
            (CommandKind::Back, Some(m)) => Command::Back(m),
            (CommandKind::Left, Some(m)) => Command::Left(m),
            (CommandKind::Right, Some(m)) => Command::Right(m),
            (CommandKind::Up, Some(m)) => Command::Up(m),
            (CommandKind::Down, Some(m)) => Command::Down(m),
            (CommandKind::RotateCw, Some(m)) => Command::RotateCw(m),
            (CommandKind::RotateCcw, Some(m)) => Command::RotateCcw(m),
            (k, Some(_)) => return Err(ProtocolError::UnexpectedMagnitude(k)),
            (k, None) => return Err(ProtocolError::MissingMagnitude(k)),
        };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if let (Some(value), Some((min, max))) = (self.magnitude(), self.kind().magnitude_range()) {
            if value < min || value > max {
                return Err(ProtocolError::InvalidMagnitude {
                    kind: self.kind(),
                    value,
                    min,
                    max,
                });
            }
        }
        Ok(())
    }

    /// Parses one wire payload. Surrounding whitespace is ignored.
    pub fn decode(raw: &[u8]) -> Result<Self, ProtocolError> {
        let text = std::str::from_utf8(raw)
            .map_err(|_| ProtocolError::Malformed(String::from_utf8_lossy(raw).into_owned()))?;
        text.parse()
    }
}

impl FromStr for Command {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let word = parts.next().ok_or(ProtocolError::EmptyDatagram)?;
        let kind = CommandKind::from_word(word)
            .ok_or_else(|| ProtocolError::UnknownCommand(word.to_string()))?;
        let magnitude = match parts.next() {
            Some(m) => Some(
                m.parse::<u32>()
                    .map_err(|_| ProtocolError::Malformed(s.trim().to_string()))?,
            ),
            None => None,
        };
        if parts.next().is_some() {
            return Err(ProtocolError::Malformed(s.trim().to_string()));
        }
        Command::from_parts(kind, magnitude)
    }
}

/// Wire text, e.g. `forward 100`. Does not check magnitude bounds; see [`encode_command`].
impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.magnitude() {
            Some(m) => write!(f, "{} {}", self.kind().word(), m),
            None => f.write_str(self.kind().word()),
        }
    }
}

impl Serialize for Command {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Command {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Datagram payload for `cmd`: ASCII, no terminator.
pub fn encode_command(cmd: &Command) -> Result<Vec<u8>, ProtocolError> {
    cmd.validate()?;
    Ok(cmd.to_string().into_bytes())
}

/// A reply from the drone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reply", content = "detail", rename_all = "lowercase")]
pub enum Response {
    Ok,
    /// Full trimmed reply text, e.g. `error Not joined`.
    Error(String),
    Value(i64),
}

impl Response {
    /// An `error <reason>` reply.
    pub fn error(reason: &str) -> Self {
        if reason.is_empty() {
            Response::Error("error".into())
        } else {
            Response::Error(format!("error {reason}"))
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Response::Ok => b"ok".to_vec(),
            Response::Error(text) if text.trim().is_empty() => b"error".to_vec(),
            Response::Error(text) => text.trim().as_bytes().to_vec(),
            Response::Value(n) => n.to_string().into_bytes(),
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self, Response::Error(_))
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.encode()))
    }
}

/// Reply grammar: `ok` in any case, a decimal integer, or anything else as an error.
pub fn parse_response(raw: &[u8]) -> Result<Response, ProtocolError> {
    let text = String::from_utf8_lossy(raw);
    let text = text.trim_matches(|c: char| c.is_whitespace() || c == '\0');
    if text.is_empty() {
        return Err(ProtocolError::EmptyDatagram);
    }
    if text.eq_ignore_ascii_case("ok") {
        return Ok(Response::Ok);
    }
    if let Ok(n) = text.parse::<i64>() {
        return Ok(Response::Value(n));
    }
    Ok(Response::Error(text.to_string()))
}

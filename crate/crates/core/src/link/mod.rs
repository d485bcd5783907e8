//! Text command protocol spoken over UDP to a Tello-class drone, and a
//! blocking command session on top of it.
//!
//! Commands are single ASCII datagrams without a terminator (`takeoff`,
//! `forward 100`, `cw 90`, `battery?`); replies are `ok`, `error[ <text>]`
//! or a bare integer.

mod command;
mod session;

pub use command::{
    encode_command, parse_response, Command, CommandKind, ProtocolError, Response,
    ROTATION_RANGE, TRANSLATION_RANGE,
};
pub use session::{
    is_serialized, open_session, Direction, LinkEndpoint, LinkError, LinkEvent, LinkSession,
    DEFAULT_DRONE_ADDR, DEFAULT_LOCAL_BIND, DEFAULT_MAX_RETRIES, DEFAULT_REPLY_TIMEOUT,
};

use serde::{Deserialize, Serialize};

use crate::link::{Command, CommandKind, Response};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlightPhase {
    Grounded,
    Flying,
}

/// Ground-frame position in cm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

/// Pose and protocol state of the emulated drone.
///
/// Heading 0 points along +y and angles grow clockwise, so heading 90 is +x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimDroneState {
    pub phase: FlightPhase,
    pub position: Position,
    /// Degrees in `[0, 360)`.
    pub heading: u16,
    /// cm above ground; 0 whenever grounded.
    pub altitude: u32,
    /// Percent.
    pub battery: u8,
    pub sdk_mode: bool,
    pub streaming: bool,
}

impl Default for SimDroneState {
    fn default() -> Self {
        Self {
            phase: FlightPhase::Grounded,
            position: Position::default(),
            heading: 0,
            altitude: 0,
            battery: 100,
            sdk_mode: false,
            streaming: false,
        }
    }
}

/// Horizontal flight envelope, inclusive bounds in cm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arena {
    pub min_x: i32,
    pub max_x: i32,
    pub min_y: i32,
    pub max_y: i32,
}

impl Default for Arena {
    /// 10 m x 10 m with the home point in the south-west corner.
    fn default() -> Self {
        Self {
            min_x: 0,
            max_x: 1000,
            min_y: 0,
            max_y: 1000,
        }
    }
}

impl Arena {
    pub fn contains(&self, p: Position) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }
}

/// Tunables of the transition table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimRules {
    pub takeoff_alt_cm: u32,
    pub min_alt_cm: u32,
    pub max_alt_cm: u32,
    pub arena: Arena,
    /// Battery percent spent per accepted motion command.
    pub drain_per_motion: u8,
}

impl Default for SimRules {
    fn default() -> Self {
        Self {
            takeoff_alt_cm: 100,
            min_alt_cm: 20,
            max_alt_cm: 1000,
            arena: Arena::default(),
            drain_per_motion: 1,
        }
    }
}

/// Unit step along `heading` scaled by `d`, rounded to whole cm.
/// Cardinal headings are exact.
pub fn displacement(heading: u16, d: u32) -> (i32, i32) {
    let d = d as i32;
    match heading % 360 {
        0 => (0, d),
        90 => (d, 0),
        180 => (0, -d),
        270 => (-d, 0),
        h => {
            let rad = (h as f64).to_radians();
            (
                (d as f64 * rad.sin()).round() as i32,
                (d as f64 * rad.cos()).round() as i32,
            )
        }
    }
}

fn reject(st: &SimDroneState, reason: &str) -> (SimDroneState, Response) {
    (*st, Response::error(reason))
}

/// One transition of the emulated drone.
///
/// Illegal commands are answered with an `error` reply and leave the state
/// untouched; nothing is rejected out of band.
pub fn step_command(st: &SimDroneState, cmd: &Command, rules: &SimRules) -> (SimDroneState, Response) {
    if cmd.validate().is_err() {
        return reject(st, "Invalid magnitude");
    }
    if !st.sdk_mode && *cmd != Command::EnterSdkMode {
        return reject(st, "Not in SDK mode");
    }
    let mut next = *st;
    let flying = st.phase == FlightPhase::Flying;
    if cmd.kind().is_motion() {
        if *cmd != Command::Land && st.battery == 0 {
            return reject(st, "Battery low");
        }
        next.battery = st.battery.saturating_sub(rules.drain_per_motion);
    }
    match *cmd {
        Command::EnterSdkMode => next.sdk_mode = true,
        Command::StreamOn => next.streaming = true,
        Command::StreamOff => next.streaming = false,
        Command::QueryBattery => return (*st, Response::Value(st.battery as i64)),
        Command::Takeoff => {
            if flying {
                return reject(st, "Already flying");
            }
            next.phase = FlightPhase::Flying;
            next.altitude = rules.takeoff_alt_cm;
        }
        _ if !flying => return reject(st, "Not flying"),
        Command::Land => {
            next.phase = FlightPhase::Grounded;
            next.altitude = 0;
        }
        Command::Up(d) => {
            next.altitude = st.altitude + d;
            if next.altitude > rules.max_alt_cm {
                return reject(st, "Altitude limit");
            }
        }
        Command::Down(d) => match st.altitude.checked_sub(d) {
            Some(a) if a >= rules.min_alt_cm => next.altitude = a,
            _ => return reject(st, "Altitude limit"),
        },
        Command::RotateCw(r) => next.heading = ((st.heading as u32 + r) % 360) as u16,
        Command::RotateCcw(r) => next.heading = ((st.heading as u32 + 360 - r % 360) % 360) as u16,
        Command::Forward(d) | Command::Back(d) | Command::Left(d) | Command::Right(d) => {
            let offset = match cmd.kind() {
                CommandKind::Forward => 0,
                CommandKind::Right => 90,
                CommandKind::Back => 180,
                _ => 270,
            };
            let (dx, dy) = displacement((st.heading + offset) % 360, d);
            next.position = Position {
                x: st.position.x + dx,
                y: st.position.y + dy,
            };
            if !rules.arena.contains(next.position) {
                return reject(st, "Out of arena");
            }
        }
    }
    (next, Response::Ok)
}

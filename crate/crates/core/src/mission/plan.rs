use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::link::{Command, CommandKind, TRANSLATION_RANGE};

/// Bounds on the square mission's side, cm.
pub const SQUARE_SIDE_RANGE: (u32, u32) = (20, 1000);
/// Longest straight one-way run allowed within a plan, cm.
pub const MAX_LEG_CM: u32 = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("square side {0} cm outside [20, 1000]")]
    SideOutOfRange(u32),
    #[error("step {step}: first flight command must be takeoff, got `{got}`")]
    FirstFlyNotTakeoff { step: usize, got: String },
    #[error("no land after the last motion command")]
    MissingLand,
    #[error("step {0}: capture before takeoff")]
    CaptureBeforeTakeoff(usize),
    #[error("step {step}: straight leg of {total} cm exceeds 1000 cm")]
    LegTooLong { step: usize, total: u32 },
    #[error("line {line}: {msg}")]
    Script { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", content = "arg", rename_all = "lowercase")]
pub enum MissionStep {
    Fly(Command),
    Capture,
    /// Pause in milliseconds.
    Wait(u64),
}

impl fmt::Display for MissionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissionStep::Fly(c) => write!(f, "{c}"),
            MissionStep::Capture => f.write_str("capture"),
            MissionStep::Wait(ms) => write!(f, "wait {ms}"),
        }
    }
}

impl FromStr for MissionStep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut parts = s.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some("capture"), None, _) => Ok(MissionStep::Capture),
            (Some("wait"), Some(ms), None) => ms
                .parse()
                .map(MissionStep::Wait)
                .map_err(|_| format!("bad wait duration `{ms}`")),
            _ => {
                let cmd: Command = s.parse().map_err(|e| format!("{e}"))?;
                cmd.validate().map_err(|e| e.to_string())?;
                Ok(MissionStep::Fly(cmd))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub name: String,
    pub steps: Vec<MissionStep>,
}

impl MissionPlan {
    pub fn new(name: impl Into<String>, steps: Vec<MissionStep>) -> Self {
        Self {
            name: name.into(),
            steps,
        }
    }

    /// Parses a line-oriented script. Blank lines and `#` comments are skipped.
    pub fn parse_script(name: impl Into<String>, text: &str) -> Result<Self, PlanError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let step = line
                .parse()
                .map_err(|msg| PlanError::Script { line: i + 1, msg })?;
            steps.push(step);
        }
        let plan = Self::new(name, steps);
        plan.validate()?;
        Ok(plan)
    }

    /// One step per line.
    pub fn to_script(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }

    pub fn fly_steps(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, MissionStep::Fly(_))).count()
    }

    pub fn capture_steps(&self) -> usize {
        self.steps.iter().filter(|s| **s == MissionStep::Capture).count()
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let mut airborne = false;
        let mut seen_fly = false;
        let mut pending_land = false;
        let mut leg: Option<(CommandKind, u32)> = None;
        for (i, step) in self.steps.iter().enumerate() {
            let n = i + 1;
            match step {
                MissionStep::Capture if !airborne => return Err(PlanError::CaptureBeforeTakeoff(n)),
                MissionStep::Capture | MissionStep::Wait(_) => {}
                MissionStep::Fly(cmd) => {
                    let kind = cmd.kind();
                    if !kind.is_motion() {
                        continue;
                    }
                    if !seen_fly && kind != CommandKind::Takeoff {
                        return Err(PlanError::FirstFlyNotTakeoff {
                            step: n,
                            got: cmd.to_string(),
                        });
                    }
                    seen_fly = true;
                    match kind {
                        CommandKind::Takeoff => {
                            airborne = true;
                            pending_land = true;
                            leg = None;
                        }
                        CommandKind::Land => {
                            airborne = false;
                            pending_land = false;
                            leg = None;
                        }
                        CommandKind::Forward | CommandKind::Back | CommandKind::Left | CommandKind::Right => {
                            pending_land = true;
                            let d = cmd.magnitude().unwrap_or(0);
                            let total = match leg {
                                Some((k, t)) if k == kind => t + d,
                                _ => d,
                            };
                            if total > MAX_LEG_CM {
                                return Err(PlanError::LegTooLong { step: n, total });
                            }
                            leg = Some((kind, total));
                        }
                        _ => {
                            pending_land = true;
                            leg = None;
                        }
                    }
                }
            }
        }
        if pending_land {
            return Err(PlanError::MissingLand);
        }
        Ok(())
    }
}

impl fmt::Display for MissionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_script())
    }
}

/// Takeoff, four forward-capture-turn legs, land.
///
/// Sides longer than one command allows are flown as several equal-ish
/// forward commands with a single capture at the corner.
pub fn build_square_mission(side_cm: u32) -> Result<MissionPlan, PlanError> {
    if !(SQUARE_SIDE_RANGE.0..=SQUARE_SIDE_RANGE.1).contains(&side_cm) {
        return Err(PlanError::SideOutOfRange(side_cm));
    }
    let max = TRANSLATION_RANGE.1;
    let pieces = side_cm.div_ceil(max);
    let mut steps = vec![MissionStep::Fly(Command::Takeoff)];
    for _ in 0..4 {
        for p in 0..pieces {
            let d = side_cm / pieces + u32::from(p < side_cm % pieces);
            steps.push(MissionStep::Fly(Command::Forward(d)));
        }
        steps.push(MissionStep::Capture);
        steps.push(MissionStep::Fly(Command::RotateCw(90)));
    }
    steps.push(MissionStep::Fly(Command::Land));
    Ok(MissionPlan::new(format!("square-{side_cm}"), steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_100_layout() {
        let plan = build_square_mission(100).unwrap();
        assert_eq!(plan.fly_steps(), 10);
        assert_eq!(plan.capture_steps(), 4);
        let mut expected = vec![MissionStep::Fly(Command::Takeoff)];
        for _ in 0..4 {
            expected.extend([
                MissionStep::Fly(Command::Forward(100)),
                MissionStep::Capture,
                MissionStep::Fly(Command::RotateCw(90)),
            ]);
        }
        expected.push(MissionStep::Fly(Command::Land));
        assert_eq!(plan.steps, expected);
        plan.validate().unwrap();
    }

    #[test]
    fn side_bounds() {
        assert!(build_square_mission(20).is_ok());
        assert!(build_square_mission(1000).is_ok());
        assert_eq!(build_square_mission(1001), Err(PlanError::SideOutOfRange(1001)));
        assert_eq!(build_square_mission(19), Err(PlanError::SideOutOfRange(19)));
    }

    #[test]
    fn long_sides_split() {
        let plan = build_square_mission(501).unwrap();
        assert_eq!(&plan.steps[1..3], &[MissionStep::Fly(Command::Forward(251)), MissionStep::Fly(Command::Forward(250))]);
        let plan = build_square_mission(1000).unwrap();
        assert_eq!(plan.capture_steps(), 4);
        assert_eq!(plan.fly_steps(), 2 + 4 * 3);
        plan.validate().unwrap();
    }

    #[test]
    fn script_round_trip() {
        let text = "takeoff\nforward 100\ncapture\ncw 90\nwait 500\nland\n";
        let plan = MissionPlan::parse_script("demo", text).unwrap();
        assert_eq!(plan.steps[4], MissionStep::Wait(500));
        assert_eq!(plan.to_script(), text);
        let square = build_square_mission(120).unwrap();
        assert_eq!(MissionPlan::parse_script("square-120", &square.to_script()).unwrap(), square);
    }

    #[test]
    fn script_comments_and_errors() {
        let plan = MissionPlan::parse_script("c", "# survey\n\ntakeoff  # go\nland\n").unwrap();
        assert_eq!(plan.steps.len(), 2);
        assert!(matches!(
            MissionPlan::parse_script("x", "takeoff\nforward 5\nland"),
            Err(PlanError::Script { line: 2, .. })
        ));
        assert!(matches!(
            MissionPlan::parse_script("x", "takeoff\nwait soon\nland"),
            Err(PlanError::Script { line: 2, .. })
        ));
    }

    #[test]
    fn invariants() {
        let p = |s: &str| MissionPlan::parse_script("t", s);
        assert!(matches!(p("forward 100\nland"), Err(PlanError::FirstFlyNotTakeoff { step: 1, .. })));
        assert_eq!(p("takeoff\nforward 100"), Err(PlanError::MissingLand));
        assert_eq!(p("capture\ntakeoff\nland"), Err(PlanError::CaptureBeforeTakeoff(1)));
        assert_eq!(
            p("takeoff\nforward 500\nforward 500\nforward 20\nland"),
            Err(PlanError::LegTooLong { step: 4, total: 1020 })
        );
        assert!(p("takeoff\nforward 500\ncw 90\nforward 500\nforward 500\nland").is_ok());
        assert!(p("").is_ok());
        assert!(p("wait 10").is_ok());
    }
}

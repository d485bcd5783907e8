use serde::{Deserialize, Serialize};

use super::{SimDroneState, SimError};
use crate::imaging::RgbImage;
use crate::store::{FRAME_HEADER_LEN, MAX_RECORD_LEN};

/// Ground pattern under the simulated camera.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneKind {
    Uniform {
        gray: u8,
    },
    Checkerboard {
        cell_px: u32,
        color_a: [u8; 3],
        color_b: [u8; 3],
    },
    /// Gray `left` for ground columns below `column`, `right` from it on.
    StepEdge {
        column: i32,
        left: u8,
        right: u8,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimScene {
    pub kind: SceneKind,
    pub width: usize,
    pub height: usize,
}

impl Default for SimScene {
    fn default() -> Self {
        Self {
            kind: SceneKind::Checkerboard {
                cell_px: 16,
                color_a: [40, 90, 160],
                color_b: [230, 200, 80],
            },
            width: 128,
            height: 128,
        }
    }
}

impl SimScene {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.width < 8 || self.height < 8 {
            return Err(SimError::InvalidScene(format!(
                "frame must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        if 4 + FRAME_HEADER_LEN + self.width * self.height * 3 > MAX_RECORD_LEN {
            return Err(SimError::InvalidScene(format!(
                "{}x{} frame does not fit in one datagram",
                self.width, self.height
            )));
        }
        if let SceneKind::Checkerboard { cell_px: 0, .. } = self.kind {
            return Err(SimError::InvalidScene("cell_px must be at least 1".into()));
        }
        Ok(())
    }

    /// Colour of the ground at world pixel `(wx, wy)`.
    fn sample(&self, wx: i64, wy: i64) -> [u8; 3] {
        match self.kind {
            SceneKind::Uniform { gray } => [gray; 3],
            SceneKind::Checkerboard {
                cell_px,
                color_a,
                color_b,
            } => {
                let c = cell_px as i64;
                if (wx.div_euclid(c) + wy.div_euclid(c)).rem_euclid(2) == 0 {
                    color_a
                } else {
                    color_b
                }
            }
            SceneKind::StepEdge {
                column,
                left,
                right,
            } => {
                if wx < column as i64 {
                    [left; 3]
                } else {
                    [right; 3]
                }
            }
        }
    }
}

/// Nadir camera view at 1 px per cm. Frame pixel `(px, py)` shows ground
/// point `(x + px, py - y)` for drone position `(x, y)`, so the origin pose
/// sees the scene unshifted.
pub fn render_frame(st: &SimDroneState, scene: &SimScene) -> Result<RgbImage, SimError> {
    if !st.streaming {
        return Err(SimError::StreamOff);
    }
    scene.validate()?;
    let (ox, oy) = (st.position.x as i64, st.position.y as i64);
    let img = RgbImage::from_fn(scene.width, scene.height, |px, py| {
        scene.sample(px as i64 + ox, py as i64 - oy)
    })
    .expect("validated dimensions");
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Position;

    fn streaming() -> SimDroneState {
        SimDroneState {
            streaming: true,
            ..Default::default()
        }
    }

    #[test]
    fn uniform() {
        let scene = SimScene {
            kind: SceneKind::Uniform { gray: 128 },
            width: 8,
            height: 8,
        };
        let img = render_frame(&streaming(), &scene).unwrap();
        assert!(img.as_bytes().iter().all(|&v| v == 128));
    }

    #[test]
    fn checkerboard_cells() {
        let (a, b) = ([1, 2, 3], [9, 8, 7]);
        let scene = SimScene {
            kind: SceneKind::Checkerboard {
                cell_px: 8,
                color_a: a,
                color_b: b,
            },
            width: 32,
            height: 16,
        };
        let img = render_frame(&streaming(), &scene).unwrap();
        assert_eq!(img.pixel(0, 0), a);
        assert_eq!(img.pixel(7, 7), a);
        assert_eq!(img.pixel(8, 0), b);
        assert_eq!(img.pixel(0, 8), b);
        assert_eq!(img.pixel(8, 8), a);
    }

    #[test]
    fn pose_shifts_view() {
        let scene = SimScene {
            kind: SceneKind::StepEdge {
                column: 10,
                left: 0,
                right: 255,
            },
            width: 16,
            height: 8,
        };
        let mut st = streaming();
        let img = render_frame(&st, &scene).unwrap();
        assert_eq!((img.pixel(9, 0)[0], img.pixel(10, 0)[0]), (0, 255));
        st.position = Position { x: 4, y: 0 };
        let img = render_frame(&st, &scene).unwrap();
        assert_eq!((img.pixel(5, 0)[0], img.pixel(6, 0)[0]), (0, 255));
    }

    #[test]
    fn pure_and_gated() {
        let scene = SimScene::default();
        assert_eq!(
            render_frame(&streaming(), &scene).unwrap(),
            render_frame(&streaming(), &scene).unwrap()
        );
        assert!(matches!(
            render_frame(&SimDroneState::default(), &scene),
            Err(SimError::StreamOff)
        ));
    }

    #[test]
    fn scene_validation() {
        let mut s = SimScene {
            width: 7,
            ..SimScene::default()
        };
        assert!(s.validate().is_err());
        s.width = 200;
        s.height = 200;
        assert!(s.validate().is_err());
        let s = SimScene {
            kind: SceneKind::Checkerboard {
                cell_px: 0,
                color_a: [0; 3],
                color_b: [0; 3],
            },
            ..SimScene::default()
        };
        assert!(s.validate().is_err());
    }
}

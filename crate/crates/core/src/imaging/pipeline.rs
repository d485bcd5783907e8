use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    complement, edge_detect, gray_adjust, histogram, noise_filter, rgb_to_gray, rotate_quarter,
    AnyImage, EdgeOperator, FilterKind, GrayWindow, Histogram256, ImagingError,
};

fn default_filter_kind() -> FilterKind {
    FilterKind::Median
}

fn default_window() -> usize {
    3
}

/// One step of an enhancement pipeline. The JSON form is the wire contract
/// shared by the CLI and the HTTP API, e.g.
/// `[{"op":"rgb2gray"},{"op":"edge","operator":"sobel","threshold_frac":0.25}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EnhancementOp {
    #[serde(rename = "rgb2gray")]
    Rgb2Gray,
    Complement,
    Histogram,
    GrayAdjust(GrayWindow),
    NoiseFilter {
        #[serde(default = "default_filter_kind")]
        kind: FilterKind,
        #[serde(default = "default_window")]
        k: usize,
    },
    Edge(EdgeOperator),
    #[serde(rename = "rotate")]
    RotateQuarter { turns: u8 },
}

impl EnhancementOp {
    /// Wire name of the op.
    pub fn name(&self) -> &'static str {
        match self {
            EnhancementOp::Rgb2Gray => "rgb2gray",
            EnhancementOp::Complement => "complement",
            EnhancementOp::Histogram => "histogram",
            EnhancementOp::GrayAdjust(_) => "gray_adjust",
            EnhancementOp::NoiseFilter { .. } => "noise_filter",
            EnhancementOp::Edge(_) => "edge",
            EnhancementOp::RotateQuarter { .. } => "rotate",
        }
    }

    /// True for ops defined only on single channel images.
    pub fn needs_gray(&self) -> bool {
        matches!(
            self,
            EnhancementOp::Histogram
                | EnhancementOp::GrayAdjust(_)
                | EnhancementOp::NoiseFilter { .. }
                | EnhancementOp::Edge(_)
        )
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        match self {
            EnhancementOp::GrayAdjust(w) => w.validate(),
            EnhancementOp::NoiseFilter { k, .. } if *k < 3 || k % 2 == 0 => Err(
                ImagingError::BadKernel(format!("window must be odd and at least 3, got {k}")),
            ),
            EnhancementOp::Edge(op) => op.validate(),
            EnhancementOp::RotateQuarter { turns } if *turns > 3 => {
                Err(ImagingError::BadTurns(*turns))
            }
            _ => Ok(()),
        }
    }
}

/// Record of one applied step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineageEntry {
    /// 1-based position in the pipeline.
    pub step: usize,
    pub op: EnhancementOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram256>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    pub image: AnyImage,
    pub lineage: Vec<LineageEntry>,
}

impl PipelineOutput {
    pub fn histograms(&self) -> impl Iterator<Item = (usize, &Histogram256)> {
        self.lineage
            .iter()
            .filter_map(|e| e.histogram.as_ref().map(|h| (e.step, h)))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("step {step}: `{op}` needs a grayscale image; add rgb2gray before it")]
    TypeMismatch { step: usize, op: &'static str },
    #[error("step {step}: {source}")]
    Invalid { step: usize, source: ImagingError },
}

impl PipelineError {
    /// 1-based index of the offending step.
    pub fn step(&self) -> usize {
        match self {
            PipelineError::TypeMismatch { step, .. } | PipelineError::Invalid { step, .. } => *step,
        }
    }
}

/// Type-checks and validates every step without touching pixels.
pub fn check_pipeline(input_is_gray: bool, ops: &[EnhancementOp]) -> Result<(), PipelineError> {
    let mut gray = input_is_gray;
    for (i, op) in ops.iter().enumerate() {
        let step = i + 1;
        if op.needs_gray() && !gray {
            return Err(PipelineError::TypeMismatch {
                step,
                op: op.name(),
            });
        }
        op.validate()
            .map_err(|source| PipelineError::Invalid { step, source })?;
        if matches!(op, EnhancementOp::Rgb2Gray) {
            gray = true;
        }
    }
    Ok(())
}

/// Applies `ops` left to right.
///
/// `rgb2gray` on an image that is already gray passes it through. Histogram
/// steps leave the image untouched and attach their bins to the lineage.
pub fn apply_pipeline(
    img: impl Into<AnyImage>,
    ops: &[EnhancementOp],
) -> Result<PipelineOutput, PipelineError> {
    let mut image = img.into();
    check_pipeline(image.is_gray(), ops)?;
    let mut lineage = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        let step = i + 1;
        let wrap = |source| PipelineError::Invalid { step, source };
        let mut hist = None;
        image = match (op, image) {
            (EnhancementOp::Rgb2Gray, AnyImage::Rgb(rgb)) => AnyImage::Gray(rgb_to_gray(&rgb)),
            (EnhancementOp::Rgb2Gray, gray) => gray,
            (EnhancementOp::Complement, AnyImage::Rgb(rgb)) => AnyImage::Rgb(complement(&rgb)),
            (EnhancementOp::Complement, AnyImage::Gray(g)) => AnyImage::Gray(complement(&g)),
            (EnhancementOp::RotateQuarter { turns }, AnyImage::Rgb(rgb)) => {
                AnyImage::Rgb(rotate_quarter(&rgb, *turns).map_err(wrap)?)
            }
            (EnhancementOp::RotateQuarter { turns }, AnyImage::Gray(g)) => {
                AnyImage::Gray(rotate_quarter(&g, *turns).map_err(wrap)?)
            }
            (EnhancementOp::Histogram, AnyImage::Gray(g)) => {
                hist = Some(histogram(&g));
                AnyImage::Gray(g)
            }
            (EnhancementOp::GrayAdjust(w), AnyImage::Gray(g)) => {
                AnyImage::Gray(gray_adjust(&g, *w).map_err(wrap)?)
            }
            (EnhancementOp::NoiseFilter { kind, k }, AnyImage::Gray(g)) => {
                AnyImage::Gray(noise_filter(&g, *kind, *k).map_err(wrap)?)
            }
            (EnhancementOp::Edge(e), AnyImage::Gray(g)) => {
                AnyImage::Gray(edge_detect(&g, *e).map_err(wrap)?)
            }
            (op, AnyImage::Rgb(_)) => {
                return Err(PipelineError::TypeMismatch {
                    step,
                    op: op.name(),
                })
            }
        };
        lineage.push(LineageEntry {
            step,
            op: *op,
            histogram: hist,
        });
    }
    Ok(PipelineOutput { image, lineage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{GrayImage, RgbImage};

    fn sample() -> RgbImage {
        RgbImage::from_fn(6, 4, |x, y| [(x * 40) as u8, (y * 60) as u8, 90]).unwrap()
    }

    #[test]
    fn empty_pipeline_is_identity() {
        let out = apply_pipeline(sample(), &[]).unwrap();
        assert_eq!(out.image, AnyImage::Rgb(sample()));
        assert!(out.lineage.is_empty());
    }

    #[test]
    fn double_complement_after_gray() {
        let a = apply_pipeline(
            sample(),
            &[
                EnhancementOp::Rgb2Gray,
                EnhancementOp::Complement,
                EnhancementOp::Complement,
            ],
        )
        .unwrap();
        let b = apply_pipeline(sample(), &[EnhancementOp::Rgb2Gray]).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.lineage.len(), 3);
    }

    #[test]
    fn gray_op_on_rgb_names_step() {
        let err = apply_pipeline(
            sample(),
            &[EnhancementOp::Complement, EnhancementOp::Edge(EdgeOperator::sobel())],
        )
        .unwrap_err();
        assert_eq!(err, PipelineError::TypeMismatch { step: 2, op: "edge" });
        assert_eq!(err.step(), 2);
    }

    #[test]
    fn invalid_params_name_step() {
        let err = apply_pipeline(
            sample(),
            &[
                EnhancementOp::Rgb2Gray,
                EnhancementOp::NoiseFilter {
                    kind: FilterKind::Mean,
                    k: 4,
                },
            ],
        )
        .unwrap_err();
        assert_eq!(err.step(), 2);
        assert!(matches!(
            err,
            PipelineError::Invalid {
                source: ImagingError::BadKernel(_),
                ..
            }
        ));
    }

    #[test]
    fn histogram_step_keeps_image() {
        let out = apply_pipeline(
            sample(),
            &[EnhancementOp::Rgb2Gray, EnhancementOp::Histogram],
        )
        .unwrap();
        let gray = rgb_to_gray(&sample());
        assert_eq!(out.image, AnyImage::Gray(gray.clone()));
        let (step, h) = out.histograms().next().unwrap();
        assert_eq!(step, 2);
        assert_eq!(h, &histogram(&gray));
        assert_eq!(h.total(), 24);
    }

    #[test]
    fn gray_input_skips_conversion() {
        let g = GrayImage::filled(4, 4, [3]).unwrap();
        let out = apply_pipeline(g.clone(), &[EnhancementOp::Rgb2Gray]).unwrap();
        assert_eq!(out.image, AnyImage::Gray(g));
    }

    #[test]
    fn json_contract() {
        let ops: Vec<EnhancementOp> = serde_json::from_str(
            r#"[{"op":"rgb2gray"},{"op":"edge","operator":"sobel","threshold_frac":0.25},
                {"op":"complement"},{"op":"histogram"},
                {"op":"gray_adjust","low_in":0.2,"high_in":0.8,"gamma":1.5},
                {"op":"noise_filter","kind":"mean","k":5},
                {"op":"noise_filter"},
                {"op":"rotate","turns":1},
                {"op":"edge","operator":"canny"}]"#,
        )
        .unwrap();
        assert_eq!(
            ops,
            vec![
                EnhancementOp::Rgb2Gray,
                EnhancementOp::Edge(EdgeOperator::Sobel {
                    threshold_frac: 0.25
                }),
                EnhancementOp::Complement,
                EnhancementOp::Histogram,
                EnhancementOp::GrayAdjust(GrayWindow {
                    low_in: 0.2,
                    high_in: 0.8,
                    gamma: 1.5
                }),
                EnhancementOp::NoiseFilter {
                    kind: FilterKind::Mean,
                    k: 5
                },
                EnhancementOp::NoiseFilter {
                    kind: FilterKind::Median,
                    k: 3
                },
                EnhancementOp::RotateQuarter { turns: 1 },
                EnhancementOp::Edge(EdgeOperator::canny()),
            ]
        );
        let json = serde_json::to_string(&ops[..2]).unwrap();
        assert_eq!(
            json,
            r#"[{"op":"rgb2gray"},{"op":"edge","operator":"sobel","threshold_frac":0.25}]"#
        );
        let back: Vec<EnhancementOp> = serde_json::from_str(&serde_json::to_string(&ops).unwrap()).unwrap();
        assert_eq!(back, ops);
        assert!(serde_json::from_str::<EnhancementOp>(r#"{"op":"sharpen"}"#).is_err());
    }
}

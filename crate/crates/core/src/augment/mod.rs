//! Anomaly composition operators.
//!
//! Every operator is a pure function of its inputs and a [`SeededRng`]. All
//! of them except [`rotate_normal`] leave pixels outside the returned mask
//! bit-identical to the input image.

mod blend;
mod cutpaste;
mod ndaa;
mod pipeline;
mod poisson;
mod rotation;
mod source;

pub use blend::{apply_opaque, apply_transparent};
pub use cutpaste::cutpaste;
pub use ndaa::{ndaa, Axis, NdaaOutput, NdaaParams, NdaaRecord};
pub use pipeline::{simulate, Category, OperatorParams, SimContext, TransparentParams};
pub use poisson::{poisson_blend, poisson_paste, PoissonOutcome, PoissonParams};
pub use rotation::{rotate_normal, AngleSet};
pub use source::{sample_source, AnomalySourcePool, SourceRecord};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::{ImageBuffer, ImageError, Mask};
use crate::perlin::MaskError;
use crate::rng::SeededRng;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("anomaly source pool is empty")]
    EmptyPool,
    #[error("unreadable anomaly source {path}: {reason}")]
    UnreadableSource { path: String, reason: String },
    #[error("distortion produced an empty anomaly mask")]
    DegenerateDistortion,
    #[error("angle set is empty")]
    EmptyAngleSet,
    #[error("image {w}x{h} is too small for this operator")]
    ImageTooSmall { w: usize, h: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(
        "poisson solver did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    SolverNotConverged { residual: f64, iterations: usize },
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn to_mask(&self, width: usize, height: usize) -> Mask {
        Mask::from_fn(width, height, |x, y| self.contains(x, y))
    }
}

/// Record of everything sampled while producing one augmented image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugmentRecord {
    Transparent {
        beta: f64,
        source: SourceRecord,
    },
    Opaque {
        source: SourceRecord,
    },
    Ndaa(NdaaRecord),
    Rotation {
        angle_deg: f64,
    },
    Cutpaste {
        src: Rect,
        dst: Rect,
    },
    Poisson {
        src: Rect,
        dst: Rect,
        scale: f64,
        iterations: usize,
        residual: f64,
        converged: bool,
    },
}

/// An augmented image with its ground-truth mask.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub image: ImageBuffer,
    pub mask: Mask,
    pub record: AugmentRecord,
}

pub(crate) fn check_range(
    name: &str,
    (lo, hi): (f64, f64),
    min: f64,
    max: f64,
) -> Result<(), AugmentError> {
    if lo.is_finite() && hi.is_finite() && lo <= hi && lo >= min && hi <= max {
        Ok(())
    } else {
        Err(AugmentError::InvalidParams(format!(
            "{name} [{lo}, {hi}] must be ordered and within [{min}, {max}]"
        )))
    }
}

pub(crate) fn uniform(rng: &mut SeededRng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Side length `round(frac * dim)` clamped to `[min_side, max_side]`.
pub(crate) fn side_from_frac(frac: f64, dim: usize, min_side: usize, max_side: usize) -> usize {
    ((frac * dim as f64).round() as usize).clamp(min_side, max_side)
}

/// Samples a rectangle whose sides are fractions of the image dimensions,
/// placed uniformly at random.
pub(crate) fn sample_rect(
    rng: &mut SeededRng,
    (w, h): (usize, usize),
    frac_range: (f64, f64),
    min_side: usize,
    max_side: (usize, usize),
) -> Rect {
    let rw = side_from_frac(uniform(rng, frac_range), w, min_side, max_side.0);
    let rh = side_from_frac(uniform(rng, frac_range), h, min_side, max_side.1);
    let x = rng.gen_range(0..=w - rw);
    let y = rng.gen_range(0..=h - rh);
    Rect { x, y, w: rw, h: rh }
}

pub(crate) fn same_dims(a: &ImageBuffer, b: &ImageBuffer) -> Result<(), AugmentError> {
    if a.dims() != b.dims() || a.channels() != b.channels() {
        return Err(AugmentError::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    Ok(())
}

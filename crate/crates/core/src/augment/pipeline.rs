use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    apply_opaque, apply_transparent, check_range, cutpaste, ndaa, poisson_paste, rotate_normal,
    sample_source, uniform, AngleSet, AnomalySourcePool, AugmentError, AugmentRecord, Augmented,
    NdaaParams, PoissonParams,
};
use crate::imgcore::ImageBuffer;
use crate::perlin::{generate_uncertain_mask, MaskParams};
use crate::rng::SeededRng;

/// Kind of simulated sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Transparent,
    Opaque,
    /// Near-distribution sine distortion.
    #[serde(rename = "nda", alias = "ndaa")]
    Ndaa,
    Cutpaste,
    /// Poisson-blended patch from another image.
    Nsa,
    /// Rotated normal image, labelled normal.
    Rotation,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Transparent,
        Category::Opaque,
        Category::Ndaa,
        Category::Cutpaste,
        Category::Nsa,
        Category::Rotation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Transparent => "transparent",
            Category::Opaque => "opaque",
            Category::Ndaa => "nda",
            Category::Cutpaste => "cutpaste",
            Category::Nsa => "nsa",
            Category::Rotation => "rotation",
        }
    }

    /// Whether samples of this category carry a non-empty mask.
    pub fn is_anomalous(self) -> bool {
        self != Category::Rotation
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transparent" => Ok(Category::Transparent),
            "opaque" => Ok(Category::Opaque),
            "nda" | "ndaa" => Ok(Category::Ndaa),
            "cutpaste" => Ok(Category::Cutpaste),
            "nsa" => Ok(Category::Nsa),
            "rotation" => Ok(Category::Rotation),
            other => Err(format!("unknown category '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransparentParams {
    /// Opacity of the overlaid source.
    pub beta_range: (f64, f64),
}

impl Default for TransparentParams {
    fn default() -> Self {
        Self {
            beta_range: (0.15, 0.85),
        }
    }
}

impl TransparentParams {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let (lo, hi) = self.beta_range;
        if !(lo > 0.0 && hi < 1.0) {
            return Err(AugmentError::InvalidParams(
                "beta_range must lie inside (0, 1)".into(),
            ));
        }
        check_range("beta_range", self.beta_range, 0.0, 1.0)
    }
}

/// Parameters for every operator, as configured for a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorParams {
    pub transparent: TransparentParams,
    pub mask: MaskParams,
    pub ndaa: NdaaParams,
    pub cutpaste_rect_frac_range: CutpasteRange,
    pub poisson: PoissonParams,
    pub rotation_angles: AngleSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CutpasteRange(pub (f64, f64));

impl Default for CutpasteRange {
    fn default() -> Self {
        CutpasteRange((0.1, 0.3))
    }
}

impl OperatorParams {
    pub fn validate(&self) -> Result<(), AugmentError> {
        self.transparent.validate()?;
        self.mask.validate()?;
        self.ndaa.validate()?;
        check_range(
            "cutpaste_rect_frac_range",
            self.cutpaste_rect_frac_range.0,
            0.0,
            1.0,
        )?;
        self.poisson.validate()
    }
}

/// Inputs besides the target image that some operators need.
#[derive(Debug, Clone, Copy)]
pub struct SimContext<'a> {
    pub pool: &'a AnomalySourcePool,
    /// Donor image for `nsa`; the target itself when absent.
    pub partner: Option<&'a ImageBuffer>,
}

/// Applies one category's operator to `img`.
pub fn simulate(
    category: Category,
    img: &ImageBuffer,
    params: &OperatorParams,
    ctx: SimContext<'_>,
    rng: &mut SeededRng,
) -> Result<Augmented, AugmentError> {
    match category {
        Category::Transparent | Category::Opaque => {
            let mask = generate_uncertain_mask(img.width(), img.height(), &params.mask, rng)?;
            if category == Category::Transparent {
                params.transparent.validate()?;
                let beta = uniform(rng, params.transparent.beta_range);
                let (src, source) = sample_source(ctx.pool, img, rng)?;
                Ok(Augmented {
                    image: apply_transparent(img, &src, &mask, beta as f32)?,
                    mask,
                    record: AugmentRecord::Transparent { beta, source },
                })
            } else {
                let (src, source) = sample_source(ctx.pool, img, rng)?;
                Ok(Augmented {
                    image: apply_opaque(img, &src, &mask)?,
                    mask,
                    record: AugmentRecord::Opaque { source },
                })
            }
        }
        Category::Ndaa => {
            let out = ndaa(img, &params.ndaa, rng)?;
            Ok(Augmented {
                image: out.image,
                mask: out.mask,
                record: AugmentRecord::Ndaa(out.record),
            })
        }
        Category::Cutpaste => cutpaste(img, rng, params.cutpaste_rect_frac_range.0),
        Category::Nsa => poisson_paste(img, ctx.partner.unwrap_or(img), rng, &params.poisson),
        Category::Rotation => rotate_normal(img, rng, &params.rotation_angles),
    }
}

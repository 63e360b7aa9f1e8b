//! Per-class selection of which simulated anomalies are meaningful.
//!
//! Texture classes tolerate rotation and do not treat local position changes
//! as defects, so they get rotated normals and no NDAA. Objects with a fixed
//! pose must not be rotated, and NDAA is enabled wherever relative position
//! matters. The built-in table is a convenience default; every field can be
//! overridden.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::Category;
use crate::rng::SeededRng;

pub const TEXTURE_CLASSES: [&str; 5] = ["carpet", "grid", "leather", "tile", "wood"];
pub const OBJECT_CLASSES: [&str; 10] = [
    "bottle",
    "cable",
    "capsule",
    "hazelnut",
    "metal_nut",
    "pill",
    "screw",
    "toothbrush",
    "transistor",
    "zipper",
];
/// Objects photographed in arbitrary orientations.
const ROTATION_TOLERANT_OBJECTS: [&str; 2] = ["hazelnut", "screw"];

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryWeights {
    pub transparent: f64,
    pub opaque: f64,
    pub ndaa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationProfile {
    pub class_name: String,
    pub rotation_tolerant: bool,
    pub ndaa_enabled: bool,
    pub transparent_enabled: bool,
    pub opaque_enabled: bool,
    pub category_weights: CategoryWeights,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightOverrides {
    pub transparent: Option<f64>,
    pub opaque: Option<f64>,
    pub ndaa: Option<f64>,
}

/// Partial profile; `None` fields keep the built-in default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverrides {
    pub rotation_tolerant: Option<bool>,
    pub ndaa_enabled: Option<bool>,
    pub transparent_enabled: Option<bool>,
    pub opaque_enabled: Option<bool>,
    pub category_weights: Option<WeightOverrides>,
}

impl AugmentationProfile {
    /// Built-in default for `class_name` before overrides.
    pub fn builtin(class_name: &str) -> Self {
        let (rotation_tolerant, ndaa_enabled) = if TEXTURE_CLASSES.contains(&class_name) {
            (true, false)
        } else if OBJECT_CLASSES.contains(&class_name) {
            (ROTATION_TOLERANT_OBJECTS.contains(&class_name), true)
        } else {
            (false, true)
        };
        AugmentationProfile {
            class_name: class_name.to_string(),
            rotation_tolerant,
            ndaa_enabled,
            transparent_enabled: true,
            opaque_enabled: true,
            category_weights: CategoryWeights {
                transparent: 1.0,
                opaque: 1.0,
                ndaa: if ndaa_enabled { 1.0 } else { 0.0 },
            },
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |m: String| Err(ProfileError::InvalidProfile(m));
        if self.class_name.is_empty() {
            return bad("class name is empty".into());
        }
        if !(self.transparent_enabled || self.opaque_enabled || self.ndaa_enabled) {
            return bad("at least one of transparent, opaque, ndaa must be enabled".into());
        }
        let w = self.category_weights;
        for (name, enabled, weight) in [
            ("transparent", self.transparent_enabled, w.transparent),
            ("opaque", self.opaque_enabled, w.opaque),
            ("ndaa", self.ndaa_enabled, w.ndaa),
        ] {
            if !(weight.is_finite() && weight >= 0.0) {
                return bad(format!("{name} weight {weight} must be finite and >= 0"));
            }
            if !enabled && weight != 0.0 {
                return bad(format!("{name} is disabled but has weight {weight}"));
            }
        }
        if w.transparent + w.opaque + w.ndaa <= 0.0 {
            return bad("enabled category weights sum to zero".into());
        }
        Ok(())
    }

    pub fn is_enabled(&self, category: Category) -> bool {
        match category {
            Category::Transparent => self.transparent_enabled,
            Category::Opaque => self.opaque_enabled,
            Category::Ndaa => self.ndaa_enabled,
            Category::Rotation => self.rotation_tolerant,
            Category::Cutpaste | Category::Nsa => true,
        }
    }
}

/// Built-in defaults for `class_name` with `overrides` applied field by field.
///
/// Enabling a category without a weight gives it weight 1; disabling one
/// without a weight sets its weight to 0.
pub fn resolve_profile(
    class_name: &str,
    overrides: &ProfileOverrides,
) -> Result<AugmentationProfile, ProfileError> {
    if class_name.is_empty() {
        return Err(ProfileError::InvalidProfile("class name is empty".into()));
    }
    let mut p = AugmentationProfile::builtin(class_name);
    if let Some(v) = overrides.rotation_tolerant {
        p.rotation_tolerant = v;
    }
    let weights = overrides.category_weights.clone().unwrap_or_default();
    let toggle = |enabled: &mut bool, weight: &mut f64, set: Option<bool>, w: Option<f64>| {
        if let Some(v) = set {
            if v && !*enabled {
                *weight = 1.0;
            }
            if !v {
                *weight = 0.0;
            }
            *enabled = v;
        }
        if let Some(w) = w {
            *weight = w;
        }
    };
    toggle(
        &mut p.transparent_enabled,
        &mut p.category_weights.transparent,
        overrides.transparent_enabled,
        weights.transparent,
    );
    toggle(
        &mut p.opaque_enabled,
        &mut p.category_weights.opaque,
        overrides.opaque_enabled,
        weights.opaque,
    );
    toggle(
        &mut p.ndaa_enabled,
        &mut p.category_weights.ndaa,
        overrides.ndaa_enabled,
        weights.ndaa,
    );
    p.validate()?;
    Ok(p)
}

/// Draws one of the enabled anomaly categories, proportionally to its weight.
pub fn choose_category(profile: &AugmentationProfile, rng: &mut SeededRng) -> Category {
    let w = profile.category_weights;
    let options = [
        (
            Category::Transparent,
            profile.transparent_enabled,
            w.transparent,
        ),
        (Category::Opaque, profile.opaque_enabled, w.opaque),
        (Category::Ndaa, profile.ndaa_enabled, w.ndaa),
    ];
    let live: Vec<(Category, f64)> = options
        .iter()
        .filter(|(_, on, weight)| *on && *weight > 0.0)
        .map(|&(c, _, weight)| (c, weight))
        .collect();
    assert!(!live.is_empty(), "profile has no enabled category");
    let total: f64 = live.iter().map(|(_, w)| w).sum();
    let mut draw = rng.gen_range(0.0..total);
    for &(c, weight) in &live {
        if draw < weight {
            return c;
        }
        draw -= weight;
    }
    live[live.len() - 1].0
}

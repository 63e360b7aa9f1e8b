use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AugmentError, AugmentRecord, Augmented};
use crate::imgcore::{rotate, ImageBuffer, Mask};
use crate::rng::SeededRng;

/// Angles, in degrees, that rotation-tolerant classes may be turned by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSet {
    /// Uniform over `[lo, hi)`.
    Continuous {
        lo: f64,
        hi: f64,
    },
    Discrete(Vec<f64>),
}

impl Default for AngleSet {
    fn default() -> Self {
        AngleSet::Continuous {
            lo: -180.0,
            hi: 180.0,
        }
    }
}

impl AngleSet {
    pub fn sample(&self, rng: &mut SeededRng) -> Result<f64, AugmentError> {
        match self {
            AngleSet::Discrete(angles) if angles.is_empty() => Err(AugmentError::EmptyAngleSet),
            AngleSet::Discrete(angles) => Ok(angles[rng.gen_range(0..angles.len())]),
            AngleSet::Continuous { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => {
                Err(AugmentError::EmptyAngleSet)
            }
            AngleSet::Continuous { lo, hi } if lo == hi => Ok(*lo),
            AngleSet::Continuous { lo, hi } => Ok(rng.gen_range(*lo..*hi)),
        }
    }
}

/// Rotates a normal image and labels it normal: the mask is all zero.
pub fn rotate_normal(
    img: &ImageBuffer,
    rng: &mut SeededRng,
    angles: &AngleSet,
) -> Result<Augmented, AugmentError> {
    let angle = angles.sample(rng)?;
    Ok(Augmented {
        image: rotate(img, angle),
        mask: Mask::zeros(img.width(), img.height()),
        record: AugmentRecord::Rotation { angle_deg: angle },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img() -> ImageBuffer {
        ImageBuffer::from_fn(9, 7, 1, |x, y, _| (x * y) as f32 / 48.0)
    }

    #[test]
    fn zero_angle_is_identity() {
        let out = rotate_normal(
            &img(),
            &mut SeededRng::new(1),
            &AngleSet::Discrete(vec![0.0]),
        )
        .unwrap();
        assert_eq!(out.image, img());
        assert!(out.mask.is_empty());
    }

    #[test]
    fn mask_always_empty_and_deterministic() {
        for seed in 0..10 {
            let a = rotate_normal(&img(), &mut SeededRng::new(seed), &AngleSet::default()).unwrap();
            let b = rotate_normal(&img(), &mut SeededRng::new(seed), &AngleSet::default()).unwrap();
            assert_eq!(a.mask.count(), 0);
            assert_eq!(a.record, b.record);
        }
    }

    #[test]
    fn empty_sets_error() {
        let mut rng = SeededRng::new(1);
        assert!(matches!(
            rotate_normal(&img(), &mut rng, &AngleSet::Discrete(vec![])),
            Err(AugmentError::EmptyAngleSet)
        ));
        assert!(matches!(
            rotate_normal(
                &img(),
                &mut rng,
                &AngleSet::Continuous { lo: 10.0, hi: 0.0 }
            ),
            Err(AugmentError::EmptyAngleSet)
        ));
    }
}

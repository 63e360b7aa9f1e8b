//! Near-distribution anomalies: a rectangle is warped along a sine curve and
//! only the densely changed pixels are kept as the anomaly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_range, sample_rect, uniform, AugmentError, Rect};
use crate::imgcore::sample_bilinear;
use crate::imgcore::{
    block_reduce, resize_nearest, threshold, to_grayscale, BlockReduce, ImageBuffer, Mask,
};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NdaaParams {
    /// Rectangle side as a fraction of the image side.
    pub rect_frac_range: (f64, f64),
    /// Peak displacement in pixels.
    pub amplitude_range: (f64, f64),
    /// Number of sine periods across the rectangle.
    pub periods_range: (f64, f64),
    /// Luminance-difference threshold for the primitive mask.
    pub tau_primary: f32,
    pub block_size: usize,
    /// Threshold applied to the block-reduced difference.
    pub tau_reduced: f32,
    pub block_reduce: BlockReduce,
}

impl Default for NdaaParams {
    fn default() -> Self {
        Self {
            rect_frac_range: (0.1, 0.5),
            amplitude_range: (2.0, 8.0),
            periods_range: (1.0, 3.0),
            tau_primary: 10.0 / 255.0,
            block_size: 8,
            tau_reduced: 10.0 / 255.0,
            block_reduce: BlockReduce::Mean,
        }
    }
}

impl NdaaParams {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let (lo, hi) = self.rect_frac_range;
        if !(lo > 0.0 && hi < 1.0) {
            return Err(AugmentError::InvalidParams(
                "rect_frac_range must lie inside (0, 1)".into(),
            ));
        }
        check_range("rect_frac_range", self.rect_frac_range, 0.0, 1.0)?;
        check_range("amplitude_range", self.amplitude_range, 1.0, f64::MAX)?;
        check_range(
            "periods_range",
            self.periods_range,
            f64::MIN_POSITIVE,
            f64::MAX,
        )?;
        if self.block_size < 2 {
            return Err(AugmentError::InvalidParams(
                "block_size must be >= 2".into(),
            ));
        }
        if !(self.tau_primary > 0.0 && self.tau_reduced > 0.0) {
            return Err(AugmentError::InvalidParams(
                "thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Direction along which the sine displacement varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Each row is shifted horizontally.
    Rows,
    /// Each column is shifted vertically.
    Columns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdaaRecord {
    pub rect: Rect,
    pub axis: Axis,
    pub amplitude: f64,
    pub periods: f64,
    pub phase: f64,
}

/// Final sample plus the intermediate rasters of the pipeline.
#[derive(Debug, Clone)]
pub struct NdaaOutput {
    pub image: ImageBuffer,
    pub mask: Mask,
    pub distorted: ImageBuffer,
    pub primitive_mask: Mask,
    pub reduced_mask: Mask,
    pub record: NdaaRecord,
}

pub(crate) fn sine_distort(img: &ImageBuffer, rec: &NdaaRecord) -> ImageBuffer {
    let r = rec.rect;
    let len = match rec.axis {
        Axis::Rows => r.h,
        Axis::Columns => r.w,
    } as f64;
    let shift = |t: usize| {
        rec.amplitude * (std::f64::consts::TAU * rec.periods * t as f64 / len + rec.phase).sin()
    };
    ImageBuffer::from_fn(img.width(), img.height(), img.channels(), |x, y, c| {
        if !r.contains(x, y) {
            return img.get(x, y, c);
        }
        match rec.axis {
            Axis::Rows => sample_bilinear(img, x as f64 + shift(y - r.y), y as f64, c),
            Axis::Columns => sample_bilinear(img, x as f64, y as f64 + shift(x - r.x), c),
        }
    })
}

/// Builds a near-distribution anomaly.
///
/// The mask is the AND of the thresholded luminance difference and its
/// block-reduced, re-upsampled version. Pixels under the mask are replaced by
/// the distorted image. An empty mask is reported as
/// [`AugmentError::DegenerateDistortion`].
pub fn ndaa(
    img: &ImageBuffer,
    params: &NdaaParams,
    rng: &mut SeededRng,
) -> Result<NdaaOutput, AugmentError> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return Err(AugmentError::ImageTooSmall { w, h });
    }
    let rect = sample_rect(rng, (w, h), params.rect_frac_range, 1, (w, h));
    let axis = if rng.gen_bool(0.5) {
        Axis::Rows
    } else {
        Axis::Columns
    };
    let record = NdaaRecord {
        rect,
        axis,
        amplitude: uniform(rng, params.amplitude_range),
        periods: uniform(rng, params.periods_range),
        phase: rng.gen_range(0.0..std::f64::consts::TAU),
    };

    let distorted = sine_distort(img, &record);
    let diff = to_grayscale(img).abs_diff(&to_grayscale(&distorted))?;
    let primitive_mask = threshold(&diff, params.tau_primary);
    let reduced = block_reduce(&diff, params.block_size, params.block_reduce)?;
    let reduced_mask = threshold(&resize_nearest(&reduced, w, h), params.tau_reduced);
    let mask = primitive_mask.and(&reduced_mask);
    if mask.is_empty() {
        return Err(AugmentError::DegenerateDistortion);
    }

    let c = img.channels();
    let data = img
        .data()
        .iter()
        .zip(distorted.data())
        .enumerate()
        .map(|(i, (&iv, &dv))| if mask.data()[i / c] == 1 { dv } else { iv })
        .collect();
    Ok(NdaaOutput {
        image: ImageBuffer::from_raw(w, h, c, data),
        mask,
        distorted,
        primitive_mask,
        reduced_mask,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stripes(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 3, |x, y, c| {
            (0.5 + 0.45 * ((x as f32 * 0.7 + y as f32 * 0.3 + c as f32).sin())).clamp(0.0, 1.0)
        })
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = ImageBuffer::filled(64, 64, 3, 0.4);
        let err = ndaa(&img, &NdaaParams::default(), &mut SeededRng::new(1)).unwrap_err();
        assert!(matches!(err, AugmentError::DegenerateDistortion));
    }

    #[test]
    fn mask_is_contained_and_locality_holds() {
        let img = stripes(64, 64);
        let mut produced = 0;
        for seed in 0..30 {
            let Ok(out) = ndaa(&img, &NdaaParams::default(), &mut SeededRng::new(seed)) else {
                continue;
            };
            produced += 1;
            assert!(out.mask.is_subset_of(&out.primitive_mask));
            assert!(out.mask.is_subset_of(&out.reduced_mask));
            assert!(!out.mask.is_empty());
            for y in 0..64 {
                for x in 0..64 {
                    if !out.mask.get(x, y) {
                        assert_eq!(out.image.pixel(x, y), img.pixel(x, y));
                    } else {
                        assert!(out.record.rect.contains(x, y));
                        assert_eq!(out.image.pixel(x, y), out.distorted.pixel(x, y));
                    }
                }
            }
        }
        assert!(produced > 20);
    }

    #[test]
    fn distortion_only_touches_rectangle() {
        let img = stripes(32, 24);
        let rec = NdaaRecord {
            rect: Rect {
                x: 4,
                y: 6,
                w: 10,
                h: 8,
            },
            axis: Axis::Columns,
            amplitude: 3.0,
            periods: 1.5,
            phase: 0.3,
        };
        let d = sine_distort(&img, &rec);
        for y in 0..24 {
            for x in 0..32 {
                if !rec.rect.contains(x, y) {
                    assert_eq!(d.pixel(x, y), img.pixel(x, y));
                }
            }
        }
        assert_ne!(d, img);
    }

    #[test]
    fn deterministic() {
        let img = stripes(48, 48);
        let p = NdaaParams::default();
        let a = ndaa(&img, &p, &mut SeededRng::new(5)).unwrap();
        let b = ndaa(&img, &p, &mut SeededRng::new(5)).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.record, b.record);
    }

    #[test]
    fn rejects_bad_params() {
        let p = NdaaParams {
            block_size: 1,
            ..NdaaParams::default()
        };
        assert!(p.validate().is_err());
        let p = NdaaParams {
            rect_frac_range: (0.0, 0.5),
            ..NdaaParams::default()
        };
        assert!(p.validate().is_err());
        let p = NdaaParams {
            amplitude_range: (0.5, 2.0),
            ..NdaaParams::default()
        };
        assert!(p.validate().is_err());
    }
}

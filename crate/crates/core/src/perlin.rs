//! Lattice-gradient noise and the irregular "uncertain shape" masks built from it.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::{threshold, GrayField, Mask};
use crate::rng::SeededRng;

/// Cut applied to the normalised noise field.
pub const MASK_THRESHOLD: f32 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum MaskError {
    #[error("invalid lattice frequency {fx}x{fy} for a {w}x{h} field")]
    InvalidFrequency {
        fx: usize,
        fy: usize,
        w: usize,
        h: usize,
    },
    #[error("invalid mask parameters: {0}")]
    InvalidParams(String),
    #[error("no mask within the area band after {attempts} attempts")]
    MaskResampleExhausted { attempts: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskParams {
    pub min_area_frac: f64,
    pub max_area_frac: f64,
    /// Total number of noise draws before giving up.
    pub max_resamples: usize,
    /// Inclusive `[k_lo, k_hi]`; lattice frequency per axis is `2^k`.
    pub scale_exponent_range: (u32, u32),
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            min_area_frac: 0.001,
            max_area_frac: 0.6,
            max_resamples: 20,
            scale_exponent_range: (0, 6),
        }
    }
}

impl MaskParams {
    pub fn validate(&self) -> Result<(), MaskError> {
        let bad = |m: &str| Err(MaskError::InvalidParams(m.into()));
        if !(self.min_area_frac > 0.0
            && self.min_area_frac < self.max_area_frac
            && self.max_area_frac < 1.0)
        {
            return bad("need 0 < min_area_frac < max_area_frac < 1");
        }
        if self.max_resamples == 0 {
            return bad("max_resamples must be >= 1");
        }
        let (lo, hi) = self.scale_exponent_range;
        if lo > hi || hi > 16 {
            return bad("scale_exponent_range must satisfy k_lo <= k_hi <= 16");
        }
        Ok(())
    }
}

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// 2-D Perlin noise on an `fx`×`fy` lattice, min-max normalised to `[0, 1]`.
/// A constant raw field maps to 0.5 everywhere.
pub fn perlin_noise(
    w: usize,
    h: usize,
    fx: usize,
    fy: usize,
    rng: &mut SeededRng,
) -> Result<GrayField, MaskError> {
    if fx == 0 || fy == 0 || fx > w || fy > h {
        return Err(MaskError::InvalidFrequency { fx, fy, w, h });
    }
    let gw = fx + 1;
    let gradients: Vec<(f64, f64)> = (0..gw * (fy + 1))
        .map(|_| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            (a.cos(), a.sin())
        })
        .collect();
    let grad = |ix: usize, iy: usize, dx: f64, dy: f64| {
        let (gx, gy) = gradients[iy * gw + ix];
        gx * dx + gy * dy
    };

    let mut raw = Vec::with_capacity(w * h);
    for y in 0..h {
        let v = y as f64 * fy as f64 / h as f64;
        let iy = v.floor() as usize;
        let ty = v - iy as f64;
        let sy = fade(ty);
        for x in 0..w {
            let u = x as f64 * fx as f64 / w as f64;
            let ix = u.floor() as usize;
            let tx = u - ix as f64;
            let n00 = grad(ix, iy, tx, ty);
            let n10 = grad(ix + 1, iy, tx - 1.0, ty);
            let n01 = grad(ix, iy + 1, tx, ty - 1.0);
            let n11 = grad(ix + 1, iy + 1, tx - 1.0, ty - 1.0);
            let sx = fade(tx);
            let top = n00 + sx * (n10 - n00);
            let bottom = n01 + sx * (n11 - n01);
            raw.push(top + sy * (bottom - top));
        }
    }

    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let data = if span > 0.0 {
        raw.iter().map(|&v| ((v - lo) / span) as f32).collect()
    } else {
        vec![0.5; raw.len()]
    };
    Ok(GrayField::new(w, h, data).expect("length matches by construction"))
}

/// Draws thresholded Perlin masks until one falls inside the configured area band.
pub fn generate_uncertain_mask(
    w: usize,
    h: usize,
    params: &MaskParams,
    rng: &mut SeededRng,
) -> Result<Mask, MaskError> {
    params.validate()?;
    let (k_lo, k_hi) = params.scale_exponent_range;
    for _ in 0..params.max_resamples {
        let kx = rng.gen_range(k_lo..=k_hi);
        let ky = rng.gen_range(k_lo..=k_hi);
        let fx = (1usize << kx).min(w);
        let fy = (1usize << ky).min(h);
        let noise = perlin_noise(w, h, fx, fy, rng)?;
        let mask = threshold(&noise, MASK_THRESHOLD);
        let area = mask.area_fraction();
        if (params.min_area_frac..=params.max_area_frac).contains(&area) {
            return Ok(mask);
        }
    }
    Err(MaskError::MaskResampleExhausted {
        attempts: params.max_resamples,
    })
}

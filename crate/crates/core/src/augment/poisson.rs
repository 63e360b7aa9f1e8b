//! Seamless patch insertion by solving a discrete Poisson equation.
//!
//! Inside the destination rectangle the output `u` satisfies
//! `lap(u) = lap(patch)` on the interior with `u = I` on the rectangle
//! border. The system is solved per channel with Gauss-Seidel sweeps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_range, sample_rect, side_from_frac, uniform, AugmentError, AugmentRecord, Augmented, Rect,
};
use crate::imgcore::{crop, resize_bilinear, ImageBuffer, Mask};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoissonParams {
    /// Destination rectangle side as a fraction of the image side.
    pub rect_frac_range: (f64, f64),
    /// Source patch scale factor.
    pub scale_range: (f64, f64),
    /// Stop once every interior Gauss-Seidel correction is below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PoissonParams {
    fn default() -> Self {
        Self {
            rect_frac_range: (0.1, 0.3),
            scale_range: (0.5, 1.5),
            tol: 1e-4,
            max_iters: 10_000,
        }
    }
}

impl PoissonParams {
    pub fn validate(&self) -> Result<(), AugmentError> {
        check_range("rect_frac_range", self.rect_frac_range, 0.0, 1.0)?;
        check_range("scale_range", self.scale_range, f64::MIN_POSITIVE, f64::MAX)?;
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_iters == 0 {
            return Err(AugmentError::InvalidParams(
                "tol must be positive and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PoissonOutcome {
    pub image: ImageBuffer,
    /// Interior of the destination rectangle.
    pub mask: Mask,
    pub iterations: usize,
    /// Largest interior correction `|lap(u) - lap(patch)| / 4` at exit.
    pub residual: f64,
    pub converged: bool,
}

impl PoissonOutcome {
    /// Converts a non-converged solve into [`AugmentError::SolverNotConverged`].
    pub fn require_converged(self) -> Result<Self, AugmentError> {
        if self.converged {
            Ok(self)
        } else {
            Err(AugmentError::SolverNotConverged {
                residual: self.residual,
                iterations: self.iterations,
            })
        }
    }
}

/// Blends `patch` into `dst` over `rect`. The rectangle border stays equal
/// to `dst`; the interior takes the gradients of `patch`. Output values are
/// clamped to `[0, 1]`.
pub fn poisson_blend(
    dst: &ImageBuffer,
    patch: &ImageBuffer,
    rect: Rect,
    tol: f64,
    max_iters: usize,
) -> Result<PoissonOutcome, AugmentError> {
    let (w, h) = dst.dims();
    if patch.dims() != (rect.w, rect.h) || patch.channels() != dst.channels() {
        return Err(AugmentError::DimensionMismatch(format!(
            "patch {:?}x{} vs rect {}x{}x{}",
            patch.dims(),
            patch.channels(),
            rect.w,
            rect.h,
            dst.channels()
        )));
    }
    if rect.x + rect.w > w || rect.y + rect.h > h {
        return Err(AugmentError::InvalidParams(
            "rectangle exceeds image".into(),
        ));
    }
    if rect.w < 3 || rect.h < 3 {
        return Err(AugmentError::ImageTooSmall {
            w: rect.w,
            h: rect.h,
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(AugmentError::InvalidParams("tol must be positive".into()));
    }

    let (rw, rh) = (rect.w, rect.h);
    let c = dst.channels();
    let mut out = dst.data().to_vec();
    let mut iterations = 0;
    let mut residual = 0.0f64;

    for ch in 0..c {
        let p: Vec<f64> = (0..rw * rh)
            .map(|i| patch.get(i % rw, i / rw, ch) as f64)
            .collect();
        let idx = |x: usize, y: usize| y * rw + x;

        // Mean offset between the border of dst and the border of the patch,
        // used to start the interior near the solution.
        let mut offset = 0.0;
        let mut n = 0usize;
        for y in 0..rh {
            for x in 0..rw {
                if x == 0 || y == 0 || x == rw - 1 || y == rh - 1 {
                    offset += dst.get(rect.x + x, rect.y + y, ch) as f64 - p[idx(x, y)];
                    n += 1;
                }
            }
        }
        offset /= n as f64;

        let mut u: Vec<f64> = (0..rw * rh)
            .map(|i| {
                let (x, y) = (i % rw, i / rw);
                if x == 0 || y == 0 || x == rw - 1 || y == rh - 1 {
                    dst.get(rect.x + x, rect.y + y, ch) as f64
                } else {
                    p[i] + offset
                }
            })
            .collect();
        // Neighbour sums of the patch, in the same order used for `u`.
        let patch_nb: Vec<f64> = (0..rw * rh)
            .map(|i| {
                let (x, y) = (i % rw, i / rw);
                if x == 0 || y == 0 || x == rw - 1 || y == rh - 1 {
                    0.0
                } else {
                    p[idx(x - 1, y)] + p[idx(x + 1, y)] + p[idx(x, y - 1)] + p[idx(x, y + 1)]
                }
            })
            .collect();

        let mut ch_iters = 0;
        let mut ch_res = f64::INFINITY;
        while ch_iters < max_iters {
            ch_iters += 1;
            let mut max_corr = 0.0f64;
            for y in 1..rh - 1 {
                for x in 1..rw - 1 {
                    let i = idx(x, y);
                    let nb = u[i - 1] + u[i + 1] + u[i - rw] + u[i + rw];
                    let target = p[i] + (nb - patch_nb[i]) * 0.25;
                    let corr = target - u[i];
                    max_corr = max_corr.max(corr.abs());
                    u[i] = target;
                }
            }
            ch_res = max_corr;
            if max_corr < tol {
                break;
            }
        }
        iterations = iterations.max(ch_iters);
        residual = residual.max(ch_res);

        for y in 1..rh - 1 {
            for x in 1..rw - 1 {
                let o = ((rect.y + y) * w + rect.x + x) * c + ch;
                out[o] = (u[idx(x, y)] as f32).clamp(0.0, 1.0);
            }
        }
    }

    let interior = Rect {
        x: rect.x + 1,
        y: rect.y + 1,
        w: rw - 2,
        h: rh - 2,
    };
    Ok(PoissonOutcome {
        image: ImageBuffer::from_raw(w, h, c, out),
        mask: interior.to_mask(w, h),
        iterations,
        residual,
        converged: residual < tol,
    })
}

/// Takes a randomly scaled patch from `src` and blends it into a random
/// rectangle of `img`.
///
/// A solve that hits `max_iters` still returns its output; the record carries
/// `converged = false` and the final residual.
pub fn poisson_paste(
    img: &ImageBuffer,
    src: &ImageBuffer,
    rng: &mut SeededRng,
    params: &PoissonParams,
) -> Result<Augmented, AugmentError> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Err(AugmentError::ImageTooSmall { w, h });
    }
    let dst_rect = sample_rect(rng, (w, h), params.rect_frac_range, 3, (w, h));
    let scale = uniform(rng, params.scale_range);
    let sw = side_from_frac(1.0 / scale, dst_rect.w, 1, src.width());
    let sh = side_from_frac(1.0 / scale, dst_rect.h, 1, src.height());
    let src_rect = Rect {
        x: rng.gen_range(0..=src.width() - sw),
        y: rng.gen_range(0..=src.height() - sh),
        w: sw,
        h: sh,
    };
    let patch = resize_bilinear(
        &crop(src, src_rect.x, src_rect.y, sw, sh),
        dst_rect.w,
        dst_rect.h,
    )
    .with_channels(img.channels());

    let solved = poisson_blend(img, &patch, dst_rect, params.tol, params.max_iters)?;
    if !solved.converged {
        log::warn!(
            "poisson solve stopped at residual {:.3e} after {} iterations",
            solved.residual,
            solved.iterations
        );
    }
    Ok(Augmented {
        image: solved.image,
        mask: solved.mask,
        record: AugmentRecord::Poisson {
            src: src_rect,
            dst: dst_rect,
            scale,
            iterations: solved.iterations,
            residual: solved.residual,
            converged: solved.converged,
        },
    })
}

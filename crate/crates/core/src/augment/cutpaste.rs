use rand::Rng;

use super::{check_range, sample_rect, AugmentError, AugmentRecord, Augmented, Rect};
use crate::imgcore::ImageBuffer;
use crate::rng::SeededRng;

const MAX_PLACEMENT_TRIES: usize = 20;

/// Copies a random rectangle of `img` to a different random location. The
/// mask is the destination rectangle.
pub fn cutpaste(
    img: &ImageBuffer,
    rng: &mut SeededRng,
    rect_frac_range: (f64, f64),
) -> Result<Augmented, AugmentError> {
    check_range("rect_frac_range", rect_frac_range, 0.0, 1.0)?;
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return Err(AugmentError::ImageTooSmall { w, h });
    }
    // Sides are capped one pixel short of the image so a distinct
    // destination always exists.
    let src = sample_rect(rng, (w, h), rect_frac_range, 1, (w - 1, h - 1));
    let mut dst = src;
    for _ in 0..MAX_PLACEMENT_TRIES {
        dst = Rect {
            x: rng.gen_range(0..=w - src.w),
            y: rng.gen_range(0..=h - src.h),
            ..src
        };
        if dst != src {
            break;
        }
    }
    if dst == src {
        dst.x = if src.x + src.w < w {
            src.x + 1
        } else {
            src.x - 1
        };
    }

    let c = img.channels();
    let mut data = img.data().to_vec();
    for row in 0..src.h {
        let from = ((src.y + row) * w + src.x) * c;
        let to = ((dst.y + row) * w + dst.x) * c;
        data[to..to + src.w * c].copy_from_slice(&img.data()[from..from + src.w * c]);
    }
    Ok(Augmented {
        image: ImageBuffer::from_raw(w, h, c, data),
        mask: dst.to_mask(w, h),
        record: AugmentRecord::Cutpaste { src, dst },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient() -> ImageBuffer {
        ImageBuffer::from_fn(40, 30, 3, |x, y, c| {
            ((x * 3 + y * 5 + c * 11) % 97) as f32 / 96.0
        })
    }

    #[test]
    fn constant_image_is_unchanged() {
        let img = ImageBuffer::filled(32, 32, 1, 0.3);
        let out = cutpaste(&img, &mut SeededRng::new(1), (0.1, 0.3)).unwrap();
        assert_eq!(out.image, img);
        let AugmentRecord::Cutpaste { dst, .. } = out.record else {
            panic!()
        };
        assert_eq!(out.mask, dst.to_mask(32, 32));
    }

    #[test]
    fn mask_area_and_locality() {
        let img = gradient();
        for seed in 0..50 {
            let out = cutpaste(&img, &mut SeededRng::new(seed), (0.1, 0.5)).unwrap();
            let AugmentRecord::Cutpaste { src, dst } = out.record else {
                panic!()
            };
            assert_ne!(src, dst);
            assert_eq!(out.mask.count(), dst.area());
            for y in 0..30 {
                for x in 0..40 {
                    if dst.contains(x, y) {
                        let (sx, sy) = (x - dst.x + src.x, y - dst.y + src.y);
                        assert_eq!(out.image.pixel(x, y), img.pixel(sx, sy));
                    } else {
                        assert_eq!(out.image.pixel(x, y), img.pixel(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn tiny_image_still_moves_patch() {
        let img = ImageBuffer::from_fn(2, 2, 1, |x, y, _| (x + 2 * y) as f32 / 3.0);
        for seed in 0..20 {
            let out = cutpaste(&img, &mut SeededRng::new(seed), (0.9, 0.99)).unwrap();
            let AugmentRecord::Cutpaste { src, dst } = out.record else {
                panic!()
            };
            assert_ne!(src, dst);
        }
    }

    #[test]
    fn deterministic() {
        let img = gradient();
        let a = cutpaste(&img, &mut SeededRng::new(8), (0.1, 0.3)).unwrap();
        let b = cutpaste(&img, &mut SeededRng::new(8), (0.1, 0.3)).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.record, b.record);
    }
}

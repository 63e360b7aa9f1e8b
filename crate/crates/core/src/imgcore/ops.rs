use serde::{Deserialize, Serialize};

use super::{GrayField, ImageBuffer, ImageError, Mask};

const LUMA: [f32; 3] = [0.299, 0.587, 0.114];

/// Luminance of an image. Single-channel input is copied unchanged.
pub fn to_grayscale(img: &ImageBuffer) -> GrayField {
    let (w, h) = img.dims();
    let data = match img.channels() {
        1 => img.data().to_vec(),
        _ => img
            .data()
            .chunks_exact(3)
            .map(|p| LUMA[0] * p[0] + LUMA[1] * p[1] + LUMA[2] * p[2])
            .collect(),
    };
    GrayField {
        width: w,
        height: h,
        data,
    }
}

/// Pooling applied inside each block by [`block_reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockReduce {
    #[default]
    Mean,
    Max,
}

/// Mean over `b`×`b` blocks. Output is `ceil(w/b)`×`ceil(h/b)`; edge blocks
/// average only their in-bounds pixels.
pub fn block_reduce_mean(field: &GrayField, block: usize) -> Result<GrayField, ImageError> {
    block_reduce(field, block, BlockReduce::Mean)
}

pub fn block_reduce(
    field: &GrayField,
    block: usize,
    mode: BlockReduce,
) -> Result<GrayField, ImageError> {
    if block == 0 {
        return Err(ImageError::InvalidBlockSize);
    }
    if block == 1 {
        return Ok(field.clone());
    }
    let (w, h) = field.dims();
    let (ow, oh) = (w.div_ceil(block), h.div_ceil(block));
    let mut out = Vec::with_capacity(ow * oh);
    for by in 0..oh {
        let ys = by * block..((by + 1) * block).min(h);
        for bx in 0..ow {
            let xs = bx * block..((bx + 1) * block).min(w);
            let cells = ys
                .clone()
                .flat_map(|y| xs.clone().map(move |x| (x, y)))
                .map(|(x, y)| field.get(x, y));
            let v = match mode {
                BlockReduce::Mean => {
                    let n = ys.len() * xs.len();
                    (cells.map(|v| v as f64).sum::<f64>() / n as f64) as f32
                }
                BlockReduce::Max => cells.fold(f32::NEG_INFINITY, f32::max),
            };
            out.push(v);
        }
    }
    Ok(GrayField {
        width: ow,
        height: oh,
        data: out,
    })
}

#[inline]
fn nearest_index(dst: usize, src_dim: usize, dst_dim: usize) -> usize {
    let idx = ((dst as f64 + 0.5) * src_dim as f64 / dst_dim as f64).floor() as usize;
    idx.min(src_dim - 1)
}

/// Nearest-neighbour resampling with `src = floor((dst + 0.5) * src_dim / dst_dim)`.
pub fn resize_nearest(field: &GrayField, width: usize, height: usize) -> GrayField {
    assert!(width >= 1 && height >= 1, "target dimensions must be >= 1");
    let (sw, sh) = field.dims();
    if (sw, sh) == (width, height) {
        return field.clone();
    }
    let xs: Vec<usize> = (0..width).map(|x| nearest_index(x, sw, width)).collect();
    GrayField::from_fn(width, height, |x, y| {
        field.get(xs[x], nearest_index(y, sh, height))
    })
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Bilinear sample at a fractional position with edge replication.
#[inline]
pub(crate) fn sample_bilinear(img: &ImageBuffer, x: f64, y: f64, c: usize) -> f32 {
    let (w, h) = img.dims();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    let top = lerp(img.get(x0, y0, c) as f64, img.get(x1, y0, c) as f64, tx);
    let bottom = lerp(img.get(x0, y1, c) as f64, img.get(x1, y1, c) as f64, tx);
    (lerp(top, bottom, ty) as f32).clamp(0.0, 1.0)
}

/// Bilinear resize with half-pixel centres.
pub fn resize_bilinear(img: &ImageBuffer, width: usize, height: usize) -> ImageBuffer {
    assert!(width >= 1 && height >= 1, "target dimensions must be >= 1");
    let (sw, sh) = img.dims();
    if (sw, sh) == (width, height) {
        return img.clone();
    }
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    ImageBuffer::from_fn(width, height, img.channels(), |x, y, c| {
        let fx = (x as f64 + 0.5) * sx - 0.5;
        let fy = (y as f64 + 0.5) * sy - 0.5;
        sample_bilinear(img, fx, fy, c)
    })
}

/// Copies the `w`×`h` window whose top-left corner is `(x0, y0)`.
pub fn crop(img: &ImageBuffer, x0: usize, y0: usize, w: usize, h: usize) -> ImageBuffer {
    assert!(
        x0 + w <= img.width() && y0 + h <= img.height(),
        "crop window out of bounds"
    );
    let c = img.channels();
    let mut data = Vec::with_capacity(w * h * c);
    for y in y0..y0 + h {
        let start = (y * img.width() + x0) * c;
        data.extend_from_slice(&img.data()[start..start + w * c]);
    }
    ImageBuffer::from_raw(w, h, c, data)
}

/// `mask[i] = 1` iff `field[i] > tau`.
pub fn threshold(field: &GrayField, tau: f32) -> Mask {
    Mask {
        width: field.width(),
        height: field.height(),
        data: field.data().iter().map(|&v| u8::from(v > tau)).collect(),
    }
}

/// Rotates about the image centre with bilinear sampling and edge
/// replication. Output dimensions equal input dimensions.
pub fn rotate(img: &ImageBuffer, angle_deg: f64) -> ImageBuffer {
    if angle_deg.rem_euclid(360.0) == 0.0 {
        return img.clone();
    }
    let (w, h) = img.dims();
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    ImageBuffer::from_fn(w, h, img.channels(), |x, y, c| {
        // Inverse mapping: rotate the destination coordinate back by -angle.
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let sx = cos * dx + sin * dy + cx;
        let sy = -sin * dx + cos * dy + cy;
        sample_bilinear(img, sx, sy, c)
    })
}

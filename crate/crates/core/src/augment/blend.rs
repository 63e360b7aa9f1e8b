use super::{same_dims, AugmentError};
use crate::imgcore::{ImageBuffer, Mask};

fn check(img: &ImageBuffer, src: &ImageBuffer, mask: &Mask) -> Result<(), AugmentError> {
    same_dims(img, src)?;
    if mask.dims() != img.dims() {
        return Err(AugmentError::DimensionMismatch(format!(
            "mask {:?} vs image {:?}",
            mask.dims(),
            img.dims()
        )));
    }
    Ok(())
}

/// Transparent overlay: `!M*I + (1-beta)*(M*I) + beta*(M*N)`.
///
/// Pixels outside the mask are returned unchanged; `beta = 1` reproduces
/// [`apply_opaque`] bit for bit.
pub fn apply_transparent(
    img: &ImageBuffer,
    src: &ImageBuffer,
    mask: &Mask,
    beta: f32,
) -> Result<ImageBuffer, AugmentError> {
    check(img, src, mask)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(AugmentError::InvalidParams(format!(
            "beta {beta} outside [0, 1]"
        )));
    }
    let c = img.channels();
    let data = img
        .data()
        .iter()
        .zip(src.data())
        .enumerate()
        .map(|(i, (&iv, &nv))| {
            let m = mask.data()[i / c] as f32;
            let keep = 1.0 - m;
            (keep * iv + (1.0 - beta) * (m * iv) + beta * (m * nv)).clamp(0.0, 1.0)
        })
        .collect();
    Ok(ImageBuffer::from_raw(img.width(), img.height(), c, data))
}

/// Opaque replacement: `!M*I + M*N`.
pub fn apply_opaque(
    img: &ImageBuffer,
    src: &ImageBuffer,
    mask: &Mask,
) -> Result<ImageBuffer, AugmentError> {
    check(img, src, mask)?;
    let c = img.channels();
    let data = img
        .data()
        .iter()
        .zip(src.data())
        .enumerate()
        .map(|(i, (&iv, &nv))| {
            let m = mask.data()[i / c] as f32;
            ((1.0 - m) * iv + m * nv).clamp(0.0, 1.0)
        })
        .collect();
    Ok(ImageBuffer::from_raw(img.width(), img.height(), c, data))
}

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::{GrayField, ImageBuffer, ImageError, Mask};

fn io_err(path: &Path, source: std::io::Error) -> ImageError {
    if source.kind() == std::io::ErrorKind::NotFound {
        ImageError::FileNotFound(path.to_path_buf())
    } else {
        ImageError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Loads an 8-bit grayscale or RGB PNG, scaling bytes by 1/255.
///
/// Palette, alpha and 16-bit images are rejected rather than converted.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuffer, ImageError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| ImageError::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;

    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    let unsupported = |reason: String| ImageError::UnsupportedFormat {
        path: path.to_path_buf(),
        reason,
    };
    if depth != png::BitDepth::Eight {
        return Err(unsupported(format!("bit depth {depth:?}")));
    }
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(unsupported(format!("color type {other:?}"))),
    };

    let size = reader
        .output_buffer_size()
        .ok_or_else(|| unsupported("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    let line = frame.line_size;

    let mut data = Vec::with_capacity(width * height * channels);
    for row in buf.chunks(line).take(height) {
        data.extend(row[..width * channels].iter().map(|&b| b as f32 / 255.0));
    }
    Ok(ImageBuffer::from_raw(width, height, channels, data))
}

/// Loads any 8-bit image the `image` crate can decode (PNG, JPEG), converting
/// to grayscale or RGB. Used for texture pools, which are not held to the
/// strict PNG contract of [`load_png`].
pub fn load_any(path: impl AsRef<Path>) -> Result<ImageBuffer, ImageError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(ImageError::FileNotFound(path.to_path_buf()));
    }
    let img = image::open(path).map_err(|e| ImageError::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|b| b as f32 / 255.0)
        .collect();
    Ok(ImageBuffer::from_raw(w, h, 3, data))
}

fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    bytes: &[u8],
) -> Result<(), ImageError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let to_err = |e: png::EncodingError| ImageError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut writer = encoder.write_header().map_err(to_err)?;
    writer.write_image_data(bytes).map_err(to_err)?;
    writer.finish().map_err(to_err)
}

#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an 8-bit PNG using `round(v * 255)` per channel.
pub fn save_image_png(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let color = if img.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    };
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    write_png(path.as_ref(), img.width(), img.height(), color, &bytes)
}

/// Writes a mask as an 8-bit grayscale PNG with values {0, 255}.
pub fn save_mask_png(mask: &Mask, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let bytes: Vec<u8> = mask.data().iter().map(|&v| v * 255).collect();
    write_png(
        path.as_ref(),
        mask.width(),
        mask.height(),
        png::ColorType::Grayscale,
        &bytes,
    )
}

/// Writes a field as 8-bit grayscale after clamping to `[0, 1]`.
pub fn save_field_png(field: &GrayField, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let bytes: Vec<u8> = field.data().iter().map(|&v| quantize(v)).collect();
    write_png(
        path.as_ref(),
        field.width(),
        field.height(),
        png::ColorType::Grayscale,
        &bytes,
    )
}

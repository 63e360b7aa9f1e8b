//! Score-map files and directory-level evaluation.
//!
//! A score map is either an 8-bit grayscale PNG (score = byte / 255) or a raw
//! float file (`.f32` or `.bin`): width and height as little-endian `u32`,
//! followed by `width * height` little-endian `f32` values in row-major order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::imgcore::{load_png, GrayField, ImageError, Mask};
use crate::metrics::{evaluate_scoremaps, ImageScoring, MetricsError, MetricsReport};

const HEADER_LEN: usize = 8;

#[derive(Debug, Error)]
pub enum ScoreMapError {
    #[error("unpaired file '{stem}': no {missing} with that stem")]
    UnpairedFile { stem: String, missing: &'static str },
    #[error("malformed score file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no score maps found in {0}")]
    Empty(PathBuf),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl ScoreMapError {
    /// Stem of the file lacking a partner, if this is a pairing error.
    pub fn unpaired_stem(&self) -> Option<&str> {
        match self {
            ScoreMapError::UnpairedFile { stem, .. } => Some(stem),
            _ => None,
        }
    }
}

fn ext_of(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

pub fn write_raw_scoremap(field: &GrayField, path: impl AsRef<Path>) -> Result<(), ScoreMapError> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * field.data().len());
    bytes.extend_from_slice(&(field.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(field.height() as u32).to_le_bytes());
    for v in field.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|source| ScoreMapError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_raw_scoremap(path: impl AsRef<Path>) -> Result<GrayField, ScoreMapError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ScoreMapError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |reason: String| ScoreMapError::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(malformed("missing 8-byte header".into()));
    }
    let w = u32::from_le_bytes(bytes[0..4].try_into().expect("4 bytes")) as usize;
    let h = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != w * h * 4 {
        return Err(malformed(format!(
            "{w}x{h} header needs {} payload bytes, found {}",
            w * h * 4,
            body.len()
        )));
    }
    let data: Vec<f32> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(malformed(format!("non-finite value at index {i}")));
    }
    Ok(GrayField::new(w, h, data)?)
}

/// Reads a PNG or raw float score map, chosen by extension.
pub fn read_scoremap(path: impl AsRef<Path>) -> Result<GrayField, ScoreMapError> {
    let path = path.as_ref();
    match ext_of(path).as_deref() {
        Some("png") => {
            let img = load_png(path)?;
            if img.channels() != 1 {
                return Err(ScoreMapError::Malformed {
                    path: path.to_path_buf(),
                    reason: "score PNGs must be grayscale".into(),
                });
            }
            Ok(GrayField::new(img.width(), img.height(), img.into_data())?)
        }
        _ => read_raw_scoremap(path),
    }
}

/// Ground-truth mask: any non-zero pixel is anomalous.
pub fn read_gt_mask(path: impl AsRef<Path>) -> Result<Mask, ScoreMapError> {
    let img = load_png(path)?;
    let c = img.channels();
    let data = img
        .data()
        .chunks_exact(c)
        .map(|p| u8::from(p.iter().any(|&v| v > 0.0)))
        .collect();
    Ok(Mask::new(img.width(), img.height(), data)?)
}

fn listing(dir: &Path, exts: &[&str]) -> Result<BTreeMap<String, PathBuf>, ScoreMapError> {
    let io = |source| ScoreMapError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if !path.is_file() || !ext_of(&path).is_some_and(|e| exts.contains(&e.as_str())) {
            continue;
        }
        let mut stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if let Some(s) = stem.strip_suffix("_mask") {
            stem = s.to_string();
        }
        out.insert(stem, path);
    }
    Ok(out)
}

/// Pairs score maps with ground-truth masks by file stem (a trailing `_mask`
/// is ignored on either side) and evaluates them.
pub fn evaluate_dirs(
    scores_dir: &Path,
    gt_dir: &Path,
    scoring: ImageScoring,
) -> Result<MetricsReport, ScoreMapError> {
    let scores = listing(scores_dir, &["png", "f32", "bin"])?;
    let gts = listing(gt_dir, &["png"])?;
    if scores.is_empty() {
        return Err(ScoreMapError::Empty(scores_dir.to_path_buf()));
    }
    if let Some(stem) = scores.keys().find(|k| !gts.contains_key(*k)) {
        return Err(ScoreMapError::UnpairedFile {
            stem: stem.clone(),
            missing: "ground-truth mask",
        });
    }
    if let Some(stem) = gts.keys().find(|k| !scores.contains_key(*k)) {
        return Err(ScoreMapError::UnpairedFile {
            stem: stem.clone(),
            missing: "score map",
        });
    }
    let mut maps = Vec::with_capacity(scores.len());
    let mut masks = Vec::with_capacity(scores.len());
    for (stem, path) in &scores {
        maps.push(read_scoremap(path)?);
        masks.push(read_gt_mask(&gts[stem])?);
    }
    Ok(evaluate_scoremaps(&maps, &masks, scoring)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::save_mask_png;

    #[test]
    fn raw_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = GrayField::from_fn(3, 2, |x, y| x as f32 * 0.25 - y as f32);
        let p = dir.path().join("a.f32");
        write_raw_scoremap(&f, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], &[3, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 8 + 6 * 4);
        assert_eq!(read_scoremap(&p).unwrap(), f);
    }

    #[test]
    fn truncated_raw_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bin");
        std::fs::write(&p, [2, 0, 0, 0, 2, 0, 0, 0, 0, 0]).unwrap();
        assert!(matches!(
            read_scoremap(&p),
            Err(ScoreMapError::Malformed { .. })
        ));
    }

    #[test]
    fn pairing_by_stem() {
        let dir = tempfile::tempdir().unwrap();
        let (s, g) = (dir.path().join("s"), dir.path().join("g"));
        std::fs::create_dir_all(&s).unwrap();
        std::fs::create_dir_all(&g).unwrap();
        for (i, stem) in ["000", "001"].iter().enumerate() {
            let m = Mask::from_fn(4, 4, |x, _| i == 1 && x < 2);
            save_mask_png(&m, g.join(format!("{stem}_mask.png"))).unwrap();
            write_raw_scoremap(&GrayField::from(&m), s.join(format!("{stem}.f32"))).unwrap();
        }
        let r = evaluate_dirs(&s, &g, ImageScoring::Max).unwrap();
        assert_eq!(r.pixel.auroc, Some(1.0));
        assert_eq!(r.counts.images, 2);

        write_raw_scoremap(&GrayField::from_fn(4, 4, |_, _| 0.0), s.join("002.f32")).unwrap();
        let err = evaluate_dirs(&s, &g, ImageScoring::Max).unwrap_err();
        assert_eq!(err.unpaired_stem(), Some("002"));
    }
}

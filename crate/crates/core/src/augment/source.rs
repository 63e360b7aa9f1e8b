use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AugmentError, Rect};
use crate::imgcore::{crop, load_any, resize_bilinear, ImageBuffer};
use crate::rng::SeededRng;

/// Where anomaly content comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum AnomalySourcePool {
    /// Texture images on disk, sorted by path.
    External(Vec<PathBuf>),
    /// Crops of the target image itself.
    SelfPatch,
}

impl AnomalySourcePool {
    /// Collects every PNG/JPEG under `dir`, recursively, in sorted order.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, AugmentError> {
        let dir = dir.as_ref();
        let mut paths = Vec::new();
        collect_images(dir, &mut paths).map_err(|e| AugmentError::UnreadableSource {
            path: dir.display().to_string(),
            reason: e.to_string(),
        })?;
        if paths.is_empty() {
            return Err(AugmentError::EmptyPool);
        }
        paths.sort();
        Ok(AnomalySourcePool::External(paths))
    }

    pub fn len(&self) -> usize {
        match self {
            AnomalySourcePool::External(p) => p.len(),
            AnomalySourcePool::SelfPatch => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn collect_images(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_images(&path, out)?;
        } else if path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Which image a source was cut from and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    /// Pool image path, or `None` for a self patch.
    pub image: Option<String>,
    pub crop: Rect,
}

/// Random crop, resized to the target's size and channel count.
///
/// External crops cover at least half of each side (a quarter of the area);
/// self patches at least a quarter of each side.
pub fn sample_source(
    pool: &AnomalySourcePool,
    target: &ImageBuffer,
    rng: &mut SeededRng,
) -> Result<(ImageBuffer, SourceRecord), AugmentError> {
    let (w, h) = target.dims();
    let (image, path, min_div) = match pool {
        AnomalySourcePool::External(paths) => {
            if paths.is_empty() {
                return Err(AugmentError::EmptyPool);
            }
            let path = &paths[rng.gen_range(0..paths.len())];
            let img = load_any(path).map_err(|e| AugmentError::UnreadableSource {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            (img, Some(path.display().to_string()), 2)
        }
        AnomalySourcePool::SelfPatch => (target.clone(), None, 4),
    };
    let (sw, sh) = image.dims();
    let cw = rng.gen_range(sw.div_ceil(min_div).max(1)..=sw);
    let ch = rng.gen_range(sh.div_ceil(min_div).max(1)..=sh);
    let rect = Rect {
        x: rng.gen_range(0..=sw - cw),
        y: rng.gen_range(0..=sh - ch),
        w: cw,
        h: ch,
    };
    let out = resize_bilinear(&crop(&image, rect.x, rect.y, cw, ch), w, h)
        .with_channels(target.channels());
    Ok((
        out,
        SourceRecord {
            image: path,
            crop: rect,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::save_image_png;

    #[test]
    fn empty_pool() {
        let target = ImageBuffer::filled(8, 8, 3, 0.5);
        let err = sample_source(
            &AnomalySourcePool::External(vec![]),
            &target,
            &mut SeededRng::new(0),
        )
        .unwrap_err();
        assert!(matches!(err, AugmentError::EmptyPool));

        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            AnomalySourcePool::from_dir(dir.path()),
            Err(AugmentError::EmptyPool)
        ));
    }

    #[test]
    fn output_matches_target_shape_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        let tex = ImageBuffer::from_fn(30, 20, 3, |x, y, c| ((x + y + c) % 5) as f32 / 4.0);
        save_image_png(&tex, dir.path().join("sub/a.png")).unwrap();
        save_image_png(&tex, dir.path().join("b.png")).unwrap();
        let pool = AnomalySourcePool::from_dir(dir.path()).unwrap();
        assert_eq!(pool.len(), 2);

        let target = ImageBuffer::filled(17, 11, 1, 0.2);
        for seed in 0..10 {
            let (a, ra) = sample_source(&pool, &target, &mut SeededRng::new(seed)).unwrap();
            let (b, rb) = sample_source(&pool, &target, &mut SeededRng::new(seed)).unwrap();
            assert_eq!(a.dims(), (17, 11));
            assert_eq!(a.channels(), 1);
            assert_eq!(a, b);
            assert_eq!(ra, rb);
            assert!(ra.crop.area() * 4 >= 30 * 20);
        }
    }

    #[test]
    fn self_patch_uses_target() {
        let target = ImageBuffer::from_fn(16, 16, 3, |x, _, _| x as f32 / 15.0);
        let (out, rec) = sample_source(
            &AnomalySourcePool::SelfPatch,
            &target,
            &mut SeededRng::new(4),
        )
        .unwrap();
        assert_eq!(out.dims(), (16, 16));
        assert!(rec.image.is_none());
        assert!(rec.crop.w >= 4 && rec.crop.h >= 4);
    }

    #[test]
    fn unreadable_source() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.png"), b"not a png").unwrap();
        let pool = AnomalySourcePool::from_dir(dir.path()).unwrap();
        let target = ImageBuffer::filled(8, 8, 3, 0.5);
        assert!(matches!(
            sample_source(&pool, &target, &mut SeededRng::new(0)),
            Err(AugmentError::UnreadableSource { .. })
        ));
    }
}

//! Fixtures shared by the CLI and acceptance tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forge_core::imgcore::save_image_png;
use forge_core::{ImageBuffer, SeededRng};
use rand::Rng;

pub const CLASS: &str = "toy";

/// Stripes with per-image phase, frequency and pixel noise.
pub fn striped_image(size: usize, rng: &mut SeededRng) -> ImageBuffer {
    let phase = rng.gen_range(0.0..std::f32::consts::TAU);
    let freq = rng.gen_range(0.25..0.6);
    let noise: Vec<f32> = (0..size * size * 3)
        .map(|_| rng.gen_range(-0.04..0.04))
        .collect();
    ImageBuffer::from_fn(size, size, 3, |x, y, c| {
        let s = (x as f32 * freq + 0.3 * y as f32 + phase).sin();
        0.5 + 0.35 * s + noise[(y * size + x) * 3 + c]
    })
}

/// Writes an MVTec-style `toy` class and a directory of texture sources.
/// Returns `(dataset_root, texture_dir)`.
pub fn toy_tree(dir: &Path, normals: usize, size: usize, seed: u64) -> (PathBuf, PathBuf) {
    let root = dir.join("data");
    let tex = dir.join("textures");
    let mut rng = SeededRng::new(seed);
    for split in ["train", "test"] {
        let d = root.join(CLASS).join(split).join("good");
        std::fs::create_dir_all(&d).unwrap();
        for i in 0..normals {
            save_image_png(
                &striped_image(size, &mut rng),
                d.join(format!("{i:03}.png")),
            )
            .unwrap();
        }
    }
    std::fs::create_dir_all(&tex).unwrap();
    for i in 0..4 {
        let vals: Vec<f32> = (0..48 * 48 * 3).map(|_| rng.gen_range(0.0..1.0)).collect();
        let img = ImageBuffer::new(48, 48, 3, vals).unwrap();
        save_image_png(&img, tex.join(format!("tex{i}.png"))).unwrap();
    }
    (root, tex)
}

/// Config generating every benchmark category into `out`.
pub fn write_config(dir: &Path, count: usize, out: &str) -> PathBuf {
    let text = format!(
        r#"{{
  "dataset_root": "data",
  "class_name": "{CLASS}",
  "categories": ["cutpaste", "nda", "nsa", "opaque", "transparent"],
  "per_category_count": {count},
  "master_seed": 20240611,
  "source_pool": {{"mode": "external", "dir": "textures"}},
  "out_dir": "{out}"
}}
"#
    );
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .env_remove("FORGE_LOG")
        .output()
        .expect("forge binary runs")
}

/// Relative path to file contents for every file under `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

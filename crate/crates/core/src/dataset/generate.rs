//! Simulated benchmark generation.
//!
//! Every sample is keyed by `(category, index)` and gets its own seed derived
//! from the master seed, so the output tree does not depend on the number of
//! workers or the order they finish in.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_err, DatasetError, DatasetIndex};
use crate::augment::{
    rotate_normal, simulate, AnomalySourcePool, AugmentError, AugmentRecord, Augmented, Category,
    OperatorParams, SimContext,
};
use crate::imgcore::{load_png, save_image_png, save_mask_png, ImageBuffer, Mask};
use crate::perlin::MaskError;
use crate::profile::{choose_category, AugmentationProfile};
use crate::rng::{derive_seed, fnv1a32, SeededRng};

/// Fresh seeds tried after a degenerate draw before the sample is skipped.
pub const MAX_DEGENERATE_RETRIES: usize = 20;

const BENCHMARK_CATEGORIES: [Category; 5] = [
    Category::Cutpaste,
    Category::Ndaa,
    Category::Nsa,
    Category::Opaque,
    Category::Transparent,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub categories: Vec<Category>,
    pub per_category_count: usize,
    pub master_seed: u64,
    pub operators: OperatorParams,
    /// Skip categories the class profile disables instead of generating them.
    pub enforce_profile: bool,
    /// Content hash of the configuration this plan came from.
    pub config_digest: String,
    pub jobs: usize,
}

/// Sampled parameters of one generated image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    #[serde(flatten)]
    pub record: AugmentRecord,
    /// Donor image for `nsa` samples.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partner: Option<String>,
    /// Retries spent on degenerate draws before this one succeeded.
    pub retries: usize,
}

#[derive(Debug, Clone)]
pub struct AnomalySample {
    pub image: ImageBuffer,
    pub mask: Mask,
    pub category: Category,
    pub params: SampleParams,
    pub seed: u64,
    pub source_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub category: Category,
    pub source: String,
    pub image: String,
    pub mask: String,
    pub seed: u64,
    pub params: SampleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipNote {
    pub id: String,
    pub category: Category,
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: Category,
    pub written: usize,
    pub skipped: usize,
    /// Set when the class profile disabled the whole category.
    pub disabled_by_profile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub config_digest: String,
    pub entries: Vec<ManifestEntry>,
    pub skipped: Vec<SkipNote>,
    pub summary: Vec<CategorySummary>,
}

impl Manifest {
    /// Writes `manifest.jsonl` (one entry per line) and `summary.json`.
    pub fn write(&self, out_dir: &Path) -> Result<(), DatasetError> {
        let path = out_dir.join("manifest.jsonl");
        let mut buf = Vec::new();
        for e in &self.entries {
            serde_json::to_writer(&mut buf, e).expect("manifest entries serialize");
            buf.push(b'\n');
        }
        fs::write(&path, buf).map_err(io_err(&path))?;

        let path = out_dir.join("summary.json");
        let summary = serde_json::json!({
            "master_seed": self.master_seed,
            "config_digest": self.config_digest,
            "categories": self.summary,
            "skipped": self.skipped,
        });
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        serde_json::to_writer_pretty(&mut f, &summary).expect("summary serializes");
        f.write_all(b"\n").map_err(io_err(&path))
    }
}

/// Seed for sample `index` of `category`.
pub fn sample_seed(master_seed: u64, category: Category, index: usize) -> u64 {
    let key = ((fnv1a32(category.as_str()) as u64) << 32) | (index as u64 & 0xFFFF_FFFF);
    derive_seed(master_seed, key)
}

fn is_degenerate(err: &AugmentError) -> bool {
    matches!(
        err,
        AugmentError::DegenerateDistortion
            | AugmentError::Mask(MaskError::MaskResampleExhausted { .. })
    )
}

fn sample_id(category: Category, index: usize) -> String {
    format!("{}_{index:05}", category.as_str())
}

/// Produces sample `index` of `category` exactly as
/// [`generate_simulated_dataset`] does, without touching the output tree.
/// Returns `Ok(None)` when every retry was degenerate.
pub fn regenerate_sample(
    index_data: &DatasetIndex,
    plan: &SimulationPlan,
    pool: &AnomalySourcePool,
    category: Category,
    index: usize,
) -> Result<Option<AnomalySample>, DatasetError> {
    match build_sample(index_data, plan, pool, category, index)? {
        Ok(sample) => Ok(Some(sample)),
        Err(_) => Ok(None),
    }
}

/// Inner result carries the last degenerate error when the sample is skipped.
fn build_sample(
    index_data: &DatasetIndex,
    plan: &SimulationPlan,
    pool: &AnomalySourcePool,
    category: Category,
    index: usize,
) -> Result<Result<AnomalySample, AugmentError>, DatasetError> {
    let tests = &index_data.normal_test;
    if tests.is_empty() {
        return Err(DatasetError::EmptyTestSet);
    }
    let source_path = &tests[index % tests.len()];
    let image = load_png(source_path)?;
    let base = sample_seed(plan.master_seed, category, index);

    let mut last_err = AugmentError::DegenerateDistortion;
    for retry in 0..=MAX_DEGENERATE_RETRIES {
        let seed = if retry == 0 {
            base
        } else {
            derive_seed(base, retry as u64)
        };
        let mut rng = SeededRng::new(seed);

        let (partner, partner_path) = if category == Category::Nsa && tests.len() > 1 {
            let mut k = rng.gen_range(0..tests.len() - 1);
            if k >= index % tests.len() {
                k += 1;
            }
            (
                Some(load_png(&tests[k])?),
                Some(tests[k].display().to_string()),
            )
        } else {
            (None, None)
        };
        let ctx = SimContext {
            pool,
            partner: partner.as_ref(),
        };
        match simulate(category, &image, &plan.operators, ctx, &mut rng) {
            Ok(Augmented {
                image: out,
                mask,
                record,
            }) => {
                return Ok(Ok(AnomalySample {
                    image: out,
                    mask,
                    category,
                    params: SampleParams {
                        record,
                        partner: partner_path,
                        retries: retry,
                    },
                    seed,
                    source_path: source_path.clone(),
                }))
            }
            Err(e) if is_degenerate(&e) => last_err = e,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Err(last_err))
}

enum Outcome {
    Written(ManifestEntry),
    Skipped(SkipNote),
}

fn rel(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

fn produce(
    index_data: &DatasetIndex,
    plan: &SimulationPlan,
    pool: &AnomalySourcePool,
    out_dir: &Path,
    category: Category,
    index: usize,
) -> Result<Outcome, DatasetError> {
    let id = sample_id(category, index);
    match build_sample(index_data, plan, pool, category, index)? {
        Ok(sample) => {
            let cat_dir = out_dir.join(category.as_str());
            let image_path = cat_dir.join("anomalous").join(format!("{index:05}.png"));
            let mask_path = cat_dir.join("masks").join(format!("{index:05}_mask.png"));
            save_image_png(&sample.image, &image_path)?;
            save_mask_png(&sample.mask, &mask_path)?;
            Ok(Outcome::Written(ManifestEntry {
                id,
                category,
                source: sample.source_path.display().to_string(),
                image: rel(&image_path, out_dir),
                mask: rel(&mask_path, out_dir),
                seed: sample.seed,
                params: sample.params,
            }))
        }
        Err(err) => {
            let source = &index_data.normal_test[index % index_data.normal_test.len()];
            log::warn!("skipping {id}: {err}");
            Ok(Outcome::Skipped(SkipNote {
                id,
                category,
                source: source.display().to_string(),
                reason: format!("{err} (after {} retries)", MAX_DEGENERATE_RETRIES),
            }))
        }
    }
}

/// Generates `per_category_count` simulated anomalies per category from the
/// anomaly-free test images, copies those normals into each category's
/// `good/` directory, and writes the manifest.
///
/// Layout: `out_dir/<category>/{anomalous,masks,good}/`, plus
/// `manifest.jsonl` and `summary.json` in `out_dir`.
pub fn generate_simulated_dataset(
    index_data: &DatasetIndex,
    profile: &AugmentationProfile,
    plan: &SimulationPlan,
    pool: &AnomalySourcePool,
    out_dir: &Path,
) -> Result<Manifest, DatasetError> {
    if index_data.normal_test.is_empty() {
        return Err(DatasetError::EmptyTestSet);
    }
    if let Some(&bad) = plan
        .categories
        .iter()
        .find(|c| !BENCHMARK_CATEGORIES.contains(c))
    {
        return Err(DatasetError::InvalidCategory(bad));
    }
    plan.operators.validate()?;

    let mut categories: Vec<Category> = Vec::new();
    for &c in &plan.categories {
        if !categories.contains(&c) {
            categories.push(c);
        }
    }
    let active: Vec<Category> = categories
        .iter()
        .copied()
        .filter(|&c| !plan.enforce_profile || profile.is_enabled(c))
        .collect();

    for &c in &active {
        let cat_dir = out_dir.join(c.as_str());
        for sub in ["anomalous", "masks", "good"] {
            let d = cat_dir.join(sub);
            fs::create_dir_all(&d).map_err(io_err(&d))?;
        }
        for src in &index_data.normal_test {
            let name = src.file_name().ok_or_else(|| DatasetError::Layout {
                path: src.clone(),
                reason: "normal image has no file name".into(),
            })?;
            let dst = cat_dir.join("good").join(name);
            fs::copy(src, &dst).map_err(io_err(&dst))?;
        }
    }

    let tasks: Vec<(Category, usize)> = active
        .iter()
        .flat_map(|&c| (0..plan.per_category_count).map(move |j| (c, j)))
        .collect();
    let run = || -> Result<Vec<Outcome>, DatasetError> {
        tasks
            .par_iter()
            .map(|&(c, j)| produce(index_data, plan, pool, out_dir, c, j))
            .collect()
    };
    let outcomes = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs.max(1))
        .build()
        .map_err(|e| DatasetError::Workers(e.to_string()))?
        .install(run)?;

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Written(e) => entries.push(e),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    let summary = categories
        .iter()
        .map(|&c| CategorySummary {
            category: c,
            written: entries.iter().filter(|e| e.category == c).count(),
            skipped: skipped.iter().filter(|s| s.category == c).count(),
            disabled_by_profile: !active.contains(&c),
        })
        .collect();

    let manifest = Manifest {
        master_seed: plan.master_seed,
        config_digest: plan.config_digest.clone(),
        entries,
        skipped,
        summary,
    };
    manifest.write(out_dir)?;
    Ok(manifest)
}

/// One training-time augmentation following the class profile.
///
/// Rotation-tolerant classes are first rotated by a random angle, which does
/// not change the label; an anomaly category is then drawn from the profile's
/// weights and applied.
pub fn augment_for_training(
    image: &ImageBuffer,
    profile: &AugmentationProfile,
    params: &OperatorParams,
    pool: &AnomalySourcePool,
    rng: &mut SeededRng,
) -> Result<Augmented, AugmentError> {
    let base = if profile.rotation_tolerant {
        rotate_normal(image, rng, &params.rotation_angles)?.image
    } else {
        image.clone()
    };
    let category = choose_category(profile, rng);
    let ctx = SimContext {
        pool,
        partner: None,
    };
    simulate(category, &base, params, ctx, rng)
}

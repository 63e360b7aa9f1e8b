//! `forge`: generate simulated anomaly benchmarks, evaluate score maps, and
//! preview single augmentations.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;

use forge_core::augment::{ndaa, simulate, SimContext};
use forge_core::config::{load_config, ConfigError};
use forge_core::dataset::{generate_simulated_dataset, ingest_mvtec};
use forge_core::imgcore::{load_any, load_png, save_image_png, save_mask_png, ImageError};
use forge_core::metrics::{ImageScoring, MetricsReport};
use forge_core::scoremap::evaluate_dirs;
use forge_core::{AnomalySourcePool, Category, ImageBuffer, OperatorParams, SeededRng};

const LOG_LEVELS: [&str; 4] = ["error", "warn", "info", "debug"];

#[derive(Parser)]
#[command(name = "forge", version, about = "Simulated surface-anomaly toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a simulated anomaly benchmark from a JSON config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; output is identical for any value.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Score a directory of anomaly maps against ground-truth masks.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Image score pooling: `max` or `topk:<k>` (mean of the k largest).
        #[arg(long, default_value = "max", value_parser = parse_scoring)]
        image_scoring: ImageScoring,
    },
    /// Apply one augmentation to an image and write its stages.
    Inspect {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        category: Category,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Directory of anomaly source images; patches of the input otherwise.
        #[arg(long)]
        source_dir: Option<PathBuf>,
    },
}

fn parse_scoring(s: &str) -> Result<ImageScoring, String> {
    if s == "max" {
        return Ok(ImageScoring::Max);
    }
    s.strip_prefix("topk:")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k > 0)
        .map(ImageScoring::TopKMean)
        .ok_or_else(|| format!("expected 'max' or 'topk:<k>' with k > 0, got '{s}'"))
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn init_logging() -> Result<(), Failure> {
    let level = std::env::var("FORGE_LOG").unwrap_or_else(|_| "warn".into());
    if !LOG_LEVELS.contains(&level.as_str()) {
        return Err(Failure::Usage(format!(
            "FORGE_LOG must be one of {}, got '{level}'",
            LOG_LEVELS.join(", ")
        )));
    }
    env_logger::Builder::new()
        .parse_filters(&level)
        .format_timestamp(None)
        .init();
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn cmd_generate(config: &Path, jobs: usize) -> Result<(), Failure> {
    let loaded = load_config(config)?;
    let cfg = &loaded.config;
    info!(
        "generating {} x {} samples for class '{}' (digest {})",
        cfg.categories.len(),
        cfg.per_category_count,
        cfg.class_name,
        loaded.digest
    );
    let index = ingest_mvtec(&cfg.dataset_root, &cfg.class_name).map_err(Failure::runtime)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", cfg.out_dir.display())))?;
    let manifest = generate_simulated_dataset(
        &index,
        &loaded.profile,
        &loaded.plan(jobs),
        &loaded.pool,
        &cfg.out_dir,
    )
    .map_err(Failure::runtime)?;
    write_file(&cfg.out_dir.join("config.json"), &loaded.raw)?;

    for s in &manifest.summary {
        if s.disabled_by_profile {
            println!("{:<12} disabled by profile", s.category.as_str());
        } else {
            println!(
                "{:<12} written {:>5}  skipped {:>3}",
                s.category.as_str(),
                s.written,
                s.skipped
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    image_scoring: ImageScoring,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

fn cmd_eval(scores: &Path, gt: &Path, out: &Path, scoring: ImageScoring) -> Result<(), Failure> {
    let report = evaluate_dirs(scores, gt, scoring).map_err(Failure::runtime)?;
    if report.image.auroc.is_none() {
        warn!("image level has a single class; image metrics are undefined");
    }
    let json = serde_json::to_string_pretty(&EvalOutput {
        image_scoring: scoring,
        report: &report,
    })
    .map_err(Failure::runtime)?;
    write_file(out, format!("{json}\n").as_bytes())?;
    println!("image AUROC / AP: {}", report.image.cell());
    println!("pixel AUROC / AP: {}", report.pixel.cell());
    Ok(())
}

fn load_input(path: &Path) -> Result<ImageBuffer, ImageError> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        load_png(path)
    } else {
        load_any(path)
    }
}

fn cmd_inspect(
    image: &Path,
    category: Category,
    seed: u64,
    out: &Path,
    source_dir: Option<&Path>,
) -> Result<(), Failure> {
    let img = load_input(image).map_err(Failure::runtime)?;
    let pool = match source_dir {
        Some(dir) => AnomalySourcePool::from_dir(dir).map_err(|e| Failure::Usage(e.to_string()))?,
        None => AnomalySourcePool::SelfPatch,
    };
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let params = OperatorParams::default();
    let mut rng = SeededRng::new(seed);
    let save_img = |img: &ImageBuffer, name: &str| save_image_png(img, out.join(name));
    let save_mask = |m, name: &str| save_mask_png(m, out.join(name));

    let record = if category == Category::Ndaa {
        let stages = ndaa(&img, &params.ndaa, &mut rng).map_err(Failure::runtime)?;
        save_img(&stages.image, "augmented.png")
            .and_then(|_| save_mask(&stages.mask, "mask.png"))
            .and_then(|_| save_img(&stages.distorted, "distorted.png"))
            .and_then(|_| save_mask(&stages.primitive_mask, "mask_primitive.png"))
            .and_then(|_| save_mask(&stages.reduced_mask, "mask_reduced.png"))
            .map_err(Failure::runtime)?;
        serde_json::to_string(&stages.record)
    } else {
        let ctx = SimContext {
            pool: &pool,
            partner: None,
        };
        let aug = simulate(category, &img, &params, ctx, &mut rng).map_err(Failure::runtime)?;
        save_img(&aug.image, "augmented.png")
            .and_then(|_| save_mask(&aug.mask, "mask.png"))
            .map_err(Failure::runtime)?;
        serde_json::to_string(&aug.record)
    };
    println!("{}", record.map_err(Failure::runtime)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_logging()?;
    match cli.command {
        Command::Generate { config, jobs } => cmd_generate(&config, jobs as usize),
        Command::Eval {
            scores,
            gt,
            out,
            image_scoring,
        } => cmd_eval(&scores, &gt, &out, image_scoring),
        Command::Inspect {
            image,
            category,
            seed,
            out,
            source_dir,
        } => cmd_inspect(&image, category, seed, &out, source_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("forge: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("forge: {msg}");
            ExitCode::from(1)
        }
    }
}

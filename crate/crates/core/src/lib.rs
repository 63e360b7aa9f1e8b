//! Deterministic surface-anomaly simulation and evaluation.
//!
//! The crate generates simulated defects with pixel-accurate masks
//! (transparent and opaque overlays on Perlin-shaped masks, near-distribution
//! sine distortions, cut-paste, Poisson-blended patches), builds MVTec-style
//! simulated benchmarks from anomaly-free images, and scores anomaly maps with
//! tie-correct AUROC and average precision.

pub mod augment;
pub mod config;
pub mod dataset;
pub mod imgcore;
pub mod metrics;
pub mod perlin;
pub mod profile;
pub mod rng;
pub mod scoremap;

pub use augment::{AnomalySourcePool, AugmentError, Augmented, Category, OperatorParams};
pub use imgcore::{GrayField, ImageBuffer, Mask};
pub use rng::SeededRng;

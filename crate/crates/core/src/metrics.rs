//! Threshold-free evaluation of anomaly scores.
//!
//! AUROC is the Mann-Whitney statistic with ties counted as half a correctly
//! ordered pair. AP is the step-interpolated area under the precision-recall
//! curve, with tied scores forming a single threshold.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgcore::{GrayField, Mask};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("labels contain a single class")]
    SingleClass,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("score map {index} is {map:?} but its mask is {mask:?}")]
    DimensionMismatch {
        index: usize,
        map: (usize, usize),
        mask: (usize, usize),
    },
    #[error("non-finite score at position {0}")]
    NonFinite(usize),
}

/// Scores with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self, MetricsError> {
        if scores.len() != labels.len() {
            return Err(MetricsError::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(Self { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// `(positives, negatives)` per distinct score, in ascending score order.
    fn tie_groups(&self) -> Vec<(u64, u64)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_unstable_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]));
        let mut groups: Vec<(u64, u64)> = Vec::new();
        let mut prev: Option<f64> = None;
        for i in order {
            let s = self.scores[i];
            // -0.0 and 0.0 compare equal and belong to one group.
            if prev.is_none_or(|p| p.partial_cmp(&s) != Some(Ordering::Equal)) {
                groups.push((0, 0));
                prev = Some(s);
            }
            let g = groups.last_mut().expect("group pushed above");
            if self.labels[i] {
                g.0 += 1;
            } else {
                g.1 += 1;
            }
        }
        groups
    }

    fn class_counts(&self) -> Result<(u64, u64), MetricsError> {
        let p = self.positives() as u64;
        let n = self.len() as u64 - p;
        if p == 0 || n == 0 {
            Err(MetricsError::SingleClass)
        } else {
            Ok((p, n))
        }
    }
}

/// Area under the ROC curve in `O(n log n)`.
///
/// Sums, over tie groups in ascending order, the positives times the
/// negatives strictly below plus half the within-group pairs. This is the
/// average-rank form of the Mann-Whitney U, kept in exact integer arithmetic.
pub fn auroc(set: &ScoredSet) -> Result<f64, MetricsError> {
    let (p, n) = set.class_counts()?;
    let mut twice_u: u128 = 0;
    let mut negatives_below: u128 = 0;
    for (gp, gn) in set.tie_groups() {
        twice_u += 2 * gp as u128 * negatives_below + gp as u128 * gn as u128;
        negatives_below += gn as u128;
    }
    Ok(twice_u as f64 / (2.0 * p as f64 * n as f64))
}

/// Average precision: `sum_k (R_k - R_{k-1}) * P_k` over descending distinct
/// score thresholds.
pub fn average_precision(set: &ScoredSet) -> Result<f64, MetricsError> {
    let (p, _) = set.class_counts()?;
    let mut tp = 0u64;
    let mut seen = 0u64;
    let mut ap = 0.0;
    for (gp, gn) in set.tie_groups().into_iter().rev() {
        tp += gp;
        seen += gp + gn;
        if gp > 0 {
            ap += (gp as f64 / p as f64) * (tp as f64 / seen as f64);
        }
    }
    Ok(ap)
}

/// How a pixel map collapses to one image score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageScoring {
    #[default]
    Max,
    /// Mean of the `k` largest pixel scores.
    TopKMean(usize),
}

impl ImageScoring {
    pub fn score(self, map: &GrayField) -> f64 {
        match self {
            ImageScoring::Max => map
                .data()
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64)),
            ImageScoring::TopKMean(k) => {
                let mut v: Vec<f32> = map.data().to_vec();
                v.sort_unstable_by(|a, b| b.total_cmp(a));
                let k = k.clamp(1, v.len());
                v[..k].iter().map(|&x| x as f64).sum::<f64>() / k as f64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    /// `None` when the level has a single class.
    pub auroc: Option<f64>,
    pub ap: Option<f64>,
}

impl LevelMetrics {
    fn from_set(set: &ScoredSet) -> Self {
        Self {
            auroc: auroc(set).ok(),
            ap: average_precision(set).ok(),
        }
    }

    /// `AUROC / AP` in percent with one decimal, the usual table cell format.
    pub fn cell(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{:.1}", v * 100.0));
        format!("{} / {}", pct(self.auroc), pct(self.ap))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub images: usize,
    pub positive_images: usize,
    pub pixels: usize,
    pub positive_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub image: LevelMetrics,
    pub pixel: LevelMetrics,
    pub counts: Counts,
}

/// Pools every pixel of every map into one pixel-level set; image-level
/// scores come from `scoring` and an image is positive when its mask is
/// non-empty.
pub fn evaluate_scoremaps(
    maps: &[GrayField],
    gts: &[Mask],
    scoring: ImageScoring,
) -> Result<MetricsReport, MetricsError> {
    if maps.len() != gts.len() {
        return Err(MetricsError::LengthMismatch {
            scores: maps.len(),
            labels: gts.len(),
        });
    }
    let total: usize = maps.iter().map(|m| m.data().len()).sum();
    let mut px_scores = Vec::with_capacity(total);
    let mut px_labels = Vec::with_capacity(total);
    let mut img_scores = Vec::with_capacity(maps.len());
    let mut img_labels = Vec::with_capacity(maps.len());
    for (i, (map, gt)) in maps.iter().zip(gts).enumerate() {
        if map.dims() != gt.dims() {
            return Err(MetricsError::DimensionMismatch {
                index: i,
                map: map.dims(),
                mask: gt.dims(),
            });
        }
        px_scores.extend(map.data().iter().map(|&v| v as f64));
        px_labels.extend(gt.data().iter().map(|&v| v == 1));
        img_scores.push(scoring.score(map));
        img_labels.push(!gt.is_empty());
    }
    let pixel_set = ScoredSet::new(px_scores, px_labels)?;
    let image_set = ScoredSet::new(img_scores, img_labels)?;
    Ok(MetricsReport {
        image: LevelMetrics::from_set(&image_set),
        pixel: LevelMetrics::from_set(&pixel_set),
        counts: Counts {
            images: maps.len(),
            positive_images: image_set.positives(),
            pixels: pixel_set.len(),
            positive_pixels: pixel_set.positives(),
        },
    })
}

use serde::{Deserialize, Serialize};

use super::anchors::{generate_anchors, AnchorFilter, AnchorGridSpec};
use super::boxes::BBox;
use super::labeling::{label_anchors, LabelThresholds};
use crate::error::Result;

/// Anchor-level accounting of what stripping old-class annotations does to
/// the label assignment. A "false negative" is an anchor that is positive
/// under the full annotation set but negative once only the visible subset
/// is provided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorStats {
    /// Anchors generated for the image.
    pub n_total: usize,
    /// Anchors that survived filtering and entered labeling.
    pub n_usable: usize,
    /// Anchors positive under the visible annotations.
    pub n_positive_visible: usize,
    /// Anchors negative under the visible annotations that are not false
    /// negatives (truly background).
    pub n_negative: usize,
    /// Anchors positive under the full annotations but negative under the
    /// visible ones.
    pub n_false_negative: usize,
    /// `n_false_negative / (n_negative + n_false_negative)`, 0 when the
    /// denominator is 0.
    pub false_negative_rate: f64,
}

impl AnchorStats {
    fn from_counts(
        n_total: usize,
        n_usable: usize,
        n_positive_visible: usize,
        n_negative: usize,
        n_false_negative: usize,
    ) -> Self {
        let denom = n_negative + n_false_negative;
        let false_negative_rate =
            if denom > 0 { n_false_negative as f64 / denom as f64 } else { 0.0 };
        Self { n_total, n_usable, n_positive_visible, n_negative, n_false_negative, false_negative_rate }
    }

    /// Aggregates per-image statistics into one record (rate recomputed
    /// from the summed counts).
    pub fn aggregate(items: &[AnchorStats]) -> Self {
        Self::from_counts(
            items.iter().map(|s| s.n_total).sum(),
            items.iter().map(|s| s.n_usable).sum(),
            items.iter().map(|s| s.n_positive_visible).sum(),
            items.iter().map(|s| s.n_negative).sum(),
            items.iter().map(|s| s.n_false_negative).sum(),
        )
    }
}

/// Labels the anchor set twice, with the full and with the visible
/// annotations, and counts the label flips caused by the missing boxes.
///
/// Precondition (not checked): `visible_gt` is a subset of `full_gt`.
pub fn missing_annotation_stats(
    anchors: &[BBox],
    full_gt: &[BBox],
    visible_gt: &[BBox],
    thresholds: LabelThresholds,
) -> AnchorStats {
    let full = label_anchors(anchors, full_gt, thresholds);
    let visible = label_anchors(anchors, visible_gt, thresholds);

    let mut n_pos_visible = 0usize;
    let mut n_neg_visible = 0usize;
    let mut n_false_negative = 0usize;
    for (f, v) in full.iter().zip(&visible) {
        if v.is_positive() {
            n_pos_visible += 1;
        }
        if v.is_negative() {
            if f.is_positive() {
                n_false_negative += 1;
            } else {
                n_neg_visible += 1;
            }
        }
    }
    AnchorStats::from_counts(anchors.len(), anchors.len(), n_pos_visible, n_neg_visible, n_false_negative)
}

/// Convenience wrapper for one image: generates the grid, optionally
/// filters it, and computes the stripped-annotation statistics. `n_total`
/// reports the generated count, `n_usable` the post-filter count.
pub fn anchor_stats_for_image(
    spec: &AnchorGridSpec,
    filter: Option<&AnchorFilter>,
    image_w: usize,
    image_h: usize,
    full_gt: &[BBox],
    visible_gt: &[BBox],
    thresholds: LabelThresholds,
) -> Result<AnchorStats> {
    let anchors = generate_anchors(spec, image_w, image_h)?;
    let n_total = anchors.len();
    let usable = match filter {
        Some(f) => f.apply(&anchors, image_w as f64, image_h as f64),
        None => anchors,
    };
    let mut stats = missing_annotation_stats(&usable, full_gt, visible_gt, thresholds);
    stats.n_total = n_total;
    Ok(stats)
}

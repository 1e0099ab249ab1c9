use rand::Rng;
use serde::{Deserialize, Serialize};

use super::boxes::{iou, BBox};
use crate::error::{IncdetError, Result};

/// Training label assigned to one anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorLabelKind {
    Positive,
    Negative,
    /// Neither positive nor negative; never enters any loss.
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorLabel {
    pub kind: AnchorLabelKind,
    /// Index into the ground-truth list; always set for positives.
    pub matched_gt: Option<usize>,
}

impl AnchorLabel {
    pub fn is_positive(&self) -> bool {
        self.kind == AnchorLabelKind::Positive
    }
    pub fn is_negative(&self) -> bool {
        self.kind == AnchorLabelKind::Negative
    }
}

/// IoU thresholds for anchor labeling; `pos > neg`, both in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    pub pos: f64,
    pub neg: f64,
}

impl LabelThresholds {
    pub fn new(pos: f64, neg: f64) -> Result<Self> {
        if !(0.0 < neg && neg < pos && pos < 1.0) {
            return Err(IncdetError::Config(format!(
                "label thresholds must satisfy 0 < neg < pos < 1, got pos={pos} neg={neg}"
            )));
        }
        Ok(Self { pos, neg })
    }
}

impl Default for LabelThresholds {
    fn default() -> Self {
        Self { pos: 0.7, neg: 0.3 }
    }
}

/// Labels each anchor against the ground-truth boxes.
///
/// An anchor is positive when its IoU with some gt box exceeds `pos`, or
/// when it attains the per-gt maximum IoU for some gt box (ties all count,
/// and a gt whose best IoU is 0 assigns no positives). An anchor is
/// negative when its best IoU over all gt is below `neg`. Everything else
/// is ignored. With no gt boxes every anchor is negative.
pub fn label_anchors(anchors: &[BBox], gt: &[BBox], thresholds: LabelThresholds) -> Vec<AnchorLabel> {
    if gt.is_empty() {
        return vec![AnchorLabel { kind: AnchorLabelKind::Negative, matched_gt: None }; anchors.len()];
    }

    let mut best_iou = vec![0.0f64; anchors.len()];
    let mut best_gt = vec![0usize; anchors.len()];
    let mut gt_best_iou = vec![0.0f64; gt.len()];

    for (ai, a) in anchors.iter().enumerate() {
        for (gi, g) in gt.iter().enumerate() {
            let v = iou(a, g);
            if v > best_iou[ai] {
                best_iou[ai] = v;
                best_gt[ai] = gi;
            }
            if v > gt_best_iou[gi] {
                gt_best_iou[gi] = v;
            }
        }
    }

    let mut labels: Vec<AnchorLabel> = anchors
        .iter()
        .enumerate()
        .map(|(ai, _)| {
            if best_iou[ai] > thresholds.pos {
                AnchorLabel { kind: AnchorLabelKind::Positive, matched_gt: Some(best_gt[ai]) }
            } else if best_iou[ai] < thresholds.neg {
                AnchorLabel { kind: AnchorLabelKind::Negative, matched_gt: None }
            } else {
                AnchorLabel { kind: AnchorLabelKind::Ignore, matched_gt: None }
            }
        })
        .collect();

    // Per-gt argmax rule: every anchor tying the gt's best IoU is positive.
    for (gi, g) in gt.iter().enumerate() {
        if gt_best_iou[gi] <= 0.0 {
            continue;
        }
        for (ai, a) in anchors.iter().enumerate() {
            if iou(a, g) == gt_best_iou[gi] && !labels[ai].is_positive() {
                labels[ai] = AnchorLabel { kind: AnchorLabelKind::Positive, matched_gt: Some(best_gt[ai]) };
            }
        }
    }
    labels
}

/// Uniformly samples `k` distinct elements of `pool` without replacement
/// (partial Fisher-Yates). Result is sorted for deterministic consumption.
pub fn sample_without_replacement<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    let k = k.min(pool.len());
    let mut items = pool.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items.sort_unstable();
    items
}

/// Samples a training minibatch of anchor indices: up to
/// `batch * pos_fraction` positives, remainder filled with negatives.
/// Returns an empty set when there is nothing to sample.
pub fn sample_anchor_minibatch<R: Rng>(
    labels: &[AnchorLabel],
    batch: usize,
    pos_fraction: f64,
    rng: &mut R,
) -> Vec<usize> {
    debug_assert!(batch >= 1 && pos_fraction > 0.0 && pos_fraction <= 1.0);
    let positives: Vec<usize> =
        labels.iter().enumerate().filter(|(_, l)| l.is_positive()).map(|(i, _)| i).collect();
    let negatives: Vec<usize> =
        labels.iter().enumerate().filter(|(_, l)| l.is_negative()).map(|(i, _)| i).collect();
    if positives.is_empty() && negatives.is_empty() {
        return Vec::new();
    }
    let pos_target = (batch as f64 * pos_fraction).floor() as usize;
    let mut picked = sample_without_replacement(&positives, pos_target.min(positives.len()), rng);
    let neg_target = batch - picked.len();
    picked.extend(sample_without_replacement(&negatives, neg_target, rng));
    picked.sort_unstable();
    picked
}

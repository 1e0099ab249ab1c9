//! Anchor geometry: box arithmetic, anchor grids, anchor labeling and
//! sampling, and the missing-annotation statistics used to study how a
//! region-proposal stage behaves when old-class boxes are stripped from
//! the annotations.

mod anchors;
mod boxes;
mod labeling;
mod stats;

pub use anchors::{generate_anchors, AnchorFilter, AnchorGridSpec};
pub use boxes::{iou, BBox};
pub use labeling::{
    label_anchors, sample_anchor_minibatch, sample_without_replacement, AnchorLabel,
    AnchorLabelKind, LabelThresholds,
};
pub use stats::{anchor_stats_for_image, missing_annotation_stats, AnchorStats};

//! Dataset representation: the canonical JSON manifest, the
//! annotation-stripping transform that models missing old-class labels,
//! and a synthetic-shapes scene generator for desk-scale experiments.

mod manifest;
mod synthetic;

use std::sync::atomic::{AtomicBool, Ordering};

use ndarray::Array3;

pub use manifest::{load_manifest, save_manifest, DatasetManifest, ManifestAnnotation, ManifestImage};
pub use synthetic::{generate_synthetic_scene, ShapeClass, SyntheticSceneSpec};

use crate::geometry::BBox;

/// One labeled box.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub class_id: usize,
    pub bbox: BBox,
}

/// A set of annotations for one image.
pub type AnnotationSet = Vec<Annotation>;

/// Wrapper around the full (unstripped) annotation set. Training code must
/// never read it; the access flag lets tests verify that. Evaluation and
/// analysis go through [`AnalysisOnly::get`].
#[derive(Debug)]
pub struct AnalysisOnly<T> {
    value: T,
    accessed: AtomicBool,
}

impl<T> AnalysisOnly<T> {
    pub fn new(value: T) -> Self {
        Self { value, accessed: AtomicBool::new(false) }
    }

    /// Reads the value, recording the access.
    pub fn get(&self) -> &T {
        self.accessed.store(true, Ordering::Relaxed);
        &self.value
    }

    /// True if `get` has been called since construction.
    pub fn was_accessed(&self) -> bool {
        self.accessed.load(Ordering::Relaxed)
    }

    /// Module-internal read for dataset preparation; does not count as an
    /// analysis access.
    fn peek(&self) -> &T {
        &self.value
    }
}

impl<T: Clone> Clone for AnalysisOnly<T> {
    fn clone(&self) -> Self {
        Self::new(self.value.clone())
    }
}

/// One image with its stripped training annotations and the retained full
/// set for evaluation/analysis.
#[derive(Debug, Clone)]
pub struct Sample {
    pub image_id: String,
    /// (3, H, W) pixels in [0, 1].
    pub pixels: Array3<f64>,
    visible: AnnotationSet,
    full: AnalysisOnly<AnnotationSet>,
}

impl Sample {
    /// Builds a sample whose training and full annotation sets coincide.
    pub fn new(image_id: impl Into<String>, pixels: Array3<f64>, annotations: AnnotationSet) -> Self {
        Self {
            image_id: image_id.into(),
            pixels,
            visible: annotations.clone(),
            full: AnalysisOnly::new(annotations),
        }
    }

    pub fn width(&self) -> usize {
        self.pixels.dim().2
    }

    pub fn height(&self) -> usize {
        self.pixels.dim().1
    }

    /// The stripped annotation set; the only one training may read.
    pub fn training_annotations(&self) -> &AnnotationSet {
        &self.visible
    }

    /// The full annotation set, for evaluation and analysis only.
    pub fn full_annotations(&self) -> &AnnotationSet {
        self.full.get()
    }

    /// Whether the analysis-only set has been read.
    pub fn analysis_accessed(&self) -> bool {
        self.full.was_accessed()
    }
}

/// Restricts every sample's training annotations to `visible_classes`.
/// Pixels are untouched (stripped objects remain in the image) and the
/// full set is preserved for analysis. Recomputing from the full set makes
/// the transform idempotent and monotone in `visible_classes`.
pub fn strip_annotations(samples: &[Sample], visible_classes: &[usize]) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| {
            let full = s.full.peek().clone();
            let visible: AnnotationSet =
                full.iter().filter(|a| visible_classes.contains(&a.class_id)).cloned().collect();
            Sample {
                image_id: s.image_id.clone(),
                pixels: s.pixels.clone(),
                visible,
                full: AnalysisOnly::new(full),
            }
        })
        .collect()
}

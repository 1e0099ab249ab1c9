use serde::{Deserialize, Serialize};

use super::boxes::BBox;
use crate::error::{IncdetError, Result};

/// Parameters of the dense anchor grid: every stride-spaced location gets
/// one anchor per (ratio, scale) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorGridSpec {
    /// Aspect ratios, interpreted as height / width.
    pub ratios: Vec<f64>,
    /// Scale multipliers applied to `base_size`.
    pub scales: Vec<f64>,
    /// Pixels between anchor centers.
    pub stride: usize,
    /// Side length, in pixels, of the unit anchor before scaling.
    pub base_size: f64,
}

impl AnchorGridSpec {
    pub fn new(ratios: Vec<f64>, scales: Vec<f64>, stride: usize, base_size: f64) -> Self {
        Self { ratios, scales, stride, base_size }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() || self.ratios.iter().any(|&r| r <= 0.0) {
            return Err(IncdetError::Config(
                "anchor ratios must be nonempty and positive".into(),
            ));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| s <= 0.0) {
            return Err(IncdetError::Config(
                "anchor scales must be nonempty and positive".into(),
            ));
        }
        if self.stride == 0 {
            return Err(IncdetError::Config("anchor stride must be >= 1".into()));
        }
        if self.base_size <= 0.0 {
            return Err(IncdetError::Config("anchor base_size must be positive".into()));
        }
        Ok(())
    }

    pub fn shapes_per_location(&self) -> usize {
        self.ratios.len() * self.scales.len()
    }

    /// Grid dimensions for an image: one cell per started stride interval.
    pub fn grid_size(&self, image_w: usize, image_h: usize) -> (usize, usize) {
        let gw = image_w.div_ceil(self.stride);
        let gh = image_h.div_ceil(self.stride);
        (gw, gh)
    }

    pub fn anchor_count(&self, image_w: usize, image_h: usize) -> usize {
        let (gw, gh) = self.grid_size(image_w, image_h);
        gw * gh * self.shapes_per_location()
    }

    /// The (width, height) of each anchor shape, ratio-major, scale-minor.
    /// Area is preserved across ratios: `w * h = (base_size * scale)^2`.
    pub fn shape_sizes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.shapes_per_location());
        for &ratio in &self.ratios {
            for &scale in &self.scales {
                let side = self.base_size * scale;
                let w = side / ratio.sqrt();
                let h = side * ratio.sqrt();
                out.push((w, h));
            }
        }
        out
    }
}

/// Generates the full unclipped anchor set for an image. Anchors are
/// centered at `(i * stride + stride / 2)` and may extend past the image
/// borders. Order: row-major over grid cells, then ratio-major, scale-minor
/// within a cell.
pub fn generate_anchors(spec: &AnchorGridSpec, image_w: usize, image_h: usize) -> Result<Vec<BBox>> {
    spec.validate()?;
    if image_w == 0 || image_h == 0 {
        return Err(IncdetError::Config("image dimensions must be >= 1".into()));
    }
    let (gw, gh) = spec.grid_size(image_w, image_h);
    let shapes = spec.shape_sizes();
    let half_stride = spec.stride as f64 / 2.0;
    let mut anchors = Vec::with_capacity(gw * gh * shapes.len());
    for gy in 0..gh {
        let cy = gy as f64 * spec.stride as f64 + half_stride;
        for gx in 0..gw {
            let cx = gx as f64 * spec.stride as f64 + half_stride;
            for &(w, h) in &shapes {
                anchors.push(BBox::from_center(cx, cy, w, h));
            }
        }
    }
    Ok(anchors)
}

/// Optional anchor filter: drops anchors whose clipped-to-image area falls
/// below a minimum, and optionally anchors that duplicate an earlier anchor
/// after clipping. Applied between generation and labeling when requested;
/// the dense grid itself is always generated unclipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorFilter {
    pub min_clipped_area: f64,
    pub drop_duplicates: bool,
}

impl AnchorFilter {
    /// Returns the retained anchors (clipped boxes are only used for the
    /// predicate; the surviving anchors keep their original coordinates).
    pub fn apply(&self, anchors: &[BBox], image_w: f64, image_h: f64) -> Vec<BBox> {
        let mut kept: Vec<BBox> = Vec::new();
        let mut kept_clipped: Vec<BBox> = Vec::new();
        for a in anchors {
            let c = a.clip(image_w, image_h);
            if c.area() < self.min_clipped_area {
                continue;
            }
            if self.drop_duplicates && kept_clipped.iter().any(|k| k == &c) {
                continue;
            }
            kept.push(*a);
            kept_clipped.push(c);
        }
        kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn paper_spec() -> AnchorGridSpec {
        AnchorGridSpec::new(vec![0.5, 1.0, 2.0], vec![2.0, 4.0, 8.0, 16.0, 32.0], 16, 16.0)
    }

    #[test]
    fn count_matches_reference_scene() {
        // 30 * 23 * 15 grid cells/shapes for a 480x364 image at stride 16.
        let anchors = generate_anchors(&paper_spec(), 480, 364).unwrap();
        assert_eq!(anchors.len(), 10350);
    }

    #[test]
    fn single_cell_single_shape() {
        let spec = AnchorGridSpec::new(vec![1.0], vec![1.0], 16, 16.0);
        let anchors = generate_anchors(&spec, 16, 16).unwrap();
        assert_eq!(anchors.len(), 1);
        assert_eq!(anchors[0], BBox::new(0.0, 0.0, 16.0, 16.0));
    }

    #[test]
    fn two_by_two_grid() {
        let anchors = generate_anchors(&paper_spec(), 32, 32).unwrap();
        assert_eq!(anchors.len(), 60); // 2*2*15, grid cells enumerated directly
    }

    #[test]
    fn empty_ratios_rejected() {
        let spec = AnchorGridSpec::new(vec![], vec![1.0], 16, 16.0);
        assert!(generate_anchors(&spec, 64, 64).is_err());
    }

    #[test]
    fn zero_image_rejected() {
        assert!(generate_anchors(&paper_spec(), 0, 64).is_err());
    }

    #[test]
    fn ratio_preserves_area() {
        let spec = AnchorGridSpec::new(vec![0.5, 1.0, 2.0], vec![4.0], 16, 16.0);
        for (w, h) in spec.shape_sizes() {
            assert!((w * h - (16.0f64 * 4.0).powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_drops_small_and_duplicate_anchors() {
        let spec = AnchorGridSpec::new(vec![1.0], vec![0.125, 4.0], 16, 16.0);
        let anchors = generate_anchors(&spec, 32, 32).unwrap();
        let filter = AnchorFilter { min_clipped_area: 16.0, drop_duplicates: true };
        let kept = filter.apply(&anchors, 32.0, 32.0);
        // 2x2 grid: the 2-px anchors (area 4) all drop; the 64-px anchors all
        // clip to the full image and collapse to one representative.
        assert_eq!(kept.len(), 1);
    }

    proptest! {
        #[test]
        fn count_formula_matches_enumeration(
            nr in 1usize..4, ns in 1usize..6, stride in 1usize..24,
            w in 1usize..200, h in 1usize..200,
        ) {
            let spec = AnchorGridSpec::new(
                (0..nr).map(|i| 0.5 + i as f64 * 0.5).collect(),
                (0..ns).map(|i| 1.0 + i as f64).collect(),
                stride, 16.0,
            );
            let anchors = generate_anchors(&spec, w, h).unwrap();
            // Independent enumeration of grid cells.
            let mut cells = 0usize;
            let mut y = 0usize;
            while y < h { cells += { let mut x = 0; let mut c = 0; while x < w { c += 1; x += stride; } c }; y += stride; }
            prop_assert_eq!(anchors.len(), cells * nr * ns);
            prop_assert_eq!(anchors.len(), spec.anchor_count(w, h));
        }
    }
}

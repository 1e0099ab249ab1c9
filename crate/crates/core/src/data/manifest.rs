use std::collections::HashSet;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::{Annotation, Sample};
use crate::error::{IncdetError, Result};
use crate::geometry::BBox;

/// The canonical dataset manifest. Boxes are pixel floats in corner
/// convention `[x1, y1, x2, y2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Ordered class vocabulary; class ids are indices into this list.
    pub classes: Vec<String>,
    pub images: Vec<ManifestImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImage {
    pub id: String,
    pub path: String,
    pub width: usize,
    pub height: usize,
    pub annotations: Vec<ManifestAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestAnnotation {
    pub class: String,
    /// [x1, y1, x2, y2]
    pub r#box: [f64; 4],
}

impl DatasetManifest {
    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Structural validation: unique class names, unique image ids, known
    /// annotation classes, boxes inside image bounds.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for c in &self.classes {
            if !seen.insert(c.as_str()) {
                return Err(IncdetError::Dataset(format!("duplicate class name `{c}`")));
            }
        }
        let mut ids = HashSet::new();
        for (i, img) in self.images.iter().enumerate() {
            if !ids.insert(img.id.as_str()) {
                return Err(IncdetError::Dataset(format!(
                    "images[{i}]: duplicate image id `{}`",
                    img.id
                )));
            }
            if img.width == 0 || img.height == 0 {
                return Err(IncdetError::Dataset(format!(
                    "images[{i}] (`{}`): zero width or height",
                    img.id
                )));
            }
            for (j, ann) in img.annotations.iter().enumerate() {
                if self.class_id(&ann.class).is_none() {
                    return Err(IncdetError::Dataset(format!(
                        "images[{i}] (`{}`) annotations[{j}]: unknown class `{}`",
                        img.id, ann.class
                    )));
                }
                let [x1, y1, x2, y2] = ann.r#box;
                let inside = x1 <= x2
                    && y1 <= y2
                    && x1 >= 0.0
                    && y1 >= 0.0
                    && x2 <= img.width as f64
                    && y2 <= img.height as f64;
                if !inside {
                    return Err(IncdetError::Dataset(format!(
                        "images[{i}] (`{}`) annotations[{j}]: box {:?} outside {}x{} image",
                        img.id, ann.r#box, img.width, img.height
                    )));
                }
            }
        }
        Ok(())
    }

    /// Annotation sets by image, as (class_id, box) pairs.
    pub fn annotation_sets(&self) -> Vec<Vec<Annotation>> {
        self.images
            .iter()
            .map(|img| {
                img.annotations
                    .iter()
                    .map(|a| Annotation {
                        class_id: self.class_id(&a.class).expect("validated"),
                        bbox: BBox::new(a.r#box[0], a.r#box[1], a.r#box[2], a.r#box[3]),
                    })
                    .collect()
            })
            .collect()
    }

    /// Loads image pixels from disk (paths resolved relative to
    /// `base_dir`) and produces full-annotation samples.
    pub fn load_samples(&self, base_dir: &Path) -> Result<Vec<Sample>> {
        let ann_sets = self.annotation_sets();
        self.images
            .iter()
            .zip(ann_sets)
            .map(|(img, anns)| {
                let path: PathBuf = base_dir.join(&img.path);
                let pixels = load_image_f64(&path)?;
                let (_, h, w) = pixels.dim();
                if (w, h) != (img.width, img.height) {
                    return Err(IncdetError::Dataset(format!(
                        "image `{}`: file is {w}x{h} but manifest says {}x{}",
                        img.id, img.width, img.height
                    )));
                }
                Ok(Sample::new(img.id.clone(), pixels, anns))
            })
            .collect()
    }
}

/// Reads and validates a manifest file.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| IncdetError::Dataset(format!("cannot read manifest {}: {e}", path.display())))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| {
        IncdetError::Dataset(format!(
            "manifest {} line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    manifest.validate()?;
    Ok(manifest)
}

pub fn save_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    manifest.validate()?;
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Decodes an image file to (3, H, W) f64 pixels in [0, 1].
pub fn load_image_f64(path: &Path) -> Result<Array3<f64>> {
    let img = image::open(path)
        .map_err(|e| IncdetError::Dataset(format!("cannot decode {}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    let mut out = Array3::zeros((3, h as usize, w as usize));
    for (x, y, p) in img.enumerate_pixels() {
        for c in 0..3 {
            out[[c, y as usize, x as usize]] = p[c] as f64 / 255.0;
        }
    }
    Ok(out)
}

/// Encodes (3, H, W) f64 pixels in [0, 1] to an 8-bit PNG.
pub fn save_image_f64(path: &Path, pixels: &ndarray::ArrayView3<f64>) -> Result<()> {
    let (_, h, w) = pixels.dim();
    let mut img = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let px = image::Rgb([
                (pixels[[0, y, x]].clamp(0.0, 1.0) * 255.0).round() as u8,
                (pixels[[1, y, x]].clamp(0.0, 1.0) * 255.0).round() as u8,
                (pixels[[2, y, x]].clamp(0.0, 1.0) * 255.0).round() as u8,
            ]);
            img.put_pixel(x as u32, y as u32, px);
        }
    }
    img.save(path).map_err(|e| IncdetError::Dataset(format!("cannot write {}: {e}", path.display())))
}

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in continuous pixel coordinates, corner
/// convention `x1 <= x2`, `y1 <= y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        debug_assert!(x1 <= x2 && y1 <= y2, "corner convention violated");
        Self { x1, y1, x2, y2 }
    }

    /// Builds a box from a center point and a width/height pair.
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Clips the box to the `[0, w] x [0, h]` image rectangle.
    pub fn clip(&self, image_w: f64, image_h: f64) -> Self {
        let x1 = self.x1.clamp(0.0, image_w);
        let y1 = self.y1.clamp(0.0, image_h);
        let x2 = self.x2.clamp(0.0, image_w);
        let y2 = self.y2.clamp(0.0, image_h);
        Self { x1, y1, x2, y2 }
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        iou(self, other)
    }
}

/// Intersection over union. Symmetric, in `[0, 1]`; degenerate unions
/// (zero total area) yield 0.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

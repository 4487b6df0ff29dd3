//! Planar points in the bin frame (meters).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point at `radius` from `self` along `angle` (radians, counter-clockwise from +x).
    pub fn polar_offset(&self, radius: f64, angle: f64) -> Point2 {
        Point2::new(self.x + radius * angle.cos(), self.y + radius * angle.sin())
    }
}

/// Strict containment: a point exactly on the boundary is outside.
pub fn strictly_inside(point: &Point2, center: &Point2, radius: f64) -> bool {
    point.distance(center) < radius
}

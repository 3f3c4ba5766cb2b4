use std::cmp::Ordering;

use crate::geometry::Point;

/// One indexed record. `key` is the 1-D projection used for sorting; the
/// payload is an opaque integer (row ordinal or a hashed attribute).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialObject {
    pub key: f64,
    pub x: f64,
    pub y: f64,
    pub payload: u64,
}

impl SpatialObject {
    pub fn new(key: f64, x: f64, y: f64, payload: u64) -> Self {
        Self { key, x, y, payload }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Canonical result order: key, then x, then y, then payload.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.x.total_cmp(&other.x))
            .then(self.y.total_cmp(&other.y))
            .then(self.payload.cmp(&other.payload))
    }
}

pub fn sort_canonical(objects: &mut [SpatialObject]) {
    objects.sort_unstable_by(SpatialObject::canonical_cmp);
}

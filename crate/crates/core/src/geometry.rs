//! Exact 2-D primitives shared by the partitioner, the indexes and the query
//! engine.
//!
//! Every containment predicate here is closed: points on an edge or vertex are
//! inside. Degenerate (zero-width or zero-height) rectangles are legal.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Validating constructor; rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::NonFinite { x, y })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle, `lo <= hi` on both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub y_lo: f64,
    pub x_hi: f64,
    pub y_hi: f64,
}

impl Rect {
    /// Builds a rectangle without validation. Callers must uphold `lo <= hi`.
    pub const fn new(x_lo: f64, y_lo: f64, x_hi: f64, y_hi: f64) -> Self {
        Self {
            x_lo,
            y_lo,
            x_hi,
            y_hi,
        }
    }

    pub fn try_new(x_lo: f64, y_lo: f64, x_hi: f64, y_hi: f64) -> Result<Self> {
        let finite = [x_lo, y_lo, x_hi, y_hi].iter().all(|v| v.is_finite());
        if !finite || x_lo > x_hi || y_lo > y_hi {
            return Err(Error::InvalidRect {
                x_lo,
                y_lo,
                x_hi,
                y_hi,
            });
        }
        Ok(Self::new(x_lo, y_lo, x_hi, y_hi))
    }

    /// Degenerate rectangle covering a single point.
    pub const fn from_point(p: Point) -> Self {
        Self::new(p.x, p.y, p.x, p.y)
    }

    /// Tight bounding box of the given points, `None` when empty.
    pub fn bounding<I: IntoIterator<Item = Point>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut r = Self::from_point(first);
        for p in iter {
            r.expand_point(p);
        }
        Some(r)
    }

    pub fn expand_point(&mut self, p: Point) {
        self.x_lo = self.x_lo.min(p.x);
        self.y_lo = self.y_lo.min(p.y);
        self.x_hi = self.x_hi.max(p.x);
        self.y_hi = self.y_hi.max(p.y);
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x_lo.min(other.x_lo),
            self.y_lo.min(other.y_lo),
            self.x_hi.max(other.x_hi),
            self.y_hi.max(other.y_hi),
        )
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(
            self.x_lo + self.width() / 2.0,
            self.y_lo + self.height() / 2.0,
        )
    }

    pub fn lo(&self) -> Point {
        Point::new(self.x_lo, self.y_lo)
    }

    pub fn hi(&self) -> Point {
        Point::new(self.x_hi, self.y_hi)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        rect_contains_point(self, p)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        rect_intersects(self, other)
    }

    pub fn envelops(&self, inner: &Rect) -> bool {
        rect_envelops(self, inner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn try_new(center: Point, radius: f64) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidCircle(radius));
        }
        Ok(Self { center, radius })
    }

    /// Minimal bounding rectangle of the circle.
    pub fn mbr(&self) -> Rect {
        let Point { x, y } = self.center;
        let r = self.radius;
        Rect::new(x - r, y - r, x + r, y + r)
    }

    pub fn contains(&self, p: Point) -> bool {
        distance(self.center, p) <= self.radius
    }
}

/// A simple polygon given as an implicitly closed vertex ring.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub id: String,
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(id: impl Into<String>, vertices: Vec<Point>) -> Result<Self> {
        let id = id.into();
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon {
                id,
                vertices: vertices.len(),
            });
        }
        if vertices.iter().any(|v| v.x.is_nan() || v.y.is_nan()) {
            return Err(Error::NonFinite {
                x: f64::NAN,
                y: f64::NAN,
            });
        }
        Ok(Self { id, vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn mbr(&self) -> Rect {
        polygon_mbr(self)
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(self, p)
    }
}

pub fn rect_contains_point(r: &Rect, p: Point) -> bool {
    r.x_lo <= p.x && p.x <= r.x_hi && r.y_lo <= p.y && p.y <= r.y_hi
}

pub fn rect_intersects(a: &Rect, b: &Rect) -> bool {
    a.x_lo <= b.x_hi && b.x_lo <= a.x_hi && a.y_lo <= b.y_hi && b.y_lo <= a.y_hi
}

pub fn rect_envelops(outer: &Rect, inner: &Rect) -> bool {
    outer.x_lo <= inner.x_lo
        && inner.x_hi <= outer.x_hi
        && outer.y_lo <= inner.y_lo
        && inner.y_hi <= outer.y_hi
}

/// Euclidean distance.
pub fn distance(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// True when `p` lies on the closed segment `a`-`b`.
fn on_segment(a: Point, b: Point, p: Point) -> bool {
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if cross != 0.0 {
        return false;
    }
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Even-odd ray casting. Points on an edge or vertex are contained.
pub fn point_in_polygon(pg: &Polygon, p: Point) -> bool {
    let vs = pg.vertices();
    let mut inside = false;
    let mut j = vs.len() - 1;
    for i in 0..vs.len() {
        let (a, b) = (vs[i], vs[j]);
        if on_segment(a, b, p) {
            return true;
        }
        // Half-open rule on y so a vertex shared by two edges is counted once.
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn polygon_mbr(pg: &Polygon) -> Rect {
    Rect::bounding(pg.vertices().iter().copied()).expect("polygon has at least 3 vertices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> Polygon {
        Polygon::new(
            "sq",
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rect_point_containment_is_closed() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!(rect_contains_point(&r, Point::new(0.5, 0.5)));
        assert!(rect_contains_point(&r, Point::new(1.0, 1.0)));
        assert!(!rect_contains_point(&r, Point::new(1.0001, 0.5)));
    }

    #[test]
    fn rect_intersection_cases() {
        let unit = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!(rect_intersects(&unit, &Rect::new(1.0, 1.0, 2.0, 2.0)));
        assert!(!rect_intersects(&unit, &Rect::new(2.0, 2.0, 3.0, 3.0)));
        assert!(rect_intersects(
            &Rect::new(0.0, 0.0, 4.0, 4.0),
            &Rect::new(1.0, 1.0, 2.0, 2.0)
        ));
    }

    #[test]
    fn rect_envelope_cases() {
        let big = Rect::new(0.0, 0.0, 4.0, 4.0);
        assert!(rect_envelops(&big, &Rect::new(1.0, 1.0, 2.0, 2.0)));
        assert!(!rect_envelops(&big, &Rect::new(3.0, 3.0, 5.0, 5.0)));
        let unit = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!(rect_envelops(&unit, &unit));
    }

    #[test]
    fn distance_cases() {
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Point::new(1.0, 1.0), Point::new(1.0, 1.0)), 0.0);
        let d = distance(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn point_in_polygon_cases() {
        let sq = unit_square();
        assert!(point_in_polygon(&sq, Point::new(0.5, 0.5)));
        assert!(!point_in_polygon(&sq, Point::new(2.0, 2.0)));
        assert!(point_in_polygon(&sq, Point::new(1.0, 0.5)));
        assert!(point_in_polygon(&sq, Point::new(0.0, 0.0)));
        assert!(point_in_polygon(&sq, Point::new(0.5, 1.0)));
        assert!(!point_in_polygon(&sq, Point::new(-0.5, 0.0)));
    }

    #[test]
    fn polygon_mbr_cases() {
        let tri = Polygon::new(
            "t",
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(1.0, 3.0),
            ],
        )
        .unwrap();
        assert_eq!(polygon_mbr(&tri), Rect::new(0.0, 0.0, 2.0, 3.0));
        assert_eq!(polygon_mbr(&unit_square()), Rect::new(0.0, 0.0, 1.0, 1.0));
        let flat = Polygon::new(
            "f",
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(1.0, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(polygon_mbr(&flat), Rect::new(0.0, 0.0, 2.0, 0.0));
    }

    #[test]
    fn polygon_rejects_too_few_vertices() {
        let err = Polygon::new("p", vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]);
        assert!(matches!(
            err,
            Err(Error::DegeneratePolygon { vertices: 2, .. })
        ));
    }

    #[test]
    fn invalid_rects_and_points_rejected() {
        assert!(Rect::try_new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect::try_new(0.0, 0.0, f64::NAN, 1.0).is_err());
        assert!(Point::try_new(f64::INFINITY, 0.0).is_err());
        assert!(Circle::try_new(Point::new(0.0, 0.0), -1.0).is_err());
    }

    /// Winding-number containment for convex, counter-clockwise polygons,
    /// boundary inclusive.
    fn convex_winding_contains(vs: &[Point], p: Point) -> bool {
        let n = vs.len();
        let mut winding = 0i32;
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            if cross == 0.0 && on_segment(a, b, p) {
                return true;
            }
            if a.y <= p.y {
                if b.y > p.y && cross > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && cross < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }

    fn convex_polygon(cx: f64, cy: f64, radius: f64, n: usize, phase: f64) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let t = phase + i as f64 * std::f64::consts::TAU / n as f64;
                Point::new(cx + radius * t.cos(), cy + radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn ray_casting_matches_winding_number_on_convex_polygons() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 4, 5, 8, 17] {
            let vs = convex_polygon(0.5, 0.5, 0.4, n, rng.random::<f64>());
            let pg = Polygon::new("c", vs.clone()).unwrap();
            for _ in 0..2_000 {
                let p = Point::new(rng.random::<f64>(), rng.random::<f64>());
                assert_eq!(
                    point_in_polygon(&pg, p),
                    convex_winding_contains(&vs, p),
                    "{p:?} in {n}-gon"
                );
            }
        }
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1e3f64..1e3
    }

    fn rect() -> impl Strategy<Value = Rect> {
        (coord(), coord(), coord(), coord())
            .prop_map(|(a, b, c, d)| Rect::new(a.min(c), b.min(d), a.max(c), b.max(d)))
    }

    proptest! {
        #[test]
        fn containment_implies_degenerate_intersection(r in rect(), x in coord(), y in coord()) {
            let p = Point::new(x, y);
            if rect_contains_point(&r, p) {
                prop_assert!(rect_intersects(&r, &Rect::from_point(p)));
            }
        }

        #[test]
        fn envelope_implies_intersection(a in rect(), b in rect()) {
            if rect_envelops(&a, &b) {
                prop_assert!(rect_intersects(&a, &b));
            }
        }

        #[test]
        fn triangle_inequality(ax in coord(), ay in coord(), bx in coord(), by in coord(), cx in coord(), cy in coord()) {
            let (a, b, c) = (Point::new(ax, ay), Point::new(bx, by), Point::new(cx, cy));
            let lhs = distance(a, c);
            let rhs = distance(a, b) + distance(b, c);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
            prop_assert_eq!(distance(a, b), distance(b, a));
        }
    }
}

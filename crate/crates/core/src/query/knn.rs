//! k-nearest-neighbour search by expanding square range windows.
//!
//! The first window's half-width comes from the global density: the radius of
//! a circle expected to hold `k` objects. Windows that return fewer than `k`
//! objects grow by `4k / (pi (k - 1))` (doubling for `k = 1`). Once a window
//! holds `k` candidates, the k-th distance `d_k` decides the answer: if the
//! circle of radius `d_k` fits in the window the top-k is exact, otherwise a
//! single extra window of half-width `d_k` catches the corner gap.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{distance, Point, Rect};
use crate::object::SpatialObject;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_MAX_ROUNDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    /// Rounds after which the window jumps to the whole data extent.
    pub max_rounds: usize,
    /// Window growth factor used when `k = 1`.
    pub growth_k1: f64,
}

impl KnnParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.max_rounds == 0 || self.growth_k1.is_nan() || self.growth_k1 <= 1.0 {
            return Err(Error::InvalidParameter(format!("knn parameters {self:?}")));
        }
        Ok(())
    }

    /// Window growth factor between rounds.
    pub fn growth(&self) -> f64 {
        if self.k >= 2 {
            let k = self.k as f64;
            4.0 * k / (PI * (k - 1.0))
        } else {
            self.growth_k1
        }
    }
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            max_rounds: DEFAULT_MAX_ROUNDS,
            growth_k1: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub object: SpatialObject,
    pub distance: f64,
}

impl Neighbor {
    /// Distance first, then the canonical object order.
    pub fn cmp_rank(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| self.object.canonical_cmp(&other.object))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnResult {
    pub neighbors: Vec<Neighbor>,
    /// Range queries issued, refinement window included.
    pub rounds: usize,
}

/// Anything that can answer a closed rectangular window query.
pub trait WindowSource {
    fn window(&self, q: &Rect) -> Result<Vec<SpatialObject>>;
}

/// Radius of the circle expected to hold `k` of `n` objects spread over
/// `area`: `sqrt(k / (pi * n / area))`.
pub fn knn_initial_radius(k: usize, n: usize, area: f64) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("k and n must be positive".into()));
    }
    if area.is_nan() || area <= 0.0 || !area.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "area {area} must be positive"
        )));
    }
    let density = n as f64 / area;
    Ok((k as f64 / (PI * density)).sqrt())
}

/// Upper bound on the number of growth rounds for `k >= 2`:
/// `ceil((ln diag - ln r0) / ln(4k / (pi (k - 1))))`, at least 1.
pub fn knn_round_bound(k: usize, n: usize, data_mbr: &Rect) -> Result<usize> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "round bound is undefined for k = 1".into(),
        ));
    }
    if n == 0 || data_mbr.area().is_nan() || data_mbr.area() <= 0.0 {
        return Err(Error::InvalidParameter(
            "round bound needs n >= 1 and a non-degenerate extent".into(),
        ));
    }
    let kf = k as f64;
    let r0 = (kf * data_mbr.width() * data_mbr.height() / (PI * n as f64)).sqrt();
    let ratio = (data_mbr.diagonal().ln() - r0.ln()) / (4.0 * kf / (PI * (kf - 1.0))).ln();
    Ok((ratio.ceil() as i64).max(1) as usize)
}

fn square(q: Point, half: f64) -> Rect {
    Rect::new(q.x - half, q.y - half, q.x + half, q.y + half)
}

/// Padding that keeps a float-computed window a superset of the true circle.
fn slack(q: Point, d: f64) -> f64 {
    (q.x.abs().max(q.y.abs()) + d) * 1e-13
}

fn rank(q: Point, cands: Vec<SpatialObject>) -> Vec<Neighbor> {
    let mut v: Vec<Neighbor> = cands
        .into_iter()
        .map(|object| Neighbor {
            distance: distance(q, object.point()),
            object,
        })
        .collect();
    v.sort_unstable_by(Neighbor::cmp_rank);
    v
}

/// Exact top-k by density-seeded expanding windows over `source`, which
/// holds `n` objects inside `data_mbr`.
pub fn knn_query<S: WindowSource + ?Sized>(
    source: &S,
    q: Point,
    params: &KnnParams,
    n: usize,
    data_mbr: &Rect,
) -> Result<KnnResult> {
    params.validate()?;
    if !q.is_finite() {
        return Err(Error::NonFinite { x: q.x, y: q.y });
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let k = params.k;
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }

    let mut r = if data_mbr.area() > 0.0 {
        knn_initial_radius(k, n, data_mbr.area())?
    } else {
        let side = match data_mbr.width().max(data_mbr.height()) {
            s if s > 0.0 => s,
            _ => 1.0,
        };
        side * std::f64::consts::SQRT_2 / 2.0
    };
    let growth = params.growth();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let win = if rounds >= params.max_rounds {
            data_mbr.union(&square(q, r))
        } else {
            square(q, r)
        };
        let everything = win.envelops(data_mbr);
        let cands = source.window(&win)?;
        if cands.len() < k && !everything {
            r *= growth;
            continue;
        }
        let mut ranked = rank(q, cands);
        let dk = ranked[k - 1].distance;
        let pad = slack(q, dk);
        let fits = win.envelops(&square(q, dk + pad));
        if !(fits || everything) {
            rounds += 1;
            ranked = rank(q, source.window(&square(q, dk + pad))?);
        }
        ranked.truncate(k);
        return Ok(KnnResult {
            neighbors: ranked,
            rounds,
        });
    }
}

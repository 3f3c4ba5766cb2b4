//! Sampling-based global partitioning.
//!
//! A small sample drives grid construction; every object then goes to the
//! first grid (in list order) whose closed rectangle contains it, or to the
//! overflow partition whose id is the number of grids. Partitions are sorted
//! by key and indexed independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::learned::{KeyStrategy, SplineIndex};
use crate::object::{sort_canonical, SpatialObject};
use crate::rtree::RTree;

/// Sample size fallback when Bernoulli sampling draws nothing.
const MIN_SAMPLE_FALLBACK: usize = 1000;
const QUADTREE_MAX_DEPTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionStrategy {
    FixedGrid {
        nx: usize,
        ny: usize,
    },
    AdaptiveGrid {
        nx: usize,
        ny: usize,
    },
    /// `max_leaf: None` sizes leaves for about two partitions per worker.
    Quadtree {
        max_leaf: Option<usize>,
    },
    KDTree {
        max_leaf: Option<usize>,
    },
    RTreeLeaves {
        fanout: usize,
    },
}

impl PartitionStrategy {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PartitionStrategy::FixedGrid { nx, ny }
            | PartitionStrategy::AdaptiveGrid { nx, ny } => nx >= 1 && ny >= 1,
            PartitionStrategy::Quadtree { max_leaf } | PartitionStrategy::KDTree { max_leaf } => {
                max_leaf != Some(0)
            }
            PartitionStrategy::RTreeLeaves { fanout } => fanout >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "partition strategy {self:?}"
            )))
        }
    }

    /// Replaces an automatic leaf size with a concrete one.
    pub fn resolved(self, sample_len: usize, workers: usize) -> Self {
        let auto = sample_len.div_ceil(2 * workers.max(1)).max(1);
        match self {
            PartitionStrategy::Quadtree { max_leaf: None } => PartitionStrategy::Quadtree {
                max_leaf: Some(auto),
            },
            PartitionStrategy::KDTree { max_leaf: None } => PartitionStrategy::KDTree {
                max_leaf: Some(auto),
            },
            other => other,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PartitionStrategy::FixedGrid { .. } => "fixed",
            PartitionStrategy::AdaptiveGrid { .. } => "adaptive",
            PartitionStrategy::Quadtree { .. } => "quadtree",
            PartitionStrategy::KDTree { .. } => "kdtree",
            PartitionStrategy::RTreeLeaves { .. } => "rtree",
        }
    }

    /// Whether grids are stretched to cover the full data extent.
    pub fn covers_data(&self) -> bool {
        !matches!(self, PartitionStrategy::RTreeLeaves { .. })
    }
}

/// Global index entry for one partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDescriptor {
    pub id: usize,
    pub mbr: Rect,
    pub overflow: bool,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Objects in canonical order (key first).
    pub objects: Vec<SpatialObject>,
    /// Absent for empty partitions.
    pub index: Option<SplineIndex>,
}

impl Partition {
    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedDataset {
    pub descriptors: Vec<GridDescriptor>,
    pub partitions: Vec<Partition>,
    pub config: EngineConfig,
    pub global_mbr: Rect,
    pub total: usize,
}

impl PartitionedDataset {
    pub fn key_strategy(&self) -> &KeyStrategy {
        &self.config.key_strategy
    }

    pub fn overflow_id(&self) -> usize {
        self.descriptors.len() - 1
    }

    pub fn objects(&self) -> impl Iterator<Item = &SpatialObject> {
        self.partitions.iter().flat_map(|p| p.objects.iter())
    }

    pub fn knot_count(&self) -> usize {
        self.partitions
            .iter()
            .filter_map(|p| p.index.as_ref())
            .map(|i| i.knots.len())
            .sum()
    }

    /// Samples, builds grids, assigns objects and indexes every partition.
    pub fn build(objects: Vec<SpatialObject>, config: &EngineConfig) -> Result<Self> {
        config.validate()?;
        let points: Vec<Point> = objects.iter().map(SpatialObject::point).collect();
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite { x: p.x, y: p.y });
        }
        let sampled = sample(&points, config.sample_rate, config.seed)?;
        let strategy = config
            .partition_strategy
            .resolved(sampled.len(), config.workers);
        let mut grids = build_grids(&sampled, &strategy)?;
        if strategy.covers_data() {
            let sample_mbr = Rect::bounding(sampled.iter().copied()).expect("non-empty sample");
            let data_mbr = Rect::bounding(points.iter().copied()).expect("non-empty data");
            stretch_to_cover(&mut grids, &sample_mbr, &data_mbr);
        }
        drop(points);
        let mut cfg = config.clone();
        cfg.partition_strategy = strategy;
        assign(objects, &grids, &cfg)
    }
}

/// Independent Bernoulli sample at `rate`, deterministic under `seed`.
pub fn sample(points: &[Point], rate: f64, seed: u64) -> Result<Vec<Point>> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("sample rate {rate}")));
    }
    if rate >= 1.0 {
        return Ok(points.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out: Vec<Point> = points
        .iter()
        .copied()
        .filter(|_| rng.random_bool(rate))
        .collect();
    if out.is_empty() {
        return Ok(points[..points.len().min(MIN_SAMPLE_FALLBACK)].to_vec());
    }
    Ok(out)
}

pub fn build_grids(sample: &[Point], strategy: &PartitionStrategy) -> Result<Vec<Rect>> {
    strategy.validate()?;
    let mbr = Rect::bounding(sample.iter().copied()).ok_or(Error::EmptyDataset)?;
    let grids = match *strategy {
        PartitionStrategy::FixedGrid { nx, ny } => {
            let xs = uniform_edges(mbr.x_lo, mbr.x_hi, nx);
            let ys = uniform_edges(mbr.y_lo, mbr.y_hi, ny);
            cells(&xs, &ys)
        }
        PartitionStrategy::AdaptiveGrid { nx, ny } => {
            let mut xv: Vec<f64> = sample.iter().map(|p| p.x).collect();
            let mut yv: Vec<f64> = sample.iter().map(|p| p.y).collect();
            xv.sort_unstable_by(f64::total_cmp);
            yv.sort_unstable_by(f64::total_cmp);
            cells(&quantile_edges(&xv, nx), &quantile_edges(&yv, ny))
        }
        PartitionStrategy::Quadtree { max_leaf } => {
            let max_leaf = max_leaf.unwrap_or(1);
            let mut out = Vec::new();
            let mut pts = sample.to_vec();
            quad_split(&mut pts, mbr, max_leaf, 0, &mut out);
            out
        }
        PartitionStrategy::KDTree { max_leaf } => {
            let max_leaf = max_leaf.unwrap_or(1);
            let mut out = Vec::new();
            let mut pts = sample.to_vec();
            kd_split(&mut pts, mbr, max_leaf, &mut out);
            out
        }
        PartitionStrategy::RTreeLeaves { fanout } => {
            RTree::from_points(sample, fanout)?.leaf_mbrs()
        }
    };
    Ok(grids)
}

fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    edges[0] = lo;
    edges[n] = hi;
    edges
}

fn quantile_edges(sorted: &[f64], n: usize) -> Vec<f64> {
    let len = sorted.len();
    let mut edges: Vec<f64> = (0..=n)
        .map(|i| sorted[(i * len / n).min(len - 1)])
        .collect();
    edges[0] = sorted[0];
    edges[n] = sorted[len - 1];
    edges
}

/// Row-major (y outer, x inner) cells of the given edge lists.
fn cells(xs: &[f64], ys: &[f64]) -> Vec<Rect> {
    let mut out = Vec::with_capacity((xs.len() - 1) * (ys.len() - 1));
    for yw in ys.windows(2) {
        for xw in xs.windows(2) {
            out.push(Rect::new(xw[0], yw[0], xw[1], yw[1]));
        }
    }
    out
}

fn all_same(pts: &[Point]) -> bool {
    pts.windows(2).all(|w| w[0] == w[1])
}

fn quad_split(pts: &mut [Point], rect: Rect, max_leaf: usize, depth: usize, out: &mut Vec<Rect>) {
    if pts.len() <= max_leaf || depth >= QUADTREE_MAX_DEPTH || all_same(pts) {
        out.push(rect);
        return;
    }
    let c = rect.center();
    let quads = [
        Rect::new(rect.x_lo, rect.y_lo, c.x, c.y),
        Rect::new(c.x, rect.y_lo, rect.x_hi, c.y),
        Rect::new(rect.x_lo, c.y, c.x, rect.y_hi),
        Rect::new(c.x, c.y, rect.x_hi, rect.y_hi),
    ];
    let quadrant = |p: &Point| (p.x >= c.x) as usize + 2 * (p.y >= c.y) as usize;
    pts.sort_by_key(quadrant);
    let mut start = 0;
    for (q, qrect) in quads.into_iter().enumerate() {
        let end = start + pts[start..].iter().take_while(|p| quadrant(p) == q).count();
        quad_split(&mut pts[start..end], qrect, max_leaf, depth + 1, out);
        start = end;
    }
}

/// Median split position along one axis, `None` when every coordinate on
/// that axis is equal at the median.
fn kd_median(pts: &mut [Point], use_x: bool) -> Option<(usize, f64)> {
    let coord = |p: &Point| if use_x { p.x } else { p.y };
    pts.sort_by(|a, b| {
        coord(a).total_cmp(&coord(b)).then_with(|| {
            if use_x {
                a.y.total_cmp(&b.y)
            } else {
                a.x.total_cmp(&b.x)
            }
        })
    });
    let n = pts.len();
    let m = n / 2;
    let (lo, hi) = (coord(&pts[m - 1]), coord(&pts[m]));
    if lo < hi {
        return Some((m, lo + (hi - lo) / 2.0));
    }
    // the median value repeats; split just after its run instead
    let after = m + pts[m..].iter().take_while(|p| coord(p) == lo).count();
    if after < n {
        let next = coord(&pts[after]);
        return Some((after, lo + (next - lo) / 2.0));
    }
    let before = pts[..m].iter().rposition(|p| coord(p) < lo)?;
    let prev = coord(&pts[before]);
    Some((before + 1, prev + (lo - prev) / 2.0))
}

fn kd_split(pts: &mut [Point], rect: Rect, max_leaf: usize, out: &mut Vec<Rect>) {
    if pts.len() <= max_leaf || pts.len() < 2 {
        out.push(rect);
        return;
    }
    let spread = |f: fn(&Point) -> f64| {
        let (lo, hi) = pts
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        hi - lo
    };
    let x_first = spread(|p| p.x) >= spread(|p| p.y);
    let choice = kd_median(pts, x_first)
        .map(|s| (x_first, s))
        .or_else(|| kd_median(pts, !x_first).map(|s| (!x_first, s)));
    let Some((use_x, (at, split))) = choice else {
        out.push(rect);
        return;
    };
    let (left, right) = if use_x {
        (
            Rect::new(rect.x_lo, rect.y_lo, split, rect.y_hi),
            Rect::new(split, rect.y_lo, rect.x_hi, rect.y_hi),
        )
    } else {
        (
            Rect::new(rect.x_lo, rect.y_lo, rect.x_hi, split),
            Rect::new(rect.x_lo, split, rect.x_hi, rect.y_hi),
        )
    };
    let (l, r) = pts.split_at_mut(at);
    kd_split(l, left, max_leaf, out);
    kd_split(r, right, max_leaf, out);
}

/// Stretches grid edges that lie on the sample MBR boundary out to the data
/// MBR, so tilings of the sample cover every object.
pub fn stretch_to_cover(grids: &mut [Rect], sample_mbr: &Rect, data_mbr: &Rect) {
    for g in grids {
        if g.x_lo == sample_mbr.x_lo {
            g.x_lo = g.x_lo.min(data_mbr.x_lo);
        }
        if g.y_lo == sample_mbr.y_lo {
            g.y_lo = g.y_lo.min(data_mbr.y_lo);
        }
        if g.x_hi == sample_mbr.x_hi {
            g.x_hi = g.x_hi.max(data_mbr.x_hi);
        }
        if g.y_hi == sample_mbr.y_hi {
            g.y_hi = g.y_hi.max(data_mbr.y_hi);
        }
    }
}

/// Id of the first grid containing `p`, or `grids.len()` for overflow.
#[inline]
pub fn route(grids: &[Rect], p: Point) -> usize {
    grids
        .iter()
        .position(|g| g.contains_point(p))
        .unwrap_or(grids.len())
}

/// Routes every object, sorts each partition by key and builds its index.
pub fn assign(
    objects: Vec<SpatialObject>,
    grids: &[Rect],
    config: &EngineConfig,
) -> Result<PartitionedDataset> {
    if grids.is_empty() {
        return Err(Error::InvalidParameter("empty grid list".into()));
    }
    let global_mbr =
        Rect::bounding(objects.iter().map(SpatialObject::point)).ok_or(Error::EmptyDataset)?;
    let total = objects.len();
    let strategy = config.key_strategy;
    strategy.validate()?;

    let ids: Vec<u32> = objects
        .par_iter()
        .map(|o| route(grids, o.point()) as u32)
        .collect();
    let slots = grids.len() + 1;
    let mut counts = vec![0usize; slots];
    for &id in &ids {
        counts[id as usize] += 1;
    }
    let mut buckets: Vec<Vec<SpatialObject>> =
        counts.iter().map(|&c| Vec::with_capacity(c)).collect();
    for (mut o, id) in objects.into_iter().zip(ids) {
        o.key = strategy.key_of(o.point());
        buckets[id as usize].push(o);
    }

    let partitions: Vec<Partition> = buckets
        .into_par_iter()
        .map(|mut objs| -> Result<Partition> {
            if objs.is_empty() {
                return Ok(Partition {
                    objects: objs,
                    index: None,
                });
            }
            sort_canonical(&mut objs);
            let index = SplineIndex::build(
                objs.iter().map(|o| o.key),
                config.epsilon,
                config.radix_bits,
            )?;
            Ok(Partition {
                objects: objs,
                index: Some(index),
            })
        })
        .collect::<Result<_>>()?;

    let descriptors = partitions
        .iter()
        .enumerate()
        .map(|(id, p)| {
            let overflow = id == grids.len();
            let tight = Rect::bounding(p.objects.iter().map(SpatialObject::point));
            let mbr = match (tight, overflow) {
                (Some(r), _) => r,
                (None, false) => grids[id],
                (None, true) => Rect::new(0.0, 0.0, 0.0, 0.0),
            };
            GridDescriptor {
                id,
                mbr,
                overflow,
                count: p.objects.len(),
            }
        })
        .collect();

    Ok(PartitionedDataset {
        descriptors,
        partitions,
        config: config.clone(),
        global_mbr,
        total,
    })
}

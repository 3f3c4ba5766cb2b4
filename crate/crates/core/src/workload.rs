//! Seeded query workloads sized by selectivity.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Circle, Point, Polygon, Rect};
use crate::partition::PartitionedDataset;
use crate::query::{KnnParams, DEFAULT_K};
use crate::runtime::QuerySpec;
use crate::storage::gen_convex_polygons;

pub const MIN_SELECTIVITY: f64 = 1e-8;
pub const MAX_SELECTIVITY: f64 = 1e-3;
pub const DEFAULT_SELECTIVITY: f64 = 1e-7;
pub const DEFAULT_RUNS: usize = 50;
pub const DEFAULT_COUNT: usize = 100;
/// Polygons broadcast per generated join query.
pub const JOIN_POLYGONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryType {
    Point,
    Range,
    Circle,
    Knn,
    Join,
}

impl QueryType {
    pub fn name(self) -> &'static str {
        match self {
            QueryType::Point => "point",
            QueryType::Range => "range",
            QueryType::Circle => "circle",
            QueryType::Knn => "knn",
            QueryType::Join => "join",
        }
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "point" => QueryType::Point,
            "range" => QueryType::Range,
            "circle" => QueryType::Circle,
            "knn" => QueryType::Knn,
            "join" => QueryType::Join,
            _ => return Err(Error::InvalidParameter(format!("unknown query type {s:?}"))),
        })
    }
}

/// Where query centres come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Skew {
    /// Centres are data points, so queries follow the data distribution.
    #[default]
    Skewed,
    /// Centres are uniform over the data MBR.
    Uniform,
}

impl Skew {
    pub fn name(self) -> &'static str {
        match self {
            Skew::Skewed => "skewed",
            Skew::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Skew {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Skew {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "skewed" | "skew" | "data" => Ok(Skew::Skewed),
            "uniform" => Ok(Skew::Uniform),
            _ => Err(Error::InvalidParameter(format!("unknown skew {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workload {
    pub query_type: QueryType,
    /// Query window area as a fraction of the data MBR area.
    pub selectivity: f64,
    pub skew: Skew,
    pub k: usize,
    pub count: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for Workload {
    fn default() -> Self {
        Self {
            query_type: QueryType::Range,
            selectivity: DEFAULT_SELECTIVITY,
            skew: Skew::Skewed,
            k: DEFAULT_K,
            count: DEFAULT_COUNT,
            runs: DEFAULT_RUNS,
            seed: crate::config::DEFAULT_SEED,
        }
    }
}

impl Workload {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_SELECTIVITY..=MAX_SELECTIVITY).contains(&self.selectivity) {
            return Err(Error::InvalidParameter(format!(
                "selectivity {} outside [{MIN_SELECTIVITY}, {MAX_SELECTIVITY}]",
                self.selectivity
            )));
        }
        if self.count == 0 || self.runs == 0 {
            return Err(Error::InvalidParameter(
                "count and runs must be at least 1".into(),
            ));
        }
        if self.query_type == QueryType::Knn && self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Side of a square window covering `selectivity` of `mbr`.
pub fn window_side(mbr: &Rect, selectivity: f64) -> f64 {
    (selectivity * mbr.area()).sqrt()
}

/// Radius of a circle covering `selectivity` of `mbr`.
pub fn circle_radius(mbr: &Rect, selectivity: f64) -> f64 {
    (selectivity * mbr.area() / PI).sqrt()
}

fn nth_object(ds: &PartitionedDataset, mut i: usize) -> Point {
    for part in &ds.partitions {
        if i < part.objects.len() {
            return part.objects[i].point();
        }
        i -= part.objects.len();
    }
    unreachable!("index below dataset total")
}

/// Draws query centres per `skew`.
pub fn gen_centers(
    ds: &PartitionedDataset,
    skew: Skew,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    let m = ds.global_mbr;
    (0..count)
        .map(|_| match skew {
            Skew::Skewed if ds.total > 0 => nth_object(ds, rng.random_range(0..ds.total)),
            _ => Point::new(
                m.x_lo + rng.random::<f64>() * m.width(),
                m.y_lo + rng.random::<f64>() * m.height(),
            ),
        })
        .collect()
}

/// Generates `w.count` queries; identical inputs give identical queries.
pub fn gen_workload(ds: &PartitionedDataset, w: &Workload) -> Result<Vec<QuerySpec>> {
    w.validate()?;
    if ds.total == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    let mbr = ds.global_mbr;
    let half = window_side(&mbr, w.selectivity) / 2.0;
    let radius = circle_radius(&mbr, w.selectivity);
    let n_centers = match w.query_type {
        QueryType::Join => w.count * JOIN_POLYGONS,
        _ => w.count,
    };
    let centers = gen_centers(ds, w.skew, n_centers, &mut rng);
    let queries = match w.query_type {
        QueryType::Point => centers.into_iter().map(QuerySpec::Point).collect(),
        QueryType::Range => centers
            .into_iter()
            .map(|c| QuerySpec::Range(Rect::new(c.x - half, c.y - half, c.x + half, c.y + half)))
            .collect(),
        QueryType::Circle => centers
            .into_iter()
            .map(|c| Circle::try_new(c, radius).map(QuerySpec::Circle))
            .collect::<Result<_>>()?,
        QueryType::Knn => centers
            .into_iter()
            .map(|point| QuerySpec::Knn {
                point,
                params: KnnParams::new(w.k),
            })
            .collect(),
        QueryType::Join => centers
            .chunks(JOIN_POLYGONS)
            .enumerate()
            .map(|(q, chunk)| {
                let polys = chunk
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        polygon_at(*c, radius, w.seed ^ ((q * JOIN_POLYGONS + i) as u64), q, i)
                    })
                    .collect();
                QuerySpec::Join(polys)
            })
            .collect(),
    };
    Ok(queries)
}

fn polygon_at(c: Point, radius: f64, seed: u64, q: usize, i: usize) -> Polygon {
    // Fall back to a tiny radius so a zero-area MBR still yields valid polygons.
    let r = if radius > 0.0 { radius } else { 1e-9 };
    let mut pg = gen_convex_polygons(1, &Rect::from_point(c), r, seed)
        .pop()
        .expect("one polygon");
    pg.id = format!("q{q:04}p{i:02}");
    pg
}

/// Alternating point and range queries for throughput runs.
pub fn mixed_workload(
    ds: &PartitionedDataset,
    count: usize,
    selectivity: f64,
    seed: u64,
) -> Result<Vec<QuerySpec>> {
    let base = Workload {
        selectivity,
        count,
        runs: 1,
        seed,
        ..Workload::default()
    };
    let points = gen_workload(
        ds,
        &Workload {
            query_type: QueryType::Point,
            ..base
        },
    )?;
    let ranges = gen_workload(
        ds,
        &Workload {
            query_type: QueryType::Range,
            ..base
        },
    )?;
    Ok(points
        .into_iter()
        .zip(ranges)
        .enumerate()
        .map(|(i, (p, r))| if i % 2 == 0 { p } else { r })
        .collect())
}

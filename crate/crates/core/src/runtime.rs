//! Two-phase execution: a coordinator-side global filter over the grid
//! descriptors, then local searches on the candidate partitions run on a
//! worker pool, then a deterministic merge.

use std::sync::Arc;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::{Circle, Point, Polygon, Rect};
use crate::object::{sort_canonical, SpatialObject};
use crate::partition::{GridDescriptor, PartitionedDataset};
use crate::query::{self, knn_query, sort_join_pairs, JoinPair, KnnParams, Neighbor, WindowSource};

#[derive(Debug, Clone, PartialEq)]
pub enum QuerySpec {
    Point(Point),
    Range(Rect),
    Circle(Circle),
    Knn { point: Point, params: KnnParams },
    Join(Vec<Polygon>),
}

impl QuerySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            QuerySpec::Point(_) => "point",
            QuerySpec::Range(_) => "range",
            QuerySpec::Circle(_) => "circle",
            QuerySpec::Knn { .. } => "knn",
            QuerySpec::Join(_) => "join",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResultSet {
    Found(bool),
    Objects(Vec<SpatialObject>),
    Neighbors {
        neighbors: Vec<Neighbor>,
        rounds: usize,
    },
    Pairs(Vec<JoinPair>),
}

impl ResultSet {
    pub fn len(&self) -> usize {
        match self {
            ResultSet::Found(b) => *b as usize,
            ResultSet::Objects(v) => v.len(),
            ResultSet::Neighbors { neighbors, .. } => neighbors.len(),
            ResultSet::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The area the global filter tests descriptor MBRs against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterShape {
    Point(Point),
    Rect(Rect),
}

/// Ids of non-empty partitions whose MBR may hold an answer.
pub fn global_filter(descriptors: &[GridDescriptor], shape: &FilterShape) -> Vec<usize> {
    descriptors
        .iter()
        .filter(|d| d.count > 0)
        .filter(|d| match shape {
            FilterShape::Point(p) => d.mbr.contains_point(*p),
            FilterShape::Rect(r) => d.mbr.intersects(r),
        })
        .map(|d| d.id)
        .collect()
}

/// Partitions intersecting any of `rects`, ascending.
fn union_filter(descriptors: &[GridDescriptor], rects: &[Rect]) -> Vec<usize> {
    let mut ids: Vec<usize> = rects
        .iter()
        .flat_map(|r| global_filter(descriptors, &FilterShape::Rect(*r)))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Query engine over an immutable partitioned dataset.
pub struct Engine {
    dataset: Arc<PartitionedDataset>,
    pool: ThreadPool,
    workers: usize,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("workers", &self.workers)
            .field("partitions", &self.dataset.partitions.len())
            .field("total", &self.dataset.total)
            .finish()
    }
}

impl Engine {
    pub fn new(dataset: impl Into<Arc<PartitionedDataset>>, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("lilis-worker-{i}"))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        Ok(Self {
            dataset: dataset.into(),
            pool,
            workers,
        })
    }

    /// Partitions, indexes and wraps `objects` according to `config`.
    pub fn build(objects: Vec<SpatialObject>, config: &EngineConfig) -> Result<Self> {
        let ds = PartitionedDataset::build(objects, config)?;
        Self::new(ds, config.workers)
    }

    pub fn dataset(&self) -> &PartitionedDataset {
        &self.dataset
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `task` on every candidate partition in the worker pool; results
    /// come back in candidate order.
    fn dispatch<T, F>(&self, candidates: &[usize], task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if candidates.len() <= 1 || self.workers == 1 {
            return candidates.iter().map(|&id| task(id)).collect();
        }
        self.pool
            .install(|| candidates.par_iter().map(|&id| task(id)).collect())
    }

    pub fn plan(&self, q: &QuerySpec) -> Vec<usize> {
        let ds = &self.dataset;
        match q {
            QuerySpec::Point(p) => global_filter(&ds.descriptors, &FilterShape::Point(*p)),
            QuerySpec::Range(r) => global_filter(&ds.descriptors, &FilterShape::Rect(*r)),
            QuerySpec::Circle(c) => global_filter(&ds.descriptors, &FilterShape::Rect(c.mbr())),
            QuerySpec::Join(polys) => {
                let mbrs: Vec<Rect> = polys.iter().map(Polygon::mbr).collect();
                union_filter(&ds.descriptors, &mbrs)
            }
            // kNN filters once per window round.
            QuerySpec::Knn { .. } => Vec::new(),
        }
    }

    pub fn execute(&self, q: &QuerySpec) -> Result<ResultSet> {
        match q {
            QuerySpec::Point(p) => self.point(*p).map(ResultSet::Found),
            QuerySpec::Range(r) => self.range(r).map(ResultSet::Objects),
            QuerySpec::Circle(c) => self.circle(c).map(ResultSet::Objects),
            QuerySpec::Knn { point, params } => {
                let res = self.knn(*point, params)?;
                Ok(ResultSet::Neighbors {
                    neighbors: res.neighbors,
                    rounds: res.rounds,
                })
            }
            QuerySpec::Join(polys) => self.join(polys).map(ResultSet::Pairs),
        }
    }

    pub fn point(&self, p: Point) -> Result<bool> {
        if !p.is_finite() {
            return Err(Error::NonFinite { x: p.x, y: p.y });
        }
        let ds = &self.dataset;
        let candidates = global_filter(&ds.descriptors, &FilterShape::Point(p));
        let hits = self.dispatch(&candidates, |id| {
            query::local_point_search(&ds.partitions[id], p, ds.key_strategy())
        });
        Ok(hits.into_iter().any(|h| h))
    }

    pub fn range(&self, r: &Rect) -> Result<Vec<SpatialObject>> {
        Rect::try_new(r.x_lo, r.y_lo, r.x_hi, r.y_hi)?;
        let ds = &self.dataset;
        let candidates = global_filter(&ds.descriptors, &FilterShape::Rect(*r));
        let parts = self.dispatch(&candidates, |id| {
            query::local_range_search(
                &ds.partitions[id],
                r,
                ds.key_strategy(),
                &ds.descriptors[id].mbr,
            )
        });
        Ok(merge(parts))
    }

    pub fn circle(&self, c: &Circle) -> Result<Vec<SpatialObject>> {
        let c = Circle::try_new(c.center, c.radius)?;
        let ds = &self.dataset;
        let candidates = global_filter(&ds.descriptors, &FilterShape::Rect(c.mbr()));
        let parts = self.dispatch(&candidates, |id| {
            query::local_circle_search(
                &ds.partitions[id],
                &c,
                ds.key_strategy(),
                &ds.descriptors[id].mbr,
            )
        });
        Ok(merge(parts))
    }

    pub fn knn(&self, q: Point, params: &KnnParams) -> Result<query::KnnResult> {
        let ds = &self.dataset;
        knn_query(self, q, params, ds.total, &ds.global_mbr)
    }

    pub fn join(&self, polygons: &[Polygon]) -> Result<Vec<JoinPair>> {
        if polygons.is_empty() {
            return Err(Error::InvalidParameter(
                "join needs at least one polygon".into(),
            ));
        }
        let ds = &self.dataset;
        let broadcast: Vec<(usize, &Polygon, Rect)> = polygons
            .iter()
            .enumerate()
            .map(|(i, pg)| (i, pg, pg.mbr()))
            .collect();
        let mbrs: Vec<Rect> = broadcast.iter().map(|(_, _, mbr)| *mbr).collect();
        let candidates = union_filter(&ds.descriptors, &mbrs);
        let parts = self.dispatch(&candidates, |id| {
            query::local_join(
                &ds.partitions[id],
                &broadcast,
                ds.key_strategy(),
                &ds.descriptors[id].mbr,
            )
        });
        let mut pairs: Vec<JoinPair> = parts.into_iter().flatten().collect();
        sort_join_pairs(&mut pairs);
        Ok(pairs)
    }
}

impl WindowSource for Engine {
    fn window(&self, q: &Rect) -> Result<Vec<SpatialObject>> {
        self.range(q)
    }
}

fn merge(parts: Vec<Vec<SpatialObject>>) -> Vec<SpatialObject> {
    let mut out: Vec<SpatialObject> = parts.into_iter().flatten().collect();
    sort_canonical(&mut out);
    out
}

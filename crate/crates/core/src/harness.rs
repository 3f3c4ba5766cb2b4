//! Benchmark harness: sequential latency runs, concurrent throughput runs,
//! and the learned-index versus R-tree build comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::learned::SplineIndex;
use crate::object::{sort_canonical, SpatialObject};
use crate::partition::PartitionedDataset;
use crate::query::knn_round_bound;
use crate::rtree::RTree;
use crate::runtime::{Engine, QuerySpec, ResultSet};
use crate::workload::{gen_workload, QueryType, Workload};

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    pub samples: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    /// Nearest-rank 99th percentile.
    pub p99_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        };
        let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
        Some(Self {
            samples: n,
            mean_ms: s.iter().sum::<f64>() / n as f64,
            median_ms: median,
            p99_ms: s[rank - 1],
        })
    }
}

/// One report line; every row carries the configuration it was run under.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchRow {
    pub mode: String,
    pub query_type: String,
    pub strategy: String,
    pub key: String,
    pub epsilon: usize,
    pub radix_bits: u32,
    pub partitions: usize,
    pub total: usize,
    pub selectivity: Option<f64>,
    pub skew: Option<String>,
    pub k: Option<usize>,
    pub count: usize,
    pub runs: usize,
    pub workers: usize,
    pub latency: Option<LatencyStats>,
    pub mean_results: Option<f64>,
    /// kNN rounds used, as rounds -> queries.
    pub rounds: BTreeMap<usize, usize>,
    pub round_bound: Option<usize>,
    pub jobs_per_minute: Option<f64>,
    pub elapsed_ms: Option<f64>,
    pub learned_build_ms: Option<f64>,
    pub rtree_build_ms: Option<f64>,
}

impl BenchRow {
    fn for_dataset(mode: &str, ds: &PartitionedDataset, workers: usize) -> Self {
        Self {
            mode: mode.into(),
            strategy: ds.config.partition_strategy.name().into(),
            key: ds.key_strategy().name(),
            epsilon: ds.config.epsilon,
            radix_bits: ds.config.radix_bits,
            partitions: ds.partitions.len(),
            total: ds.total,
            workers,
            ..Self::default()
        }
    }

    /// `Some(true)` when every kNN query stayed within the round bound.
    pub fn within_bound(&self) -> Option<bool> {
        let bound = self.round_bound?;
        Some(self.rounds.keys().all(|&r| r <= bound))
    }

    /// Fraction of kNN queries that finished in at most `rounds` rounds.
    pub fn fraction_within(&self, rounds: usize) -> Option<f64> {
        let total: usize = self.rounds.values().sum();
        (total > 0).then(|| {
            self.rounds.range(..=rounds).map(|(_, c)| c).sum::<usize>() as f64 / total as f64
        })
    }

    fn histogram(&self) -> String {
        self.rounds
            .iter()
            .map(|(r, c)| format!("{r}:{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const COLUMNS: [&str; 25] = [
    "mode",
    "query_type",
    "strategy",
    "key",
    "epsilon",
    "radix_bits",
    "partitions",
    "total",
    "selectivity",
    "skew",
    "k",
    "count",
    "runs",
    "workers",
    "mean_ms",
    "median_ms",
    "p99_ms",
    "mean_results",
    "rounds_hist",
    "round_bound",
    "within_bound",
    "jobs_per_minute",
    "elapsed_ms",
    "learned_build_ms",
    "rtree_build_ms",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn fmt_ms(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_default()
}

impl BenchRow {
    fn fields(&self) -> Vec<String> {
        let l = self.latency;
        vec![
            self.mode.clone(),
            self.query_type.clone(),
            self.strategy.clone(),
            self.key.clone(),
            self.epsilon.to_string(),
            self.radix_bits.to_string(),
            self.partitions.to_string(),
            self.total.to_string(),
            opt(self.selectivity),
            self.skew.clone().unwrap_or_default(),
            opt(self.k),
            self.count.to_string(),
            self.runs.to_string(),
            self.workers.to_string(),
            fmt_ms(l.map(|l| l.mean_ms)),
            fmt_ms(l.map(|l| l.median_ms)),
            fmt_ms(l.map(|l| l.p99_ms)),
            self.mean_results
                .map(|v| format!("{v:.2}"))
                .unwrap_or_default(),
            self.histogram(),
            opt(self.round_bound),
            opt(self.within_bound()),
            self.jobs_per_minute
                .map(|v| format!("{v:.1}"))
                .unwrap_or_default(),
            fmt_ms(self.elapsed_ms),
            fmt_ms(self.learned_build_ms),
            fmt_ms(self.rtree_build_ms),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Human-readable table of the non-empty columns.
    pub fn table(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(BenchRow::fields).collect();
        let used: Vec<usize> = (0..COLUMNS.len())
            .filter(|&c| cells.iter().any(|r| !r[c].is_empty()))
            .collect();
        let width = |c: usize| {
            cells
                .iter()
                .map(|r| r[c].len())
                .chain([COLUMNS[c].len()])
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = used.iter().map(|&c| width(c)).collect();
        let mut out = String::new();
        let line = |out: &mut String, vals: &mut dyn Iterator<Item = &str>| {
            let parts: Vec<String> = vals.zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &mut used.iter().map(|&c| COLUMNS[c]));
        for r in &cells {
            line(&mut out, &mut used.iter().map(|&c| r[c].as_str()));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = ::csv::Writer::from_writer(file);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.fields())?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Runs the workload's queries `runs` times in sequence and reports
/// per-query latency over all executions.
pub fn run_latency(engine: &Engine, w: &Workload) -> Result<BenchRow> {
    let ds = engine.dataset();
    let queries = gen_workload(ds, w)?;
    let mut samples = Vec::with_capacity(queries.len() * w.runs);
    let mut results = 0usize;
    let mut rounds = BTreeMap::new();
    for run in 0..w.runs {
        for q in &queries {
            let t = Instant::now();
            let res = engine.execute(q)?;
            samples.push(ms_since(t));
            if run == 0 {
                results += res.len();
                if let ResultSet::Neighbors { rounds: r, .. } = res {
                    *rounds.entry(r).or_insert(0) += 1;
                }
            }
        }
    }
    let is_knn = w.query_type == QueryType::Knn;
    Ok(BenchRow {
        query_type: w.query_type.name().into(),
        selectivity: (!is_knn && w.query_type != QueryType::Point).then_some(w.selectivity),
        skew: Some(w.skew.name().into()),
        k: is_knn.then_some(w.k),
        count: w.count,
        runs: w.runs,
        latency: LatencyStats::from_samples(&samples),
        mean_results: Some(results as f64 / queries.len() as f64),
        // Undefined for k = 1 and for degenerate extents.
        round_bound: is_knn
            .then(|| knn_round_bound(w.k, ds.total, &ds.global_mbr).ok())
            .flatten(),
        rounds,
        ..BenchRow::for_dataset("latency", ds, engine.workers())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub completed: usize,
    pub elapsed_ms: f64,
    pub jobs_per_minute: f64,
}

/// Dispatches `queries` over `submitters` concurrent threads sharing the
/// engine. Each submitter pulls the next unclaimed query until none remain.
pub fn run_throughput(
    engine: &Engine,
    queries: &[QuerySpec],
    submitters: usize,
) -> Result<Throughput> {
    if submitters == 0 {
        return Err(Error::InvalidParameter(
            "submitters must be at least 1".into(),
        ));
    }
    let next = AtomicUsize::new(0);
    let t = Instant::now();
    let outcomes: Vec<Result<usize>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..submitters)
            .map(|_| {
                s.spawn(|| {
                    let mut done = 0usize;
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(q) = queries.get(i) else { break };
                        engine.execute(q)?;
                        done += 1;
                    }
                    Ok(done)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("submitter panicked"))
            .collect()
    });
    let elapsed_ms = ms_since(t);
    let completed = outcomes.into_iter().sum::<Result<usize>>()?;
    Ok(Throughput {
        completed,
        elapsed_ms,
        jobs_per_minute: completed as f64 / (elapsed_ms.max(1e-9) / 60_000.0),
    })
}

/// Throughput run reported as a row.
pub fn throughput_row(
    engine: &Engine,
    queries: &[QuerySpec],
    submitters: usize,
) -> Result<BenchRow> {
    let t = run_throughput(engine, queries, submitters)?;
    let kinds: Vec<&str> = {
        let mut k: Vec<&str> = queries.iter().map(QuerySpec::kind).collect();
        k.sort_unstable();
        k.dedup();
        k
    };
    Ok(BenchRow {
        query_type: kinds.join("+"),
        count: t.completed,
        runs: 1,
        jobs_per_minute: Some(t.jobs_per_minute),
        elapsed_ms: Some(t.elapsed_ms),
        ..BenchRow::for_dataset("throughput", engine.dataset(), submitters)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildTimes {
    pub learned_ms: f64,
    pub rtree_ms: f64,
    pub partitions: usize,
}

impl BuildTimes {
    /// R-tree time over learned time; above 1 means the learned index is
    /// cheaper to build.
    pub fn speedup(&self) -> f64 {
        self.rtree_ms / self.learned_ms
    }
}

/// Times per-partition local index construction over the already sorted
/// partitions: spline plus radix table against an STR bulk load of the same
/// objects. Copies handed to the R-tree are made outside the timed region.
pub fn compare_builds(ds: &PartitionedDataset, fanout: usize) -> Result<BuildTimes> {
    let cfg = &ds.config;
    let mut learned_ms = 0.0;
    let mut rtree_ms = 0.0;
    let mut partitions = 0;
    for part in ds.partitions.iter().filter(|p| !p.objects.is_empty()) {
        partitions += 1;
        let t = Instant::now();
        let idx = SplineIndex::build(
            part.objects.iter().map(|o| o.key),
            cfg.epsilon,
            cfg.radix_bits,
        )?;
        learned_ms += ms_since(t);
        std::hint::black_box(idx);

        let copy = part.objects.clone();
        let t = Instant::now();
        let tree = RTree::bulk_load(copy, fanout)?;
        rtree_ms += ms_since(t);
        std::hint::black_box(tree);
    }
    Ok(BuildTimes {
        learned_ms,
        rtree_ms,
        partitions,
    })
}

pub fn build_row(ds: &PartitionedDataset, fanout: usize) -> Result<BenchRow> {
    let b = compare_builds(ds, fanout)?;
    Ok(BenchRow {
        query_type: "build".into(),
        count: b.partitions,
        runs: 1,
        learned_build_ms: Some(b.learned_ms),
        rtree_build_ms: Some(b.rtree_ms),
        ..BenchRow::for_dataset("build", ds, 1)
    })
}

/// Full-scan range baseline, canonically ordered.
pub fn scan_range(objects: &[SpatialObject], q: &Rect) -> Vec<SpatialObject> {
    let mut out: Vec<SpatialObject> = objects
        .iter()
        .filter(|o| q.contains_point(o.point()))
        .copied()
        .collect();
    sort_canonical(&mut out);
    out
}

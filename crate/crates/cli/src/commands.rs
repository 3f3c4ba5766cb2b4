use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::time::Instant;

use lilis_core::harness::{build_row, compare_builds, run_latency, throughput_row, BenchReport};
use lilis_core::storage::{
    gen_convex_polygons, gen_synthetic, ingest_csv, load_snapshot, parse_polygons, save_snapshot,
    snapshot_checksum, write_polygons, write_snapshot, CsvSchema,
};
use lilis_core::workload::{gen_workload, mixed_workload, QueryType, Skew, Workload};
use lilis_core::{
    Circle, Engine, EngineConfig, Error, KeyStrategy, KnnParams, PartitionedDataset, Point, Rect,
};

use crate::parse::{self, KeyChoice};
use crate::{BenchArgs, BuildArgs, GenArgs, QueryArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. }
            | Error::InvalidRect { .. }
            | Error::InvalidCircle(_)
            | Error::MortonRange { .. }
            | Error::InvalidKeyStrategy(_)
            | Error::InvalidParameter(_)
            | Error::KTooLarge { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn build(a: BuildArgs, seed: u64) -> Result<()> {
    let (objects, skipped) = match (&a.gen, &a.csv) {
        (Some(spec), _) => (
            gen_synthetic(&lilis_core::storage::SyntheticSpec { seed, ..*spec })?,
            0,
        ),
        (None, Some(path)) => {
            let schema = CsvSchema {
                delimiter: a.delimiter,
                x_column: a.x,
                y_column: a.y,
                payload_column: a.payload,
                has_header: !a.no_header,
            };
            let got = ingest_csv(path, &schema)?;
            (got.objects, got.skipped)
        }
        (None, None) => unreachable!("clap requires an input"),
    };
    let key_strategy = match a.key {
        KeyChoice::X => KeyStrategy::AxisX,
        KeyChoice::Y => KeyStrategy::AxisY,
        KeyChoice::ZOrder(bits) => {
            let mbr =
                Rect::bounding(objects.iter().map(|o| o.point())).ok_or(Error::EmptyDataset)?;
            KeyStrategy::zorder_for(bits, &mbr)?
        }
    };
    let config = EngineConfig {
        workers: a.workers,
        key_strategy,
        epsilon: a.epsilon,
        radix_bits: a.radix_bits,
        partition_strategy: a.strategy,
        sample_rate: a.sample_rate,
        seed,
    };
    config.validate()?;

    let t = Instant::now();
    let ds = PartitionedDataset::build(objects, &config)?;
    let build_ms = ms(t);
    print_summary(&ds, skipped, build_ms);

    if a.compare_rtree {
        let b = compare_builds(&ds, a.fanout)?;
        println!(
            "local index build  learned {:.3} ms, str r-tree {:.3} ms (fanout {}), ratio {:.2}x",
            b.learned_ms,
            b.rtree_ms,
            a.fanout,
            b.speedup()
        );
    }
    let bytes = write_snapshot(&ds);
    println!(
        "snapshot checksum  {:08x} ({} bytes)",
        snapshot_checksum(&bytes),
        bytes.len()
    );
    if let Some(path) = &a.output {
        save_snapshot(&ds, path)?;
        println!("wrote              {}", path.display());
    }
    Ok(())
}

fn print_summary(ds: &PartitionedDataset, skipped: usize, build_ms: f64) {
    let cfg = &ds.config;
    let regular: Vec<usize> = ds
        .descriptors
        .iter()
        .filter(|d| !d.overflow)
        .map(|d| d.count)
        .collect();
    let non_empty = regular.iter().filter(|&&c| c > 0).count();
    let m = ds.global_mbr;
    println!("objects            {} ({} rows skipped)", ds.total, skipped);
    println!(
        "extent             [{}, {}] x [{}, {}]",
        m.x_lo, m.x_hi, m.y_lo, m.y_hi
    );
    println!("strategy           {:?}", cfg.partition_strategy);
    println!("key                {}", ds.key_strategy().name());
    println!("epsilon            {}", cfg.epsilon);
    println!("radix bits         {}", cfg.radix_bits);
    println!(
        "partitions         {} + overflow ({} non-empty)",
        regular.len(),
        non_empty
    );
    println!(
        "partition sizes    max {}, min {}",
        regular.iter().max().copied().unwrap_or(0),
        regular.iter().min().copied().unwrap_or(0)
    );
    println!(
        "overflow           {}",
        ds.descriptors[ds.overflow_id()].count
    );
    let index_bytes: usize = ds
        .partitions
        .iter()
        .filter_map(|p| p.index.as_ref())
        .map(|i| i.size_bytes())
        .sum();
    println!(
        "knots              {} ({} index bytes)",
        ds.knot_count(),
        index_bytes
    );
    println!("build              {build_ms:.3} ms");
}

fn point_arg(s: &str) -> Result<Point> {
    let v = parse::coords(s, 2).map_err(CliError::Usage)?;
    Ok(Point::new(v[0], v[1]))
}

pub fn query(a: QueryArgs) -> Result<()> {
    let ds = load_snapshot(&a.snapshot)?;
    let engine = Engine::new(ds, a.workers)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let t = Instant::now();
    let count;
    if let Some(p) = &a.point {
        let found = engine.point(point_arg(p)?)?;
        let elapsed = ms(t);
        writeln!(out, "{found}")?;
        count = found as usize;
        out.flush()?;
        eprintln!("{count} result(s) in {elapsed:.3} ms");
        return Ok(());
    }
    if let Some(r) = &a.range {
        let hits = engine.range(&parse::rect(r).map_err(CliError::Usage)?)?;
        let elapsed = ms(t);
        for o in &hits {
            writeln!(out, "{},{},{}", o.x, o.y, o.payload)?;
        }
        count = hits.len();
        out.flush()?;
        eprintln!("{count} result(s) in {elapsed:.3} ms");
        return Ok(());
    }
    if let Some(c) = &a.circle {
        let v = parse::coords(c, 3).map_err(CliError::Usage)?;
        let circle = Circle::try_new(Point::new(v[0], v[1]), v[2])?;
        let hits = engine.circle(&circle)?;
        let elapsed = ms(t);
        for o in &hits {
            writeln!(out, "{},{},{}", o.x, o.y, o.payload)?;
        }
        out.flush()?;
        eprintln!("{} result(s) in {elapsed:.3} ms", hits.len());
        return Ok(());
    }
    if let Some(q) = &a.knn {
        let res = engine.knn(point_arg(q)?, &KnnParams::new(a.k))?;
        let elapsed = ms(t);
        for n in &res.neighbors {
            writeln!(
                out,
                "{},{},{},{}",
                n.distance, n.object.x, n.object.y, n.object.payload
            )?;
        }
        out.flush()?;
        eprintln!(
            "{} result(s) in {elapsed:.3} ms, {} round(s)",
            res.neighbors.len(),
            res.rounds
        );
        return Ok(());
    }
    if let Some(path) = &a.join {
        let parsed = parse_polygons(path)?;
        if !parsed.invalid_lines.is_empty() {
            eprintln!("skipped invalid polygon lines {:?}", parsed.invalid_lines);
        }
        let t = Instant::now();
        let pairs = engine.join(&parsed.polygons)?;
        let elapsed = ms(t);
        for p in &pairs {
            writeln!(
                out,
                "{},{},{},{}",
                p.polygon_id, p.object.x, p.object.y, p.object.payload
            )?;
        }
        out.flush()?;
        eprintln!("{} pair(s) in {elapsed:.3} ms", pairs.len());
        return Ok(());
    }
    unreachable!("clap requires one query")
}

pub fn bench(a: BenchArgs, seed: u64) -> Result<()> {
    let skew: Skew = a.skew.parse()?;
    let mixed = a.query_type.eq_ignore_ascii_case("mixed");
    if mixed && !a.throughput {
        return Err(CliError::Usage("--type mixed needs --throughput".into()));
    }
    let query_type: QueryType = if mixed {
        QueryType::Point
    } else {
        a.query_type.parse()?
    };
    let ds = load_snapshot(&a.snapshot)?;
    let engine = Engine::new(ds, a.workers)?;
    let base = Workload {
        query_type,
        selectivity: a.selectivity,
        skew,
        k: a.k.0[0],
        count: a.count,
        runs: a.runs,
        seed,
    };
    base.validate()?;

    let mut report = BenchReport::default();
    if a.throughput {
        let queries = if mixed {
            mixed_workload(engine.dataset(), a.count, a.selectivity, seed)?
        } else {
            gen_workload(engine.dataset(), &Workload { runs: 1, ..base })?
        };
        let mut row = throughput_row(&engine, &queries, a.workers)?;
        row.selectivity = Some(a.selectivity);
        row.skew = Some(skew.name().into());
        report.rows.push(row);
    } else if query_type == QueryType::Knn {
        for &k in &a.k.0 {
            report
                .rows
                .push(run_latency(&engine, &Workload { k, ..base })?);
        }
    } else {
        report.rows.push(run_latency(&engine, &base)?);
    }
    if a.compare_build {
        report.rows.push(build_row(engine.dataset(), a.fanout)?);
    }

    print!("{}", report.table());
    for row in report.rows.iter().filter(|r| r.round_bound.is_some()) {
        println!(
            "knn k={} rounds {} bound {} {}",
            row.k.unwrap_or(0),
            row.rounds.keys().max().copied().unwrap_or(0),
            row.round_bound.unwrap_or(0),
            if row.within_bound() == Some(true) {
                "ok"
            } else {
                "EXCEEDED"
            }
        );
    }
    if let Some(path) = &a.report {
        report.write_csv(path)?;
        eprintln!("report written to {}", path.display());
    }
    Ok(())
}

pub fn gen(a: GenArgs, seed: u64) -> Result<()> {
    let text = if let Some(spec) = a.gen {
        let spec = lilis_core::storage::SyntheticSpec {
            seed,
            domain: a.domain,
            ..spec
        };
        let objects = gen_synthetic(&spec)?;
        let mut s = String::with_capacity(objects.len() * 40);
        s.push_str("x,y,id\n");
        for o in &objects {
            s.push_str(&format!("{},{},{}\n", o.x, o.y, o.payload));
        }
        s
    } else {
        let count = a.polygons.expect("clap requires points or polygons");
        if !(a.radius > 0.0 && a.radius.is_finite()) {
            return Err(CliError::Usage(format!(
                "radius {} must be positive",
                a.radius
            )));
        }
        write_polygons(&gen_convex_polygons(count, &a.domain, a.radius, seed))
    };
    fs::write(&a.output, text)?;
    Ok(())
}

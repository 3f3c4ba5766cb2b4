//! `lilis`: build, query and benchmark partitioned learned spatial indexes.
//!
//! Exit status is 0 on success, 1 for data errors (unreadable input, corrupt
//! snapshot) and 2 for usage errors (bad flags or query geometry).

mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use lilis_core::config::{DEFAULT_SAMPLE_RATE, DEFAULT_SEED, DEFAULT_WORKERS};
use lilis_core::learned::{DEFAULT_EPSILON, DEFAULT_RADIX_BITS};
use lilis_core::query::DEFAULT_K;
use lilis_core::workload::{DEFAULT_COUNT, DEFAULT_RUNS, DEFAULT_SELECTIVITY};

#[derive(Debug, Parser)]
#[command(
    name = "lilis",
    version,
    about = "Partitioned learned spatial index engine"
)]
struct Cli {
    /// Seed for sampling, data generation and workloads.
    #[arg(long, global = true, env = "LILIS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest or generate points, partition and index them.
    Build(BuildArgs),
    /// Run one query against a snapshot.
    Query(QueryArgs),
    /// Benchmark a snapshot.
    Bench(BenchArgs),
    /// Write synthetic points (CSV) or polygons.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["gen", "csv"])))]
pub struct BuildArgs {
    /// Synthetic input: uniform:N, gaussian:N[:clusters[:sigma]] or skewed:N[:s].
    #[arg(long, value_parser = parse::gen_spec)]
    gen: Option<lilis_core::storage::SyntheticSpec>,
    /// Point file to ingest.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long, default_value_t = 1)]
    y: usize,
    /// Payload column; defaults to the row ordinal.
    #[arg(long)]
    payload: Option<usize>,
    #[arg(long, default_value = ",", value_parser = parse::delimiter)]
    delimiter: u8,
    #[arg(long)]
    no_header: bool,
    /// kdtree[:leaf], quadtree[:leaf], fixed:NxM, adaptive:NxM or rtree[:fanout].
    #[arg(long, default_value = "kdtree", value_parser = parse::strategy)]
    strategy: lilis_core::PartitionStrategy,
    /// x, y or zorder[:bits].
    #[arg(long, default_value = "x", value_parser = parse::key)]
    key: parse::KeyChoice,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: usize,
    #[arg(long, default_value_t = DEFAULT_RADIX_BITS)]
    radix_bits: u32,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: f64,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    workers: usize,
    /// Also time an STR R-tree bulk load over the same partitions.
    #[arg(long)]
    compare_rtree: bool,
    #[arg(long, default_value_t = lilis_core::rtree::DEFAULT_FANOUT)]
    fanout: usize,
    /// Snapshot output path.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("q").required(true).args(["point", "range", "circle", "knn", "join"])))]
pub struct QueryArgs {
    snapshot: PathBuf,
    /// x,y
    #[arg(long)]
    point: Option<String>,
    /// x_lo,y_lo,x_hi,y_hi
    #[arg(long)]
    range: Option<String>,
    /// x,y,radius
    #[arg(long)]
    circle: Option<String>,
    /// x,y
    #[arg(long)]
    knn: Option<String>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Polygon file, one `id;x,y x,y ...` per line.
    #[arg(long)]
    join: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    workers: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    snapshot: PathBuf,
    /// point, range, circle, knn, join, or mixed (throughput only).
    #[arg(long = "type", default_value = "range")]
    query_type: String,
    #[arg(long, default_value_t = DEFAULT_SELECTIVITY)]
    selectivity: f64,
    /// skewed (centres drawn from the data) or uniform.
    #[arg(long, default_value = "skewed")]
    skew: String,
    /// Comma-separated k values for kNN.
    #[arg(long, default_value_t = parse::KList(vec![DEFAULT_K]), value_parser = parse::k_list)]
    k: parse::KList,
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    /// Dispatch `count` queries over `workers` concurrent submitters.
    #[arg(long)]
    throughput: bool,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    workers: usize,
    /// Add a learned-index versus R-tree build row.
    #[arg(long)]
    compare_build: bool,
    #[arg(long, default_value_t = lilis_core::rtree::DEFAULT_FANOUT)]
    fanout: usize,
    /// Comma-separated report file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("what").required(true).args(["gen", "polygons"])))]
pub struct GenArgs {
    /// Points: uniform:N, gaussian:N[:clusters[:sigma]] or skewed:N[:s].
    #[arg(long, value_parser = parse::gen_spec)]
    gen: Option<lilis_core::storage::SyntheticSpec>,
    /// Number of convex polygons.
    #[arg(long)]
    polygons: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    radius: f64,
    /// x_lo,y_lo,x_hi,y_hi
    #[arg(long, default_value = "0,0,1,1", value_parser = parse::rect)]
    domain: lilis_core::Rect,
    #[arg(short, long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Build(a) => commands::build(a, cli.seed),
        Command::Query(a) => commands::query(a),
        Command::Bench(a) => commands::bench(a, cli.seed),
        Command::Gen(a) => commands::gen(a, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

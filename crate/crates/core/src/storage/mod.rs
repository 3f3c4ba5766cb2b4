//! Data in and out: CSV points, polygon files, synthetic generators and the
//! binary snapshot of a built dataset.

pub mod csv;
pub mod polygons;
pub mod snapshot;
pub mod synthetic;

pub use self::csv::{ingest_csv, CsvSchema, Ingested};
pub use polygons::{parse_polygons, parse_polygons_str, write_polygons, ParsedPolygons};
pub use snapshot::{
    load_snapshot, read_snapshot, save_snapshot, snapshot_checksum, write_snapshot, MAGIC, VERSION,
};
pub use synthetic::{gen_convex_polygons, gen_synthetic, Distribution, SyntheticSpec};

//! Partition-parallel spatial query engine with learned per-partition
//! indexes.
//!
//! A dataset is split into spatial partitions by a sample-driven global
//! partitioner; each partition is sorted by a 1-D key and indexed by an
//! error-bounded spline with a radix table. Queries run in two phases: a
//! global filter over partition bounds, then exact local searches on the
//! surviving partitions.
//!
//! ```
//! use lilis_core::{Engine, EngineConfig, Point, Rect};
//! use lilis_core::storage::{gen_synthetic, SyntheticSpec};
//!
//! let objects = gen_synthetic(&SyntheticSpec::uniform(10_000, 7)).unwrap();
//! let engine = Engine::build(objects, &EngineConfig::default()).unwrap();
//! let hits = engine.range(&Rect::new(0.1, 0.1, 0.2, 0.2)).unwrap();
//! assert!(!hits.is_empty());
//! assert!(!engine.point(Point::new(2.0, 2.0)).unwrap());
//! ```

pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod learned;
pub mod object;
pub mod partition;
pub mod query;
pub mod rtree;
pub mod runtime;
pub mod storage;
pub mod workload;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use geometry::{Circle, Point, Polygon, Rect};
pub use learned::{KeyStrategy, SplineIndex};
pub use object::SpatialObject;
pub use partition::{GridDescriptor, Partition, PartitionStrategy, PartitionedDataset};
pub use query::{JoinPair, KnnParams, KnnResult, Neighbor};
pub use rtree::RTree;
pub use runtime::{Engine, QuerySpec, ResultSet};

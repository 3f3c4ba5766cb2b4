//! Shared fixtures for the criterion benchmarks under `benches/`.

use lilis_core::storage::{gen_synthetic, SyntheticSpec};
use lilis_core::{EngineConfig, PartitionedDataset, SpatialObject};

/// Uniform points over the unit square.
pub fn uniform(n: usize) -> Vec<SpatialObject> {
    gen_synthetic(&SyntheticSpec::uniform(n, 0xBE7C)).expect("valid spec")
}

pub fn partitioned(n: usize) -> PartitionedDataset {
    PartitionedDataset::build(uniform(n), &EngineConfig::default()).expect("dataset builds")
}

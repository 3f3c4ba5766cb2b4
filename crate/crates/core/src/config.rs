use crate::error::{Error, Result};
use crate::learned::{KeyStrategy, DEFAULT_EPSILON, DEFAULT_RADIX_BITS};
use crate::partition::PartitionStrategy;

pub const DEFAULT_WORKERS: usize = 8;
pub const DEFAULT_SAMPLE_RATE: f64 = 0.01;
pub const DEFAULT_SEED: u64 = 42;

/// Build and execution parameters of an engine.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub workers: usize,
    pub key_strategy: KeyStrategy,
    pub epsilon: usize,
    pub radix_bits: u32,
    pub partition_strategy: PartitionStrategy,
    pub sample_rate: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            workers: DEFAULT_WORKERS,
            key_strategy: KeyStrategy::AxisX,
            epsilon: DEFAULT_EPSILON,
            radix_bits: DEFAULT_RADIX_BITS,
            partition_strategy: PartitionStrategy::KDTree { max_leaf: None },
            sample_rate: DEFAULT_SAMPLE_RATE,
            seed: DEFAULT_SEED,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.epsilon == 0 {
            return Err(Error::InvalidParameter("epsilon must be at least 1".into()));
        }
        if !(1..=crate::learned::radix::MAX_RADIX_BITS).contains(&self.radix_bits) {
            return Err(Error::InvalidParameter(format!(
                "radix bits {} not in [1, 30]",
                self.radix_bits
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate {} not in (0, 1]",
                self.sample_rate
            )));
        }
        self.key_strategy.validate()?;
        self.partition_strategy.validate()
    }
}

//! Per-partition learned index: key projection, greedy spline fitting, the
//! radix table over spline knots and corridor prediction.

pub mod index;
pub mod key;
pub mod radix;
pub mod spline;

pub use index::{lower_bound_with, Prediction, SplineIndex, DEFAULT_EPSILON, DEFAULT_RADIX_BITS};
pub use key::{morton_encode, project_key, string_to_key, KeyStrategy, DEFAULT_ZORDER_BITS};
pub use radix::{build_radix_table, RadixTable};
pub use spline::{build_spline, SplineBuilder, SplineKnot};

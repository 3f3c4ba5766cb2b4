use crate::error::{Error, Result};
use crate::learned::radix::{build_radix_table, RadixTable};
use crate::learned::spline::{interpolate, SplineBuilder, SplineKnot};

pub const DEFAULT_EPSILON: usize = 32;
pub const DEFAULT_RADIX_BITS: u32 = 10;

/// Position estimate for a key plus the inclusive search window around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub estimate: f64,
    pub lo: usize,
    pub hi: usize,
}

/// Learned model of one key-sorted array: spline knots over
/// `(distinct key, first position)` and a radix table over the knots.
///
/// `radix` is `None` when the array holds a single distinct key.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineIndex {
    pub knots: Vec<SplineKnot>,
    pub epsilon: usize,
    pub radix: Option<RadixTable>,
    /// Length of the indexed array, duplicates included.
    pub len: usize,
}

impl SplineIndex {
    /// Builds the index over keys in non-decreasing order. Duplicate keys are
    /// fitted at their first occurrence.
    pub fn build<I>(sorted_keys: I, epsilon: usize, radix_bits: u32) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
    {
        if epsilon < 1 {
            return Err(Error::InvalidParameter("epsilon must be at least 1".into()));
        }
        let mut builder = SplineBuilder::new(epsilon);
        let mut last: Option<f64> = None;
        let mut len = 0usize;
        for (pos, key) in sorted_keys.into_iter().enumerate() {
            if !key.is_finite() {
                return Err(Error::SplineInput(format!("non-finite key at {pos}")));
            }
            match last {
                Some(prev) if key < prev => {
                    return Err(Error::SplineInput(format!("keys decrease at {pos}")))
                }
                Some(prev) if key == prev => {}
                _ => builder.push(key, pos),
            }
            last = Some(key);
            len = pos + 1;
        }
        if len == 0 {
            return Err(Error::SplineInput("no keys".into()));
        }
        Self::from_knots(builder.finish(), epsilon, radix_bits, len)
    }

    pub fn from_knots(
        knots: Vec<SplineKnot>,
        epsilon: usize,
        radix_bits: u32,
        len: usize,
    ) -> Result<Self> {
        let radix = if knots.len() >= 2 {
            Some(build_radix_table(&knots, radix_bits)?)
        } else {
            None
        };
        Ok(Self {
            knots,
            epsilon,
            radix,
            len,
        })
    }

    pub fn min_key(&self) -> f64 {
        self.knots[0].key
    }

    pub fn max_key(&self) -> f64 {
        self.knots[self.knots.len() - 1].key
    }

    /// Index `i` of the segment `knots[i]..knots[i + 1]` bracketing `key`,
    /// located through the radix table. Requires at least two knots.
    #[inline]
    pub fn segment(&self, key: f64) -> usize {
        let n = self.knots.len();
        debug_assert!(n >= 2);
        let (lo, hi) = match &self.radix {
            Some(r) => r.bounds(key),
            None => (0, n - 1),
        };
        let hi = hi.min(n - 1);
        let upper = lo + self.knots[lo..=hi].partition_point(|k| k.key <= key);
        upper.saturating_sub(1).min(n - 2)
    }

    /// Same as [`segment`](Self::segment) but by binary search over all
    /// knots, bypassing the radix table.
    pub fn segment_by_search(&self, key: f64) -> usize {
        let n = self.knots.len();
        let upper = self.knots.partition_point(|k| k.key <= key);
        upper.saturating_sub(1).min(n - 2)
    }

    pub fn predict(&self, key: f64) -> Prediction {
        let last = self.len - 1;
        let estimate = if self.knots.len() == 1 || key <= self.min_key() {
            if key < self.min_key() {
                0.0
            } else {
                self.knots[0].position as f64
            }
        } else if key > self.max_key() {
            last as f64
        } else {
            let i = self.segment(key);
            interpolate(&self.knots[i], &self.knots[i + 1], key)
        };
        let eps = self.epsilon as f64;
        let lo = (estimate.floor() - eps).max(0.0) as usize;
        let hi = ((estimate.ceil() + eps) as usize).min(last);
        Prediction {
            estimate,
            lo: lo.min(last),
            hi,
        }
    }

    pub fn size_bytes(&self) -> usize {
        self.knots.len() * std::mem::size_of::<SplineKnot>()
            + self.radix.as_ref().map_or(0, |r| r.table.len() * 4)
    }
}

/// First index in `keys` whose key is `>= key`, seeded with the learned
/// window and widened exponentially when the window misses.
pub fn lower_bound_with<F>(len: usize, key_at: F, pred: Prediction, key: f64) -> usize
where
    F: Fn(usize) -> f64,
{
    if len == 0 {
        return 0;
    }
    let mut lo = pred.lo;
    let mut hi = pred.hi + 1; // exclusive
                              // widen left until key_at(lo - 1) < key
    let mut step = 1usize;
    while lo > 0 && key_at(lo) >= key {
        let next = lo.saturating_sub(step);
        hi = lo + 1;
        lo = next;
        step *= 2;
    }
    step = 1;
    while hi < len && key_at(hi - 1) < key {
        lo = hi - 1;
        hi = (hi + step).min(len);
        step *= 2;
    }
    // first index in [lo, hi) with key >= target; hi is a valid answer
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if key_at(mid) < key {
            a = mid + 1;
        } else {
            b = mid;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn first_positions(keys: &[f64]) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        for (i, &k) in keys.iter().enumerate() {
            if i == 0 || keys[i - 1] != k {
                out.push((k, i));
            }
        }
        out
    }

    #[test]
    fn midpoint_interpolation() {
        let knots = vec![
            SplineKnot {
                key: 0.0,
                position: 0,
            },
            SplineKnot {
                key: 100.0,
                position: 50,
            },
        ];
        let idx = SplineIndex::from_knots(knots, 4, 10, 51).unwrap();
        assert_eq!(idx.predict(50.0).estimate, 25.0);
        let p0 = idx.predict(0.0);
        assert_eq!((p0.estimate, p0.lo), (0.0, 0));
        let above = idx.predict(1e9);
        assert_eq!((above.estimate, above.hi), (50.0, 50));
        let below = idx.predict(-1.0);
        assert_eq!((below.estimate, below.lo), (0.0, 0));
    }

    #[test]
    fn single_key_index() {
        let idx = SplineIndex::build([7.0; 20], 4, 10).unwrap();
        assert_eq!(idx.knots.len(), 1);
        assert!(idx.radix.is_none());
        let p = idx.predict(7.0);
        assert_eq!((p.lo, p.hi), (0, 4));
    }

    #[test]
    fn rejects_unsorted_and_empty() {
        assert!(SplineIndex::build([1.0, 0.5], 4, 10).is_err());
        assert!(SplineIndex::build(std::iter::empty(), 4, 10).is_err());
        assert!(SplineIndex::build([1.0, f64::NAN], 4, 10).is_err());
        assert!(SplineIndex::build([1.0], 0, 10).is_err());
    }

    #[test]
    fn corridor_contains_every_first_position() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut keys: Vec<f64> = (0..100_000)
            .map(|_| {
                let u: f64 = rng.random();
                // heavy duplication plus a skewed tail
                (u * u * 5_000.0).round() / 3.0
            })
            .collect();
        keys.sort_by(f64::total_cmp);
        for eps in [1usize, 8, 32, 128] {
            let idx = SplineIndex::build(keys.iter().copied(), eps, 10).unwrap();
            for (k, first) in first_positions(&keys) {
                let p = idx.predict(k);
                assert!(
                    p.lo <= first && first <= p.hi,
                    "eps {eps} key {k}: {p:?} vs {first}"
                );
            }
        }
    }

    #[test]
    fn radix_segment_matches_binary_search() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut keys: Vec<f64> = (0..50_000)
            .map(|_| rng.random::<f64>().powi(4) * 1e6)
            .collect();
        keys.sort_by(f64::total_cmp);
        for bits in [1u32, 4, 10, 18] {
            let idx = SplineIndex::build(keys.iter().copied(), 16, bits).unwrap();
            for _ in 0..10_000 {
                let k = rng.random_range(-10.0..1.1e6);
                assert_eq!(
                    idx.segment(k),
                    idx.segment_by_search(k),
                    "bits {bits} key {k}"
                );
            }
            for &k in keys.iter().step_by(97) {
                assert_eq!(idx.segment(k), idx.segment_by_search(k));
            }
        }
    }

    proptest! {
        #[test]
        fn lower_bound_matches_partition_point(
            mut keys in prop::collection::vec(0u32..200, 1..400),
            target in 0u32..210,
            eps in 1usize..8,
        ) {
            keys.sort_unstable();
            let keys: Vec<f64> = keys.into_iter().map(f64::from).collect();
            let idx = SplineIndex::build(keys.iter().copied(), eps, 4).unwrap();
            let t = f64::from(target);
            let got = lower_bound_with(keys.len(), |i| keys[i], idx.predict(t), t);
            prop_assert_eq!(got, keys.partition_point(|&k| k < t));
        }

        #[test]
        fn build_is_deterministic(mut keys in prop::collection::vec(-1e3f64..1e3, 1..300)) {
            keys.sort_by(f64::total_cmp);
            let a = SplineIndex::build(keys.iter().copied(), 3, 6).unwrap();
            let b = SplineIndex::build(keys.iter().copied(), 3, 6).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

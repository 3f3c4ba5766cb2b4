//! One-pass greedy spline fitting with a position error corridor.
//!
//! The corridor is anchored at the last emitted knot and bounded by the two
//! rays through `(key, pos + eps)` and `(key, pos - eps)` of the points seen
//! since. A point whose own ray leaves the corridor closes the segment: the
//! previous point becomes a knot and the corridor restarts from it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineKnot {
    pub key: f64,
    pub position: usize,
}

#[derive(Debug, Clone, Copy)]
struct Coord {
    x: f64,
    y: f64,
}

#[derive(PartialEq)]
enum Orientation {
    Collinear,
    Clockwise,
    CounterClockwise,
}

fn orientation(dx1: f64, dy1: f64, dx2: f64, dy2: f64) -> Orientation {
    let expr = dy1 * dx2 - dy2 * dx1;
    if expr > 0.0 {
        Orientation::Clockwise
    } else if expr < 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Collinear
    }
}

/// Streaming corridor fitter. Feed `(key, position)` pairs with strictly
/// increasing keys, then call [`finish`](Self::finish).
#[derive(Debug)]
pub struct SplineBuilder {
    epsilon: f64,
    knots: Vec<SplineKnot>,
    prev: Option<SplineKnot>,
    upper: Coord,
    lower: Coord,
    seen: usize,
}

impl SplineBuilder {
    pub fn new(epsilon: usize) -> Self {
        Self {
            epsilon: epsilon as f64,
            knots: Vec::new(),
            prev: None,
            upper: Coord { x: 0.0, y: 0.0 },
            lower: Coord { x: 0.0, y: 0.0 },
            seen: 0,
        }
    }

    pub fn push(&mut self, key: f64, position: usize) {
        let pos = position as f64;
        let upper_y = pos + self.epsilon;
        let lower_y = pos - self.epsilon;
        match self.seen {
            0 => self.knots.push(SplineKnot { key, position }),
            1 => {
                self.upper = Coord { x: key, y: upper_y };
                self.lower = Coord { x: key, y: lower_y };
            }
            _ => {
                let base = *self.knots.last().expect("first pair is a knot");
                let base_pos = base.position as f64;
                let up_dx = self.upper.x - base.key;
                let up_dy = self.upper.y - base_pos;
                let lo_dx = self.lower.x - base.key;
                let lo_dy = self.lower.y - base_pos;
                let dx = key - base.key;
                let dy = pos - base_pos;

                if orientation(up_dx, up_dy, dx, dy) != Orientation::Clockwise
                    || orientation(lo_dx, lo_dy, dx, dy) != Orientation::CounterClockwise
                {
                    self.knots.push(self.prev.expect("seen >= 2"));
                    self.upper = Coord { x: key, y: upper_y };
                    self.lower = Coord { x: key, y: lower_y };
                } else {
                    if orientation(up_dx, up_dy, dx, upper_y - base_pos) == Orientation::Clockwise {
                        self.upper = Coord { x: key, y: upper_y };
                    }
                    if orientation(lo_dx, lo_dy, dx, lower_y - base_pos)
                        == Orientation::CounterClockwise
                    {
                        self.lower = Coord { x: key, y: lower_y };
                    }
                }
            }
        }
        self.prev = Some(SplineKnot { key, position });
        self.seen += 1;
    }

    pub fn finish(mut self) -> Vec<SplineKnot> {
        if let (Some(prev), Some(last)) = (self.prev, self.knots.last()) {
            if last.key != prev.key {
                self.knots.push(prev);
            }
        }
        self.knots
    }
}

/// Fits knots to `(key, position)` pairs so that linear interpolation between
/// consecutive knots is within `epsilon` of every pair's position.
///
/// Keys must be strictly increasing and positions non-decreasing.
pub fn build_spline(pairs: &[(f64, usize)], epsilon: usize) -> Result<Vec<SplineKnot>> {
    if epsilon < 1 {
        return Err(Error::SplineInput("epsilon must be at least 1".into()));
    }
    if pairs.is_empty() {
        return Err(Error::SplineInput("no pairs".into()));
    }
    if pairs.iter().any(|(k, _)| !k.is_finite()) {
        return Err(Error::SplineInput("non-finite key".into()));
    }
    for w in pairs.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::SplineInput(format!(
                "keys not strictly increasing: {} then {}",
                w[0].0, w[1].0
            )));
        }
        if w[0].1 > w[1].1 {
            return Err(Error::SplineInput("positions decrease".into()));
        }
    }
    let mut b = SplineBuilder::new(epsilon);
    for &(k, p) in pairs {
        b.push(k, p);
    }
    Ok(b.finish())
}

/// Linear interpolation of the position of `key` on the segment `a`-`b`.
#[inline]
pub fn interpolate(a: &SplineKnot, b: &SplineKnot, key: f64) -> f64 {
    let (pa, pb) = (a.position as f64, b.position as f64);
    if b.key == a.key {
        return pa;
    }
    pa + (key - a.key) * (pb - pa) / (b.key - a.key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Exhaustive check of every pair against the fitted knots, using a
    /// plain linear search for the bracketing segment.
    fn max_interpolation_error(pairs: &[(f64, usize)], knots: &[SplineKnot]) -> f64 {
        pairs
            .iter()
            .map(|&(k, p)| {
                let i = knots
                    .iter()
                    .rposition(|kn| kn.key <= k)
                    .unwrap()
                    .min(knots.len().saturating_sub(2));
                let est = if knots.len() == 1 {
                    knots[0].position as f64
                } else {
                    interpolate(&knots[i], &knots[i + 1], k)
                };
                (est - p as f64).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn collinear_data_needs_two_knots() {
        let pairs: Vec<_> = (0..10).map(|i| (i as f64, i)).collect();
        let knots = build_spline(&pairs, 1).unwrap();
        assert_eq!(knots.len(), 2);
        assert_eq!(
            knots[0],
            SplineKnot {
                key: 0.0,
                position: 0
            }
        );
        assert_eq!(
            knots[1],
            SplineKnot {
                key: 9.0,
                position: 9
            }
        );
    }

    #[test]
    fn single_pair_single_knot() {
        let knots = build_spline(&[(5.0, 0)], 32).unwrap();
        assert_eq!(
            knots,
            vec![SplineKnot {
                key: 5.0,
                position: 0
            }]
        );
    }

    #[test]
    fn two_pairs_two_knots() {
        let knots = build_spline(&[(1.0, 0), (2.0, 7)], 4).unwrap();
        assert_eq!(knots.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_spline(&[(1.0, 0), (1.0, 1)], 4).is_err());
        assert!(build_spline(&[(2.0, 0), (1.0, 1)], 4).is_err());
        assert!(build_spline(&[(1.0, 0)], 0).is_err());
        assert!(build_spline(&[], 4).is_err());
    }

    #[test]
    fn clustered_keys_respect_error_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut keys: Vec<f64> = (0..10_000)
            .map(|i| {
                let centre = (i % 7) as f64 * 100.0;
                centre + rng.random::<f64>().powi(3) * 5.0
            })
            .collect();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let pairs: Vec<_> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let knots = build_spline(&pairs, 32).unwrap();
        assert!(knots.len() < pairs.len());
        assert!(max_interpolation_error(&pairs, &knots) <= 32.0 + 1e-6);
        assert_eq!(knots.first().unwrap().position, 0);
        assert_eq!(knots.last().unwrap().position, pairs.len() - 1);
    }

    #[test]
    fn knots_subset_of_keys_and_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut pos = 0usize;
        let pairs: Vec<_> = (0..5_000)
            .map(|i| {
                pos += rng.random_range(1..20);
                (i as f64 * 0.5 + rng.random::<f64>() * 0.1, pos)
            })
            .collect();
        for eps in [1usize, 8, 64] {
            let a = build_spline(&pairs, eps).unwrap();
            let b = build_spline(&pairs, eps).unwrap();
            assert_eq!(a, b);
            for k in &a {
                assert!(pairs
                    .iter()
                    .any(|&(key, p)| key == k.key && p == k.position));
            }
            assert!(a.windows(2).all(|w| w[0].key < w[1].key));
            assert!(max_interpolation_error(&pairs, &a) <= eps as f64 + 1e-6);
        }
    }
}

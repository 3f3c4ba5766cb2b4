//! Seeded synthetic point sets and polygons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Zipf};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect};
use crate::object::SpatialObject;

/// Number of Zipf ranks the skewed x axis is bucketed into.
const ZIPF_RANKS: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    /// `sigma` is relative to the domain's width and height.
    Gaussian {
        clusters: usize,
        sigma: f64,
    },
    /// Zipf-ranked x, uniform y.
    Skewed {
        zipf_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub distribution: Distribution,
    pub n: usize,
    pub domain: Rect,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn uniform(n: usize, seed: u64) -> Self {
        Self {
            distribution: Distribution::Uniform,
            n,
            domain: Rect::new(0.0, 0.0, 1.0, 1.0),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.n >= 1
            && self.domain.width() >= 0.0
            && self.domain.height() >= 0.0
            && match self.distribution {
                Distribution::Uniform => true,
                Distribution::Gaussian { clusters, sigma } => clusters >= 1 && sigma > 0.0,
                Distribution::Skewed { zipf_s } => zipf_s > 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("synthetic spec {self:?}")))
        }
    }
}

/// Generates `spec.n` objects with payloads `0..n`, reproducible under the
/// seed.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Vec<SpatialObject>> {
    spec.validate()?;
    let d = spec.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let uniform_in = |rng: &mut ChaCha8Rng| {
        Point::new(
            d.x_lo + rng.random::<f64>() * d.width(),
            d.y_lo + rng.random::<f64>() * d.height(),
        )
    };
    let points: Vec<Point> = match spec.distribution {
        Distribution::Uniform => (0..spec.n).map(|_| uniform_in(&mut rng)).collect(),
        Distribution::Gaussian { clusters, sigma } => {
            let centers: Vec<Point> = (0..clusters).map(|_| uniform_in(&mut rng)).collect();
            let nx = Normal::new(0.0, sigma * d.width().max(f64::MIN_POSITIVE))
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let ny = Normal::new(0.0, sigma * d.height().max(f64::MIN_POSITIVE))
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            (0..spec.n)
                .map(|_| {
                    let c = centers[rng.random_range(0..clusters)];
                    let x = (c.x + nx.sample(&mut rng)).clamp(d.x_lo, d.x_hi);
                    let y = (c.y + ny.sample(&mut rng)).clamp(d.y_lo, d.y_hi);
                    Point::new(x, y)
                })
                .collect()
        }
        Distribution::Skewed { zipf_s } => {
            let zipf = Zipf::new(ZIPF_RANKS, zipf_s)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            (0..spec.n)
                .map(|_| {
                    let rank: f64 = zipf.sample(&mut rng);
                    let t = ((rank - 1.0) + rng.random::<f64>()) / ZIPF_RANKS;
                    let x = d.x_lo + t.min(1.0) * d.width();
                    let y = d.y_lo + rng.random::<f64>() * d.height();
                    Point::new(x, y)
                })
                .collect()
        }
    };
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(i, p)| SpatialObject::new(0.0, p.x, p.y, i as u64))
        .collect())
}

/// Convex polygons with 3 to 8 vertices on a circle of `radius` around
/// centres drawn uniformly from `domain`.
pub fn gen_convex_polygons(count: usize, domain: &Rect, radius: f64, seed: u64) -> Vec<Polygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let c = Point::new(
                domain.x_lo + rng.random::<f64>() * domain.width(),
                domain.y_lo + rng.random::<f64>() * domain.height(),
            );
            let n = rng.random_range(3..=8);
            let mut angles: Vec<f64> = (0..n)
                .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                .collect();
            angles.sort_by(f64::total_cmp);
            let vertices = angles
                .into_iter()
                .map(|a| Point::new(c.x + radius * a.cos(), c.y + radius * a.sin()))
                .collect();
            Polygon::new(format!("pg{i:05}"), vertices).expect("at least 3 vertices")
        })
        .collect()
}

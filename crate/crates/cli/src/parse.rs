//! Parsers for the compact flag values: generator specs, strategies, keys
//! and coordinate lists.

use lilis_core::geometry::Rect;
use lilis_core::storage::{Distribution, SyntheticSpec};
use lilis_core::PartitionStrategy;

const DEFAULT_CLUSTERS: usize = 10;
const DEFAULT_SIGMA: f64 = 0.05;
const DEFAULT_ZIPF_S: f64 = 1.2;

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("invalid {what} {s:?}"))
}

/// `uniform:N`, `gaussian:N[:clusters[:sigma]]` or `skewed:N[:s]`, over the
/// unit square.
pub fn gen_spec(s: &str) -> Result<SyntheticSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let n = parts
        .get(1)
        .ok_or_else(|| format!("generator {s:?} needs a point count, e.g. uniform:1000"))?;
    let n: usize = num(n, "point count")?;
    let extra = |i: usize| parts.get(i).copied();
    let distribution = match (parts[0], parts.len()) {
        ("uniform", 2) => Distribution::Uniform,
        ("gaussian", 2..=4) => Distribution::Gaussian {
            clusters: extra(2).map_or(Ok(DEFAULT_CLUSTERS), |v| num(v, "cluster count"))?,
            sigma: extra(3).map_or(Ok(DEFAULT_SIGMA), |v| num(v, "sigma"))?,
        },
        ("skewed" | "zipf", 2..=3) => Distribution::Skewed {
            zipf_s: extra(2).map_or(Ok(DEFAULT_ZIPF_S), |v| num(v, "zipf exponent"))?,
        },
        _ => return Err(format!("unknown generator {s:?}")),
    };
    let spec = SyntheticSpec {
        distribution,
        ..SyntheticSpec::uniform(n, 0)
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    Ok((num(a, "grid size")?, num(b, "grid size")?))
}

/// `kdtree[:leaf]`, `quadtree[:leaf]`, `fixed:NxM`, `adaptive:NxM` or
/// `rtree[:fanout]`.
pub fn strategy(s: &str) -> Result<PartitionStrategy, String> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let leaf = |a: Option<&str>| a.map(|v| num(v, "leaf capacity")).transpose();
    let st = match (name.to_ascii_lowercase().as_str(), arg) {
        ("kdtree" | "kd", a) => PartitionStrategy::KDTree { max_leaf: leaf(a)? },
        ("quadtree" | "quad", a) => PartitionStrategy::Quadtree { max_leaf: leaf(a)? },
        ("fixed" | "grid", Some(a)) => {
            let (nx, ny) = dims(a)?;
            PartitionStrategy::FixedGrid { nx, ny }
        }
        ("adaptive", Some(a)) => {
            let (nx, ny) = dims(a)?;
            PartitionStrategy::AdaptiveGrid { nx, ny }
        }
        ("rtree", a) => PartitionStrategy::RTreeLeaves {
            fanout: a.map_or(Ok(lilis_core::rtree::DEFAULT_FANOUT), |v| num(v, "fanout"))?,
        },
        _ => return Err(format!("unknown strategy {s:?}")),
    };
    st.validate().map_err(|e| e.to_string())?;
    Ok(st)
}

/// Key choice before the data extent is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyChoice {
    X,
    Y,
    ZOrder(u32),
}

pub fn key(s: &str) -> Result<KeyChoice, String> {
    match s.to_ascii_lowercase().split_once(':') {
        None if s.eq_ignore_ascii_case("x") => Ok(KeyChoice::X),
        None if s.eq_ignore_ascii_case("y") => Ok(KeyChoice::Y),
        None if s.eq_ignore_ascii_case("zorder") => {
            Ok(KeyChoice::ZOrder(lilis_core::learned::DEFAULT_ZORDER_BITS))
        }
        Some(("zorder", bits)) => Ok(KeyChoice::ZOrder(num(bits, "bits per dimension")?)),
        _ => Err(format!("unknown key {s:?}; expected x, y or zorder[:bits]")),
    }
}

/// Exactly `n` comma-separated finite numbers.
pub fn coords(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let vals = s
        .split(',')
        .map(|v| num::<f64>(v, "coordinate"))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {s:?}"));
    }
    if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
        return Err(format!("non-finite value {v} in {s:?}"));
    }
    Ok(vals)
}

pub fn rect(s: &str) -> Result<Rect, String> {
    let v = coords(s, 4)?;
    Rect::try_new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KList(pub Vec<usize>);

impl std::fmt::Display for KList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn k_list(s: &str) -> Result<KList, String> {
    let ks = s
        .split(',')
        .map(|v| num::<usize>(v, "k"))
        .collect::<Result<Vec<_>, _>>()?;
    if ks.contains(&0) {
        return Err("k must be at least 1".into());
    }
    Ok(KList(ks))
}

pub fn delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        assert_eq!(gen_spec("uniform:100").unwrap().n, 100);
        let g = gen_spec("gaussian:50:3:0.1").unwrap();
        assert_eq!(
            g.distribution,
            Distribution::Gaussian {
                clusters: 3,
                sigma: 0.1
            }
        );
        assert_eq!(
            gen_spec("skewed:10").unwrap().distribution,
            Distribution::Skewed { zipf_s: 1.2 }
        );
        for bad in [
            "uniform",
            "uniform:x",
            "cube:10",
            "uniform:0",
            "uniform:5:1",
        ] {
            assert!(gen_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn strategies() {
        assert_eq!(
            strategy("kdtree").unwrap(),
            PartitionStrategy::KDTree { max_leaf: None }
        );
        assert_eq!(
            strategy("quadtree:500").unwrap(),
            PartitionStrategy::Quadtree {
                max_leaf: Some(500)
            }
        );
        assert_eq!(
            strategy("fixed:4x3").unwrap(),
            PartitionStrategy::FixedGrid { nx: 4, ny: 3 }
        );
        assert_eq!(
            strategy("adaptive:2x2").unwrap(),
            PartitionStrategy::AdaptiveGrid { nx: 2, ny: 2 }
        );
        assert_eq!(
            strategy("rtree").unwrap(),
            PartitionStrategy::RTreeLeaves { fanout: 64 }
        );
        for bad in ["fixed", "fixed:0x2", "rtree:1", "hilbert"] {
            assert!(strategy(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn keys_and_coords() {
        assert_eq!(key("X").unwrap(), KeyChoice::X);
        assert_eq!(key("zorder:12").unwrap(), KeyChoice::ZOrder(12));
        assert_eq!(key("zorder").unwrap(), KeyChoice::ZOrder(16));
        assert!(key("geohash").is_err());
        assert_eq!(coords("1.0, 2", 2).unwrap(), vec![1.0, 2.0]);
        assert!(coords("1,2,3", 2).is_err());
        assert!(coords("1,inf", 2).is_err());
        assert!(rect("1,1,0,0").is_err());
        assert_eq!(k_list("2,5,10,50").unwrap().0, vec![2, 5, 10, 50]);
        assert!(k_list("0").is_err());
        assert_eq!(delimiter("tab").unwrap(), b'\t');
        assert!(delimiter(";;").is_err());
    }
}

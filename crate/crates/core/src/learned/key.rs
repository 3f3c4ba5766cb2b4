//! Projection of 2-D points onto the 1-D key used to sort a partition.

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};

/// How a point is projected onto its sort key.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KeyStrategy {
    #[default]
    AxisX,
    AxisY,
    /// Morton code of the point quantized to `bits_per_dim` bits per axis
    /// over `domain`. Points outside the domain are clamped onto it.
    ZOrder {
        bits_per_dim: u32,
        domain: Rect,
    },
}

pub const DEFAULT_ZORDER_BITS: u32 = 16;

impl KeyStrategy {
    pub fn zorder(bits_per_dim: u32, domain: Rect) -> Result<Self> {
        let s = KeyStrategy::ZOrder {
            bits_per_dim,
            domain,
        };
        s.validate()?;
        Ok(s)
    }

    /// Z-order over `data_mbr`, padding a degenerate axis to unit width so
    /// the quantization scale stays finite.
    pub fn zorder_for(bits_per_dim: u32, data_mbr: &Rect) -> Result<Self> {
        let mut d = *data_mbr;
        if d.width() <= 0.0 {
            d.x_lo -= 0.5;
            d.x_hi += 0.5;
        }
        if d.height() <= 0.0 {
            d.y_lo -= 0.5;
            d.y_hi += 0.5;
        }
        Self::zorder(bits_per_dim, d)
    }

    pub fn validate(&self) -> Result<()> {
        if let KeyStrategy::ZOrder {
            bits_per_dim,
            domain,
        } = self
        {
            if !(1..=31).contains(bits_per_dim) {
                return Err(Error::InvalidKeyStrategy(format!(
                    "z-order bits per dimension {bits_per_dim} not in [1, 31]"
                )));
            }
            let finite = [domain.x_lo, domain.y_lo, domain.x_hi, domain.y_hi]
                .iter()
                .all(|v| v.is_finite());
            if !finite || domain.width() <= 0.0 || domain.height() <= 0.0 {
                return Err(Error::InvalidKeyStrategy(format!(
                    "z-order domain {domain:?} must have positive width and height"
                )));
            }
        }
        Ok(())
    }

    /// Key of `p`. Assumes a finite point; see [`project_key`] for the
    /// validating form.
    #[inline]
    pub fn key_of(&self, p: Point) -> f64 {
        match *self {
            KeyStrategy::AxisX => p.x,
            KeyStrategy::AxisY => p.y,
            KeyStrategy::ZOrder {
                bits_per_dim,
                domain,
            } => {
                let ix = quantize(p.x, domain.x_lo, domain.x_hi, bits_per_dim);
                let iy = quantize(p.y, domain.y_lo, domain.y_hi, bits_per_dim);
                interleave(ix, iy) as f64
            }
        }
    }

    /// Closed key interval covering every point of `r`. For the axis
    /// strategies the interval is exact; for Z-order it is the
    /// `[morton(lo), morton(hi)]` superset.
    pub fn key_interval(&self, r: &Rect) -> (f64, f64) {
        match self {
            KeyStrategy::AxisX => (r.x_lo, r.x_hi),
            KeyStrategy::AxisY => (r.y_lo, r.y_hi),
            KeyStrategy::ZOrder { .. } => (self.key_of(r.lo()), self.key_of(r.hi())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            KeyStrategy::AxisX => "x".into(),
            KeyStrategy::AxisY => "y".into(),
            KeyStrategy::ZOrder { bits_per_dim, .. } => format!("zorder:{bits_per_dim}"),
        }
    }
}

pub fn project_key(p: Point, s: &KeyStrategy) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite { x: p.x, y: p.y });
    }
    Ok(s.key_of(p))
}

/// Floor-quantizes `v` in `[lo, hi]` to `bits` bits; values at or past the
/// upper edge clamp to `2^bits - 1`.
#[inline]
pub fn quantize(v: f64, lo: f64, hi: f64, bits: u32) -> u64 {
    let cells = (1u64 << bits) as f64;
    let t = ((v - lo) / (hi - lo) * cells).floor();
    if t.is_nan() || t <= 0.0 {
        0
    } else if t >= cells - 1.0 {
        (1u64 << bits) - 1
    } else {
        t as u64
    }
}

/// Spreads the low 32 bits of `v` so bit `i` lands at bit `2i`.
#[inline]
fn spread(v: u64) -> u64 {
    let mut v = v & 0xFFFF_FFFF;
    v = (v | (v << 16)) & 0x0000_FFFF_0000_FFFF;
    v = (v | (v << 8)) & 0x00FF_00FF_00FF_00FF;
    v = (v | (v << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    v = (v | (v << 2)) & 0x3333_3333_3333_3333;
    v = (v | (v << 1)) & 0x5555_5555_5555_5555;
    v
}

#[inline]
fn interleave(ix: u64, iy: u64) -> u64 {
    spread(ix) | (spread(iy) << 1)
}

/// Interleaves `ix` into the even bits and `iy` into the odd bits.
pub fn morton_encode(ix: u64, iy: u64, bits: u32) -> Result<u64> {
    if !(1..=32).contains(&bits) || ix >> bits != 0 || iy >> bits != 0 {
        return Err(Error::MortonRange { ix, iy, bits });
    }
    Ok(interleave(ix, iy))
}

/// Polynomial rolling hash `sum c_i * 31^(L-1-i)` over code points, with
/// wrapping 64-bit arithmetic.
pub fn string_to_key(s: &str) -> Result<u64> {
    if s.is_empty() {
        return Err(Error::EmptyString);
    }
    Ok(s.chars()
        .fold(0u64, |h, c| h.wrapping_mul(31).wrapping_add(c as u64)))
}

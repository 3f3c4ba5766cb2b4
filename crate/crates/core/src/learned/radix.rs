//! Radix table over floating-point spline knots.
//!
//! The key range `[min, max]` is scaled onto `2^bits` slots. Slot `j` holds
//! the index of the first knot whose scaled key reaches `j`, so the knot
//! bracketing any key `k` lies between `table[k']` and `table[k' + 1]` where
//! `k' = floor((k - min) * scale)`.

use crate::error::{Error, Result};
use crate::learned::spline::SplineKnot;

pub const MAX_RADIX_BITS: u32 = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct RadixTable {
    pub bits: u32,
    pub min_key: f64,
    pub max_key: f64,
    pub scale: f64,
    pub table: Vec<u32>,
}

impl RadixTable {
    #[inline]
    fn slot(&self, key: f64) -> usize {
        let max_slot = 1usize << self.bits;
        let s = ((key - self.min_key) * self.scale).floor();
        if s.is_nan() || s <= 0.0 {
            0
        } else if s >= max_slot as f64 {
            max_slot
        } else {
            s as usize
        }
    }

    /// Inclusive knot-index range that contains the knot bracketing `key`.
    #[inline]
    pub fn bounds(&self, key: f64) -> (usize, usize) {
        let s = self.slot(key);
        (self.table[s] as usize, self.table[s + 1] as usize)
    }
}

pub fn build_radix_table(knots: &[SplineKnot], bits: u32) -> Result<RadixTable> {
    if !(1..=MAX_RADIX_BITS).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "radix bits {bits} not in [1, {MAX_RADIX_BITS}]"
        )));
    }
    let (first, last) = match (knots.first(), knots.last()) {
        (Some(f), Some(l)) if knots.len() >= 2 && l.key > f.key => (f, l),
        _ => return Err(Error::DegenerateRadix),
    };
    let min_key = first.key;
    let max_key = last.key;
    let slots = 1usize << bits;
    let scale = slots as f64 / (max_key - min_key);
    if !scale.is_finite() {
        return Err(Error::DegenerateRadix);
    }
    let mut table = vec![0u32; slots + 2];

    let mut prev = 0usize;
    for (i, knot) in knots.iter().enumerate() {
        let curr = (((knot.key - min_key) * scale) as usize).min(slots + 1);
        for slot in table.iter_mut().take(curr + 1).skip(prev + 1) {
            *slot = i as u32;
        }
        prev = prev.max(curr);
    }
    let last_index = (knots.len() - 1) as u32;
    for slot in table.iter_mut().skip(prev + 1) {
        *slot = last_index;
    }

    Ok(RadixTable {
        bits,
        min_key,
        max_key,
        scale,
        table,
    })
}

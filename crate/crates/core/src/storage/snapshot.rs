//! Versioned little-endian snapshot of a [`PartitionedDataset`].
//!
//! ```text
//! header
//!   magic            6 bytes  "LILIS1"
//!   version          u32
//!   total            u64
//!   partitions       u32
//!   key strategy     u8       0 = x, 1 = y, 2 = z-order
//!   epsilon          u32
//!   radix bits       u32
//!   key encoding     u8       1 = f64
//!   z-order bits     u32      0 unless z-order
//!   z-order domain   4 x f64  x_lo y_lo x_hi y_hi, zero unless z-order
//!   global mbr       4 x f64
//!   partitioner      u8 + 2 x u64   0 fixed(nx, ny), 1 adaptive(nx, ny),
//!                                   2 quadtree(max_leaf, 0), 3 kdtree(max_leaf, 0),
//!                                   4 rtree(fanout, 0); max_leaf 0 = automatic
//!   sample rate      f64
//!   seed             u64
//!   workers          u32
//!   header crc32     u32      over every header byte above
//! per partition block
//!   body length      u64
//!   body
//!     id u32, overflow u8, count u64, mbr 4 x f64
//!     count x (key f64, x f64, y f64, payload u64)
//!     has index u8; when 1:
//!       indexed length u64, epsilon u32, knot count u32,
//!       knots x (key f64, position u64),
//!       has radix u8; when 1:
//!         bits u32, min f64, max f64, scale f64, table length u32, table x u32
//!   body crc32       u32
//! ```

use std::path::Path;

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::learned::{KeyStrategy, RadixTable, SplineIndex, SplineKnot};
use crate::object::SpatialObject;
use crate::partition::{GridDescriptor, Partition, PartitionStrategy, PartitionedDataset};

pub const MAGIC: &[u8; 6] = b"LILIS1";
pub const VERSION: u32 = 1;
const KEY_ENCODING_F64: u8 = 1;

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn rect(&mut self, r: &Rect) {
        for v in [r.x_lo, r.y_lo, r.x_hi, r.y_hi] {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(Error::Truncated)?;
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn rect(&mut self) -> Result<Rect> {
        Ok(Rect::new(
            self.f64()?,
            self.f64()?,
            self.f64()?,
            self.f64()?,
        ))
    }
    fn len(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Malformed(format!("{what} {v}")))
    }
}

fn encode_strategy(s: &PartitionStrategy) -> (u8, u64, u64) {
    match *s {
        PartitionStrategy::FixedGrid { nx, ny } => (0, nx as u64, ny as u64),
        PartitionStrategy::AdaptiveGrid { nx, ny } => (1, nx as u64, ny as u64),
        PartitionStrategy::Quadtree { max_leaf } => (2, max_leaf.unwrap_or(0) as u64, 0),
        PartitionStrategy::KDTree { max_leaf } => (3, max_leaf.unwrap_or(0) as u64, 0),
        PartitionStrategy::RTreeLeaves { fanout } => (4, fanout as u64, 0),
    }
}

fn decode_strategy(tag: u8, a: u64, b: u64) -> Result<PartitionStrategy> {
    let leaf = |v: u64| (v != 0).then_some(v as usize);
    Ok(match tag {
        0 => PartitionStrategy::FixedGrid {
            nx: a as usize,
            ny: b as usize,
        },
        1 => PartitionStrategy::AdaptiveGrid {
            nx: a as usize,
            ny: b as usize,
        },
        2 => PartitionStrategy::Quadtree { max_leaf: leaf(a) },
        3 => PartitionStrategy::KDTree { max_leaf: leaf(a) },
        4 => PartitionStrategy::RTreeLeaves { fanout: a as usize },
        t => return Err(Error::Malformed(format!("partitioner tag {t}"))),
    })
}

fn encode_header(d: &PartitionedDataset) -> Vec<u8> {
    let cfg = &d.config;
    let mut w = Writer::default();
    w.buf.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u64(d.total as u64);
    w.u32(d.partitions.len() as u32);
    let (tag, zbits, zdomain) = match cfg.key_strategy {
        KeyStrategy::AxisX => (0u8, 0u32, Rect::new(0.0, 0.0, 0.0, 0.0)),
        KeyStrategy::AxisY => (1, 0, Rect::new(0.0, 0.0, 0.0, 0.0)),
        KeyStrategy::ZOrder {
            bits_per_dim,
            domain,
        } => (2, bits_per_dim, domain),
    };
    w.u8(tag);
    w.u32(cfg.epsilon as u32);
    w.u32(cfg.radix_bits);
    w.u8(KEY_ENCODING_F64);
    w.u32(zbits);
    w.rect(&zdomain);
    w.rect(&d.global_mbr);
    let (ptag, a, b) = encode_strategy(&cfg.partition_strategy);
    w.u8(ptag);
    w.u64(a);
    w.u64(b);
    w.f64(cfg.sample_rate);
    w.u64(cfg.seed);
    w.u32(cfg.workers as u32);
    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

fn encode_block(desc: &GridDescriptor, part: &Partition) -> Vec<u8> {
    let mut w = Writer::default();
    w.u32(desc.id as u32);
    w.u8(desc.overflow as u8);
    w.u64(desc.count as u64);
    w.rect(&desc.mbr);
    for o in &part.objects {
        w.f64(o.key);
        w.f64(o.x);
        w.f64(o.y);
        w.u64(o.payload);
    }
    match &part.index {
        None => w.u8(0),
        Some(idx) => {
            w.u8(1);
            w.u64(idx.len as u64);
            w.u32(idx.epsilon as u32);
            w.u32(idx.knots.len() as u32);
            for k in &idx.knots {
                w.f64(k.key);
                w.u64(k.position as u64);
            }
            match &idx.radix {
                None => w.u8(0),
                Some(r) => {
                    w.u8(1);
                    w.u32(r.bits);
                    w.f64(r.min_key);
                    w.f64(r.max_key);
                    w.f64(r.scale);
                    w.u32(r.table.len() as u32);
                    for &t in &r.table {
                        w.u32(t);
                    }
                }
            }
        }
    }
    w.buf
}

/// Serializes the dataset into a byte vector.
pub fn write_snapshot(d: &PartitionedDataset) -> Vec<u8> {
    use rayon::prelude::*;
    let blocks: Vec<Vec<u8>> = d
        .descriptors
        .par_iter()
        .zip(d.partitions.par_iter())
        .map(|(desc, part)| encode_block(desc, part))
        .collect();
    let mut out = encode_header(d);
    for body in blocks {
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&crc32fast::hash(&body).to_le_bytes());
    }
    out
}

/// CRC32 of a whole encoded snapshot, for comparing builds.
pub fn snapshot_checksum(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

/// Writes the snapshot next to `path` and renames it into place.
pub fn save_snapshot(d: &PartitionedDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_snapshot(d);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, &bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<PartitionedDataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(&bytes)
}

fn decode_block(body: &[u8], block: usize) -> Result<(GridDescriptor, Partition)> {
    let mut r = Reader { buf: body, pos: 0 };
    let id = r.u32()? as usize;
    if id != block {
        return Err(Error::Malformed(format!("block {block} carries id {id}")));
    }
    let overflow = r.u8()? != 0;
    let count = r.len("count")?;
    let mbr = r.rect()?;
    if count > body.len() / 32 {
        return Err(Error::Truncated);
    }
    let mut objects = Vec::with_capacity(count);
    for _ in 0..count {
        objects.push(SpatialObject {
            key: r.f64()?,
            x: r.f64()?,
            y: r.f64()?,
            payload: r.u64()?,
        });
    }
    let index = match r.u8()? {
        0 => None,
        1 => {
            let len = r.len("indexed length")?;
            let epsilon = r.u32()? as usize;
            let n = r.u32()? as usize;
            if n > body.len() / 16 {
                return Err(Error::Truncated);
            }
            let mut knots = Vec::with_capacity(n);
            for _ in 0..n {
                knots.push(SplineKnot {
                    key: r.f64()?,
                    position: r.len("knot position")?,
                });
            }
            let radix = match r.u8()? {
                0 => None,
                1 => {
                    let bits = r.u32()?;
                    let min_key = r.f64()?;
                    let max_key = r.f64()?;
                    let scale = r.f64()?;
                    let tlen = r.u32()? as usize;
                    if bits > crate::learned::radix::MAX_RADIX_BITS || tlen != (1usize << bits) + 2
                    {
                        return Err(Error::Malformed(format!(
                            "radix table of {tlen} for {bits} bits"
                        )));
                    }
                    let mut table = Vec::with_capacity(tlen);
                    for _ in 0..tlen {
                        table.push(r.u32()?);
                    }
                    Some(RadixTable {
                        bits,
                        min_key,
                        max_key,
                        scale,
                        table,
                    })
                }
                t => return Err(Error::Malformed(format!("radix flag {t}"))),
            };
            if len != count || knots.is_empty() {
                return Err(Error::Malformed(format!(
                    "index over {len} of {count} objects"
                )));
            }
            Some(SplineIndex {
                knots,
                epsilon,
                radix,
                len,
            })
        }
        t => return Err(Error::Malformed(format!("index flag {t}"))),
    };
    if r.pos != body.len() {
        return Err(Error::Malformed(format!(
            "{} trailing bytes in block {block}",
            body.len() - r.pos
        )));
    }
    Ok((
        GridDescriptor {
            id,
            mbr,
            overflow,
            count,
        },
        Partition { objects, index },
    ))
}

pub fn read_snapshot(bytes: &[u8]) -> Result<PartitionedDataset> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len()).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let total = r.len("total")?;
    let nparts = r.u32()? as usize;
    let key_tag = r.u8()?;
    let epsilon = r.u32()? as usize;
    let radix_bits = r.u32()?;
    let encoding = r.u8()?;
    if encoding != KEY_ENCODING_F64 {
        return Err(Error::Malformed(format!("key encoding {encoding}")));
    }
    let zbits = r.u32()?;
    let zdomain = r.rect()?;
    let global_mbr = r.rect()?;
    let (ptag, a, b) = (r.u8()?, r.u64()?, r.u64()?);
    let sample_rate = r.f64()?;
    let seed = r.u64()?;
    let workers = r.u32()? as usize;
    let header_end = r.pos;
    if r.u32()? != crc32fast::hash(&bytes[..header_end]) {
        return Err(Error::Malformed("header checksum mismatch".into()));
    }
    let key_strategy = match key_tag {
        0 => KeyStrategy::AxisX,
        1 => KeyStrategy::AxisY,
        2 => KeyStrategy::ZOrder {
            bits_per_dim: zbits,
            domain: zdomain,
        },
        t => return Err(Error::Malformed(format!("key strategy tag {t}"))),
    };
    let config = EngineConfig {
        workers,
        key_strategy,
        epsilon,
        radix_bits,
        partition_strategy: decode_strategy(ptag, a, b)?,
        sample_rate,
        seed,
    };

    let mut descriptors = Vec::with_capacity(nparts.min(1 << 20));
    let mut partitions = Vec::with_capacity(nparts.min(1 << 20));
    for block in 0..nparts {
        let len = r.len("block length")?;
        let body = r.take(len)?;
        let crc = r.u32()?;
        if crc != crc32fast::hash(body) {
            return Err(Error::Checksum { block });
        }
        let (desc, part) = decode_block(body, block)?;
        descriptors.push(desc);
        partitions.push(part);
    }
    if r.pos != bytes.len() {
        return Err(Error::Malformed("trailing bytes after last block".into()));
    }
    let counted: usize = descriptors.iter().map(|d| d.count).sum();
    if counted != total || descriptors.last().is_none_or(|d| !d.overflow) {
        return Err(Error::Malformed(format!(
            "partition counts sum to {counted}, header says {total}"
        )));
    }
    Ok(PartitionedDataset {
        descriptors,
        partitions,
        config,
        global_mbr,
        total,
    })
}

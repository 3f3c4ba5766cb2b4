//! Sort-Tile-Recursive bulk-loaded R-tree over points.
//!
//! Nodes live in per-level arenas. Each node covers a contiguous range of the
//! level below (or of `entries` for leaves), which STR packing makes possible.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::object::{sort_canonical, SpatialObject};

pub const DEFAULT_FANOUT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTreeNode {
    pub mbr: Rect,
    /// Child range: into `entries` for leaves, into the level below otherwise.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct RTree {
    fanout: usize,
    entries: Vec<SpatialObject>,
    /// `levels[0]` are the leaves; the last level holds the single root.
    levels: Vec<Vec<RTreeNode>>,
}

fn cmp_xy(a: &SpatialObject, b: &SpatialObject) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.payload.cmp(&b.payload))
}

fn cmp_yx(a: &SpatialObject, b: &SpatialObject) -> Ordering {
    a.y.total_cmp(&b.y)
        .then(a.x.total_cmp(&b.x))
        .then(a.payload.cmp(&b.payload))
}

/// Runs the STR tiling over `items` in place and returns the group
/// boundaries (each group at most `fanout` items).
fn str_tile<T>(
    items: &mut [T],
    fanout: usize,
    by_x: impl Fn(&T, &T) -> Ordering,
    by_y: impl Fn(&T, &T) -> Ordering,
) -> Vec<(usize, usize)> {
    let n = items.len();
    let groups = n.div_ceil(fanout);
    let slabs = (groups as f64).sqrt().ceil() as usize;
    let slab_len = slabs * fanout;
    items.sort_by(&by_x);
    let mut out = Vec::with_capacity(groups);
    let mut start = 0;
    while start < n {
        let end = (start + slab_len).min(n);
        items[start..end].sort_by(&by_y);
        let mut s = start;
        while s < end {
            let e = (s + fanout).min(end);
            out.push((s, e));
            s = e;
        }
        start = end;
    }
    out
}

fn rect_center_cmp_x(a: &RTreeNode, b: &RTreeNode) -> Ordering {
    let (ca, cb) = (a.mbr.center(), b.mbr.center());
    ca.x.total_cmp(&cb.x)
        .then(ca.y.total_cmp(&cb.y))
        .then(a.start.cmp(&b.start))
}

fn rect_center_cmp_y(a: &RTreeNode, b: &RTreeNode) -> Ordering {
    let (ca, cb) = (a.mbr.center(), b.mbr.center());
    ca.y.total_cmp(&cb.y)
        .then(ca.x.total_cmp(&cb.x))
        .then(a.start.cmp(&b.start))
}

impl RTree {
    /// STR bulk load. Ties are broken by x, then y, then payload.
    pub fn bulk_load(mut entries: Vec<SpatialObject>, fanout: usize) -> Result<Self> {
        if fanout < 2 {
            return Err(Error::InvalidParameter(format!("fanout {fanout} < 2")));
        }
        if entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let leaves: Vec<RTreeNode> = str_tile(&mut entries, fanout, cmp_xy, cmp_yx)
            .into_iter()
            .map(|(start, end)| RTreeNode {
                mbr: Rect::bounding(entries[start..end].iter().map(|o| o.point()))
                    .expect("non-empty group"),
                start,
                end,
            })
            .collect();

        let mut levels = vec![leaves];
        while levels.last().map_or(0, Vec::len) > 1 {
            let below = levels.last_mut().expect("non-empty");
            let groups = str_tile(below, fanout, rect_center_cmp_x, rect_center_cmp_y);
            let parents = groups
                .into_iter()
                .map(|(start, end)| RTreeNode {
                    mbr: below[start..end]
                        .iter()
                        .map(|n| n.mbr)
                        .reduce(|a, b| a.union(&b))
                        .expect("non-empty group"),
                    start,
                    end,
                })
                .collect();
            levels.push(parents);
        }
        Ok(Self {
            fanout,
            entries,
            levels,
        })
    }

    /// Convenience loader for bare points; payloads are input ordinals.
    pub fn from_points(points: &[Point], fanout: usize) -> Result<Self> {
        let entries = points
            .iter()
            .enumerate()
            .map(|(i, p)| SpatialObject::new(p.x, p.x, p.y, i as u64))
            .collect();
        Self::bulk_load(entries, fanout)
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn root(&self) -> &RTreeNode {
        &self.levels[self.levels.len() - 1][0]
    }

    /// Leaves in STR packing order.
    pub fn leaves(&self) -> &[RTreeNode] {
        &self.levels[0]
    }

    pub fn leaf_mbrs(&self) -> Vec<Rect> {
        self.levels[0].iter().map(|n| n.mbr).collect()
    }

    pub fn levels(&self) -> &[Vec<RTreeNode>] {
        &self.levels
    }

    pub fn entries(&self) -> &[SpatialObject] {
        &self.entries
    }

    /// All entries inside `q` (closed), in canonical order.
    pub fn range(&self, q: &Rect) -> Vec<SpatialObject> {
        let mut out = Vec::new();
        self.visit(self.levels.len() - 1, 0, q, &mut out);
        sort_canonical(&mut out);
        out
    }

    fn visit(&self, level: usize, node: usize, q: &Rect, out: &mut Vec<SpatialObject>) {
        let n = &self.levels[level][node];
        if !n.mbr.intersects(q) {
            return;
        }
        if level == 0 {
            let slice = &self.entries[n.start..n.end];
            if q.envelops(&n.mbr) {
                out.extend_from_slice(slice);
            } else {
                out.extend(slice.iter().filter(|o| q.contains_point(o.point())));
            }
        } else {
            for child in n.start..n.end {
                self.visit(level - 1, child, q, out);
            }
        }
    }
}

pub fn str_bulk_load(points: Vec<SpatialObject>, fanout: usize) -> Result<RTree> {
    RTree::bulk_load(points, fanout)
}

pub fn rtree_range(tree: &RTree, q: &Rect) -> Vec<SpatialObject> {
    tree.range(q)
}

//! Local search algorithms run inside one candidate partition.

pub mod knn;

use crate::geometry::{point_in_polygon, Circle, Point, Polygon, Rect};
use crate::learned::{lower_bound_with, KeyStrategy};
use crate::object::SpatialObject;
use crate::partition::Partition;

pub use knn::{
    knn_initial_radius, knn_query, knn_round_bound, KnnParams, KnnResult, Neighbor, WindowSource,
    DEFAULT_K, DEFAULT_MAX_ROUNDS,
};

/// A `(polygon, object)` pair satisfying containment.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinPair {
    pub polygon_id: String,
    /// Position of the polygon in the input list.
    pub polygon_index: usize,
    pub object: SpatialObject,
}

/// Exact point membership via the learned corridor, then an outward scan
/// over the run of equal keys.
pub fn local_point_search(part: &Partition, q: Point, key: &KeyStrategy) -> bool {
    let Some(index) = &part.index else {
        return false;
    };
    let objs = &part.objects;
    let k = key.key_of(q);
    let pred = index.predict(k);
    let window = &objs[pred.lo..=pred.hi];
    let at = window.partition_point(|o| o.key < k);
    if at == window.len() || window[at].key != k {
        return false;
    }
    let pos = pred.lo + at;
    let matches = |o: &SpatialObject| o.x == q.x && o.y == q.y;
    if objs[pos..].iter().take_while(|o| o.key == k).any(matches) {
        return true;
    }
    objs[..pos]
        .iter()
        .rev()
        .take_while(|o| o.key == k)
        .any(matches)
}

/// Calls `f` on every object of the partition inside `q`, in key order.
pub fn local_range_visit<F>(part: &Partition, q: &Rect, key: &KeyStrategy, mbr: &Rect, mut f: F)
where
    F: FnMut(&SpatialObject),
{
    let Some(index) = &part.index else {
        return;
    };
    let objs = &part.objects;
    if q.envelops(mbr) {
        objs.iter().for_each(f);
        return;
    }
    let (k_lo, k_hi) = key.key_interval(q);
    let start = lower_bound_with(objs.len(), |i| objs[i].key, index.predict(k_lo), k_lo);
    for o in objs[start..].iter().take_while(|o| o.key <= k_hi) {
        if q.contains_point(o.point()) {
            f(o);
        }
    }
}

pub fn local_range_search(
    part: &Partition,
    q: &Rect,
    key: &KeyStrategy,
    mbr: &Rect,
) -> Vec<SpatialObject> {
    let mut out = Vec::new();
    local_range_visit(part, q, key, mbr, |o| out.push(*o));
    out
}

/// Range search over the circle's MBR, refined by distance.
pub fn local_circle_search(
    part: &Partition,
    c: &Circle,
    key: &KeyStrategy,
    mbr: &Rect,
) -> Vec<SpatialObject> {
    let mut out = Vec::new();
    local_range_visit(part, &c.mbr(), key, mbr, |o| {
        if c.contains(o.point()) {
            out.push(*o);
        }
    });
    out
}

/// Filter-and-refine join of the broadcast polygons against one partition.
/// `polygons` carries each polygon's input index and precomputed MBR.
pub fn local_join(
    part: &Partition,
    polygons: &[(usize, &Polygon, Rect)],
    key: &KeyStrategy,
    mbr: &Rect,
) -> Vec<JoinPair> {
    let mut out = Vec::new();
    for &(polygon_index, pg, pg_mbr) in polygons {
        if !pg_mbr.intersects(mbr) {
            continue;
        }
        local_range_visit(part, &pg_mbr, key, mbr, |o| {
            if point_in_polygon(pg, o.point()) {
                out.push(JoinPair {
                    polygon_id: pg.id.clone(),
                    polygon_index,
                    object: *o,
                });
            }
        });
    }
    out
}

/// Canonical join order: polygon id, input position, then object order.
pub fn sort_join_pairs(pairs: &mut [JoinPair]) {
    pairs.sort_unstable_by(|a, b| {
        a.polygon_id
            .cmp(&b.polygon_id)
            .then(a.polygon_index.cmp(&b.polygon_index))
            .then(a.object.canonical_cmp(&b.object))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EngineConfig;
    use crate::learned::SplineIndex;
    use crate::object::sort_canonical;
    use crate::partition::{assign, PartitionStrategy};
    use rand::{Rng, SeedableRng};

    fn partition_of(mut objs: Vec<SpatialObject>, key: &KeyStrategy, eps: usize) -> Partition {
        for o in &mut objs {
            o.key = key.key_of(o.point());
        }
        sort_canonical(&mut objs);
        let index = if objs.is_empty() {
            None
        } else {
            Some(SplineIndex::build(objs.iter().map(|o| o.key), eps, 8).unwrap())
        };
        Partition {
            objects: objs,
            index,
        }
    }

    fn mbr_of(p: &Partition) -> Rect {
        Rect::bounding(p.objects.iter().map(|o| o.point())).unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0))
    }

    #[test]
    fn point_present_and_absent() {
        let objs = vec![
            SpatialObject::new(0.0, 2.0, 5.0, 0),
            SpatialObject::new(0.0, 3.0, 1.0, 1),
        ];
        let p = partition_of(objs, &KeyStrategy::AxisX, 32);
        assert!(local_point_search(
            &p,
            Point::new(2.0, 5.0),
            &KeyStrategy::AxisX
        ));
        assert!(!local_point_search(
            &p,
            Point::new(2.0, 5.5),
            &KeyStrategy::AxisX
        ));
        assert!(!local_point_search(
            &p,
            Point::new(9.0, 5.0),
            &KeyStrategy::AxisX
        ));
        let empty = partition_of(Vec::new(), &KeyStrategy::AxisX, 32);
        assert!(!local_point_search(
            &empty,
            Point::new(2.0, 5.0),
            &KeyStrategy::AxisX
        ));
    }

    #[test]
    fn duplicate_key_run_scans_past_corridor() {
        let mut objs: Vec<_> = (0..100)
            .map(|i| SpatialObject::new(0.0, 7.0, i as f64, i))
            .collect();
        objs.extend((0..50).map(|i| SpatialObject::new(0.0, i as f64 * 0.1, 0.0, 1000 + i)));
        objs.extend((0..50).map(|i| SpatialObject::new(0.0, 10.0 + i as f64, 0.0, 2000 + i)));
        let p = partition_of(objs.clone(), &KeyStrategy::AxisX, 2);
        // the 90th object of the run sits far outside the +-2 corridor
        let target = Point::new(7.0, 89.0);
        let brute = objs.iter().any(|o| o.point() == target);
        assert!(brute);
        assert_eq!(local_point_search(&p, target, &KeyStrategy::AxisX), brute);
        assert!(!local_point_search(
            &p,
            Point::new(7.0, 100.5),
            &KeyStrategy::AxisX
        ));
    }

    #[test]
    fn envelope_returns_everything() {
        let objs: Vec<_> = (0..20)
            .map(|i| SpatialObject::new(0.0, i as f64, 1.0, i))
            .collect();
        let p = partition_of(objs, &KeyStrategy::AxisX, 4);
        let mbr = mbr_of(&p);
        let all = local_range_search(
            &p,
            &Rect::new(-1.0, -1.0, 100.0, 100.0),
            &KeyStrategy::AxisX,
            &mbr,
        );
        assert_eq!(all, p.objects);
        let none = local_range_search(
            &p,
            &Rect::new(50.0, 0.0, 60.0, 5.0),
            &KeyStrategy::AxisX,
            &mbr,
        );
        assert!(none.is_empty());
    }

    #[test]
    fn range_and_circle_match_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let objs: Vec<_> = (0..10_000)
            .map(|i| {
                let c = (i % 4) as f64 * 0.25;
                SpatialObject::new(
                    0.0,
                    c + rng.random::<f64>() * 0.1,
                    c + rng.random::<f64>() * 0.1,
                    i,
                )
            })
            .collect();
        let strategies = [
            KeyStrategy::AxisX,
            KeyStrategy::AxisY,
            KeyStrategy::zorder(12, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap(),
        ];
        for ks in strategies {
            let p = partition_of(objs.clone(), &ks, 16);
            let mbr = mbr_of(&p);
            for _ in 0..100 {
                let (a, b, w, h) = (
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                    rng.random::<f64>() * 0.3,
                    rng.random::<f64>() * 0.3,
                );
                let q = Rect::new(a, b, a + w, b + h);
                let mut expected: Vec<_> = p
                    .objects
                    .iter()
                    .copied()
                    .filter(|o| q.contains_point(o.point()))
                    .collect();
                sort_canonical(&mut expected);
                assert_eq!(local_range_search(&p, &q, &ks, &mbr), expected);

                let c = Circle::try_new(Point::new(a, b), w).unwrap();
                let expected: Vec<_> = p
                    .objects
                    .iter()
                    .copied()
                    .filter(|o| c.contains(o.point()))
                    .collect();
                assert_eq!(local_circle_search(&p, &c, &ks, &mbr), expected);
            }
        }
    }

    #[test]
    fn zero_radius_circle_hits_exact_point() {
        let objs = vec![
            SpatialObject::new(0.0, 1.0, 1.0, 0),
            SpatialObject::new(0.0, 1.0, 1.0, 1),
            SpatialObject::new(0.0, 1.0, 1.5, 2),
        ];
        let p = partition_of(objs, &KeyStrategy::AxisX, 4);
        let c = Circle::try_new(Point::new(1.0, 1.0), 0.0).unwrap();
        let hits = local_circle_search(&p, &c, &KeyStrategy::AxisX, &mbr_of(&p));
        assert_eq!(
            hits.iter().map(|o| o.payload).collect::<Vec<_>>(),
            vec![0, 1]
        );
    }

    #[test]
    fn join_includes_boundary_points() {
        let objs = vec![
            SpatialObject::new(0.0, 0.5, 0.5, 0),
            SpatialObject::new(0.0, 2.0, 2.0, 1),
            SpatialObject::new(0.0, 1.0, 1.0, 2),
        ];
        let cfg = EngineConfig {
            partition_strategy: PartitionStrategy::FixedGrid { nx: 1, ny: 1 },
            ..EngineConfig::default()
        };
        let d = assign(objs, &[Rect::new(0.0, 0.0, 2.0, 2.0)], &cfg).unwrap();
        let sq = Polygon::new(
            "sq",
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
        )
        .unwrap();
        let polys = [(0usize, &sq, sq.mbr())];
        let pairs = local_join(
            &d.partitions[0],
            &polys,
            d.key_strategy(),
            &d.descriptors[0].mbr,
        );
        let hit: Vec<_> = pairs.iter().map(|p| p.object.payload).collect();
        assert_eq!(hit, vec![0, 2]);
    }
}

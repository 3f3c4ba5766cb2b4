//! Randomized end-to-end properties over small engines.

use std::sync::Arc;

use lilis_core::runtime::{global_filter, FilterShape};
use lilis_core::storage::{read_snapshot, write_snapshot};
use lilis_core::{
    Circle, Engine, EngineConfig, KeyStrategy, KnnParams, PartitionStrategy, PartitionedDataset,
    Point, QuerySpec, Rect, SpatialObject,
};
use proptest::prelude::*;

fn strategy() -> impl Strategy<Value = PartitionStrategy> {
    prop_oneof![
        (1usize..5, 1usize..5).prop_map(|(nx, ny)| PartitionStrategy::FixedGrid { nx, ny }),
        (1usize..5, 1usize..5).prop_map(|(nx, ny)| PartitionStrategy::AdaptiveGrid { nx, ny }),
        prop::option::of(1usize..50).prop_map(|max_leaf| PartitionStrategy::Quadtree { max_leaf }),
        prop::option::of(1usize..50).prop_map(|max_leaf| PartitionStrategy::KDTree { max_leaf }),
        (2usize..16).prop_map(|fanout| PartitionStrategy::RTreeLeaves { fanout }),
    ]
}

/// Points on a coarse lattice so duplicates and shared edges are common.
fn objects() -> impl Strategy<Value = Vec<SpatialObject>> {
    prop::collection::vec((0u8..40, 0u8..40), 1..400).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (x, y))| SpatialObject::new(0.0, x as f64 / 4.0, y as f64 / 4.0, i as u64))
            .collect()
    })
}

fn rect() -> impl Strategy<Value = Rect> {
    (-1.0f64..11.0, -1.0f64..11.0, 0.0f64..4.0, 0.0f64..4.0)
        .prop_map(|(x, y, w, h)| Rect::new(x, y, x + w, y + h))
}

fn config(strategy: PartitionStrategy, zorder: bool, objs: &[SpatialObject]) -> EngineConfig {
    let key_strategy = if zorder {
        let mbr = Rect::bounding(objs.iter().map(SpatialObject::point)).unwrap();
        KeyStrategy::zorder_for(8, &mbr).unwrap()
    } else {
        KeyStrategy::AxisY
    };
    EngineConfig {
        partition_strategy: strategy,
        key_strategy,
        epsilon: 2,
        radix_bits: 4,
        sample_rate: 0.5,
        ..EngineConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partitions_conserve_sort_and_reproduce(
        objs in objects(), s in strategy(), z in any::<bool>(), seed in any::<u64>()
    ) {
        let cfg = EngineConfig { seed, ..config(s, z, &objs) };
        let ds = PartitionedDataset::build(objs.clone(), &cfg).unwrap();
        prop_assert_eq!(ds.descriptors.iter().map(|d| d.count).sum::<usize>(), objs.len());
        for (d, p) in ds.descriptors.iter().zip(&ds.partitions) {
            prop_assert_eq!(d.count, p.objects.len());
            prop_assert!(p.objects.windows(2).all(|w| w[0].key <= w[1].key));
            if !d.overflow {
                prop_assert!(p.objects.iter().all(|o| d.mbr.contains_point(o.point())));
            }
        }
        if s.covers_data() {
            prop_assert_eq!(ds.descriptors[ds.overflow_id()].count, 0);
        }
        let again = PartitionedDataset::build(objs, &cfg).unwrap();
        prop_assert_eq!(&again, &ds);
        prop_assert_eq!(read_snapshot(&write_snapshot(&ds)).unwrap(), ds);
    }

    #[test]
    fn global_filter_keeps_every_partition_with_an_answer(
        objs in objects(), s in strategy(), q in rect()
    ) {
        let ds = PartitionedDataset::build(objs, &config(s, false, &[])).unwrap();
        let candidates = global_filter(&ds.descriptors, &FilterShape::Rect(q));
        for (id, p) in ds.partitions.iter().enumerate() {
            if p.objects.iter().any(|o| q.contains_point(o.point())) {
                prop_assert!(candidates.contains(&id), "partition {} dropped", id);
            }
        }
    }

    #[test]
    fn circle_results_lie_in_mbr_results(
        objs in objects(), s in strategy(), z in any::<bool>(),
        cx in 0.0f64..10.0, cy in 0.0f64..10.0, r in 0.0f64..3.0
    ) {
        let e = Engine::build(objs.clone(), &config(s, z, &objs)).unwrap();
        let c = Circle::try_new(Point::new(cx, cy), r).unwrap();
        let inner = e.circle(&c).unwrap();
        let outer = e.range(&c.mbr()).unwrap();
        prop_assert!(inner.iter().all(|o| outer.contains(o)));
        prop_assert!(inner.iter().all(|o| c.contains(o.point())));
    }

    #[test]
    fn workers_and_queries_leave_results_and_data_unchanged(
        objs in objects(), s in strategy(), z in any::<bool>(), q in rect(),
        px in 0.0f64..10.0, py in 0.0f64..10.0, k in 1usize..20
    ) {
        let ds = Arc::new(PartitionedDataset::build(objs.clone(), &config(s, z, &objs)).unwrap());
        let before = (*ds).clone();
        let k = k.min(objs.len());
        let queries = [
            QuerySpec::Point(objs[0].point()),
            QuerySpec::Range(q),
            QuerySpec::Circle(Circle::try_new(Point::new(px, py), 1.5).unwrap()),
            QuerySpec::Knn { point: Point::new(px, py), params: KnnParams::new(k) },
        ];
        let engines: Vec<Engine> = [1, 2, 8].iter().map(|&w| Engine::new(ds.clone(), w).unwrap()).collect();
        for q in &queries {
            let first = engines[0].execute(q).unwrap();
            for e in &engines[1..] {
                prop_assert_eq!(&e.execute(q).unwrap(), &first);
            }
        }
        prop_assert_eq!(&*ds, &before);
    }
}

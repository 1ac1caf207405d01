use proptest::prelude::*;

use itca::baselines::{hierarchical_combine, kmeans_combine, LinkageKind};
use itca::data::simulate;
use itca::{Dataset, Partition, SimulationConfig};

fn dataset(seed: u64) -> Dataset {
    let truth: Partition = "{(1,2),3,(4,5,6)}".parse().unwrap();
    simulate(&SimulationConfig::new(truth, 3.0, 1.0, 240, 3, seed)).unwrap().dataset
}

/// Reorders rows while keeping each row's label; only within-class order
/// changes from the centers' point of view.
fn shuffled(ds: &Dataset, key: u64) -> Dataset {
    let mut order: Vec<usize> = (0..ds.n()).collect();
    order.sort_by_key(|&i| (i as u64).wrapping_mul(key | 1).rotate_left(23));
    let x = ds.features().gather(&order);
    let y = order.iter().map(|&i| ds.labels()[i]).collect();
    Dataset::new(x, y, ds.k0()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn row_order_does_not_matter(seed in any::<u64>(), key in any::<u64>(), k_star in 1usize..=6) {
        let ds = dataset(seed);
        let moved = shuffled(&ds, key);
        prop_assert_eq!(kmeans_combine(&ds, k_star, 1).unwrap(), kmeans_combine(&moved, k_star, 1).unwrap());
        for linkage in [LinkageKind::Single, LinkageKind::Complete, LinkageKind::Average] {
            prop_assert_eq!(
                hierarchical_combine(&ds, k_star, linkage).unwrap(),
                hierarchical_combine(&moved, k_star, linkage).unwrap()
            );
        }
    }

    #[test]
    fn kmeans_is_deterministic(seed in any::<u64>(), kseed in any::<u64>(), k_star in 1usize..=6) {
        let ds = dataset(seed);
        prop_assert_eq!(kmeans_combine(&ds, k_star, kseed).unwrap(), kmeans_combine(&ds, k_star, kseed).unwrap());
    }
}

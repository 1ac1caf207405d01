use std::collections::HashSet;

use proptest::prelude::*;

use itca::partitions::{count_nominal, enumerate_nominal, enumerate_ordinal, OrdinalEncoding, Partition};
use itca::ForbiddenMerges;

/// Bell numbers from the Bell triangle.
fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 1..n {
        let mut next = vec![*row.last().unwrap()];
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    *row.last().unwrap()
}

#[test]
fn bell_triangle_reference() {
    let want = [1u128, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
    for (i, &b) in want.iter().enumerate() {
        assert_eq!(bell(i + 1), b);
    }
}

#[test]
fn enumeration_sizes_match_closed_forms() {
    for k0 in 1..=10 {
        assert_eq!(enumerate_ordinal(k0, false).count() as u128, (1u128 << (k0 - 1)) - 1);
        let nominal = enumerate_nominal(k0, false).unwrap().count() as u128;
        assert_eq!(nominal, bell(k0) - 1);
        assert_eq!(count_nominal(k0, false), bell(k0) - 1);
    }
}

#[test]
fn enumerated_partitions_are_canonical_and_distinct() {
    for k0 in 1..=7 {
        let ordinal: Vec<Partition> = enumerate_ordinal(k0, true).collect();
        let nominal: Vec<Partition> = enumerate_nominal(k0, true).unwrap().collect();
        for list in [&ordinal, &nominal] {
            let distinct: HashSet<&Partition> = list.iter().collect();
            assert_eq!(distinct.len(), list.len());
            for p in list.iter() {
                assert_eq!(&Partition::canonicalize(p.assignment()).unwrap(), p);
            }
        }
        assert!(ordinal.iter().all(Partition::is_ordinal));
    }
}

fn arb_partition() -> impl Strategy<Value = Partition> {
    (1usize..=9)
        .prop_flat_map(|k0| proptest::collection::vec(0..k0, k0))
        .prop_map(|raw| Partition::canonicalize(&raw).unwrap())
}

fn arb_encodings() -> impl Strategy<Value = (OrdinalEncoding, OrdinalEncoding, OrdinalEncoding)> {
    (0usize..12).prop_flat_map(|len| {
        let bits = || proptest::collection::vec(any::<bool>(), len).prop_map(OrdinalEncoding::new);
        (bits(), bits(), bits())
    })
}

proptest! {
    #[test]
    fn text_form_round_trips(p in arb_partition()) {
        let back: Partition = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn neighbors_merge_exactly_two_classes(p in arb_partition(), ordinal in any::<bool>()) {
        let p = if ordinal { Partition::identity(p.k0()) } else { p };
        let allowed: HashSet<Partition> = if ordinal {
            enumerate_ordinal(p.k0(), true).collect()
        } else {
            enumerate_nominal(p.k0(), true).unwrap().collect()
        };
        for q in p.neighbors(ordinal, &ForbiddenMerges::none()) {
            prop_assert_eq!(q.k() + 1, p.k());
            prop_assert!(p.refines(&q));
            prop_assert!(allowed.contains(&q));
        }
    }

    #[test]
    fn hamming_is_a_metric((a, b, c) in arb_encodings()) {
        let d = |x: &OrdinalEncoding, y: &OrdinalEncoding| x.hamming(y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn ordinal_encoding_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..12)) {
        let e = OrdinalEncoding::new(bits);
        prop_assert_eq!(e.decode().encode_ordinal().unwrap(), e);
    }
}

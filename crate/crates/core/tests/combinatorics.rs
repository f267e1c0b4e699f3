mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use qdel_core::combinatorics::{check_c1, check_c2, delta_set, delta_table, BitString, BitStringSet, CodePair, Witness};

fn pair_strategy(max_n: usize) -> impl Strategy<Value = CodePair> {
    (2..=max_n).prop_flat_map(|n| {
        let universe = 1u64 << n;
        prop::collection::vec(0..3u8, universe as usize)
            .prop_filter("both sides nonempty", |labels| labels.contains(&1) && labels.contains(&2))
            .prop_map(move |labels| {
                let pick = |tag| {
                    BitStringSet::from_iter_checked(
                        n,
                        (0..universe).filter(|&v| labels[v as usize] == tag).map(|v| BitString::new(n, v).unwrap()),
                    )
                    .unwrap()
                };
                CodePair::new(pick(1), pick(2)).unwrap()
            })
    })
}

fn as_strs(set: &BitStringSet) -> Vec<String> {
    set.to_strings()
}

fn as_set(set: &BitStringSet) -> BTreeSet<String> {
    set.to_strings().into_iter().collect()
}

#[test]
fn example_tables_match_oracle() {
    for pair in [CodePair::four_qubit_example(), CodePair::eight_qubit_example()] {
        let t = delta_table(&pair);
        let (a, b) = (as_strs(pair.a()), as_strs(pair.b()));
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        let b: Vec<&str> = b.iter().map(String::as_str).collect();
        for i in 1..=pair.n() {
            for (bit, c) in [(0u8, '0'), (1, '1')] {
                assert_eq!(as_set(t.a(i, bit)), common::delta(&a, i, c));
                assert_eq!(as_set(t.b(i, bit)), common::delta(&b, i, c));
            }
        }
    }
}

#[test]
fn c1_witness_points_at_a_real_collision() {
    let pair = CodePair::from_strs(3, &["000"], &["001"]).unwrap();
    let v = check_c1(&pair);
    assert!(!v.holds);
    for w in &v.witnesses {
        let Witness::C1 { i1, b1, i2, b2, element } = w else { panic!("wrong witness kind") };
        assert!(delta_set(pair.a(), *i1, *b1).unwrap().contains(element));
        assert!(delta_set(pair.b(), *i2, *b2).unwrap().contains(element));
    }
}

#[test]
fn c2_example_one_products() {
    let pair = CodePair::four_qubit_example();
    let t = delta_table(&pair);
    for i1 in 1..=4 {
        for i2 in 1..=4 {
            for b in [0u8, 1] {
                let lhs = pair.a().len() * t.b(i1, b).intersection(t.b(i2, b)).len();
                let rhs = pair.b().len() * t.a(i1, b).intersection(t.a(i2, b)).len();
                assert_eq!((lhs, rhs), (6, 6));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn checks_agree_with_bruteforce(pair in pair_strategy(4)) {
        let (a, b) = (as_strs(pair.a()), as_strs(pair.b()));
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        let b: Vec<&str> = b.iter().map(String::as_str).collect();
        let c1 = check_c1(&pair);
        let c2 = check_c2(&pair);
        prop_assert_eq!(c1.holds, common::c1_holds(pair.n(), &a, &b));
        prop_assert_eq!(c2.holds, common::c2_holds(pair.n(), &a, &b));
        prop_assert_eq!(c1.holds, c1.witnesses.is_empty());
        prop_assert_eq!(c2.holds, c2.witnesses.is_empty());
    }

    #[test]
    fn conditions_invariant_under_symmetries(pair in pair_strategy(4)) {
        let base = (check_c1(&pair).holds, check_c2(&pair).holds);
        for p in [pair.reversed(), pair.complemented(), pair.swapped()] {
            prop_assert_eq!((check_c1(&p).holds, check_c2(&p).holds), base);
        }
    }

    #[test]
    fn delta_sets_partition_by_bit(pair in pair_strategy(5), i in 1usize..=5) {
        let i = i.min(pair.n());
        let t = delta_table(&pair);
        prop_assert_eq!(t.a(i, 0).len() + t.a(i, 1).len(), pair.a().len());
        prop_assert_eq!(t.b(i, 0).len() + t.b(i, 1).len(), pair.b().len());
        for x in t.a(i, 0).iter().chain(t.a(i, 1).iter()) {
            prop_assert_eq!(x.len(), pair.n() - 1);
        }
    }

    #[test]
    fn delete_then_insert_restores(n in 2usize..=20, v in any::<u64>(), i in 1usize..=20) {
        let x = BitString::new(n, v & ((1u64 << n) - 1)).unwrap();
        let i = 1 + (i - 1) % n;
        let bit = x.bit(i).unwrap();
        prop_assert_eq!(x.delete_at(i).unwrap().insert_at(i, bit).unwrap(), x);
        let s = x.to_string();
        prop_assert_eq!(x.delete_at(i).unwrap().to_string(), common::drop_char(&s, i));
    }

    #[test]
    fn lambda_is_gcd(pair in pair_strategy(4)) {
        let (na, nb) = (pair.a().len(), pair.b().len());
        prop_assert_eq!(pair.a0() * pair.lambda(), na);
        prop_assert_eq!(pair.b0() * pair.lambda(), nb);
        prop_assert!(na % pair.lambda() == 0 && nb % pair.lambda() == 0);
        let mut g = (pair.a0(), pair.b0());
        while g.1 != 0 { g = (g.1, g.0 % g.1); }
        prop_assert_eq!(g.0, 1);
    }
}

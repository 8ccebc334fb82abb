mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::oracles::brute_force_logical;
use junctest::fixtures::{fixture, JUNCTION_ID};
use junctest::logical_gen::{find_logical_scenarios, permutation_count, reduce_symmetries, LogicalGenError};
use junctest::road_model::{enumerate_maneuver_instances, ManeuverCatalog};
use proptest::prelude::*;

fn catalog(name: &str) -> ManeuverCatalog {
    enumerate_maneuver_instances(&fixture(name).unwrap(), JUNCTION_ID).unwrap()
}

#[test]
fn t1_pairs() {
    let cat = catalog("T1");
    assert_eq!(permutation_count(&cat, 2), 36);
    assert_eq!(find_logical_scenarios(&cat, 2).unwrap().len(), 24);
}

#[test]
fn matches_brute_force_on_all_fixtures() {
    for name in ["T1", "X1", "Y1"] {
        let cat = catalog(name);
        for n in 2..=4 {
            let got: BTreeSet<Vec<String>> =
                find_logical_scenarios(&cat, n).unwrap().scenarios.into_iter().map(|s| s.assignment).collect();
            assert_eq!(got, brute_force_logical(&cat, n), "{name} n={n}");
        }
    }
}

#[test]
fn empty_catalog_is_rejected() {
    let cat = ManeuverCatalog { junction_id: "J".into(), instances: vec![] };
    assert!(matches!(find_logical_scenarios(&cat, 2), Err(LogicalGenError::EmptyCatalog)));
}

#[test]
fn reduction_keeps_one_sorted_representative_per_multiset() {
    for name in ["T1", "X1", "Y1"] {
        let cat = catalog(name);
        for n in 2..=4 {
            let full = find_logical_scenarios(&cat, n).unwrap();
            let reduced = reduce_symmetries(&full);
            assert!(reduced.symmetry_reduced);
            let mut classes: BTreeMap<(String, Vec<String>), usize> = BTreeMap::new();
            for s in &full.scenarios {
                let mut ext = s.externals().to_vec();
                ext.sort();
                *classes.entry((s.ego().to_string(), ext)).or_default() += 1;
            }
            assert_eq!(reduced.len(), classes.len(), "{name} n={n}");
            for s in &reduced.scenarios {
                // every ordering of a dangerous external set is itself dangerous, so the
                // smallest ordering is the sorted one
                assert!(s.externals().windows(2).all(|w| w[0] <= w[1]), "{name} {}", s.id());
                assert!(full.scenarios.contains(s));
            }
        }
    }
}

#[test]
fn reduction_is_idempotent() {
    let full = find_logical_scenarios(&catalog("X1"), 3).unwrap();
    let once = reduce_symmetries(&full);
    assert_eq!(reduce_symmetries(&once), once);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any permutation of an accepted scenario's externals is accepted too.
    #[test]
    fn externals_are_exchangeable(idx in 0usize..1000, seed in any::<u64>()) {
        let cat = catalog("X1");
        let set = find_logical_scenarios(&cat, 3).unwrap();
        let s = &set.scenarios[idx % set.len()];
        let mut ext = s.externals().to_vec();
        if seed % 2 == 1 {
            ext.reverse();
        }
        let mut assignment = vec![s.ego().to_string()];
        assignment.extend(ext);
        prop_assert!(set.scenarios.iter().any(|t| t.assignment == assignment));
    }
}

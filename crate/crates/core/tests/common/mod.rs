#![allow(dead_code)]

pub mod oracles;

use junctest::concrete_gen::{ConcreteConfig, ConcreteScenario, Concretizer, SpeedProfile};
use junctest::fixtures::{fixture, JUNCTION_ID};
use junctest::logical_gen::{find_logical_scenarios, reduce_symmetries, OVERLAP_THRESHOLD};
use junctest::road_model::enumerate_maneuver_instances;

pub fn concretizer(name: &str) -> Concretizer {
    let map = fixture(name).unwrap();
    let cat = enumerate_maneuver_instances(&map, JUNCTION_ID).unwrap();
    Concretizer::new(&map, cat, OVERLAP_THRESHOLD, ConcreteConfig::default()).unwrap()
}

/// Every symmetry-reduced scenario of a fixture, concretized with default profiles.
pub fn suite(name: &str, n: usize) -> Vec<ConcreteScenario> {
    let cz = concretizer(name);
    let set = reduce_symmetries(&find_logical_scenarios(cz.catalog(), n).unwrap());
    set.scenarios.iter().map(|l| cz.concretize(l, &vec![SpeedProfile::default(); n]).unwrap()).collect()
}

pub fn eligible_suite(name: &str, n: usize) -> Vec<ConcreteScenario> {
    suite(name, n).into_iter().filter(|s| s.eligible()).collect()
}

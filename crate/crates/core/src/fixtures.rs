//! The border-control running example and a few small reference nets.
//!
//! Costs default to `(0, 2, 5, 2, 2)` for `n1..n5`; `n1` promotes
//! `free_movement`, the rest promote `safety`, and free movement is preferred.

use std::collections::BTreeSet;

use crate::norm_net::{build_norm_net, extend_with_in_force, Modality, Norm, NormNet, RelationSet};
use crate::rational::int;

pub const AIRPORT_COSTS: [i64; 5] = [0, 2, 5, 2, 2];

pub fn airport_norms_with_costs(costs: [i64; 5]) -> Vec<Norm> {
    let spec = [
        ("n1", Modality::Permission, "all_passengers", "cross_border", "free_movement"),
        ("n2", Modality::Obligation, "all_passengers", "register_passport", "safety"),
        ("n3", Modality::Obligation, "all_passengers", "fulfil_form", "safety"),
        ("n4", Modality::Obligation, "locals", "fulfil_form", "safety"),
        ("n5", Modality::Obligation, "visitors", "fulfil_form", "safety"),
    ];
    spec.iter()
        .zip(costs)
        .map(|(&(id, modality, who, what, value), cost)| {
            Norm::new(id, modality, who, what).with_cost(int(cost)).with_values([value])
        })
        .collect()
}

pub fn airport_norms() -> Vec<Norm> {
    airport_norms_with_costs(AIRPORT_COSTS)
}

pub fn airport_relations() -> RelationSet {
    RelationSet::new()
        .generalises("n3", "n4")
        .generalises("n3", "n5")
        .exclusive("n1", "n2")
        .exclusive("n1", "n3")
        .substitutable("n2", "n3")
}

pub fn airport_value_order() -> Vec<String> {
    vec!["free_movement".to_string(), "safety".to_string()]
}

pub fn airport_with_costs(costs: [i64; 5]) -> NormNet {
    build_norm_net(airport_norms_with_costs(costs), airport_relations(), BTreeSet::new())
        .expect("airport net is valid")
        .with_value_order(airport_value_order())
}

pub fn airport() -> NormNet {
    airport_with_costs(AIRPORT_COSTS)
}

/// `n6` (no unattended luggage) and `n7` (passport control), cost 1 each.
pub fn in_force_norms() -> Vec<Norm> {
    vec![
        Norm::new("n6", Modality::Prohibition, "all_passengers", "unattend_luggage")
            .with_cost(int(1))
            .with_values(["safety"]),
        Norm::new("n7", Modality::Obligation, "all_passengers", "passport_control")
            .with_cost(int(1))
            .with_values(["safety"]),
    ]
}

/// The airport net extended with `n6`, `n7` in force and `n7` exclusive with `n1`.
pub fn extended_airport(c1: i64) -> NormNet {
    let mut costs = AIRPORT_COSTS;
    costs[0] = c1;
    extend_with_in_force(&airport_with_costs(costs), in_force_norms(), RelationSet::new().exclusive("n7", "n1"))
        .expect("extended airport net is valid")
}

/// `ng` generalises `ns1`, `ns2`; `ns1` generalises `ns11`, `ns12`.
pub fn two_level_hierarchy() -> NormNet {
    let norms = ["ng", "ns1", "ns2", "ns11", "ns12"]
        .map(|id| Norm::new(id, Modality::Obligation, "everyone", format!("act_{id}")))
        .to_vec();
    let rel = RelationSet::new()
        .generalises("ng", "ns1")
        .generalises("ng", "ns2")
        .generalises("ns1", "ns11")
        .generalises("ns1", "ns12");
    build_norm_net(norms, rel, BTreeSet::new()).expect("hierarchy is valid")
}

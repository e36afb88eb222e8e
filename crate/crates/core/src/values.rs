//! Moral values: utilities from a strict preference order, and the value
//! support of norms and norm systems.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::norm_net::{NormId, NormNet, NormSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("value order is empty")]
    EmptyOrder,
    #[error("value `{0}` appears twice in the value order")]
    DuplicateValueId(String),
    #[error("norm `{0}` supports no value")]
    NormWithoutValues(NormId),
    #[error("norm `{norm}` supports value `{value}`, which is not in the value order")]
    UnknownValueId { norm: NormId, value: String },
    #[error("no value support known for norm `{0}`")]
    MissingEntry(NormId),
}

/// Values from most to least preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueOrder(Vec<String>);

impl ValueOrder {
    pub fn new<I, S>(ids: I) -> Result<Self, ValueError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        if ids.is_empty() {
            return Err(ValueError::EmptyOrder);
        }
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id) {
                return Err(ValueError::DuplicateValueId(id.clone()));
            }
        }
        Ok(ValueOrder(ids))
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityAssignment {
    pub utility: BTreeMap<String, BigInt>,
}

/// `u(v_i) = 1 + sum of u(v_k)` over every less preferred `v_k`.
pub fn value_utilities(order: &ValueOrder) -> UtilityAssignment {
    let mut utility = BTreeMap::new();
    let mut tail = BigInt::zero();
    for id in order.ids().iter().rev() {
        let u = BigInt::one() + &tail;
        tail += &u;
        utility.insert(id.clone(), u);
    }
    UtilityAssignment { utility }
}

/// Sum of the utilities of the values each norm supports.
pub fn norm_value_support(
    net: &NormNet,
    utilities: &UtilityAssignment,
) -> Result<BTreeMap<NormId, BigInt>, ValueError> {
    net.norms()
        .map(|norm| {
            if norm.values.is_empty() {
                return Err(ValueError::NormWithoutValues(norm.id.clone()));
            }
            let support = norm.values.iter().try_fold(BigInt::zero(), |acc, v| {
                utilities
                    .utility
                    .get(v)
                    .map(|u| acc + u)
                    .ok_or_else(|| ValueError::UnknownValueId { norm: norm.id.clone(), value: v.clone() })
            })?;
            Ok((norm.id.clone(), support))
        })
        .collect()
}

pub fn system_value_support(support: &BTreeMap<NormId, BigInt>, system: &NormSystem) -> Result<BigInt, ValueError> {
    system.iter().try_fold(BigInt::zero(), |acc, id| {
        support.get(id).map(|u| acc + u).ok_or_else(|| ValueError::MissingEntry(id.clone()))
    })
}

/// Normalisation constant: the value support of the whole net.
pub fn max_value_support(support: &BTreeMap<NormId, BigInt>) -> BigInt {
    support.values().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{airport, airport_norms, airport_relations};
    use crate::norm_net::build_norm_net;

    fn utilities(ids: &[&str]) -> Vec<i64> {
        let order = ValueOrder::new(ids.iter().copied()).unwrap();
        let u = value_utilities(&order);
        ids.iter().map(|id| i64::try_from(&u.utility[*id]).unwrap()).collect()
    }

    #[test]
    fn utilities_follow_the_recurrence() {
        assert_eq!(utilities(&["free_movement", "safety"]), vec![2, 1]);
        assert_eq!(utilities(&["v"]), vec![1]);
        assert_eq!(utilities(&["a", "b", "c"]), vec![4, 2, 1]);
    }

    #[test]
    fn closed_form_matches_recurrence() {
        // Powers of two, checked against the recurrence unrolled by hand.
        for len in 1..=10usize {
            let ids: Vec<String> = (0..len).map(|i| format!("v{i}")).collect();
            let u = value_utilities(&ValueOrder::new(ids.clone()).unwrap());
            for (i, id) in ids.iter().enumerate() {
                let tail: BigInt = ids[i + 1..].iter().map(|k| u.utility[k].clone()).sum();
                assert_eq!(u.utility[id], BigInt::one() + tail);
                assert_eq!(u.utility[id], BigInt::from(1u64 << (len - 1 - i)));
            }
        }
    }

    #[test]
    fn order_errors() {
        assert_eq!(ValueOrder::new(Vec::<String>::new()), Err(ValueError::EmptyOrder));
        assert_eq!(ValueOrder::new(["a", "b", "a"]), Err(ValueError::DuplicateValueId("a".into())));
    }

    #[test]
    fn airport_value_support() {
        let net = airport();
        let u = value_utilities(&ValueOrder::new(net.value_order().to_vec()).unwrap());
        let support = norm_value_support(&net, &u).unwrap();
        assert_eq!(support["n1"], BigInt::from(2));
        for id in ["n2", "n3", "n4", "n5"] {
            assert_eq!(support[id], BigInt::from(1));
        }
        assert_eq!(system_value_support(&support, &NormSystem::new(["n1", "n4"])).unwrap(), BigInt::from(3));
        assert_eq!(system_value_support(&support, &NormSystem::empty()).unwrap(), BigInt::zero());
        assert_eq!(max_value_support(&support), BigInt::from(6));
        assert!(system_value_support(&support, &NormSystem::new(["x"])).is_err());
    }

    #[test]
    fn support_errors() {
        let mut norms = airport_norms();
        norms[0].values = ["free_movement", "safety"].map(String::from).into();
        let net = build_norm_net(norms.clone(), airport_relations(), Default::default()).unwrap();
        let u = value_utilities(&ValueOrder::new(["free_movement", "safety"]).unwrap());
        assert_eq!(norm_value_support(&net, &u).unwrap()["n1"], BigInt::from(3));

        norms[1].values.clear();
        let net = build_norm_net(norms.clone(), airport_relations(), Default::default()).unwrap();
        assert_eq!(norm_value_support(&net, &u), Err(ValueError::NormWithoutValues("n2".into())));

        norms[1].values = ["privacy".to_string()].into();
        let net = build_norm_net(norms, airport_relations(), Default::default()).unwrap();
        assert!(matches!(norm_value_support(&net, &u), Err(ValueError::UnknownValueId { .. })));
    }
}

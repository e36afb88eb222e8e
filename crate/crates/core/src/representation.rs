//! Representation power of norms and norm systems.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm_net::{NormId, NormNet, NormSystem};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Inclusion,
    Generalisation,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationAssignment {
    pub kind: RepresentationKind,
    pub power: BTreeMap<NormId, Rational>,
}

impl RepresentationAssignment {
    pub fn custom(power: BTreeMap<NormId, Rational>) -> Self {
        RepresentationAssignment { kind: RepresentationKind::Custom, power }
    }

    pub fn get(&self, id: &str) -> Result<&Rational, RepresentationError> {
        self.power.get(id).ok_or_else(|| RepresentationError::MissingEntry(id.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepresentationError {
    #[error("no representation power given for norm `{0}`")]
    MissingEntry(NormId),
    #[error("representation power of norm `{0}` is not positive")]
    NonPositivePower(NormId),
    #[error("norm `{norm}` has more representation power than its ancestor `{ancestor}`")]
    AncestorMonotonicityViolation { norm: NormId, ancestor: NormId },
}

/// One for childless norms, otherwise one plus the children's inclusion power.
pub fn inclusion_power(net: &NormNet) -> RepresentationAssignment {
    fn visit(net: &NormNet, id: &str, memo: &mut BTreeMap<NormId, Rational>) -> Rational {
        if let Some(v) = memo.get(id) {
            return v.clone();
        }
        let total = net.children(id).fold(Rational::one(), |acc, kid| acc + visit(net, kid, memo));
        memo.insert(id.to_string(), total.clone());
        total
    }

    let mut power = BTreeMap::new();
    for id in net.ids() {
        visit(net, id, &mut power);
    }
    RepresentationAssignment { kind: RepresentationKind::Inclusion, power }
}

/// Level-by-level division of each parent's power among its sibling group,
/// starting from power one at every non-generalised norm.
pub fn generalisation_power(net: &NormNet) -> RepresentationAssignment {
    let mut power: BTreeMap<NormId, Rational> = BTreeMap::new();
    let mut pending: Vec<&NormId> = net.ids().collect();

    for id in net.roots() {
        power.insert(id.clone(), Rational::one());
    }
    pending.retain(|id| !power.contains_key(*id));

    while !pending.is_empty() {
        // Sibling groups whose common parent already has a power.
        let mut groups: BTreeMap<&NormId, Vec<&NormId>> = BTreeMap::new();
        for id in &pending {
            let parent = net.parent(id).expect("non-root norms have a parent");
            if power.contains_key(parent) {
                groups.entry(parent).or_default().push(id);
            }
        }
        assert!(!groups.is_empty(), "generalisation forest guarantees progress");
        for (parent, siblings) in &groups {
            let share = &power[*parent] / int(siblings.len() as i64);
            for id in siblings {
                power.insert((*id).clone(), share.clone());
            }
        }
        pending.retain(|id| !power.contains_key(*id));
    }
    RepresentationAssignment { kind: RepresentationKind::Generalisation, power }
}

/// Every norm has a positive power, and no norm outweighs any of its ancestors.
/// Entries for norms outside the net are ignored.
pub fn validate_representation(
    net: &NormNet,
    assignment: &RepresentationAssignment,
) -> Result<(), RepresentationError> {
    for id in net.ids() {
        if *assignment.get(id)? <= Rational::zero() {
            return Err(RepresentationError::NonPositivePower(id.clone()));
        }
    }
    for id in net.ids() {
        let own = assignment.get(id)?;
        for ancestor in net.ancestors(id).expect("id from net") {
            if own > assignment.get(ancestor)? {
                return Err(RepresentationError::AncestorMonotonicityViolation {
                    norm: id.clone(),
                    ancestor: ancestor.clone(),
                });
            }
        }
    }
    Ok(())
}

pub fn system_power(
    assignment: &RepresentationAssignment,
    system: &NormSystem,
) -> Result<Rational, RepresentationError> {
    system.iter().try_fold(Rational::zero(), |acc, id| Ok(acc + assignment.get(id)?))
}

/// Sum of the powers of the non-generalised norms.
pub fn max_representation(
    net: &NormNet,
    assignment: &RepresentationAssignment,
) -> Result<Rational, RepresentationError> {
    net.roots().iter().try_fold(Rational::zero(), |acc, id| Ok(acc + assignment.get(id)?))
}

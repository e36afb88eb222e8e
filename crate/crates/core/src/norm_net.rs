//! Norms, the three norm relations, and the structure derived from them.
//!
//! A [`NormNet`] is only ever obtained through [`build_norm_net`] (or
//! [`extend_with_in_force`]), so every value of the type satisfies the
//! relation invariants: known endpoints, irreflexive and pairwise disjoint
//! relation sets, and a generalisation forest.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub type NormId = String;
pub type IdPair = (NormId, NormId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Obligation,
    Permission,
    Prohibition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Norm {
    pub id: NormId,
    pub modality: Modality,
    pub addressee: String,
    pub action: String,
    pub cost: Rational,
    pub values: BTreeSet<String>,
}

impl Norm {
    pub fn new(id: impl Into<String>, modality: Modality, addressee: impl Into<String>, action: impl Into<String>) -> Self {
        Norm {
            id: id.into(),
            modality,
            addressee: addressee.into(),
            action: action.into(),
            cost: Rational::zero(),
            values: BTreeSet::new(),
        }
    }

    pub fn with_cost(mut self, cost: Rational) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_values<I, S>(mut self, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.values = values.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Generalisation,
    Exclusivity,
    Substitutability,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Generalisation => "generalisation",
            Relation::Exclusivity => "exclusivity",
            Relation::Substitutability => "substitutability",
        })
    }
}

/// Orders an unordered pair so the smaller id comes first.
pub fn unordered(a: impl Into<String>, b: impl Into<String>) -> IdPair {
    let (a, b) = (a.into(), b.into());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Raw relations as supplied by the caller.
///
/// Generalisation pairs are ordered `(general, specific)`. Exclusivity and
/// substitutability pairs are stored normalised with the smaller id first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationSet {
    pub generalisation: BTreeSet<IdPair>,
    pub exclusivity: BTreeSet<IdPair>,
    pub substitutability: BTreeSet<IdPair>,
}

impl RelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn generalises(mut self, general: &str, specific: &str) -> Self {
        self.generalisation.insert((general.to_string(), specific.to_string()));
        self
    }

    pub fn exclusive(mut self, a: &str, b: &str) -> Self {
        self.exclusivity.insert(unordered(a, b));
        self
    }

    pub fn substitutable(mut self, a: &str, b: &str) -> Self {
        self.substitutability.insert(unordered(a, b));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.generalisation.is_empty() && self.exclusivity.is_empty() && self.substitutability.is_empty()
    }

    fn all(&self) -> impl Iterator<Item = (Relation, &IdPair)> {
        self.generalisation
            .iter()
            .map(|p| (Relation::Generalisation, p))
            .chain(self.exclusivity.iter().map(|p| (Relation::Exclusivity, p)))
            .chain(self.substitutability.iter().map(|p| (Relation::Substitutability, p)))
    }

    fn union(&self, other: &RelationSet) -> RelationSet {
        RelationSet {
            generalisation: self.generalisation.union(&other.generalisation).cloned().collect(),
            exclusivity: self.exclusivity.union(&other.exclusivity).cloned().collect(),
            substitutability: self.substitutability.union(&other.substitutability).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("duplicate norm id `{0}`")]
    DuplicateId(NormId),
    #[error("invalid norm id `{0}` (use ASCII letters, digits, `-` or `.`)")]
    InvalidId(NormId),
    #[error("norm `{id}` has an empty {field}")]
    EmptyField { id: NormId, field: &'static str },
    #[error("norm `{0}` has a negative cost")]
    NegativeCost(NormId),
    #[error("{relation} pair ({}, {}) refers to unknown norm `{missing}`", pair.0, pair.1)]
    UnknownEndpoint { relation: Relation, pair: IdPair, missing: NormId },
    #[error("{relation} relates norm `{id}` to itself")]
    SelfRelation { relation: Relation, id: NormId },
    #[error("pair ({}, {}) appears in both {first} and {second}", pair.0, pair.1)]
    OverlappingRelationSets { pair: IdPair, first: Relation, second: Relation },
    #[error("generalisation cycle through {}", ids.join(", "))]
    GeneralisationCycle { ids: Vec<NormId> },
    #[error("norm `{id}` is generalised by more than one norm ({})", parents.join(", "))]
    MultipleParents { id: NormId, parents: Vec<NormId> },
    #[error("norm in force `{0}` is not in the net")]
    UnknownInForce(NormId),
    #[error("norm id `{0}` exists in both the net and the norms in force")]
    IdCollision(NormId),
    #[error("unknown norm `{0}`")]
    UnknownId(NormId),
}

/// A subset of a net's norms.
///
/// Ordering is the canonical report order: by cardinality, then
/// lexicographically by the sorted ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormSystem(pub BTreeSet<NormId>);

impl NormSystem {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NormSystem(ids.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NormId> {
        self.0.iter()
    }
}

impl Ord for NormSystem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for NormSystem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NormSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            f.write_str(id)?;
        }
        write!(f, "}}")
    }
}

/// Why a pair of norms cannot be selected together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Exclusivity,
    Generalisation,
    Ancestor,
    Substitutability,
    /// Every child of the named parent is selected.
    AllChildren,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub pair: IdPair,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub conflict_free: bool,
    pub non_redundant: bool,
    pub sound: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormNet {
    norms: BTreeMap<NormId, Norm>,
    relations: RelationSet,
    in_force: BTreeSet<NormId>,
    value_order: Vec<String>,
    children: BTreeMap<NormId, BTreeSet<NormId>>,
    parent: BTreeMap<NormId, NormId>,
    ancestors: BTreeMap<NormId, BTreeSet<NormId>>,
    substitution: BTreeSet<IdPair>,
    roots: BTreeSet<NormId>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'.')
}

/// Validates norms and relations and computes the derived structure.
pub fn build_norm_net(
    norms: Vec<Norm>,
    relations: RelationSet,
    in_force: BTreeSet<NormId>,
) -> Result<NormNet, ValidationError> {
    let mut by_id = BTreeMap::new();
    for norm in norms {
        if !valid_id(&norm.id) {
            return Err(ValidationError::InvalidId(norm.id));
        }
        for (field, text) in [("addressee", &norm.addressee), ("action", &norm.action)] {
            if text.trim().is_empty() {
                return Err(ValidationError::EmptyField { id: norm.id.clone(), field });
            }
        }
        if norm.cost.is_negative() {
            return Err(ValidationError::NegativeCost(norm.id));
        }
        if by_id.contains_key(&norm.id) {
            return Err(ValidationError::DuplicateId(norm.id));
        }
        by_id.insert(norm.id.clone(), norm);
    }

    // Normalise unordered pairs in case the caller filled the sets directly.
    let relations = RelationSet {
        generalisation: relations.generalisation,
        exclusivity: relations.exclusivity.into_iter().map(|(a, b)| unordered(a, b)).collect(),
        substitutability: relations.substitutability.into_iter().map(|(a, b)| unordered(a, b)).collect(),
    };

    for (relation, pair) in relations.all() {
        for end in [&pair.0, &pair.1] {
            if !by_id.contains_key(end) {
                return Err(ValidationError::UnknownEndpoint {
                    relation,
                    pair: pair.clone(),
                    missing: end.clone(),
                });
            }
        }
        if pair.0 == pair.1 {
            return Err(ValidationError::SelfRelation { relation, id: pair.0.clone() });
        }
    }

    let mut seen: BTreeMap<IdPair, Relation> = BTreeMap::new();
    for (relation, pair) in relations.all() {
        let key = unordered(pair.0.clone(), pair.1.clone());
        match seen.get(&key) {
            Some(&first) if first != relation => {
                return Err(ValidationError::OverlappingRelationSets { pair: key, first, second: relation });
            }
            _ => {
                seen.insert(key, relation);
            }
        }
    }

    for id in &in_force {
        if !by_id.contains_key(id) {
            return Err(ValidationError::UnknownInForce(id.clone()));
        }
    }

    let mut children: BTreeMap<NormId, BTreeSet<NormId>> = BTreeMap::new();
    let mut parents: BTreeMap<NormId, BTreeSet<NormId>> = BTreeMap::new();
    for (general, specific) in &relations.generalisation {
        children.entry(general.clone()).or_default().insert(specific.clone());
        parents.entry(specific.clone()).or_default().insert(general.clone());
    }
    check_acyclic(&by_id, &children)?;
    let mut parent = BTreeMap::new();
    for (id, ps) in parents {
        if ps.len() > 1 {
            return Err(ValidationError::MultipleParents { id, parents: ps.into_iter().collect() });
        }
        parent.insert(id, ps.into_iter().next().expect("non-empty"));
    }

    let ancestors = by_id
        .keys()
        .map(|id| {
            let mut up = BTreeSet::new();
            let mut cur = id;
            while let Some(p) = parent.get(cur) {
                up.insert(p.clone());
                cur = p;
            }
            (id.clone(), up)
        })
        .collect();
    let roots = by_id.keys().filter(|id| !parent.contains_key(*id)).cloned().collect();
    let substitution = chain_closure(&relations.substitutability);

    Ok(NormNet {
        norms: by_id,
        relations,
        in_force,
        value_order: Vec::new(),
        children,
        parent,
        ancestors,
        substitution,
        roots,
    })
}

/// Kahn's algorithm; whatever survives the peeling lies on or behind a cycle.
fn check_acyclic(
    norms: &BTreeMap<NormId, Norm>,
    children: &BTreeMap<NormId, BTreeSet<NormId>>,
) -> Result<(), ValidationError> {
    let mut indegree: BTreeMap<&NormId, usize> = norms.keys().map(|id| (id, 0)).collect();
    for kids in children.values() {
        for kid in kids {
            *indegree.get_mut(kid).expect("endpoints checked") += 1;
        }
    }
    let mut queue: VecDeque<&NormId> = indegree.iter().filter(|(_, &d)| d == 0).map(|(id, _)| *id).collect();
    while let Some(id) = queue.pop_front() {
        indegree.remove(id);
        for kid in children.get(id).into_iter().flatten() {
            let d = indegree.get_mut(kid).expect("pending");
            *d -= 1;
            if *d == 0 {
                queue.push_back(kid);
            }
        }
    }
    if indegree.is_empty() {
        Ok(())
    } else {
        Err(ValidationError::GeneralisationCycle { ids: indegree.keys().map(|id| (*id).clone()).collect() })
    }
}

/// Pairs connected by a chain of substitutabilities, without self-pairs.
fn chain_closure(edges: &BTreeSet<IdPair>) -> BTreeSet<IdPair> {
    let mut adjacency: BTreeMap<&NormId, Vec<&NormId>> = BTreeMap::new();
    for (a, b) in edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    let mut visited = BTreeSet::new();
    let mut closure = BTreeSet::new();
    for &start in adjacency.keys() {
        if !visited.insert(start) {
            continue;
        }
        let mut component = vec![start];
        let mut stack = vec![start];
        while let Some(cur) = stack.pop() {
            for &next in &adjacency[cur] {
                if visited.insert(next) {
                    component.push(next);
                    stack.push(next);
                }
            }
        }
        for (i, a) in component.iter().enumerate() {
            for b in &component[i + 1..] {
                closure.insert(unordered(a.as_str(), b.as_str()));
            }
        }
    }
    closure
}

impl NormNet {
    pub fn empty() -> Self {
        build_norm_net(Vec::new(), RelationSet::new(), BTreeSet::new()).expect("empty net is valid")
    }

    pub fn with_value_order(mut self, order: Vec<String>) -> Self {
        self.value_order = order;
        self
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn norm(&self, id: &str) -> Option<&Norm> {
        self.norms.get(id)
    }

    pub fn norms(&self) -> impl Iterator<Item = &Norm> {
        self.norms.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &NormId> {
        self.norms.keys()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.norms.contains_key(id)
    }

    pub fn relations(&self) -> &RelationSet {
        &self.relations
    }

    pub fn in_force(&self) -> &BTreeSet<NormId> {
        &self.in_force
    }

    pub fn value_order(&self) -> &[String] {
        &self.value_order
    }

    pub fn children(&self, id: &str) -> impl Iterator<Item = &NormId> {
        self.children.get(id).into_iter().flatten()
    }

    pub fn parent(&self, id: &str) -> Option<&NormId> {
        self.parent.get(id)
    }

    /// Norms that no other norm generalises.
    pub fn roots(&self) -> &BTreeSet<NormId> {
        &self.roots
    }

    /// Norms that generalise at least one other norm, with their children.
    pub fn parents_with_children(&self) -> impl Iterator<Item = (&NormId, &BTreeSet<NormId>)> {
        self.children.iter()
    }

    pub fn ancestors(&self, id: &str) -> Result<&BTreeSet<NormId>, ValidationError> {
        self.ancestors.get(id).ok_or_else(|| ValidationError::UnknownId(id.to_string()))
    }

    pub fn substitution_closure(&self) -> &BTreeSet<IdPair> {
        &self.substitution
    }

    /// The reason `a` and `b` may not be selected together, if any.
    pub fn pair_violation(&self, a: &str, b: &str) -> Option<Violation> {
        let key = unordered(a, b);
        if self.relations.exclusivity.contains(&key) {
            return Some(Violation::Exclusivity);
        }
        if self.parent.get(a).is_some_and(|p| p == b) || self.parent.get(b).is_some_and(|p| p == a) {
            return Some(Violation::Generalisation);
        }
        if self.ancestors.get(a).is_some_and(|up| up.contains(b))
            || self.ancestors.get(b).is_some_and(|up| up.contains(a))
        {
            return Some(Violation::Ancestor);
        }
        if self.substitution.contains(&key) {
            return Some(Violation::Substitutability);
        }
        None
    }

    fn check_members(&self, system: &NormSystem) -> Result<(), ValidationError> {
        match system.iter().find(|id| !self.contains(id)) {
            Some(id) => Err(ValidationError::UnknownId(id.clone())),
            None => Ok(()),
        }
    }

    pub fn soundness_report(&self, system: &NormSystem) -> Result<SoundnessReport, ValidationError> {
        self.check_members(system)?;
        let members: Vec<&NormId> = system.iter().collect();
        let mut witnesses = Vec::new();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if let Some(violation) = self.pair_violation(a, b) {
                    witnesses.push(Witness { pair: ((*a).clone(), (*b).clone()), violation });
                }
            }
        }
        let conflict_free = !witnesses.iter().any(|w| w.violation == Violation::Exclusivity);
        let non_redundant = witnesses.iter().all(|w| w.violation == Violation::Exclusivity);
        Ok(SoundnessReport { conflict_free, non_redundant, sound: witnesses.is_empty(), witnesses })
    }

    /// Norms with two or more children whose children are all in `system`.
    pub fn saturated_parents<'a>(&'a self, system: &'a NormSystem) -> impl Iterator<Item = &'a NormId> + 'a {
        self.children
            .iter()
            .filter(move |(_, kids)| kids.len() >= 2 && kids.iter().all(|k| system.contains(k)))
            .map(|(p, _)| p)
    }

    /// Sound, and no norm with two or more children has all of them selected.
    /// This is exactly the feasible set of the structural 0/1 constraints.
    pub fn ilp_feasible(&self, system: &NormSystem) -> Result<bool, ValidationError> {
        Ok(self.soundness_report(system)?.sound && self.saturated_parents(system).next().is_none())
    }

    /// Problem 2: some non-empty sound system exists iff the net has a norm.
    pub fn exists_sound_nonempty(&self) -> bool {
        !self.norms.is_empty()
    }

    /// The sub-net induced by `keep`, with relations restricted to it and no
    /// norms in force.
    pub fn restrict(&self, keep: &BTreeSet<NormId>) -> NormNet {
        let inside = |p: &IdPair| keep.contains(&p.0) && keep.contains(&p.1);
        let relations = RelationSet {
            generalisation: self.relations.generalisation.iter().filter(|p| inside(p)).cloned().collect(),
            exclusivity: self.relations.exclusivity.iter().filter(|p| inside(p)).cloned().collect(),
            substitutability: self.relations.substitutability.iter().filter(|p| inside(p)).cloned().collect(),
        };
        let norms = self.norms.values().filter(|n| keep.contains(&n.id)).cloned().collect();
        build_norm_net(norms, relations, BTreeSet::new())
            .expect("an induced sub-net of a valid net is valid")
            .with_value_order(self.value_order.clone())
    }

    pub(crate) fn parts(&self) -> (Vec<Norm>, RelationSet) {
        (self.norms.values().cloned().collect(), self.relations.clone())
    }
}

/// Free-function form of [`NormNet::ancestors`].
pub fn ancestors<'a>(net: &'a NormNet, id: &str) -> Result<&'a BTreeSet<NormId>, ValidationError> {
    net.ancestors(id)
}

pub fn substitution_closure(net: &NormNet) -> &BTreeSet<IdPair> {
    net.substitution_closure()
}

/// Merges norms already in force with a net of candidates. The result's
/// in-force set is exactly the ids of `in_force_norms`.
pub fn extend_with_in_force(
    net: &NormNet,
    in_force_norms: Vec<Norm>,
    extra: RelationSet,
) -> Result<NormNet, ValidationError> {
    for norm in &in_force_norms {
        if net.contains(&norm.id) {
            return Err(ValidationError::IdCollision(norm.id.clone()));
        }
    }
    let in_force = in_force_norms.iter().map(|n| n.id.clone()).collect();
    let (mut norms, relations) = net.parts();
    norms.extend(in_force_norms);
    Ok(build_norm_net(norms, relations.union(&extra), in_force)?.with_value_order(net.value_order.clone()))
}

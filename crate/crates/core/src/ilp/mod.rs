//! Translation of a norm net and a problem configuration into a 0/1 linear
//! program, independent of any particular solver.

mod lp;

pub use lp::{export_lp, parse_lp, LpParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm_net::{NormId, NormNet, NormSystem};
use crate::rational::{format_exact, int, quantize, Rational};
use crate::representation::{
    generalisation_power, inclusion_power, max_representation, validate_representation,
    RepresentationAssignment, RepresentationError,
};
use crate::values::{max_value_support, norm_value_support, value_utilities, ValueError, ValueOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Maximum representation power.
    Mnsp,
    /// Representation against cost, under a budget.
    Mnsplb,
    /// As `Mnsplb`, plus value support.
    Vmnsplb,
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mnsp" => Ok(Problem::Mnsp),
            "mnsplb" => Ok(Problem::Mnsplb),
            "vmnsplb" => Ok(Problem::Vmnsplb),
            other => Err(format!("unknown problem `{other}`")),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Mnsp => "mnsp",
            Problem::Mnsplb => "mnsplb",
            Problem::Vmnsplb => "vmnsplb",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepresentationChoice {
    Inclusion,
    Generalisation,
    Custom(RepresentationAssignment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InForceMode {
    /// Norms in force are left out of the model.
    Ignore,
    /// Norms in force are pinned to be selected.
    Preserve,
    /// Norms in force compete with the candidates on equal terms.
    #[default]
    Flexible,
}

impl FromStr for InForceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ignore" => Ok(InForceMode::Ignore),
            "preserve" => Ok(InForceMode::Preserve),
            "flexible" => Ok(InForceMode::Flexible),
            other => Err(format!("unknown in-force mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    pub representation: Rational,
    pub cost: Rational,
    pub value: Rational,
}

impl Weights {
    pub fn new(representation: Rational, cost: Rational, value: Rational) -> Self {
        Weights { representation, cost, value }
    }
}

impl Default for Weights {
    fn default() -> Self {
        Weights::new(Rational::one(), Rational::zero(), Rational::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemConfig {
    pub problem: Problem,
    pub representation: RepresentationChoice,
    pub budget: Option<Rational>,
    pub weights: Weights,
    pub in_force_mode: InForceMode,
}

impl ProblemConfig {
    pub fn mnsp(representation: RepresentationChoice) -> Self {
        ProblemConfig {
            problem: Problem::Mnsp,
            representation,
            budget: None,
            weights: Weights::default(),
            in_force_mode: InForceMode::default(),
        }
    }

    pub fn mnsplb(representation: RepresentationChoice, budget: Rational, w_r: Rational, w_c: Rational) -> Self {
        ProblemConfig {
            problem: Problem::Mnsplb,
            representation,
            budget: Some(budget),
            weights: Weights::new(w_r, w_c, Rational::zero()),
            in_force_mode: InForceMode::default(),
        }
    }

    pub fn vmnsplb(representation: RepresentationChoice, budget: Rational, weights: Weights) -> Self {
        ProblemConfig {
            problem: Problem::Vmnsplb,
            representation,
            budget: Some(budget),
            weights,
            in_force_mode: InForceMode::default(),
        }
    }

    pub fn with_in_force(mut self, mode: InForceMode) -> Self {
        self.in_force_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let bad = |msg: String| Err(EncodeError::ConfigInvariantViolation(msg));
        if self.problem == Problem::Mnsp {
            return Ok(());
        }
        match &self.budget {
            None => return bad(format!("{} needs a budget", self.problem)),
            Some(b) if !b.is_positive() => return bad(format!("budget must be positive, got {}", format_exact(b))),
            _ => {}
        }
        let w = &self.weights;
        for (name, v) in [("w_r", &w.representation), ("w_c", &w.cost), ("w_v", &w.value)] {
            if v.is_negative() || *v > Rational::one() {
                return bad(format!("{name} must lie in [0, 1], got {}", format_exact(v)));
            }
        }
        let total = &w.representation + &w.cost + &w.value;
        if self.problem == Problem::Mnsplb && !w.value.is_zero() {
            return bad("mnsplb takes no value weight".to_string());
        }
        if !total.is_one() {
            return bad(format!("weights must sum to 1, got {}", format_exact(&total)));
        }
        Ok(())
    }

    fn uses_values(&self) -> bool {
        self.problem == Problem::Vmnsplb && !self.weights.value.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("invalid problem configuration: {0}")]
    ConfigInvariantViolation(String),
    #[error("invalid representation power: {0}")]
    MissingRepresentation(#[from] RepresentationError),
    #[error(transparent)]
    Values(#[from] ValueError),
    #[error("maximum representation power is zero (the net has no norms)")]
    ZeroRMax,
    #[error("maximum value support is zero")]
    ZeroVMax,
}

/// Everything both the encoder and the enumeration oracle need to score a
/// norm system: the net actually optimised over and its normalisation
/// constants.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub net: NormNet,
    pub power: RepresentationAssignment,
    pub r_max: Rational,
    pub value_support: Option<BTreeMap<NormId, BigInt>>,
    pub v_max: Option<BigInt>,
    pub pinned: BTreeSet<NormId>,
}

pub fn prepare(net: &NormNet, config: &ProblemConfig) -> Result<Prepared, EncodeError> {
    config.validate()?;
    let net = match config.in_force_mode {
        InForceMode::Ignore if !net.in_force().is_empty() => {
            let keep = net.ids().filter(|id| !net.in_force().contains(*id)).cloned().collect();
            net.restrict(&keep)
        }
        _ => net.clone(),
    };
    if net.is_empty() {
        return Err(EncodeError::ZeroRMax);
    }
    let power = match &config.representation {
        RepresentationChoice::Inclusion => inclusion_power(&net),
        RepresentationChoice::Generalisation => generalisation_power(&net),
        RepresentationChoice::Custom(assignment) => assignment.clone(),
    };
    validate_representation(&net, &power)?;
    let r_max = max_representation(&net, &power)?;
    if r_max.is_zero() {
        return Err(EncodeError::ZeroRMax);
    }
    let (value_support, v_max) = if config.uses_values() {
        let order = ValueOrder::new(net.value_order().to_vec())?;
        let support = norm_value_support(&net, &value_utilities(&order))?;
        let v_max = max_value_support(&support);
        if v_max.is_zero() {
            return Err(EncodeError::ZeroVMax);
        }
        (Some(support), Some(v_max))
    } else {
        (None, None)
    };
    let pinned = match config.in_force_mode {
        InForceMode::Preserve => net.in_force().clone(),
        _ => BTreeSet::new(),
    };
    Ok(Prepared { net, power, r_max, value_support, v_max, pinned })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparison {
    LessEq,
    Equal,
}

pub type Terms = Vec<(usize, Rational)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Terms,
    pub cmp: Comparison,
    pub rhs: Rational,
}

impl Constraint {
    fn holds(&self, x: &[bool]) -> bool {
        let lhs: Rational = self.terms.iter().filter(|(v, _)| x[*v]).map(|(_, c)| c).sum();
        match self.cmp {
            Comparison::LessEq => lhs <= self.rhs,
            Comparison::Equal => lhs == self.rhs,
        }
    }
}

/// Maximisation objective: `sum(coef * var) + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Objective {
    pub terms: Terms,
    pub constant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpModel {
    pub variables: Vec<Variable>,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    /// Variable index of each norm's selection variable.
    pub norm_vars: BTreeMap<usize, NormId>,
    /// The non-empty-system indicator, when the objective has a cost term.
    pub indicator: Option<usize>,
    pub big_m: Option<Rational>,
}

impl IlpModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn satisfies(&self, x: &[bool]) -> bool {
        assert_eq!(x.len(), self.variables.len());
        self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn objective_value(&self, x: &[bool]) -> Rational {
        let linear: Rational = self.objective.terms.iter().filter(|(v, _)| x[*v]).map(|(_, c)| c).sum();
        linear + &self.objective.constant
    }

    /// The 0/1 point selecting exactly `system`, with the indicator set iff
    /// the system is non-empty. Norms outside the model are ignored.
    pub fn assignment_for(&self, system: &NormSystem) -> Vec<bool> {
        let mut x = vec![false; self.variables.len()];
        for (&var, id) in &self.norm_vars {
            x[var] = system.contains(id);
        }
        if let Some(y) = self.indicator {
            x[y] = self.norm_vars.values().any(|id| system.contains(id));
        }
        x
    }

    pub fn system_of(&self, x: &[bool]) -> NormSystem {
        NormSystem(self.norm_vars.iter().filter(|(v, _)| x[**v]).map(|(_, id)| id.clone()).collect())
    }

    /// Every coefficient and right-hand side rounded to `digits` significant digits.
    pub fn quantized(&self, digits: usize) -> IlpModel {
        let q = |terms: &Terms| terms.iter().map(|(v, c)| (*v, quantize(c, digits))).collect();
        IlpModel {
            variables: self.variables.clone(),
            objective: Objective { terms: q(&self.objective.terms), constant: quantize(&self.objective.constant, digits) },
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint { name: c.name.clone(), terms: q(&c.terms), cmp: c.cmp, rhs: quantize(&c.rhs, digits) })
                .collect(),
            norm_vars: self.norm_vars.clone(),
            indicator: self.indicator,
            big_m: self.big_m.as_ref().map(|m| quantize(m, digits)),
        }
    }
}

/// Merges repeated variables, drops zero coefficients, sorts by variable and,
/// for equalities, makes the leading coefficient positive.
fn canonical(terms: Terms, cmp: Comparison, rhs: Rational) -> (Terms, Comparison, Rational) {
    let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
    for (v, c) in terms {
        *merged.entry(v).or_insert_with(Rational::zero) += c;
    }
    let mut terms: Terms = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    let mut rhs = rhs;
    if cmp == Comparison::Equal && terms.first().is_some_and(|(_, c)| c.is_negative()) {
        for (_, c) in terms.iter_mut() {
            *c = -c.clone();
        }
        rhs = -rhs;
    }
    (terms, cmp, rhs)
}

struct ConstraintSink {
    constraints: Vec<Constraint>,
    seen: BTreeSet<(Terms, Comparison, Rational)>,
}

impl ConstraintSink {
    fn push(&mut self, name: String, terms: Terms, cmp: Comparison, rhs: Rational) {
        let key = canonical(terms, cmp, rhs);
        if self.seen.insert(key.clone()) {
            let (terms, cmp, rhs) = key;
            self.constraints.push(Constraint { name, terms, cmp, rhs });
        }
    }
}

/// Builds the 0/1 program for `config` over `net`.
pub fn encode_problem(net: &NormNet, config: &ProblemConfig) -> Result<IlpModel, EncodeError> {
    let prepared = prepare(net, config)?;
    Ok(encode_prepared(&prepared, config))
}

fn encode_prepared(p: &Prepared, config: &ProblemConfig) -> IlpModel {
    let net = &p.net;
    let mut variables: Vec<Variable> = net
        .ids()
        .map(|id| Variable { name: format!("x_{id}"), kind: VarKind::Binary })
        .collect();
    let index: BTreeMap<&NormId, usize> = net.ids().enumerate().map(|(i, id)| (id, i)).collect();
    let norm_vars = net.ids().enumerate().map(|(i, id)| (i, id.clone())).collect();
    let budgeted = config.problem != Problem::Mnsp;
    let indicator = budgeted.then(|| {
        variables.push(Variable { name: "y".to_string(), kind: VarKind::Binary });
        variables.len() - 1
    });

    let one = Rational::one;
    let pair = |a: &NormId, b: &NormId| vec![(index[a], one()), (index[b], one())];
    let mut sink = ConstraintSink { constraints: Vec::new(), seen: BTreeSet::new() };

    for (parent, kids) in net.parents_with_children() {
        for kid in kids {
            sink.push(format!("g2_{parent}_{kid}"), pair(parent, kid), Comparison::LessEq, one());
        }
    }
    for (parent, kids) in net.parents_with_children() {
        if kids.len() >= 2 {
            let terms = kids.iter().map(|k| (index[k], one())).collect();
            sink.push(format!("g3_{parent}"), terms, Comparison::LessEq, int(kids.len() as i64 - 1));
        }
    }
    for id in net.ids() {
        for ancestor in net.ancestors(id).expect("id from net") {
            sink.push(format!("g4_{id}_{ancestor}"), pair(id, ancestor), Comparison::LessEq, one());
        }
    }
    for (a, b) in &net.relations().exclusivity {
        sink.push(format!("x_{a}_{b}"), pair(a, b), Comparison::LessEq, one());
    }
    for (a, b) in net.substitution_closure() {
        sink.push(format!("s_{a}_{b}"), pair(a, b), Comparison::LessEq, one());
    }

    let mut big_m = None;
    if let Some(y) = indicator {
        let budget = config.budget.clone().expect("validated");
        let cost_terms: Terms = net.norms().map(|n| (index[&n.id], n.cost.clone())).collect();
        if cost_terms.iter().any(|(_, c)| !c.is_zero()) {
            sink.push("budget".to_string(), cost_terms, Comparison::LessEq, budget);
        }
        let m = int(net.len() as i64 + 1);
        let mut lo: Terms = (0..net.len()).map(|i| (i, -one())).collect();
        lo.push((y, one()));
        sink.push("ind_lo".to_string(), lo, Comparison::LessEq, Rational::zero());
        let mut hi: Terms = (0..net.len()).map(|i| (i, one())).collect();
        hi.push((y, -m.clone()));
        sink.push("ind_hi".to_string(), hi, Comparison::LessEq, Rational::zero());
        big_m = Some(m);
    }
    for id in &p.pinned {
        sink.push(format!("pin_{id}"), vec![(index[id], one())], Comparison::Equal, one());
    }

    let mut constraints = sink.constraints;
    constraints.sort_by(|a, b| a.name.cmp(&b.name));

    let mut objective = Objective::default();
    match config.problem {
        Problem::Mnsp => {
            for norm in net.norms() {
                objective.terms.push((index[&norm.id], p.power.power[&norm.id].clone()));
            }
        }
        Problem::Mnsplb | Problem::Vmnsplb => {
            let w = &config.weights;
            let budget = config.budget.as_ref().expect("validated");
            let rep_scale = &w.representation / &p.r_max;
            let cost_scale = &w.cost / budget;
            let value_scale = p.v_max.as_ref().map(|v| &w.value / Rational::from_integer(v.clone()));
            for norm in net.norms() {
                let mut coef = &rep_scale * &p.power.power[&norm.id] - &cost_scale * &norm.cost;
                if let (Some(scale), Some(support)) = (&value_scale, &p.value_support) {
                    coef += scale * Rational::from_integer(support[&norm.id].clone());
                }
                objective.terms.push((index[&norm.id], coef));
            }
            objective.terms.push((indicator.expect("budgeted"), w.cost.clone()));
        }
    }
    objective.terms.retain(|(_, c)| !c.is_zero());

    IlpModel { variables, objective, constraints, norm_vars, indicator, big_m }
}

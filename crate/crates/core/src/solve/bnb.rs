//! Depth-first branch-and-bound over 0/1 variables.
//!
//! Every row is scaled to integers and kept as `sum(a_j x_j) <= b`
//! (equalities become two rows). For each row the search maintains the
//! smallest activity still reachable; a row is violated once that minimum
//! exceeds `b`, and any free variable whose adverse value would push the
//! minimum past `b` is fixed immediately. The bound on a node is the
//! objective of the fixed variables plus every positive free coefficient.
//!
//! The tree is split at a fixed depth into independent subtrees that are
//! searched with their own incumbents, so the result (node count included)
//! is the same whether the subtrees run in parallel or in sequence.

use std::fmt::Debug;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{Optima, SolveError, SolveOptions, SolveReport, SolveStats, SolveStatus};
use crate::ilp::{Comparison, IlpModel, VarKind};
use crate::par;
use crate::rational::{lcm_of_denominators, Rational};

/// Number of leading branching variables enumerated into separate subtrees.
const SPLIT_DEPTH: usize = 4;

trait Scalar: Signed + Clone + Ord + Debug + Send + Sync {}
impl<T: Signed + Clone + Ord + Debug + Send + Sync> Scalar for T {}

struct Row<T> {
    terms: Vec<(usize, T)>,
    rhs: T,
}

struct Compiled<T> {
    objective: Vec<T>,
    rows: Vec<Row<T>>,
    var_rows: Vec<Vec<(usize, T)>>,
    order: Vec<usize>,
}

const UNSET: i8 = -1;

#[derive(Clone)]
struct State<T> {
    value: Vec<i8>,
    min_activity: Vec<T>,
    current: T,
    optimistic: T,
    trail: Vec<usize>,
}

impl<T: Scalar> Compiled<T> {
    fn root_state(&self) -> Option<State<T>> {
        let mut state = State {
            value: vec![UNSET; self.objective.len()],
            min_activity: self
                .rows
                .iter()
                .map(|r| r.terms.iter().filter(|(_, a)| a.is_negative()).fold(T::zero(), |acc, (_, a)| acc + a.clone()))
                .collect(),
            current: T::zero(),
            optimistic: self.objective.iter().filter(|c| c.is_positive()).fold(T::zero(), |acc, c| acc + c.clone()),
            trail: Vec::new(),
        };
        let all_rows: Vec<usize> = (0..self.rows.len()).collect();
        let mut queue = Vec::new();
        if !self.scan_rows(&state, &all_rows, &mut queue) {
            return None;
        }
        self.drain(&mut state, queue).then_some(state)
    }

    /// Checks `rows` for violation and queues every forced assignment.
    fn scan_rows(&self, state: &State<T>, rows: &[usize], queue: &mut Vec<(usize, i8)>) -> bool {
        for &r in rows {
            let row = &self.rows[r];
            if state.min_activity[r] > row.rhs {
                return false;
            }
            let slack = row.rhs.clone() - state.min_activity[r].clone();
            for (var, a) in &row.terms {
                if state.value[*var] == UNSET && a.abs() > slack {
                    queue.push((*var, if a.is_positive() { 0 } else { 1 }));
                }
            }
        }
        true
    }

    fn drain(&self, state: &mut State<T>, mut queue: Vec<(usize, i8)>) -> bool {
        let mut touched = Vec::new();
        while let Some((var, val)) = queue.pop() {
            if state.value[var] != UNSET {
                if state.value[var] != val {
                    return false;
                }
                continue;
            }
            state.value[var] = val;
            state.trail.push(var);
            let c = &self.objective[var];
            if c.is_positive() {
                state.optimistic = state.optimistic.clone() - c.clone();
            }
            if val == 1 {
                state.current = state.current.clone() + c.clone();
            }
            touched.clear();
            for (r, a) in &self.var_rows[var] {
                if let Some(delta) = activity_delta(a, val) {
                    state.min_activity[*r] = state.min_activity[*r].clone() + delta;
                    touched.push(*r);
                }
            }
            if !self.scan_rows(state, &touched, &mut queue) {
                return false;
            }
        }
        true
    }

    fn assign(&self, state: &mut State<T>, var: usize, val: i8) -> bool {
        self.drain(state, vec![(var, val)])
    }

    fn undo(&self, state: &mut State<T>, mark: usize) {
        while state.trail.len() > mark {
            let var = state.trail.pop().expect("above mark");
            let val = state.value[var];
            let c = &self.objective[var];
            if c.is_positive() {
                state.optimistic = state.optimistic.clone() + c.clone();
            }
            if val == 1 {
                state.current = state.current.clone() - c.clone();
            }
            for (r, a) in &self.var_rows[var] {
                if let Some(delta) = activity_delta(a, val) {
                    state.min_activity[*r] = state.min_activity[*r].clone() - delta;
                }
            }
            state.value[var] = UNSET;
        }
    }
}

/// Increase of a row's minimum activity when a variable with coefficient
/// `a` is fixed to `val`.
fn activity_delta<T: Scalar>(a: &T, val: i8) -> Option<T> {
    match (a.is_positive(), val) {
        (true, 1) => Some(a.clone()),
        (false, 0) if a.is_negative() => Some(-a.clone()),
        _ => None,
    }
}

struct Search<'a, T> {
    compiled: &'a Compiled<T>,
    model: &'a IlpModel,
    enumerate: bool,
    node_limit: Option<u64>,
    nodes: u64,
    hit_limit: bool,
    optima: Optima<T>,
}

impl<T: Scalar> Search<'_, T> {
    fn dfs(&mut self, state: &mut State<T>, pos: usize) {
        self.nodes += 1;
        if self.node_limit.is_some_and(|limit| self.nodes > limit) {
            self.hit_limit = true;
            return;
        }
        if let Some(best) = &self.optima.best {
            let bound = state.current.clone() + state.optimistic.clone();
            if bound < *best || (!self.enumerate && bound == *best) {
                return;
            }
        }
        let order = &self.compiled.order;
        let mut pos = pos;
        while pos < order.len() && state.value[order[pos]] != UNSET {
            pos += 1;
        }
        if pos == order.len() {
            let model = self.model;
            let value = &state.value;
            self.optima.offer(&state.current, || {
                let x: Vec<bool> = value.iter().map(|v| *v == 1).collect();
                model.system_of(&x)
            });
            return;
        }
        let var = order[pos];
        for val in [1, 0] {
            let mark = state.trail.len();
            if self.compiled.assign(state, var, val) {
                self.dfs(state, pos + 1);
            }
            self.compiled.undo(state, mark);
            if self.hit_limit {
                return;
            }
        }
    }
}

fn compile<T: Scalar>(model: &IlpModel, to_t: &impl Fn(BigInt) -> T) -> (Compiled<T>, BigInt) {
    let n = model.variables.len();
    let scale = lcm_of_denominators(model.objective.terms.iter().map(|(_, c)| c));
    let scaled = |c: &Rational, s: &BigInt| -> BigInt { (c * Rational::from_integer(s.clone())).to_integer() };
    let mut objective = vec![T::zero(); n];
    for (v, c) in &model.objective.terms {
        objective[*v] = objective[*v].clone() + to_t(scaled(c, &scale));
    }

    let mut rows = Vec::new();
    for c in &model.constraints {
        let s = lcm_of_denominators(c.terms.iter().map(|(_, a)| a).chain(std::iter::once(&c.rhs)));
        let terms: Vec<(usize, BigInt)> = c.terms.iter().map(|(v, a)| (*v, scaled(a, &s))).collect();
        let rhs = scaled(&c.rhs, &s);
        if c.cmp == Comparison::Equal {
            rows.push(Row {
                terms: terms.iter().map(|(v, a)| (*v, to_t(-a.clone()))).collect(),
                rhs: to_t(-rhs.clone()),
            });
        }
        rows.push(Row { terms: terms.into_iter().map(|(v, a)| (v, to_t(a))).collect(), rhs: to_t(rhs) });
    }

    let mut var_rows = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for (v, a) in &row.terms {
            var_rows[*v].push((r, a.clone()));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| objective[b].abs().cmp(&objective[a].abs()).then(a.cmp(&b)));
    (Compiled { objective, rows, var_rows, order }, scale)
}

/// Largest magnitude any running sum in the search can reach.
fn magnitude_bound(model: &IlpModel) -> BigInt {
    let scale = lcm_of_denominators(model.objective.terms.iter().map(|(_, c)| c));
    let obj: BigInt = model
        .objective
        .terms
        .iter()
        .map(|(_, c)| (c * Rational::from_integer(scale.clone())).to_integer().abs())
        .sum();
    let rows = model.constraints.iter().map(|c| {
        let s = lcm_of_denominators(c.terms.iter().map(|(_, a)| a).chain(std::iter::once(&c.rhs)));
        let f = Rational::from_integer(s);
        c.terms.iter().map(|(_, a)| (a * &f).to_integer().abs()).sum::<BigInt>() + (&c.rhs * &f).to_integer().abs()
    });
    rows.fold(obj, |acc, r| acc.max(r))
}

/// Exact maximisation of an all-binary model.
pub fn solve_branch_and_bound(model: &IlpModel, options: &SolveOptions) -> Result<SolveReport, SolveError> {
    if let Some(v) = model.variables.iter().find(|v| v.kind != VarKind::Binary) {
        return Err(SolveError::NonBinaryVariable(v.name.clone()));
    }
    let start = Instant::now();
    let small = magnitude_bound(model) < BigInt::from(1i64 << 60);
    let (status, best, systems, truncated, nodes, scale) = if small {
        run(model, options, &|b: BigInt| b.to_i64().expect("bounded magnitude"), |v: &i64| BigInt::from(*v))
    } else {
        run(model, options, &|b: BigInt| b, |v: &BigInt| v.clone())
    };
    let objective = match status {
        SolveStatus::Optimal => best.map(|b| Rational::new(b, scale) + &model.objective.constant),
        _ => None,
    };
    Ok(SolveReport {
        status,
        objective,
        optima: systems,
        truncated,
        stats: SolveStats { nodes, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    })
}

type RunResult = (SolveStatus, Option<BigInt>, Vec<crate::norm_net::NormSystem>, bool, u64, BigInt);

fn run<T: Scalar>(
    model: &IlpModel,
    options: &SolveOptions,
    to_t: &impl Fn(BigInt) -> T,
    to_big: impl Fn(&T) -> BigInt,
) -> RunResult {
    let (compiled, scale) = compile(model, to_t);
    let cap = if options.enumerate_all_optima { options.max_optima.max(1) } else { 1 };
    let Some(root) = compiled.root_state() else {
        return (SolveStatus::Infeasible, None, Vec::new(), false, 1, scale);
    };

    // Fixed split of the leading branching variables into 2^depth subtrees,
    // listed in the order a sequential search would visit them.
    let depth = SPLIT_DEPTH.min(compiled.order.len());
    let prefixes: Vec<u32> = (0..1u32 << depth).collect();
    let per_task_limit = options.node_limit.map(|l| l.div_ceil(prefixes.len() as u64));

    let results = par::map(&prefixes, options.parallel, |&prefix| {
        let mut state = root.clone();
        let mut search = Search {
            compiled: &compiled,
            model,
            enumerate: options.enumerate_all_optima,
            node_limit: per_task_limit,
            nodes: 1,
            hit_limit: false,
            optima: Optima::new(cap),
        };
        for bit in 0..depth {
            let val = if prefix >> (depth - 1 - bit) & 1 == 0 { 1 } else { 0 };
            if !compiled.assign(&mut state, compiled.order[bit], val) {
                return search;
            }
        }
        search.dfs(&mut state, depth);
        search
    });

    let nodes = 1 + results.iter().map(|s| s.nodes).sum::<u64>();
    let hit_limit = results.iter().any(|s| s.hit_limit);
    let merged = Optima::merge(results.into_iter().map(|s| s.optima), cap);
    let status = if hit_limit {
        SolveStatus::NodeLimitReached
    } else if merged.best.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    let truncated = options.enumerate_all_optima && merged.truncated;
    (status, merged.best.as_ref().map(to_big), merged.systems.into_iter().collect(), truncated, nodes, scale)
}

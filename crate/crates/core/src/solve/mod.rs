//! Exact optimisation of norm-selection programs.
//!
//! [`solve_branch_and_bound`] works on any all-binary [`IlpModel`].
//! [`brute_force_oracle`] never looks at a model: it enumerates norm systems
//! of the net directly and scores them with the closed-form objective, which
//! makes it an independent reference for the encoder and the search.

mod bnb;
mod oracle;

pub use bnb::solve_branch_and_bound;
pub use oracle::{brute_force_oracle, ORACLE_MAX_NORMS};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ilp::{encode_problem, EncodeError, ProblemConfig};
use crate::norm_net::{NormNet, NormSystem};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Report every optimal norm system rather than a single one.
    pub enumerate_all_optima: bool,
    /// Cap on the number of optima reported.
    pub max_optima: usize,
    /// Search node budget; `None` is unlimited.
    pub node_limit: Option<u64>,
    /// Explore independent subtrees on the rayon pool. Results do not depend
    /// on this flag, and it has no effect without the `parallel` feature.
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { enumerate_all_optima: true, max_optima: 64, node_limit: None, parallel: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimitReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Exact optimum, present iff the status is optimal.
    #[serde(with = "crate::rational::serde_exact::option")]
    pub objective: Option<Rational>,
    /// Canonically ordered optimal systems (best found so far when the node
    /// limit was hit).
    pub optima: Vec<NormSystem>,
    /// More optima exist than were reported.
    pub truncated: bool,
    pub stats: SolveStats,
}

impl SolveReport {
    /// The report with the timing field zeroed, for comparisons.
    pub fn without_timing(mut self) -> Self {
        self.stats.elapsed_ms = 0.0;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("variable `{0}` is not binary")]
    NonBinaryVariable(String),
    #[error("{0} norms is too many for exhaustive enumeration (limit {ORACLE_MAX_NORMS})")]
    TooLarge(usize),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Encodes `config` over `net` and solves it by branch-and-bound.
pub fn solve_problem(net: &NormNet, config: &ProblemConfig, options: &SolveOptions) -> Result<SolveReport, SolveError> {
    let model = encode_problem(net, config)?;
    solve_branch_and_bound(&model, options)
}

/// Best-so-far optima under a cap, kept in canonical order.
#[derive(Debug, Clone)]
pub(crate) struct Optima<V> {
    pub best: Option<V>,
    pub systems: BTreeSet<NormSystem>,
    pub truncated: bool,
    cap: usize,
}

impl<V: Ord + Clone> Optima<V> {
    pub fn new(cap: usize) -> Self {
        Optima { best: None, systems: BTreeSet::new(), truncated: false, cap: cap.max(1) }
    }

    pub fn offer(&mut self, value: &V, system: impl FnOnce() -> NormSystem) {
        match self.best.as_ref().map(|b| value.cmp(b)) {
            Some(std::cmp::Ordering::Less) => {}
            Some(std::cmp::Ordering::Equal) => self.insert(system()),
            _ => {
                self.best = Some(value.clone());
                self.systems.clear();
                self.truncated = false;
                self.insert(system());
            }
        }
    }

    fn insert(&mut self, system: NormSystem) {
        if self.systems.insert(system) && self.systems.len() > self.cap {
            self.systems.pop_last();
            self.truncated = true;
        }
    }

    /// Combines per-subtree results; independent of the order of `parts`.
    pub fn merge(parts: impl IntoIterator<Item = Optima<V>>, cap: usize) -> Optima<V> {
        let parts: Vec<Optima<V>> = parts.into_iter().collect();
        let mut merged = Optima::new(cap);
        merged.best = parts.iter().filter_map(|p| p.best.clone()).max();
        for part in parts {
            if part.best.is_some() && part.best == merged.best {
                merged.truncated |= part.truncated;
                for system in part.systems {
                    merged.insert(system);
                }
            }
        }
        merged
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optima_keep_canonical_prefix() {
        let mut o = Optima::new(2);
        o.offer(&1, || NormSystem::new(["b"]));
        o.offer(&1, || NormSystem::new(["a", "c"]));
        o.offer(&1, || NormSystem::new(["a"]));
        assert!(o.truncated);
        assert_eq!(o.systems.iter().cloned().collect::<Vec<_>>(), [NormSystem::new(["a"]), NormSystem::new(["b"])]);
        o.offer(&2, || NormSystem::new(["z"]));
        assert!(!o.truncated);
        assert_eq!(o.systems.len(), 1);
        o.offer(&0, || NormSystem::new(["q"]));
        assert_eq!(o.best, Some(2));
    }

    #[test]
    fn merge_is_order_independent() {
        let mut a = Optima::new(3);
        a.offer(&5, || NormSystem::new(["a"]));
        let mut b = Optima::new(3);
        b.offer(&5, || NormSystem::new(["b"]));
        b.offer(&5, || NormSystem::new(["a", "b"]));
        let mut c = Optima::new(3);
        c.offer(&4, || NormSystem::new(["c"]));
        let ab = Optima::merge([a.clone(), b.clone(), c.clone()], 3);
        let ba = Optima::merge([c, b, a], 3);
        assert_eq!(ab.systems, ba.systems);
        assert_eq!(ab.best, Some(5));
        assert_eq!(ab.systems.len(), 3);
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_traits::Zero;

use super::{Optima, SolveError, SolveOptions, SolveReport, SolveStats, SolveStatus};
use crate::ilp::{prepare, Prepared, Problem, ProblemConfig};
use crate::norm_net::{NormId, NormNet, NormSystem};
use crate::rational::Rational;

/// Largest net the oracle will enumerate.
pub const ORACLE_MAX_NORMS: usize = 25;

/// Exhaustive enumeration of the net's feasible norm systems, scored with the
/// closed-form objective. Shares nothing with the ILP encoding beyond the
/// normalisation constants.
pub fn brute_force_oracle(net: &NormNet, config: &ProblemConfig, options: &SolveOptions) -> Result<SolveReport, SolveError> {
    let prepared = prepare(net, config)?;
    let n = prepared.net.len();
    if n > ORACLE_MAX_NORMS {
        return Err(SolveError::TooLarge(n));
    }
    let start = Instant::now();
    let enumeration = Enumeration::new(&prepared, config);
    let cap = if options.enumerate_all_optima { options.max_optima.max(1) } else { 1 };
    let mut walk = Walk {
        e: &enumeration,
        chosen: vec![false; n],
        kids_in: vec![0; n],
        cost: Rational::zero(),
        optima: Optima::new(cap),
        leaves: 0,
    };
    walk.visit(0);

    let Walk { optima, leaves, .. } = walk;
    let status = if optima.best.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible };
    Ok(SolveReport {
        status,
        objective: optima.best,
        optima: optima.systems.into_iter().collect(),
        truncated: options.enumerate_all_optima && optima.truncated,
        stats: SolveStats { nodes: leaves, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
    })
}

struct Enumeration {
    ids: Vec<NormId>,
    /// `conflict[i][j]`: i and j may not be selected together.
    conflict: Vec<Vec<bool>>,
    parent: Vec<Option<usize>>,
    kid_count: Vec<usize>,
    pinned: Vec<bool>,
    cost: Vec<Rational>,
    budget: Option<Rational>,
    /// Per-norm objective contribution and the bonus for a non-empty system.
    gain: Vec<Rational>,
    nonempty_bonus: Rational,
    cost_scale: Rational,
}

impl Enumeration {
    fn new(p: &Prepared, config: &ProblemConfig) -> Self {
        let net = &p.net;
        let ids: Vec<NormId> = net.ids().cloned().collect();
        let pos: BTreeMap<&NormId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let conflict = ids
            .iter()
            .map(|a| ids.iter().map(|b| a != b && net.pair_violation(a, b).is_some()).collect())
            .collect();
        let parent = ids.iter().map(|id| net.parent(id).map(|p| pos[p])).collect();
        let kid_count = ids.iter().map(|id| net.children(id).count()).collect();
        let pinned = ids.iter().map(|id| p.pinned.contains(id)).collect();
        let cost = ids.iter().map(|id| net.norm(id).expect("own id").cost.clone()).collect();

        let w = &config.weights;
        let (gain, nonempty_bonus, cost_scale, budget) = match config.problem {
            Problem::Mnsp => {
                let gain = ids.iter().map(|id| p.power.power[id].clone()).collect();
                (gain, Rational::zero(), Rational::zero(), None)
            }
            Problem::Mnsplb | Problem::Vmnsplb => {
                let b = config.budget.clone().expect("validated");
                let gain = ids
                    .iter()
                    .map(|id| {
                        let mut g = &w.representation * &p.power.power[id] / &p.r_max;
                        if let (Some(support), Some(v_max)) = (&p.value_support, &p.v_max) {
                            g += &w.value * Rational::new(support[id].clone(), v_max.clone());
                        }
                        g
                    })
                    .collect();
                (gain, w.cost.clone(), &w.cost / &b, Some(b))
            }
        };
        Enumeration { ids, conflict, parent, kid_count, pinned, cost, budget, gain, nonempty_bonus, cost_scale }
    }

    fn score(&self, chosen: &[bool], cost: &Rational) -> Rational {
        if !chosen.contains(&true) {
            return Rational::zero();
        }
        let gain: Rational = chosen.iter().zip(&self.gain).filter(|(c, _)| **c).map(|(_, g)| g.clone()).sum();
        gain + &self.nonempty_bonus - cost * &self.cost_scale
    }
}

struct Walk<'a> {
    e: &'a Enumeration,
    chosen: Vec<bool>,
    kids_in: Vec<usize>,
    cost: Rational,
    optima: Optima<Rational>,
    leaves: u64,
}

impl Walk<'_> {
    fn visit(&mut self, i: usize) {
        let e = self.e;
        if i == e.ids.len() {
            self.leaves += 1;
            let value = e.score(&self.chosen, &self.cost);
            let (ids, chosen) = (&e.ids, &self.chosen);
            self.optima.offer(&value, || {
                NormSystem(ids.iter().zip(chosen).filter(|(_, c)| **c).map(|(id, _)| id.clone()).collect::<BTreeSet<_>>())
            });
            return;
        }
        if self.can_include(i) {
            self.chosen[i] = true;
            if let Some(p) = e.parent[i] {
                self.kids_in[p] += 1;
            }
            self.cost += &e.cost[i];
            self.visit(i + 1);
            self.cost -= &e.cost[i];
            if let Some(p) = e.parent[i] {
                self.kids_in[p] -= 1;
            }
            self.chosen[i] = false;
        }
        if !e.pinned[i] {
            self.visit(i + 1);
        }
    }

    fn can_include(&self, i: usize) -> bool {
        let e = self.e;
        if (0..i).any(|j| self.chosen[j] && e.conflict[i][j]) {
            return false;
        }
        if let Some(p) = e.parent[i] {
            if e.kid_count[p] >= 2 && self.kids_in[p] + 1 == e.kid_count[p] {
                return false;
            }
        }
        match &e.budget {
            Some(b) => &self.cost + &e.cost[i] <= *b,
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::airport;
    use crate::ilp::RepresentationChoice;
    use crate::norm_net::{build_norm_net, Modality, Norm, RelationSet};
    use crate::rational::int;
    use crate::solve::solve_problem;

    #[test]
    fn airport_inclusion_matches_search() {
        let config = ProblemConfig::mnsp(RepresentationChoice::Inclusion);
        let options = SolveOptions::default();
        let oracle = brute_force_oracle(&airport(), &config, &options).unwrap();
        let search = solve_problem(&airport(), &config, &options).unwrap();
        assert_eq!(oracle.objective, Some(int(3)));
        assert_eq!(oracle.optima, [NormSystem::new(["n3"])]);
        assert_eq!(oracle.optima, search.optima);
        assert_eq!(oracle.objective, search.objective);
    }

    #[test]
    fn single_norm() {
        let net = build_norm_net(vec![Norm::new("n", Modality::Obligation, "a", "b")], RelationSet::new(), BTreeSet::new())
            .unwrap();
        let report = brute_force_oracle(&net, &ProblemConfig::mnsp(RepresentationChoice::Inclusion), &SolveOptions::default())
            .unwrap();
        assert_eq!(report.optima, [NormSystem::new(["n"])]);
        assert_eq!(report.stats.nodes, 2);
    }

    #[test]
    fn too_large() {
        let norms = (0..26).map(|i| Norm::new(format!("n{i}"), Modality::Obligation, "a", "b")).collect();
        let net = build_norm_net(norms, RelationSet::new(), BTreeSet::new()).unwrap();
        let config = ProblemConfig::mnsp(RepresentationChoice::Inclusion);
        assert_eq!(brute_force_oracle(&net, &config, &SolveOptions::default()), Err(SolveError::TooLarge(26)));
    }
}

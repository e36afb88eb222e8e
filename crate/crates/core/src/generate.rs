//! Seeded random norm nets for hardness experiments.
//!
//! The generator is PCG32 (PCG-XSH-RR: 64-bit LCG state, 32-bit output) with
//! the seed as the initial state and increment stream [`PCG_STREAM`]. Draws,
//! in order:
//!
//! 1. for each norm `n1..nN`: its parent, uniform over the eligible earlier
//!    norms plus "none" (eligible: level below `depth - 1` and fewer than
//!    `branching` children); then its cost, uniform in `0..=9`; then its
//!    values, uniform over `{v1}`, `{v2}`, `{v1, v2}`;
//! 2. one exclusivity draw for every pair not related by generalisation,
//!    pairs in index order;
//! 3. one substitutability draw for every pair still unrelated.
//!
//! A draw below `k` is `(next_u32 * k) >> 32`; an edge with probability `p`
//! is added when `next_u32 / 2^32 < p`. Modalities cycle obligation,
//! permission, prohibition by index.

use std::collections::BTreeSet;

use rand_core::Rng;
use rand_pcg::Pcg32;
use thiserror::Error;

use crate::norm_net::{build_norm_net, unordered, IdPair, Modality, Norm, NormNet, RelationSet};
use crate::rational::int;

pub const PCG_STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;
pub const VALUE_ORDER: [&str; 2] = ["v1", "v2"];

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n: usize,
    /// Maximum number of norms on a root-to-leaf generalisation path.
    pub depth: usize,
    pub branching: usize,
    pub p_x: f64,
    pub p_s: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: String| Err(GeneratorError::InvalidParams(m));
        if self.depth == 0 {
            return bad("depth must be at least 1".into());
        }
        if self.branching == 0 {
            return bad("branching must be at least 1".into());
        }
        for (name, p) in [("p_x", self.p_x), ("p_s", self.p_s)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }
}

struct Draws(Pcg32);

impl Draws {
    fn below(&mut self, k: usize) -> usize {
        ((self.0.next_u32() as u64 * k as u64) >> 32) as usize
    }

    fn chance(&mut self, p: f64) -> bool {
        (self.0.next_u32() as f64) < p * 4_294_967_296.0
    }
}

pub fn generate_random_net(params: &GeneratorParams) -> Result<NormNet, GeneratorError> {
    params.validate()?;
    let mut rng = Draws(Pcg32::new(params.seed, PCG_STREAM));
    let ids: Vec<String> = (1..=params.n).map(|i| format!("n{i}")).collect();
    let modalities = [Modality::Obligation, Modality::Permission, Modality::Prohibition];

    let mut level = vec![0usize; params.n];
    let mut kids = vec![0usize; params.n];
    let mut parent: Vec<Option<usize>> = vec![None; params.n];
    let mut norms = Vec::with_capacity(params.n);
    for i in 0..params.n {
        let eligible: Vec<usize> =
            (0..i).filter(|&j| level[j] + 1 < params.depth && kids[j] < params.branching).collect();
        let pick = rng.below(eligible.len() + 1);
        if let Some(&p) = eligible.get(pick) {
            parent[i] = Some(p);
            level[i] = level[p] + 1;
            kids[p] += 1;
        }
        let cost = rng.below(10) as i64;
        let values: &[&str] = match rng.below(3) {
            0 => &VALUE_ORDER[..1],
            1 => &VALUE_ORDER[1..],
            _ => &VALUE_ORDER,
        };
        norms.push(
            Norm::new(ids[i].clone(), modalities[i % 3], "agent", format!("act{}", i + 1))
                .with_cost(int(cost))
                .with_values(values.iter().copied()),
        );
    }

    let mut relations = RelationSet::new();
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            relations.generalisation.insert((ids[*p].clone(), ids[i].clone()));
        }
    }
    let mut related: BTreeSet<IdPair> = relations.generalisation.iter().map(|(a, b)| unordered(a.as_str(), b.as_str())).collect();
    for (p, set) in [(params.p_x, 0), (params.p_s, 1)] {
        for i in 0..params.n {
            for j in i + 1..params.n {
                let pair = unordered(ids[i].as_str(), ids[j].as_str());
                if related.contains(&pair) || !rng.chance(p) {
                    continue;
                }
                related.insert(pair.clone());
                if set == 0 {
                    relations.exclusivity.insert(pair);
                } else {
                    relations.substitutability.insert(pair);
                }
            }
        }
    }

    let net = build_norm_net(norms, relations, BTreeSet::new()).expect("generated nets are valid by construction");
    Ok(net.with_value_order(VALUE_ORDER.iter().map(|v| v.to_string()).collect()))
}

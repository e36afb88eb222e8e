#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use normsel::generate::{generate_random_net, GeneratorParams};
use normsel::ilp::{InForceMode, Problem, ProblemConfig, RepresentationChoice, Weights};
use normsel::norm_net::{build_norm_net, unordered, IdPair, NormNet};
use normsel::rational::{int, ratio, Rational};
pub use rand_core::Rng;
use rand_pcg::Pcg32;

pub struct Draw(pub Pcg32);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(Pcg32::new(seed, 0xda3e_39cb_94b9_5bdb))
    }

    pub fn below(&mut self, k: u64) -> u64 {
        self.0.next_u64() % k
    }

    pub fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items[self.below(items.len() as u64) as usize].clone()
    }
}

pub const DENSITIES: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 0.8];

/// A generated net with up to `max_n` norms, some of them possibly in force.
pub fn random_net(d: &mut Draw, max_n: usize) -> NormNet {
    let params = GeneratorParams {
        n: 1 + d.below(max_n as u64) as usize,
        depth: 1 + d.below(4) as usize,
        branching: 1 + d.below(4) as usize,
        p_x: d.pick(&DENSITIES),
        p_s: d.pick(&DENSITIES),
        seed: d.0.next_u64(),
    };
    with_random_in_force(d, generate_random_net(&params).unwrap())
}

/// Marks a random subset of the norms in force in a third of the cases,
/// always leaving the first norm as a candidate.
pub fn with_random_in_force(d: &mut Draw, net: NormNet) -> NormNet {
    if d.below(3) > 0 {
        return net;
    }
    let in_force: BTreeSet<String> = net.ids().skip(1).filter(|_| d.below(4) == 0).cloned().collect();
    build_norm_net(net.norms().cloned().collect(), net.relations().clone(), in_force)
        .unwrap()
        .with_value_order(net.value_order().to_vec())
}

const WEIGHT_TICKS: [(i64, i64); 5] = [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)];

pub fn random_config(d: &mut Draw, problem: Problem) -> ProblemConfig {
    let representation = if d.below(2) == 0 { RepresentationChoice::Inclusion } else { RepresentationChoice::Generalisation };
    let mode = d.pick(&[InForceMode::Flexible, InForceMode::Preserve, InForceMode::Ignore]);
    let budget = ratio(1 + d.below(40) as i64, 1 + d.below(2) as i64);
    let (a, b) = d.pick(&WEIGHT_TICKS);
    let w_r = ratio(a, b);
    let config = match problem {
        Problem::Mnsp => ProblemConfig::mnsp(representation),
        Problem::Mnsplb => ProblemConfig::mnsplb(representation, budget, w_r.clone(), int(1) - w_r),
        Problem::Vmnsplb => {
            let (a, b) = d.pick(&WEIGHT_TICKS);
            let w_c = (int(1) - &w_r) * ratio(a, b);
            let w_v = int(1) - &w_r - &w_c;
            ProblemConfig::vmnsplb(representation, budget, Weights::new(w_r, w_c, w_v))
        }
    };
    config.with_in_force(mode)
}

/// Substitution closure by repeated squaring of the symmetric relation.
pub fn naive_substitution_closure(net: &NormNet) -> BTreeSet<IdPair> {
    let mut rel: BTreeSet<(String, String)> = BTreeSet::new();
    for (a, b) in &net.relations().substitutability {
        rel.insert((a.clone(), b.clone()));
        rel.insert((b.clone(), a.clone()));
    }
    loop {
        let mut next = rel.clone();
        for (a, b) in &rel {
            for (c, e) in &rel {
                if b == c {
                    next.insert((a.clone(), e.clone()));
                }
            }
        }
        if next == rel {
            break;
        }
        rel = next;
    }
    rel.into_iter().filter(|(a, b)| a != b).map(|(a, b)| unordered(a, b)).collect()
}

/// Generalisation power as the product of 1/|siblings| along the path to a root.
pub fn path_product_power(net: &NormNet) -> BTreeMap<String, Rational> {
    net.ids()
        .map(|id| {
            let mut power = int(1);
            let mut cur = id.clone();
            while let Some(p) = net.parent(&cur) {
                power /= int(net.children(p).count() as i64);
                cur = p.clone();
            }
            (id.clone(), power)
        })
        .collect()
}

/// Inclusion power as the size of each norm's subtree.
pub fn subtree_size_power(net: &NormNet) -> BTreeMap<String, Rational> {
    net.ids()
        .map(|id| {
            let size = net.ids().filter(|other| *other == id || net.ancestors(other).unwrap().contains(id)).count();
            (id.clone(), int(size as i64))
        })
        .collect()
}

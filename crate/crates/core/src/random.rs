//! Seeded instance generation. Every trial draws from its own ChaCha stream
//! keyed by `(seed, trial)`, so results do not depend on scheduling.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functionals::DistributionFn;
use crate::model::{AtomId, DyadicModel, Plan, Weight};
use crate::operators::{paraproduct_certificate, Block, BlockNorm, OperatorSpec, SymbolEntry};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Shape of random trees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelLaw {
    pub depth_min: usize,
    pub depth_max: usize,
    pub branching_min: usize,
    pub branching_max: usize,
    /// Child masses are `e^{U(−s, s)}` before normalization.
    pub mass_spread: f64,
    /// Probability that an internal atom below the root becomes a leaf early.
    pub early_leaf: f64,
}

impl Default for ModelLaw {
    fn default() -> Self {
        Self { depth_min: 1, depth_max: 8, branching_min: 2, branching_max: 3, mass_spread: 1.5, early_leaf: 0.1 }
    }
}

/// Leaf values `e^{U(−r, r)}`, zero with probability `zero_prob`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightLaw {
    pub log_range: f64,
    pub zero_prob: f64,
}

impl Default for WeightLaw {
    fn default() -> Self {
        Self { log_range: 4.0, zero_prob: 0.0 }
    }
}

fn log_uniform(rng: &mut impl Rng, r: f64) -> f64 {
    if r > 0.0 {
        rng.random_range(-r..r).exp()
    } else {
        1.0
    }
}

fn plan(rng: &mut impl Rng, law: &ModelLaw, depth: usize, level: usize, mass: f64) -> Plan {
    if level == depth || (level > 0 && rng.random_bool(law.early_leaf)) {
        return Plan::Leaf(mass);
    }
    let b = rng.random_range(law.branching_min.max(1)..=law.branching_max.max(law.branching_min.max(1)));
    let w: Vec<f64> = (0..b).map(|_| log_uniform(rng, law.mass_spread)).collect();
    let total: f64 = w.iter().sum();
    Plan::Node(w.iter().map(|x| plan(rng, law, depth, level + 1, mass * x / total)).collect())
}

/// A random tree with unit root mass.
pub fn random_model(rng: &mut impl Rng, law: &ModelLaw) -> DyadicModel {
    let depth = rng.random_range(law.depth_min..=law.depth_max.max(law.depth_min));
    random_model_at_depth(rng, law, depth)
}

pub fn random_model_at_depth(rng: &mut impl Rng, law: &ModelLaw, depth: usize) -> DyadicModel {
    DyadicModel::from_plan(&plan(rng, law, depth, 0, 1.0)).expect("random plans are valid")
}

pub fn random_weight(rng: &mut impl Rng, model: &DyadicModel, law: &WeightLaw) -> Weight {
    Weight::new(
        (0..model.n_leaves())
            .map(|_| if law.zero_prob > 0.0 && rng.random_bool(law.zero_prob) { 0.0 } else { log_uniform(rng, law.log_range) })
            .collect(),
    )
}

/// Preorder greedy sparse family: each atom joins with probability `density` when
/// its nearest member ancestor keeps at least half of its mass uncovered.
pub fn random_sparse(rng: &mut impl Rng, model: &DyadicModel, density: f64) -> Vec<AtomId> {
    let mut member = vec![false; model.len()];
    let mut covered = vec![0.0; model.len()];
    let mut nearest: Vec<Option<AtomId>> = vec![None; model.len()];
    let mut out = Vec::new();
    for i in 0..model.len() {
        let up = model.parent(i).and_then(|p| if member[p] { Some(p) } else { nearest[p] });
        nearest[i] = up;
        if !rng.random_bool(density) {
            continue;
        }
        let fits = match up {
            Some(j) => covered[j] + model.mass(i) <= 0.5 * model.mass(j),
            None => true,
        };
        if fits {
            if let Some(j) = up {
                covered[j] += model.mass(i);
            }
            member[i] = true;
            out.push(i);
        }
    }
    out
}

/// Nonnegative coefficients rescaled to Carleson norm 1.
pub fn random_carleson(rng: &mut impl Rng, model: &DyadicModel, density: f64) -> Vec<f64> {
    let mut a: Vec<f64> = (0..model.len()).map(|_| if rng.random_bool(density) { rng.random_range(0.0..1.0) } else { 0.0 }).collect();
    let (norm, _) = model.carleson_norm(&a);
    if norm > 0.0 {
        a.iter_mut().for_each(|x| *x /= norm);
    }
    a
}

/// Random blocks on every atom with at least two children, normalized per block.
pub fn random_shift(rng: &mut impl Rng, model: &DyadicModel, mode: BlockNorm) -> Result<OperatorSpec> {
    let blocks: Vec<Block> = (0..model.len())
        .filter(|&i| model.children(i).len() >= 2)
        .map(|i| {
            let k = model.children(i).len();
            Block { atom: i, matrix: (0..k).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect() }
        })
        .collect();
    OperatorSpec::haar_shift_normalized(model, &blocks, mode)
}

/// Random symbol scaled to certificate 1.
pub fn random_paraproduct(rng: &mut impl Rng, model: &DyadicModel) -> Result<OperatorSpec> {
    let mut symbol: Vec<SymbolEntry> = (0..model.len())
        .filter(|&i| model.children(i).len() >= 2)
        .map(|i| SymbolEntry { atom: i, values: (0..model.children(i).len()).map(|_| rng.random_range(-1.0..1.0)).collect() })
        .collect();
    let cert = paraproduct_certificate(model, &symbol)?.value;
    if cert > 0.0 {
        let s = 1.0 / cert.sqrt() * (1.0 - 1e-12);
        for e in &mut symbol {
            e.values.iter_mut().for_each(|x| *x *= s);
        }
    }
    OperatorSpec::paraproduct(model, &symbol)
}

/// Step distribution of a random simple function on `[0, mass)`.
pub fn random_distribution(rng: &mut impl Rng, steps: usize, log_range: f64, mass: f64) -> DistributionFn {
    let k = rng.random_range(1..=steps.max(1));
    let values: Vec<f64> = (0..k).map(|_| log_uniform(rng, log_range)).collect();
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let masses: Vec<f64> = w.iter().map(|x| mass * x / total).collect();
    DistributionFn::from_values(&values, &masses)
}

/// `(N, N₊, N₋)` with `N = ½(N₊ + N₋)`.
pub fn random_midpoint_pair(rng: &mut impl Rng, steps: usize, log_range: f64) -> (DistributionFn, DistributionFn, DistributionFn) {
    let a = random_distribution(rng, steps, log_range, 1.0);
    let b = random_distribution(rng, steps, log_range, 1.0);
    let mid = DistributionFn::combine(&[(0.5, &a), (0.5, &b)]);
    (mid, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let law = ModelLaw::default();
        let a = random_model(&mut trial_rng(7, 3), &law);
        let b = random_model(&mut trial_rng(7, 3), &law);
        assert_eq!(a, b);
        let c = random_model(&mut trial_rng(7, 4), &law);
        assert!(a != c || a.len() == 1);
    }

    #[test]
    fn generated_families_are_sparse() {
        let law = ModelLaw::default();
        for t in 0..50 {
            let mut rng = trial_rng(1, t);
            let m = random_model(&mut rng, &law);
            let q = random_sparse(&mut rng, &m, 0.5);
            assert!(m.check_sparse(&q).is_sparse());
            assert!((m.mass(m.root()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn operators_are_normalized() {
        let law = ModelLaw { depth_max: 4, ..ModelLaw::default() };
        for t in 0..20 {
            let mut rng = trial_rng(2, t);
            let m = random_model(&mut rng, &law);
            assert!(random_shift(&mut rng, &m, BlockNorm::L1xL1).is_ok());
            assert!(random_paraproduct(&mut rng, &m).is_ok());
            let a = random_carleson(&mut rng, &m, 0.5);
            assert!(m.carleson_norm(&a).0 <= 1.0 + 1e-12);
        }
    }
}

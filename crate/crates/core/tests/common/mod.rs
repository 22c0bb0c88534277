//! Instance generators and brute-force oracles shared by the integration
//! tests. Nothing here calls the routine it is used to check.

#![allow(dead_code)]

use std::sync::Arc;

use fedsubmax::matroid::{Matroid, PartitionMatroid, UniformMatroid};
use fedsubmax::objectives::{
    BudgetAdditive, ClientPopulation, Coverage, FacilityLocation, FacilityRow, FnOracle,
    SetFunction,
};
use fedsubmax::Subset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// Groups G1={C1,C2}, G2={C2,C3}, G3={C4}, clients weighted 1/4.
pub fn cov3() -> ClientPopulation {
    Coverage::new(vec![vec![0, 1], vec![1, 2], vec![3]], 4)
        .unwrap()
        .population()
}

pub fn random_coverage(rng: &mut TestRng, groups: usize, clients: usize, density: f64) -> Coverage {
    let members = (0..groups)
        .map(|_| (0..clients).filter(|_| rng.gen::<f64>() < density).collect())
        .collect();
    Coverage::new(members, clients).unwrap()
}

pub fn random_facility(rng: &mut TestRng, facilities: usize, clients: usize) -> FacilityLocation {
    let scores = (0..clients)
        .map(|_| (0..facilities).map(|_| rng.gen_range(0.0..5.0)).collect())
        .collect();
    FacilityLocation::new(scores).unwrap()
}

/// A population with random (non-uniform) weights.
pub fn reweight(pop: &ClientPopulation, rng: &mut TestRng) -> ClientPopulation {
    let raw: Vec<f64> = (0..pop.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let oracles = pop.clients().iter().map(|c| c.oracle.clone()).collect();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let drift: f64 = 1.0 - weights.iter().sum::<f64>();
    weights[0] += drift;
    ClientPopulation::new(oracles, weights).unwrap()
}

/// One random monotone submodular oracle from a few families.
pub fn random_oracle(rng: &mut TestRng, n: usize) -> Arc<dyn SetFunction> {
    match rng.gen_range(0..4) {
        0 => {
            // weighted coverage over a small universe
            let items = rng.gen_range(2..8);
            let weights: Vec<f64> = (0..items).map(|_| rng.gen_range(0.1..2.0)).collect();
            let covers: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..items).filter(|_| rng.gen_bool(0.4)).collect())
                .collect();
            Arc::new(FnOracle::new(n, move |s: &Subset| {
                let mut hit = vec![false; weights.len()];
                for e in s.iter() {
                    for &u in &covers[e] {
                        hit[u] = true;
                    }
                }
                hit.iter().zip(&weights).filter(|(h, _)| **h).map(|(_, w)| w).sum()
            }))
        }
        1 => Arc::new(
            FacilityRow::new((0..n).map(|_| rng.gen_range(0.0..3.0)).collect()).unwrap(),
        ),
        2 => {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            Arc::new(FnOracle::new(n, move |s: &Subset| {
                s.iter().map(|e| w[e]).sum::<f64>().sqrt()
            }))
        }
        _ => {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let cap = rng.gen_range(0.5..4.0);
            Arc::new(BudgetAdditive::new(w, cap).unwrap())
        }
    }
}

/// `Σ_S f(S) Π x / Π (1-x)` written out subset by subset.
pub fn naive_extension(f: &dyn SetFunction, x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for mask in 0u64..1 << n {
        let mut p = 1.0;
        for (e, &xe) in x.iter().enumerate() {
            p *= if mask >> e & 1 == 1 { xe } else { 1.0 - xe };
        }
        total += p * f.value(&Subset::from_mask(n, mask));
    }
    total
}

/// Description of a structured matroid, with its own independence rule.
#[derive(Debug, Clone)]
pub enum MatroidCase {
    Uniform { n: usize, k: usize },
    Partition { blocks: Vec<Vec<usize>>, caps: Vec<usize> },
}

impl MatroidCase {
    pub fn n(&self) -> usize {
        match self {
            MatroidCase::Uniform { n, .. } => *n,
            MatroidCase::Partition { blocks, .. } => blocks.iter().map(Vec::len).sum(),
        }
    }

    pub fn independent(&self, mask: u64) -> bool {
        match self {
            MatroidCase::Uniform { k, .. } => (mask.count_ones() as usize) <= *k,
            MatroidCase::Partition { blocks, caps } => blocks.iter().zip(caps).all(|(b, &c)| {
                b.iter().filter(|&&e| mask >> e & 1 == 1).count() <= c
            }),
        }
    }

    /// All maximum-size independent masks.
    pub fn bases(&self) -> Vec<u64> {
        let n = self.n();
        let ind: Vec<u64> = (0u64..1 << n).filter(|&m| self.independent(m)).collect();
        let r = ind.iter().map(|m| m.count_ones()).max().unwrap();
        ind.into_iter().filter(|m| m.count_ones() == r).collect()
    }

    pub fn build(&self) -> Arc<dyn Matroid> {
        match self {
            MatroidCase::Uniform { n, k } => Arc::new(UniformMatroid::new(*n, *k).unwrap()),
            MatroidCase::Partition { blocks, caps } => {
                Arc::new(PartitionMatroid::new(self.n(), blocks.clone(), caps.clone()).unwrap())
            }
        }
    }
}

pub fn random_matroid(rng: &mut TestRng, n: usize, max_rank: usize) -> MatroidCase {
    if rng.gen_bool(0.5) {
        MatroidCase::Uniform {
            n,
            k: rng.gen_range(1..=max_rank.min(n)),
        }
    } else {
        let nb = rng.gen_range(1..=max_rank.min(n));
        let mut blocks = vec![Vec::new(); nb];
        for e in 0..n {
            let b = if e < nb { e } else { rng.gen_range(0..nb) };
            blocks[b].push(e);
        }
        let caps = blocks.iter().map(|_| 1).collect();
        MatroidCase::Partition { blocks, caps }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

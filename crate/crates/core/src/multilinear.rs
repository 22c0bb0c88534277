//! The multilinear extension `f̂(x) = E_{R∼x}[f(R)]` and its gradient, by
//! exact enumeration over `2^n` subsets or by Monte-Carlo sampling.
//!
//! Gradient coordinates use the two-sided form
//! `∂f̂/∂x_e = E_{R∼x}[f(R ∪ {e}) − f(R ∖ {e})]`, which lets one sampled set
//! serve every coordinate.

use rand::Rng;

use crate::error::{Error, Result};
use crate::objectives::{ClientPopulation, SetFunction};
use crate::rng::Stream;
use crate::subset::Subset;

/// Largest ground set the exact routines will enumerate.
pub const EXACT_LIMIT: usize = 20;

/// Slack allowed when validating coordinates produced by floating-point updates.
const COORD_TOL: f64 = 1e-9;

/// A point of `[0,1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    /// Coordinates within `1e-9` of `[0,1]` are clamped into it; anything
    /// further out is rejected.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let mut coords = coords;
        for (e, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() || *c < -COORD_TOL || *c > 1.0 + COORD_TOL {
                return Err(Error::input(format!("coordinate {e} = {c} is outside [0,1]")));
            }
            *c = c.clamp(0.0, 1.0);
        }
        Ok(FractionalPoint(coords))
    }

    /// Clamps every coordinate into `[0,1]`. Local iterates can overshoot the
    /// box; their gradients are taken at the clamped point.
    pub fn clamped(coords: &[f64]) -> Self {
        FractionalPoint(coords.iter().map(|c| c.clamp(0.0, 1.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        FractionalPoint(vec![0.0; n])
    }

    /// The indicator `1_S`.
    pub fn indicator(s: &Subset) -> Self {
        FractionalPoint(s.indicator())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A nonnegative gradient of a multilinear extension.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector(pub Vec<f64>);

impl GradientVector {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `‖self − other‖_∞`.
    pub fn sup_distance(&self, other: &GradientVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// The sets drawn for one gradient estimate, with the stream position they
/// were drawn from so the batch can be replayed.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub sets: Vec<Subset>,
    pub seed: [u8; 32],
    pub word_pos: u128,
}

fn check_dims(f: &dyn SetFunction, x: &FractionalPoint) -> Result<()> {
    if f.ground_size() != x.len() {
        return Err(Error::input(format!(
            "point has {} coordinates, oracle ground set has {}",
            x.len(),
            f.ground_size()
        )));
    }
    Ok(())
}

fn check_exact(n: usize, what: &'static str) -> Result<()> {
    if n > EXACT_LIMIT {
        return Err(Error::Size {
            what,
            n,
            limit: EXACT_LIMIT,
        });
    }
    Ok(())
}

/// Draws `R ∼ x`: each element independently with probability `x(e)`.
pub fn sample_set(x: &FractionalPoint, rng: &mut Stream) -> Subset {
    let mut s = Subset::empty(x.len());
    for (e, &p) in x.coords().iter().enumerate() {
        if rng.gen::<f64>() < p {
            s.insert(e);
        }
    }
    s
}

/// `P[R = S]` for every mask `S`, under independent inclusion with
/// probabilities `x`.
fn subset_probabilities(x: &[f64]) -> Vec<f64> {
    let mut probs = vec![1.0];
    for &p in x {
        let mut next = Vec::with_capacity(probs.len() * 2);
        next.extend(probs.iter().map(|q| q * (1.0 - p)));
        // the "included" half lands at offset 2^e, i.e. bit e
        next.extend(probs.iter().map(|q| q * p));
        probs = next;
    }
    probs
}

fn value_table(f: &dyn SetFunction) -> Vec<f64> {
    let n = f.ground_size();
    (0..1u64 << n)
        .map(|m| f.value(&Subset::from_mask(n, m)))
        .collect()
}

fn extension_from_tables(probs: &[f64], values: &[f64]) -> f64 {
    probs.iter().zip(values).map(|(p, v)| p * v).sum()
}

fn gradient_from_tables(n: usize, probs: &[f64], values: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|e| {
            let bit = 1usize << e;
            let g: f64 = probs
                .iter()
                .enumerate()
                .map(|(m, p)| p * (values[m | bit] - values[m & !bit]))
                .sum();
            g.max(0.0)
        })
        .collect()
}

/// `f̂(x) = Σ_S f(S) Π_{e∈S} x(e) Π_{e∉S} (1 − x(e))`, by enumeration (`n ≤ 20`).
pub fn exact_extension(f: &dyn SetFunction, x: &FractionalPoint) -> Result<f64> {
    check_dims(f, x)?;
    check_exact(f.ground_size(), "exact_extension")?;
    Ok(extension_from_tables(
        &subset_probabilities(x.coords()),
        &value_table(f),
    ))
}

/// `∇f̂(x)` by enumeration (`n ≤ 20`).
pub fn exact_gradient(f: &dyn SetFunction, x: &FractionalPoint) -> Result<GradientVector> {
    check_dims(f, x)?;
    let n = f.ground_size();
    check_exact(n, "exact_gradient")?;
    Ok(GradientVector(gradient_from_tables(
        n,
        &subset_probabilities(x.coords()),
        &value_table(f),
    )))
}

/// `F̂(x) = Σ p_i f̂_i(x)` by enumeration.
pub fn population_extension(pop: &ClientPopulation, x: &FractionalPoint) -> Result<f64> {
    let n = pop.ground_size();
    if x.len() != n {
        return Err(Error::input("point and population disagree on the ground set"));
    }
    check_exact(n, "population_extension")?;
    let probs = subset_probabilities(x.coords());
    Ok(pop
        .clients()
        .iter()
        .map(|c| c.weight * extension_from_tables(&probs, &value_table(c.oracle.as_ref())))
        .sum())
}

/// Exact per-client gradients `∇f̂_i(x)` and the weighted global gradient
/// `∇F̂(x) = Σ p_i ∇f̂_i(x)`, sharing one probability table.
pub fn population_gradients(
    pop: &ClientPopulation,
    x: &FractionalPoint,
) -> Result<(Vec<GradientVector>, GradientVector)> {
    let n = pop.ground_size();
    if x.len() != n {
        return Err(Error::input("point and population disagree on the ground set"));
    }
    check_exact(n, "population_gradients")?;
    let probs = subset_probabilities(x.coords());
    let locals: Vec<GradientVector> = pop
        .clients()
        .iter()
        .map(|c| GradientVector(gradient_from_tables(n, &probs, &value_table(c.oracle.as_ref()))))
        .collect();
    let mut global = vec![0.0; n];
    for (c, g) in pop.clients().iter().zip(&locals) {
        for (acc, v) in global.iter_mut().zip(&g.0) {
            *acc += c.weight * v;
        }
    }
    Ok((locals, GradientVector(global)))
}

/// Monte-Carlo estimate of `∇f̂(x)` from `m` independent sets `R_k ∼ x`:
/// coordinate `e` is `(1/m) Σ_k [f(R_k ∪ {e}) − f(R_k ∖ {e})]`.
pub fn estimate_gradient(
    f: &dyn SetFunction,
    x: &FractionalPoint,
    m: usize,
    rng: &mut Stream,
) -> Result<(GradientVector, SampleBatch)> {
    check_dims(f, x)?;
    if m == 0 {
        return Err(Error::input("sample count m must be at least 1"));
    }
    let seed = rng.get_seed();
    let word_pos = rng.get_word_pos();
    let n = f.ground_size();
    let mut sums = vec![0.0; n];
    let mut sets = Vec::with_capacity(m);
    for _ in 0..m {
        let r = sample_set(x, rng);
        let mut with = r.clone();
        let mut without = r.clone();
        for (e, acc) in sums.iter_mut().enumerate() {
            let present = r.contains(e);
            if present {
                without.remove(e);
            } else {
                with.insert(e);
            }
            *acc += (f.value(&with) - f.value(&without)).max(0.0);
            if present {
                without.insert(e);
            } else {
                with.remove(e);
            }
        }
        sets.push(r);
    }
    let inv = 1.0 / m as f64;
    let grad = GradientVector(sums.into_iter().map(|s| s * inv).collect());
    Ok((
        grad,
        SampleBatch {
            sets,
            seed,
            word_pos,
        },
    ))
}

/// Number of sampled sets per gradient estimate:
/// `m = ⌈4 · ln(4 · n · rounds · clients_per_round / δ) / σ²⌉`.
///
/// The constant 4 comes from a Chernoff bound with a union bound over the
/// `n` coordinates, the rounds, and the clients of each round.
pub fn sample_count(
    sigma: f64,
    delta: f64,
    rounds: usize,
    clients_per_round: usize,
    n: usize,
) -> Result<usize> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::input(format!("sigma must lie in (0,1), got {sigma}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input(format!("delta must lie in (0,1), got {delta}")));
    }
    if rounds == 0 || clients_per_round == 0 || n == 0 {
        return Err(Error::input("rounds, clients_per_round and n must be positive"));
    }
    let events = 4.0 * n as f64 * rounds as f64 * clients_per_round as f64 / delta;
    Ok((4.0 * events.ln() / (sigma * sigma)).ceil() as usize)
}

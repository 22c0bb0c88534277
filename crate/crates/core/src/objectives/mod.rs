//! Set functions, the concrete facility-location and coverage objectives, and
//! the weighted decomposable objective `F = Σ p_i f_i` held by a client
//! population.
//!
//! Every oracle is normalized (`f(∅) = 0`), and the library's algorithms
//! assume monotone submodular oracles. The exhaustive validators
//! [`check_monotone`] and [`check_submodular`] verify those properties on
//! small ground sets.

mod oracles;

use std::fmt;
use std::sync::Arc;

pub use oracles::{
    BudgetAdditive, Coverage, CoverageClient, FacilityLocation, FacilityRow, FnOracle, Modular,
};

use crate::error::{Error, Result};
use crate::subset::Subset;

/// Default ground-set limit for the exhaustive property checks.
pub const CHECK_LIMIT: usize = 12;

/// Tolerance of the exhaustive property checks, relative to the largest value.
const CHECK_TOL: f64 = 1e-9;

/// The ground set `E = {0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("ground set must contain at least one element"));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn subset(&self, ids: &[usize]) -> Result<Subset> {
        Subset::from_ids(self.n, ids)
    }
}

/// A value oracle `f: 2^E → R+` with `f(∅) = 0`.
///
/// Implementations are immutable after construction and may be evaluated
/// from several threads at once.
pub trait SetFunction: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;

    /// `f(S)`. The subset must belong to a ground set of size
    /// [`ground_size`](SetFunction::ground_size).
    fn value(&self, s: &Subset) -> f64;

    /// `m_f = max_e f({e})`.
    fn max_singleton(&self) -> f64 {
        let n = self.ground_size();
        (0..n)
            .map(|e| self.value(&Subset::singleton(n, e)))
            .fold(0.0, f64::max)
    }
}

fn check_ground(f: &dyn SetFunction, s: &Subset) -> Result<()> {
    if s.ground_size() != f.ground_size() {
        return Err(Error::input(format!(
            "subset lives in a ground set of size {}, oracle expects {}",
            s.ground_size(),
            f.ground_size()
        )));
    }
    Ok(())
}

/// `f(S)` for a sorted or unsorted list of element ids.
pub fn eval_set(f: &dyn SetFunction, ids: &[usize]) -> Result<f64> {
    let s = Subset::from_ids(f.ground_size(), ids)?;
    Ok(f.value(&s))
}

/// `f(S ∪ {e}) − f(S)`; `e` must not already be in `S`.
pub fn marginal_gain(f: &dyn SetFunction, s: &Subset, e: usize) -> Result<f64> {
    check_ground(f, s)?;
    if e >= f.ground_size() {
        return Err(Error::input(format!("element {e} out of range")));
    }
    if s.contains(e) {
        return Err(Error::input(format!("element {e} is already in the set")));
    }
    Ok(f.value(&s.with(e)) - f.value(s))
}

/// How client values are combined into `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `F = Σ p_i f_i`, used by the continuous algorithms.
    #[default]
    Weighted,
    /// `F = Σ f_i`, used by the discrete protocols, which aggregate raw
    /// marginal vectors.
    Unit,
}

/// One participant: an id, a weight `p_i`, and a private oracle.
#[derive(Clone)]
pub struct Client {
    pub id: usize,
    pub weight: f64,
    pub oracle: Arc<dyn SetFunction>,
}

impl fmt::Debug for Client {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Client")
            .field("id", &self.id)
            .field("weight", &self.weight)
            .field("oracle", &self.oracle)
            .finish()
    }
}

/// `N` clients over a shared ground set with weights summing to one.
#[derive(Debug, Clone)]
pub struct ClientPopulation {
    n: usize,
    clients: Vec<Client>,
}

impl ClientPopulation {
    /// Weights must be nonnegative and sum to 1 within `1e-9`.
    pub fn new(oracles: Vec<Arc<dyn SetFunction>>, weights: Vec<f64>) -> Result<Self> {
        if oracles.is_empty() {
            return Err(Error::input("population needs at least one client"));
        }
        if oracles.len() != weights.len() {
            return Err(Error::input(format!(
                "{} oracles but {} weights",
                oracles.len(),
                weights.len()
            )));
        }
        let n = oracles[0].ground_size();
        if n == 0 {
            return Err(Error::input("ground set must contain at least one element"));
        }
        if let Some(o) = oracles.iter().find(|o| o.ground_size() != n) {
            return Err(Error::input(format!(
                "client oracles disagree on the ground set: {n} vs {}",
                o.ground_size()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::input(format!("client weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("client weights sum to {total}, expected 1")));
        }
        let clients = oracles
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(id, (oracle, weight))| Client { id, weight, oracle })
            .collect();
        Ok(ClientPopulation { n, clients })
    }

    /// Every client weighted `1/N`.
    pub fn uniform(oracles: Vec<Arc<dyn SetFunction>>) -> Result<Self> {
        let w = 1.0 / oracles.len().max(1) as f64;
        let weights = vec![w; oracles.len()];
        // 1/N summed N times can drift by a few ulps, well inside the tolerance.
        Self::new(oracles, weights)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.clients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clients.is_empty()
    }

    pub fn clients(&self) -> &[Client] {
        &self.clients
    }

    pub fn client(&self, i: usize) -> &Client {
        &self.clients[i]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.clients.iter().map(|c| c.weight).collect()
    }

    /// The same clients with every weight multiplied by `alpha`. The result
    /// does not satisfy the sum-to-one invariant; it exists for linearity checks.
    pub fn scaled(&self, alpha: f64) -> ScaledPopulation<'_> {
        ScaledPopulation { pop: self, alpha }
    }

    /// `F(S)` under the given weighting. Clients are summed in id order.
    pub fn value(&self, s: &Subset, weighting: Weighting) -> f64 {
        self.clients
            .iter()
            .map(|c| match weighting {
                Weighting::Weighted => c.weight * c.oracle.value(s),
                Weighting::Unit => c.oracle.value(s),
            })
            .sum()
    }

    /// `Σ_i (f_i(S ∪ {e}) − f_i(S))` under the given weighting, summed per
    /// client in id order. This is the exact quantity a sum-aggregator
    /// reconstructs from per-client marginals.
    pub fn marginal(&self, s: &Subset, e: usize, weighting: Weighting) -> f64 {
        let se = s.with(e);
        self.clients
            .iter()
            .map(|c| {
                let g = c.oracle.value(&se) - c.oracle.value(s);
                match weighting {
                    Weighting::Weighted => c.weight * g,
                    Weighting::Unit => g,
                }
            })
            .sum()
    }

    /// `max_i m_{f_i}`.
    pub fn max_client_singleton(&self) -> f64 {
        self.clients
            .iter()
            .map(|c| c.oracle.max_singleton())
            .fold(0.0, f64::max)
    }

    /// `F` itself as a single oracle.
    pub fn as_oracle(&self, weighting: Weighting) -> PopulationOracle {
        PopulationOracle {
            pop: self.clone(),
            weighting,
        }
    }
}

/// `F = Σ p_i f_i` (or `Σ f_i`) packaged as one [`SetFunction`].
#[derive(Debug, Clone)]
pub struct PopulationOracle {
    pop: ClientPopulation,
    weighting: Weighting,
}

impl SetFunction for PopulationOracle {
    fn ground_size(&self) -> usize {
        self.pop.ground_size()
    }

    fn value(&self, s: &Subset) -> f64 {
        self.pop.value(s, self.weighting)
    }
}

/// A population view with all weights scaled by a constant.
#[derive(Debug, Clone, Copy)]
pub struct ScaledPopulation<'a> {
    pop: &'a ClientPopulation,
    alpha: f64,
}

impl ScaledPopulation<'_> {
    pub fn value(&self, s: &Subset) -> f64 {
        self.pop
            .clients
            .iter()
            .map(|c| self.alpha * c.weight * c.oracle.value(s))
            .sum()
    }
}

/// `F(S) = Σ p_i f_i(S)`.
pub fn decomposable_eval(pop: &ClientPopulation, ids: &[usize]) -> Result<f64> {
    let s = Subset::from_ids(pop.ground_size(), ids)?;
    Ok(pop.value(&s, Weighting::Weighted))
}

/// `m_f = max_e f({e})`.
pub fn max_singleton(f: &dyn SetFunction) -> f64 {
    f.max_singleton()
}

/// Singleton maxima of the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalSingletonBounds {
    /// `m_F = max_e F({e})` for the weighted objective.
    pub m_f: f64,
    /// `2 · max_i m_{f_i}`, the upper bound on every heterogeneity level γ_t.
    pub gamma_bound: f64,
}

pub fn max_singleton_global(pop: &ClientPopulation) -> GlobalSingletonBounds {
    let n = pop.ground_size();
    let m_f = (0..n)
        .map(|e| pop.value(&Subset::singleton(n, e), Weighting::Weighted))
        .fold(0.0, f64::max);
    GlobalSingletonBounds {
        m_f,
        gamma_bound: 2.0 * pop.max_client_singleton(),
    }
}

fn value_table(f: &dyn SetFunction, n_limit: usize, what: &'static str) -> Result<Vec<f64>> {
    let n = f.ground_size();
    if n > n_limit || n >= 63 {
        return Err(Error::Size {
            what,
            n,
            limit: n_limit.min(62),
        });
    }
    Ok((0..1u64 << n)
        .map(|m| f.value(&Subset::from_mask(n, m)))
        .collect())
}

fn tolerance(table: &[f64]) -> f64 {
    let scale = table.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    CHECK_TOL * scale
}

/// Exhaustively checks `f(S) ≤ f(T)` for all `S ⊆ T` (via single-element
/// extensions) and `f(∅) = 0`. Refuses ground sets larger than `n_limit`.
pub fn check_monotone(f: &dyn SetFunction, n_limit: usize) -> Result<bool> {
    let table = value_table(f, n_limit, "check_monotone")?;
    let tol = tolerance(&table);
    let n = f.ground_size();
    for m in 0..table.len() {
        for e in 0..n {
            let bit = 1usize << e;
            if m & bit == 0 && table[m | bit] < table[m] - tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustively checks the diminishing-returns inequality
/// `f(S+e) − f(S) ≥ f(T+e) − f(T)` over every `S ⊆ T` and `e ∉ T`.
pub fn check_submodular(f: &dyn SetFunction, n_limit: usize) -> Result<bool> {
    let table = value_table(f, n_limit, "check_submodular")?;
    let tol = tolerance(&table);
    let n = f.ground_size();
    let full = table.len() - 1;
    for t in 0..table.len() {
        let outside = full & !t;
        // walk every submask s of t
        let mut s = t;
        loop {
            for e in 0..n {
                let bit = 1usize << e;
                if outside & bit != 0 {
                    let gain_s = table[s | bit] - table[s];
                    let gain_t = table[t | bit] - table[t];
                    if gain_s < gain_t - tol {
                        return Ok(false);
                    }
                }
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & t;
        }
    }
    Ok(true)
}

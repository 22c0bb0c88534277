//! Heterogeneity diagnostics and the additive slack terms of the
//! convergence guarantees.

use crate::error::Result;
use crate::multilinear::{population_gradients, FractionalPoint};
use crate::objectives::{max_singleton_global, ClientPopulation};

/// `γ(x) = max_i ‖∇f̂_i(x) − ∇F̂(x)‖_∞`, by exact enumeration.
pub fn compute_gamma(pop: &ClientPopulation, x: &FractionalPoint) -> Result<f64> {
    let (locals, global) = population_gradients(pop, x)?;
    Ok(locals
        .iter()
        .map(|g| g.sup_distance(&global))
        .fold(0.0, f64::max))
}

/// Per-round heterogeneity of a run and the sums the guarantees use.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityDiagnostics {
    /// `γ_t`, measured at the model each round starts from.
    pub gamma: Vec<f64>,
    /// `D = Σ γ_t`.
    pub d: f64,
    /// Upper bound `max_i m_{f_i} · √r` on the local-step smoothness `L_t`.
    pub l: Vec<f64>,
    /// `Q = Σ L_t`.
    pub q: f64,
    /// `m_F = max_e F({e})`.
    pub m_f: f64,
    /// `max_i m_{f_i}`.
    pub max_client_singleton: f64,
}

impl HeterogeneityDiagnostics {
    pub fn new(gamma: Vec<f64>, pop: &ClientPopulation, r: usize) -> Self {
        let bounds = max_singleton_global(pop);
        let max_client_singleton = pop.max_client_singleton();
        let l_bound = max_client_singleton * (r as f64).sqrt();
        let l = vec![l_bound; gamma.len()];
        HeterogeneityDiagnostics {
            d: gamma.iter().sum(),
            q: l.iter().sum(),
            gamma,
            l,
            m_f: bounds.m_f,
            max_client_singleton,
        }
    }

    /// Largest observed `γ_t`.
    pub fn max_gamma(&self) -> f64 {
        self.gamma.iter().copied().fold(0.0, f64::max)
    }
}

/// Full participation: `η r D + T η² r² m_F / 2`.
pub fn theoretical_bound_full(rounds: usize, eta: f64, r: usize, d: f64, m_f: f64) -> f64 {
    let r = r as f64;
    eta * r * d + rounds as f64 * eta * eta * r * r * m_f / 2.0
}

/// Client sampling: `η (r D + 6 r D / √(K δ / T)) + T η² r² m_F / 2`,
/// holding with probability at least `1 − δ`.
pub fn theoretical_bound_partial(
    rounds: usize,
    eta: f64,
    r: usize,
    d: f64,
    m_f: f64,
    k: usize,
    delta: f64,
) -> f64 {
    let rf = r as f64;
    let spread = (k as f64 * delta / rounds as f64).sqrt();
    eta * (rf * d + 6.0 * rf * d / spread) + theoretical_bound_full(rounds, eta, r, 0.0, m_f)
}

/// Inputs of [`theoretical_bound_plus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlusBoundParams {
    /// Total local-step budget `T`.
    pub rounds: usize,
    pub tau: usize,
    pub eta: f64,
    pub r: usize,
    pub k: usize,
    pub delta: f64,
    /// Absolute gradient-estimation accuracy.
    pub sigma: f64,
    pub m_f: f64,
    /// `Σ γ_t` over communication rounds.
    pub d: f64,
    /// `Σ L_t` over communication rounds.
    pub q: f64,
}

/// Local steps with sampled clients and estimated gradients:
///
/// `T η² r² m_F / (2τ) + A + √T (6 η r D + 2 σ r + 2 η r^{1.5} Q) / √(K τ δ)`
/// with `A = η r D + 2 σ r + 2 η r^{1.5} Q`.
pub fn theoretical_bound_plus(p: PlusBoundParams) -> f64 {
    let r = p.r as f64;
    let r15 = r.powf(1.5);
    let t = p.rounds as f64;
    let step = t * p.eta * p.eta * r * r * p.m_f / (2.0 * p.tau as f64);
    let local = p.eta * r * p.d + 2.0 * p.sigma * r + 2.0 * p.eta * r15 * p.q;
    let sampling = t.sqrt() * (6.0 * p.eta * r * p.d + 2.0 * p.sigma * r + 2.0 * p.eta * r15 * p.q)
        / (p.k as f64 * p.tau as f64 * p.delta).sqrt();
    step + local + sampling
}

/// `36 r² γ² / K`, the variance bound for one sampled FedCG round.
pub fn sampling_variance_bound(r: usize, gamma: f64, k: usize) -> f64 {
    36.0 * (r * r) as f64 * gamma * gamma / k as f64
}

/// `(6 r γ + 2 (σ r + L r^{1.5}))² / K`, the variance bound for one FedCG+
/// communication round.
pub fn plus_variance_bound(r: usize, gamma: f64, sigma: f64, l: f64, k: usize) -> f64 {
    let r = r as f64;
    let s = 6.0 * r * gamma + 2.0 * (sigma * r + l * r.powf(1.5));
    s * s / k as f64
}

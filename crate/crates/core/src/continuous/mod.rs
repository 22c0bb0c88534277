//! Federated continuous greedy.
//!
//! [`fedcg_run`] moves the server model along the average of the clients'
//! best local directions, one communication per step. [`fedcg_plus_run`] lets
//! each sampled client take `τ` local steps with estimated gradients before
//! reporting its accumulated change. Both keep the bases they aggregate, so
//! the final point comes with an explicit convex decomposition for rounding.

mod bounds;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bounds::{
    compute_gamma, plus_variance_bound, sampling_variance_bound, theoretical_bound_full,
    theoretical_bound_partial, theoretical_bound_plus, HeterogeneityDiagnostics, PlusBoundParams,
};

use crate::error::{Error, Result};
use crate::federated::{sample_clients, Aggregator, CommLedger, Direction, Payload};
use crate::matroid::{linear_maximize, BaseIndicator, Matroid};
use crate::multilinear::{
    estimate_gradient, exact_gradient, population_extension, sample_count, FractionalPoint,
    GradientVector,
};
use crate::objectives::{ClientPopulation, SetFunction};
use crate::rng::{label, stream, Stream};
use crate::rounding::BaseDecomposition;

/// Who takes part in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Participation {
    /// Every client, weighted by `p_i`.
    Full,
    /// `K` clients drawn with replacement according to `p_i`.
    #[default]
    Sampled,
}

/// What a FedCG client uploads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UplinkPayload {
    /// Its best base, `r ⌈log₂ n⌉` bits.
    #[default]
    Direction,
    /// Its dense gradient; the server then solves one global linear problem.
    Gradient,
}

/// How clients obtain their gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// Enumeration over all `2^n` subsets.
    #[default]
    Exact,
    /// Monte-Carlo with the given number of sampled sets.
    Estimated { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedCGConfig {
    pub rounds: usize,
    pub eta: f64,
    /// `K`; ignored under full participation.
    pub clients_per_round: usize,
    pub participation: Participation,
    pub payload: UplinkPayload,
    pub gradient: GradientMode,
    pub aggregator: Aggregator,
    /// Measure `γ_t` and `F̂(x^(t))` every round (exact, `n ≤ 20`).
    pub diagnostics: bool,
}

impl FedCGConfig {
    /// Sampled participation with `η = 1/T`, exact gradients and plain sums.
    pub fn new(rounds: usize, clients_per_round: usize) -> Self {
        FedCGConfig {
            rounds,
            eta: 1.0 / rounds.max(1) as f64,
            clients_per_round,
            participation: Participation::Sampled,
            payload: UplinkPayload::Direction,
            gradient: GradientMode::Exact,
            aggregator: Aggregator::Plain,
            diagnostics: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::input("rounds: T must be at least 1"));
        }
        check_eta(self.eta, self.rounds)?;
        if self.participation == Participation::Sampled && self.clients_per_round == 0 {
            return Err(Error::input("clients_per_round: K must be at least 1"));
        }
        if let GradientMode::Estimated { samples: 0 } = self.gradient {
            return Err(Error::input("gradient: sample count must be at least 1"));
        }
        Ok(())
    }
}

fn check_eta(eta: f64, steps: usize) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::input(format!("eta: must lie in (0,1], got {eta}")));
    }
    if eta * steps as f64 > 1.0 + 1e-12 {
        return Err(Error::input(format!(
            "eta: {eta} over {steps} server updates would leave the polytope"
        )));
    }
    Ok(())
}

/// Gradient source for FedCG+ local steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlusGradient {
    Exact,
    #[default]
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedCGPlusConfig {
    /// Total local-step budget `T`.
    pub rounds: usize,
    pub tau: usize,
    pub eta: f64,
    pub clients_per_round: usize,
    pub sigma: f64,
    pub delta: f64,
    pub gradient: PlusGradient,
    /// Replaces the sample count derived from `σ` and `δ`.
    pub samples_override: Option<usize>,
    pub aggregator: Aggregator,
    pub diagnostics: bool,
}

impl FedCGPlusConfig {
    /// Sampled gradients with `η = τ/T`.
    pub fn new(rounds: usize, tau: usize, clients_per_round: usize, sigma: f64, delta: f64) -> Self {
        FedCGPlusConfig {
            rounds,
            tau,
            eta: tau as f64 / rounds.max(1) as f64,
            clients_per_round,
            sigma,
            delta,
            gradient: PlusGradient::Sampled,
            samples_override: None,
            aggregator: Aggregator::Plain,
            diagnostics: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::input("rounds: T must be at least 1"));
        }
        if self.tau == 0 || self.rounds % self.tau != 0 {
            return Err(Error::input(format!(
                "tau: {} must be positive and divide T = {}",
                self.tau, self.rounds
            )));
        }
        check_eta(self.eta, self.rounds / self.tau)?;
        if self.clients_per_round == 0 {
            return Err(Error::input("clients_per_round: K must be at least 1"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::input(format!("sigma: must lie in (0,1), got {}", self.sigma)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("delta: must lie in (0,1), got {}", self.delta)));
        }
        if self.samples_override == Some(0) {
            return Err(Error::input("samples: must be at least 1"));
        }
        Ok(())
    }

    pub fn communication_rounds(&self) -> usize {
        self.rounds / self.tau
    }

    /// The gradient mode local steps use on a ground set of size `n`.
    pub fn gradient_mode(&self, n: usize) -> Result<GradientMode> {
        Ok(match self.gradient {
            PlusGradient::Exact => GradientMode::Exact,
            PlusGradient::Sampled => GradientMode::Estimated {
                samples: match self.samples_override {
                    Some(m) => m,
                    None => sample_count(
                        self.sigma,
                        self.delta,
                        self.rounds,
                        self.clients_per_round,
                        n,
                    )?,
                },
            },
        })
    }
}

/// What happened in one communication round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// Communication round index.
    pub t: usize,
    /// Client id per submission slot.
    pub participants: Vec<usize>,
    /// The aggregated direction applied with step `η`.
    pub delta: Vec<f64>,
    /// `γ` at the model this round started from.
    pub gamma: Option<f64>,
    /// `F̂` after the update.
    pub fhat: Option<f64>,
    /// Largest `‖x_i − x‖₂` reached by a local model (0 without local steps).
    pub max_drift: f64,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
}

/// A full run: server models, per-round records, and the decomposition of
/// the final model into bases.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `x` before the first round and after every round.
    pub points: Vec<FractionalPoint>,
    pub rounds: Vec<RoundRecord>,
    pub decomposition: BaseDecomposition,
    pub ledger: CommLedger,
    pub diagnostics: Option<HeterogeneityDiagnostics>,
    pub rank: usize,
}

impl Trajectory {
    pub fn final_point(&self) -> &FractionalPoint {
        self.points.last().expect("trajectory starts with x = 0")
    }

    pub fn max_drift(&self) -> f64 {
        self.rounds.iter().map(|r| r.max_drift).fold(0.0, f64::max)
    }
}

fn client_stream(seed: u64, round: usize, slot: usize, client: usize, step: usize) -> Stream {
    stream(
        seed,
        &[
            label::GRADIENT,
            round as u64,
            slot as u64,
            client as u64,
            step as u64,
        ],
    )
}

fn local_gradient(
    oracle: &dyn SetFunction,
    x: &FractionalPoint,
    mode: GradientMode,
    rng: &mut Stream,
) -> Result<GradientVector> {
    match mode {
        GradientMode::Exact => exact_gradient(oracle, x),
        GradientMode::Estimated { samples } => Ok(estimate_gradient(oracle, x, samples, rng)?.0),
    }
}

/// The base best aligned with the client's (exact or estimated) gradient at `x`.
pub fn client_direction(
    oracle: &dyn SetFunction,
    x: &FractionalPoint,
    m: &dyn Matroid,
    mode: GradientMode,
    rng: &mut Stream,
) -> Result<BaseIndicator> {
    let g = local_gradient(oracle, x, mode, rng)?;
    linear_maximize(m, g.coords())
}

fn check_instance(pop: &ClientPopulation, m: &dyn Matroid) -> Result<()> {
    if pop.ground_size() != m.ground_size() {
        return Err(Error::input(format!(
            "population has {} elements, matroid has {}",
            pop.ground_size(),
            m.ground_size()
        )));
    }
    Ok(())
}

/// Participants of round `t` in slot order, with their aggregation weights.
fn participants(
    pop: &ClientPopulation,
    participation: Participation,
    k: usize,
    t: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    Ok(match participation {
        Participation::Full => (0..pop.len()).collect(),
        Participation::Sampled => {
            let mut rng = stream(seed, &[label::CLIENT_SAMPLING, t as u64]);
            sample_clients(pop, k, t, &mut rng)?.chosen
        }
    })
}

fn step(x: &FractionalPoint, eta: f64, delta: &[f64]) -> Result<FractionalPoint> {
    FractionalPoint::new(
        x.coords()
            .iter()
            .zip(delta)
            .map(|(a, d)| a + eta * d)
            .collect(),
    )
}

/// Runs FedCG from `x = 0`.
///
/// Under sampled participation the server averages the `K` uploaded bases;
/// under full participation it sums `p_i v_i`. With [`UplinkPayload::Gradient`]
/// the server aggregates gradients instead and picks one base itself.
pub fn fedcg_run(
    pop: &ClientPopulation,
    m: &dyn Matroid,
    cfg: &FedCGConfig,
    seed: u64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_instance(pop, m)?;
    let n = pop.ground_size();
    let r = m.rank();
    let mut points = vec![FractionalPoint::zeros(n)];
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut decomposition = BaseDecomposition::new();
    let mut ledger = CommLedger::new();
    let mut gammas = Vec::new();

    for t in 0..cfg.rounds {
        let x = points.last().expect("nonempty").clone();
        let gamma = if cfg.diagnostics {
            let g = compute_gamma(pop, &x)?;
            gammas.push(g);
            Some(g)
        } else {
            None
        };
        let ids = participants(pop, cfg.participation, cfg.clients_per_round, t, seed)?;
        let full = cfg.participation == Participation::Full;
        let scale = |id: usize| if full { pop.client(id).weight } else { 1.0 };
        let aggregate = |vectors: &[Vec<f64>]| {
            if full {
                cfg.aggregator.sum(t, vectors)
            } else {
                cfg.aggregator.mean(t, vectors)
            }
        };
        for _ in &ids {
            ledger.record_payload(t, Direction::Downlink, Payload::broadcast(n));
        }

        let delta = match cfg.payload {
            UplinkPayload::Direction => {
                let bases = ids
                    .par_iter()
                    .enumerate()
                    .map(|(slot, &id)| {
                        let mut rng = client_stream(seed, t, slot, id, 0);
                        client_direction(pop.client(id).oracle.as_ref(), &x, m, cfg.gradient, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let vectors: Vec<Vec<f64>> = ids
                    .iter()
                    .zip(&bases)
                    .map(|(&id, b)| {
                        let w = scale(id);
                        b.to_vec().into_iter().map(|v| v * w).collect()
                    })
                    .collect();
                let k = ids.len() as f64;
                for (&id, b) in ids.iter().zip(bases) {
                    ledger.record_payload(t, Direction::Uplink, Payload::BaseIndicator { r, n });
                    let lambda = if full { cfg.eta * scale(id) } else { cfg.eta / k };
                    if lambda > 0.0 {
                        decomposition.push(lambda, b)?;
                    }
                }
                aggregate(&vectors)?
            }
            UplinkPayload::Gradient => {
                let grads = ids
                    .par_iter()
                    .enumerate()
                    .map(|(slot, &id)| {
                        let mut rng = client_stream(seed, t, slot, id, 0);
                        let g = local_gradient(pop.client(id).oracle.as_ref(), &x, cfg.gradient, &mut rng)?;
                        let w = scale(id);
                        Ok(g.0.into_iter().map(|v| v * w).collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?;
                for _ in &ids {
                    ledger.record_payload(t, Direction::Uplink, Payload::dense(n));
                }
                let global: Vec<f64> = aggregate(&grads)?.into_iter().map(|v| v.max(0.0)).collect();
                let b = linear_maximize(m, &global)?;
                let v = b.to_vec();
                decomposition.push(cfg.eta, b)?;
                v
            }
        };

        let next = step(&x, cfg.eta, &delta)?;
        let fhat = if cfg.diagnostics {
            Some(population_extension(pop, &next)?)
        } else {
            None
        };
        let entry = ledger.round(t).copied().unwrap_or_default();
        rounds.push(RoundRecord {
            t,
            participants: ids,
            delta,
            gamma,
            fhat,
            max_drift: 0.0,
            uplink_bits: entry.uplink_bits,
            downlink_bits: entry.downlink_bits,
        });
        points.push(next);
    }

    Ok(Trajectory {
        points,
        rounds,
        decomposition,
        ledger,
        diagnostics: cfg
            .diagnostics
            .then(|| HeterogeneityDiagnostics::new(gammas, pop, r)),
        rank: r,
    })
}

struct LocalRun {
    change: Vec<f64>,
    bases: Vec<BaseIndicator>,
    max_drift: f64,
}

#[allow(clippy::too_many_arguments)]
fn local_run(
    oracle: &dyn SetFunction,
    x: &FractionalPoint,
    m: &dyn Matroid,
    mode: GradientMode,
    tau: usize,
    seed: u64,
    round: usize,
    slot: usize,
    client: usize,
) -> Result<LocalRun> {
    let start = x.coords();
    let mut xi = start.to_vec();
    let mut change = vec![0.0; start.len()];
    let mut bases = Vec::with_capacity(tau);
    let mut max_drift: f64 = 0.0;
    let inv_tau = 1.0 / tau as f64;
    for j in 0..tau {
        let at = FractionalPoint::clamped(&xi);
        let mut rng = client_stream(seed, round, slot, client, j);
        let v = client_direction(oracle, &at, m, mode, &mut rng)?;
        for e in v.support().iter() {
            xi[e] += inv_tau;
            change[e] += inv_tau;
        }
        let drift = xi
            .iter()
            .zip(start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        max_drift = max_drift.max(drift);
        bases.push(v);
    }
    Ok(LocalRun {
        change,
        bases,
        max_drift,
    })
}

/// Runs FedCG+ from `x = 0`: `T/τ` communication rounds of `τ` local steps.
///
/// Local models may leave the unit box; gradients there are taken at the
/// point clamped into `[0,1]^n`. The server model stays in the polytope.
pub fn fedcg_plus_run(
    pop: &ClientPopulation,
    m: &dyn Matroid,
    cfg: &FedCGPlusConfig,
    seed: u64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_instance(pop, m)?;
    let n = pop.ground_size();
    let r = m.rank();
    let mode = cfg.gradient_mode(n)?;
    let comm = cfg.communication_rounds();
    let k = cfg.clients_per_round;
    let lambda = cfg.eta / (k as f64 * cfg.tau as f64);
    let mut points = vec![FractionalPoint::zeros(n)];
    let mut rounds = Vec::with_capacity(comm);
    let mut decomposition = BaseDecomposition::new();
    let mut ledger = CommLedger::new();
    let mut gammas = Vec::new();

    for t in 0..comm {
        let x = points.last().expect("nonempty").clone();
        let gamma = if cfg.diagnostics {
            let g = compute_gamma(pop, &x)?;
            gammas.push(g);
            Some(g)
        } else {
            None
        };
        let ids = participants(pop, Participation::Sampled, k, t, seed)?;
        let runs = ids
            .par_iter()
            .enumerate()
            .map(|(slot, &id)| {
                local_run(
                    pop.client(id).oracle.as_ref(),
                    &x,
                    m,
                    mode,
                    cfg.tau,
                    seed,
                    t,
                    slot,
                    id,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut changes = Vec::with_capacity(k);
        let mut max_drift: f64 = 0.0;
        for run in runs {
            ledger.record_payload(t, Direction::Downlink, Payload::broadcast(n));
            ledger.record_payload(t, Direction::Uplink, Payload::dense(n));
            for b in run.bases {
                decomposition.push(lambda, b)?;
            }
            max_drift = max_drift.max(run.max_drift);
            changes.push(run.change);
        }
        let delta = cfg.aggregator.mean(t, &changes)?;
        let next = step(&x, cfg.eta, &delta)?;
        let fhat = if cfg.diagnostics {
            Some(population_extension(pop, &next)?)
        } else {
            None
        };
        let entry = ledger.round(t).copied().unwrap_or_default();
        rounds.push(RoundRecord {
            t,
            participants: ids,
            delta,
            gamma,
            fhat,
            max_drift,
            uplink_bits: entry.uplink_bits,
            downlink_bits: entry.downlink_bits,
        });
        points.push(next);
    }

    Ok(Trajectory {
        points,
        rounds,
        decomposition,
        ledger,
        diagnostics: cfg
            .diagnostics
            .then(|| HeterogeneityDiagnostics::new(gammas, pop, r)),
        rank: r,
    })
}

/// Centralized continuous greedy on `F = Σ p_i f_i` with `η = 1/T`: every
/// step follows the base best aligned with the global gradient. Nothing is
/// communicated, so the ledger stays empty.
pub fn central_continuous_greedy(
    pop: &ClientPopulation,
    m: &dyn Matroid,
    rounds: usize,
    gradient: GradientMode,
    diagnostics: bool,
    seed: u64,
) -> Result<Trajectory> {
    let cfg = FedCGConfig {
        participation: Participation::Full,
        payload: UplinkPayload::Gradient,
        gradient,
        diagnostics,
        ..FedCGConfig::new(rounds, 1)
    };
    let mut run = fedcg_run(pop, m, &cfg, seed)?;
    run.ledger = CommLedger::new();
    for rec in &mut run.rounds {
        rec.uplink_bits = 0;
        rec.downlink_bits = 0;
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{polytope_membership, UniformMatroid, POLYTOPE_TOL};
    use crate::objectives::{Coverage, Modular};
    use crate::rng::seeded;
    use std::sync::Arc;

    fn cov3() -> ClientPopulation {
        Coverage::new(vec![vec![0, 1], vec![1, 2], vec![3]], 4)
            .unwrap()
            .population()
    }

    #[test]
    fn direction_examples() {
        let f = Modular::unit(4, 0);
        let m1 = UniformMatroid::new(4, 1).unwrap();
        let x = FractionalPoint::zeros(4);
        let b = client_direction(&f, &x, &m1, GradientMode::Exact, &mut seeded(0)).unwrap();
        assert_eq!(b.to_vec(), vec![1.0, 0.0, 0.0, 0.0]);

        let pop = cov3();
        let m2 = UniformMatroid::new(3, 2).unwrap();
        let c4 = pop.client(3).oracle.as_ref();
        let b = client_direction(c4, &FractionalPoint::zeros(3), &m2, GradientMode::Exact, &mut seeded(0))
            .unwrap();
        assert!(b.support().contains(2));
    }

    #[test]
    fn estimated_direction_agrees_when_gradients_separate() {
        let f = Modular::new(vec![3.0, 1.0, 2.0, 0.5]).unwrap();
        let m = UniformMatroid::new(4, 2).unwrap();
        let x = FractionalPoint::new(vec![0.2, 0.5, 0.1, 0.3]).unwrap();
        let exact = client_direction(&f, &x, &m, GradientMode::Exact, &mut seeded(1)).unwrap();
        let est = client_direction(&f, &x, &m, GradientMode::Estimated { samples: 10_000 }, &mut seeded(1))
            .unwrap();
        assert_eq!(exact, est);
    }

    #[test]
    fn single_modular_client_reaches_opt() {
        let pop = ClientPopulation::uniform(vec![Arc::new(Modular::unit(3, 0)) as Arc<dyn SetFunction>])
            .unwrap();
        let m = UniformMatroid::new(3, 1).unwrap();
        let run = fedcg_run(&pop, &m, &FedCGConfig::new(10, 1), 0).unwrap();
        let x = run.final_point().coords();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0 && x[2] == 0.0);
        assert!((population_extension(&pop, run.final_point()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectories_stay_feasible_and_decompose() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 2).unwrap();
        let cfg = FedCGConfig {
            diagnostics: true,
            ..FedCGConfig::new(40, 2)
        };
        let run = fedcg_run(&pop, &m, &cfg, 3).unwrap();
        for p in &run.points {
            assert!(polytope_membership(&m, p, POLYTOPE_TOL).unwrap());
        }
        let rebuilt = run.decomposition.point(3);
        for (a, b) in rebuilt.iter().zip(run.final_point().coords()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((run.decomposition.total() - 1.0).abs() < 1e-9);
        let diag = run.diagnostics.unwrap();
        assert_eq!(diag.gamma.len(), 40);
        assert!(diag.max_gamma() <= 2.0 * diag.max_client_singleton);
    }

    #[test]
    fn full_participation_weights_directions() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 1).unwrap();
        let cfg = FedCGConfig {
            participation: Participation::Full,
            ..FedCGConfig::new(1, 1)
        };
        let run = fedcg_run(&pop, &m, &cfg, 0).unwrap();
        // at x = 0: C1 → G1, C2 → G1 (tie), C3 → G2, C4 → G3, each weighted 1/4
        assert_eq!(run.rounds[0].delta, vec![0.5, 0.25, 0.25]);
        assert_eq!(run.ledger.total_uplink(), 4 * 2);
    }

    #[test]
    fn plus_with_one_step_matches_fedcg() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 2).unwrap();
        let base = fedcg_run(&pop, &m, &FedCGConfig::new(20, 2), 9).unwrap();
        let plus_cfg = FedCGPlusConfig {
            gradient: PlusGradient::Exact,
            ..FedCGPlusConfig::new(20, 1, 2, 0.2, 0.1)
        };
        let plus = fedcg_plus_run(&pop, &m, &plus_cfg, 9).unwrap();
        assert_eq!(base.points, plus.points);
        assert_eq!(base.decomposition, plus.decomposition);
    }

    #[test]
    fn plus_drift_and_feasibility() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 2).unwrap();
        let cfg = FedCGPlusConfig {
            samples_override: Some(64),
            ..FedCGPlusConfig::new(20, 5, 2, 0.2, 0.1)
        };
        let run = fedcg_plus_run(&pop, &m, &cfg, 1).unwrap();
        assert_eq!(run.points.len(), 5);
        assert!(run.max_drift() <= 2f64.sqrt() + 1e-12);
        for p in &run.points {
            assert!(polytope_membership(&m, p, POLYTOPE_TOL).unwrap());
        }
        assert_eq!(run.ledger.total_uplink(), 4 * 2 * 64 * 3);
    }

    #[test]
    fn config_validation() {
        let mut c = FedCGConfig::new(10, 2);
        c.eta = 0.2;
        assert!(c.validate().is_err());
        let p = FedCGPlusConfig::new(10, 3, 2, 0.2, 0.1);
        assert!(p.validate().unwrap_err().to_string().contains("tau"));
        assert!(FedCGPlusConfig::new(10, 5, 2, 1.5, 0.1).validate().is_err());
    }

    #[test]
    fn central_greedy_matches_full_gradient_fedcg() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 2).unwrap();
        let run = central_continuous_greedy(&pop, &m, 50, GradientMode::Exact, false, 0).unwrap();
        assert_eq!(run.ledger.total_uplink(), 0);
        let v = population_extension(&pop, run.final_point()).unwrap();
        assert!(v >= (1.0 - (-1.0f64).exp()) * 0.75 - 0.05, "{v}");
    }
}

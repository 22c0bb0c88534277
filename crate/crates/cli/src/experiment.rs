//! Algorithm dispatch and metrics emission.

use std::io::Write;
use std::time::Instant;

use fedsubmax::continuous::{
    central_continuous_greedy, fedcg_plus_run, fedcg_run, theoretical_bound_full,
    theoretical_bound_partial, theoretical_bound_plus, Participation, PlusBoundParams,
    PlusGradient, Trajectory,
};
use fedsubmax::discrete::{
    brute_force_opt, centralized_greedy, fed_discrete_greedy, importance_coverage,
    importance_facility,
};
use fedsubmax::matroid::Matroid;
use fedsubmax::multilinear::{population_extension, sample_set, FractionalPoint};
use fedsubmax::objectives::{max_singleton_global, ClientPopulation, Weighting};
use fedsubmax::rng::{label, stream};
use fedsubmax::rounding::{normalize, swap_round};
use fedsubmax::synthetic::Instance;
use fedsubmax::Subset;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AlgorithmConfig, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::ingest::build_instance;

/// Largest ground set for which OPT is brute-forced.
pub const OPT_LIMIT: usize = 20;
/// Largest ground set for which per-round heterogeneity is tracked.
pub const DIAGNOSTIC_LIMIT: usize = 12;
/// Largest ground set for which `F̂` is evaluated exactly.
pub const EXACT_VALUE_LIMIT: usize = 16;
const VALUE_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Adds `wall_clock_ms` to the summary, which makes output nondeterministic.
    pub timing: bool,
}

/// The last record of every run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub record: &'static str,
    pub algorithm: &'static str,
    pub seed: u64,
    pub n: usize,
    pub clients: usize,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    /// `F̂` at the final fractional point.
    #[serde(rename = "Fhat", skip_serializing_if = "Option::is_none")]
    pub fhat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fhat_estimated: Option<bool>,
    /// `F` of the swap-rounded set.
    #[serde(rename = "F_rounded", skip_serializing_if = "Option::is_none")]
    pub f_rounded: Option<f64>,
    /// `F` of the returned set (discrete algorithms).
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub f_set: Option<f64>,
    pub set: Vec<usize>,
    #[serde(rename = "OPT", skip_serializing_if = "Option::is_none")]
    pub opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_set: Option<Vec<usize>>,
    /// Multiplier on OPT the algorithm's guarantee targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// Additive slack of the guarantee.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    /// Whether `value + slack ≥ factor · OPT`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

impl Summary {
    fn new(algorithm: &'static str, seed: u64, pop: &ClientPopulation, m: &dyn Matroid) -> Self {
        Summary {
            record: "summary",
            algorithm,
            seed,
            n: pop.ground_size(),
            clients: pop.len(),
            rank: m.rank(),
            rounds: None,
            fhat: None,
            fhat_estimated: None,
            f_rounded: None,
            f_set: None,
            set: Vec::new(),
            opt: None,
            opt_set: None,
            factor: None,
            slack: None,
            bound_holds: None,
            kappa: None,
            uplink_bits: 0,
            downlink_bits: 0,
            wall_clock_ms: None,
        }
    }
}

fn emit(out: &mut dyn Write, record: &impl Serialize) -> Result<()> {
    let line = serde_json::to_string(record).expect("records serialize");
    writeln!(out, "{line}").map_err(|source| CliError::Io {
        path: "<output>".into(),
        source,
    })
}

fn tagged(value: impl Serialize) -> Value {
    let mut v = serde_json::to_value(value).expect("records serialize");
    v["record"] = json!("round");
    v
}

/// `F̂(x)`: exact for small ground sets, otherwise a seeded Monte-Carlo mean.
fn extension_value(pop: &ClientPopulation, x: &FractionalPoint, seed: u64) -> Result<(f64, bool)> {
    if x.len() <= EXACT_VALUE_LIMIT {
        return Ok((population_extension(pop, x)?, false));
    }
    let mut rng = stream(seed, &[label::ROUNDING, 1]);
    let total: f64 = (0..VALUE_SAMPLES)
        .map(|_| pop.value(&sample_set(x, &mut rng), Weighting::Weighted))
        .sum();
    Ok((total / VALUE_SAMPLES as f64, true))
}

fn optimum(pop: &ClientPopulation, m: &dyn Matroid, weighting: Weighting) -> Result<Option<(Subset, f64)>> {
    if pop.ground_size() > OPT_LIMIT {
        return Ok(None);
    }
    Ok(Some(brute_force_opt(pop, m, weighting)?))
}

fn continuous_summary(
    s: &mut Summary,
    pop: &ClientPopulation,
    m: &dyn Matroid,
    run: &Trajectory,
    seed: u64,
    out: &mut dyn Write,
) -> Result<()> {
    for rec in &run.rounds {
        emit(
            out,
            &json!({
                "record": "round",
                "t": rec.t,
                "participants": rec.participants,
                "uplink_bits": rec.uplink_bits,
                "downlink_bits": rec.downlink_bits,
                "gamma": rec.gamma,
                "fhat": rec.fhat,
                "max_drift": rec.max_drift,
            }),
        )?;
    }
    let dec = normalize(&run.decomposition)?;
    let set = swap_round(&dec, m, &mut stream(seed, &[label::ROUNDING]))?;
    let (fhat, estimated) = extension_value(pop, run.final_point(), seed)?;
    s.rounds = Some(run.rounds.len());
    s.fhat = Some(fhat);
    s.fhat_estimated = Some(estimated);
    s.f_rounded = Some(pop.value(&set, Weighting::Weighted));
    s.set = set.to_vec();
    s.uplink_bits = run.ledger.total_uplink();
    s.downlink_bits = run.ledger.total_downlink();
    if let Some((opt_set, opt)) = optimum(pop, m, Weighting::Weighted)? {
        s.opt = Some(opt);
        s.opt_set = Some(opt_set.to_vec());
    }
    Ok(())
}

fn close_bound(s: &mut Summary, value: f64) {
    if let (Some(opt), Some(factor)) = (s.opt, s.factor) {
        let slack = s.slack.unwrap_or(0.0);
        s.bound_holds = Some(value + slack >= factor * opt - 1e-9);
    }
}

fn run_algorithm(
    cfg: &ExperimentConfig,
    instance: &Instance,
    m: &dyn Matroid,
    out: &mut dyn Write,
) -> Result<Summary> {
    let pop = instance.population();
    let seed = cfg.seed;
    let n = pop.ground_size();
    let r = m.rank();
    let mut s = Summary::new(cfg.algorithm.name(), seed, &pop, m);
    match &cfg.algorithm {
        AlgorithmConfig::FedCG { delta, .. } => {
            let mut lib = cfg.algorithm.fedcg(seed)?.expect("fedcg config");
            lib.diagnostics = n <= DIAGNOSTIC_LIMIT;
            let run = fedcg_run(&pop, m, &lib, seed)?;
            continuous_summary(&mut s, &pop, m, &run, seed, out)?;
            s.factor = Some(1.0 - (1.0 - lib.eta).powi(lib.rounds as i32));
            if let Some(d) = &run.diagnostics {
                s.slack = Some(match lib.participation {
                    Participation::Full => theoretical_bound_full(lib.rounds, lib.eta, r, d.d, d.m_f),
                    Participation::Sampled => theoretical_bound_partial(
                        lib.rounds,
                        lib.eta,
                        r,
                        d.d,
                        d.m_f,
                        lib.clients_per_round,
                        *delta,
                    ),
                });
            }
            let fhat = s.fhat.unwrap_or(0.0);
            close_bound(&mut s, fhat);
        }
        AlgorithmConfig::FedCGPlus { .. } => {
            let mut lib = cfg.algorithm.fedcg_plus(seed)?.expect("fedcg-plus config");
            lib.diagnostics = n <= DIAGNOSTIC_LIMIT;
            let run = fedcg_plus_run(&pop, m, &lib, seed)?;
            continuous_summary(&mut s, &pop, m, &run, seed, out)?;
            s.factor = Some(1.0 - (-1.0f64).exp());
            if let Some(d) = &run.diagnostics {
                let sigma = match lib.gradient {
                    PlusGradient::Exact => 0.0,
                    PlusGradient::Sampled => lib.sigma * d.max_client_singleton,
                };
                s.slack = Some(theoretical_bound_plus(PlusBoundParams {
                    rounds: lib.rounds,
                    tau: lib.tau,
                    eta: lib.eta,
                    r,
                    k: lib.clients_per_round,
                    delta: lib.delta,
                    sigma,
                    m_f: d.m_f,
                    d: d.d,
                    q: d.q,
                }));
            }
            let fhat = s.fhat.unwrap_or(0.0);
            close_bound(&mut s, fhat);
        }
        AlgorithmConfig::CentralCG { rounds, gradient } => {
            let run = central_continuous_greedy(&pop, m, *rounds, (*gradient).into(), false, seed)?;
            continuous_summary(&mut s, &pop, m, &run, seed, out)?;
            let eta = 1.0 / *rounds as f64;
            s.factor = Some(1.0 - (1.0 - eta).powi(*rounds as i32));
            let m_f = max_singleton_global(&pop).m_f;
            s.slack = Some(theoretical_bound_full(*rounds, eta, r, 0.0, m_f));
            let fhat = s.fhat.unwrap_or(0.0);
            close_bound(&mut s, fhat);
        }
        AlgorithmConfig::FedDiscrete { .. } => {
            let params = cfg.algorithm.discrete(seed)?.expect("fed-discrete params");
            let importance = match instance {
                Instance::Coverage(_) => importance_coverage(&pop, params.aggregator)?,
                Instance::Facility(_) => importance_facility(&pop, params.aggregator)?,
            };
            let run = fed_discrete_greedy(&pop, m, &importance.w, params, seed)?;
            for rec in &run.log {
                emit(out, &tagged(rec))?;
            }
            s.rounds = Some(run.log.len());
            s.kappa = Some(run.kappa);
            s.set = run.set.to_vec();
            let value = pop.value(&run.set, Weighting::Weighted);
            s.f_set = Some(value);
            s.uplink_bits = importance.ledger.total_uplink() + run.ledger.total_uplink();
            s.downlink_bits = importance.ledger.total_downlink() + run.ledger.total_downlink();
            if let Some((opt_set, opt)) = optimum(&pop, m, Weighting::Weighted)? {
                s.opt = Some(opt);
                s.opt_set = Some(opt_set.to_vec());
            }
            s.factor = Some(1.0 - (-1.0f64).exp() - params.epsilon);
            close_bound(&mut s, value);
        }
        AlgorithmConfig::CentralGreedy {} => {
            let set = centralized_greedy(&pop, m, Weighting::Weighted);
            let value = pop.value(&set, Weighting::Weighted);
            s.set = set.to_vec();
            s.f_set = Some(value);
            if let Some((opt_set, opt)) = optimum(&pop, m, Weighting::Weighted)? {
                s.opt = Some(opt);
                s.opt_set = Some(opt_set.to_vec());
            }
            s.factor = Some(0.5);
            close_bound(&mut s, value);
        }
        AlgorithmConfig::Brute {} => brute_into(&mut s, &pop, m)?,
    }
    Ok(s)
}

fn brute_into(s: &mut Summary, pop: &ClientPopulation, m: &dyn Matroid) -> Result<()> {
    let (set, opt) = brute_force_opt(pop, m, Weighting::Weighted)?;
    s.set = set.to_vec();
    s.f_set = Some(opt);
    s.opt = Some(opt);
    s.opt_set = Some(set.to_vec());
    Ok(())
}

/// Loads the data a config names and builds its matroid.
pub fn prepare(cfg: &ExperimentConfig) -> Result<(Instance, std::sync::Arc<dyn Matroid>)> {
    let instance = build_instance(&cfg.objective, cfg.seed)?;
    let m = cfg
        .matroid
        .build(instance.ground_size())
        .map_err(|e| CliError::scoped("matroid", e))?;
    Ok((instance, m))
}

/// Runs the configured algorithm, writing one JSON line per round and a
/// final summary line to `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &mut dyn Write, opts: RunOptions) -> Result<Summary> {
    let start = Instant::now();
    let (instance, m) = prepare(cfg)?;
    let mut summary = run_algorithm(cfg, &instance, m.as_ref(), out)?;
    if opts.timing {
        summary.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    emit(out, &summary)?;
    Ok(summary)
}

/// Exact optimum of the configured objective and matroid, as a summary record.
pub fn run_brute(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Summary> {
    let (instance, m) = prepare(cfg)?;
    let pop = instance.population();
    let mut s = Summary::new("brute", cfg.seed, &pop, m.as_ref());
    brute_into(&mut s, &pop, m.as_ref())?;
    emit(out, &s)?;
    Ok(s)
}

//! Federated discrete greedy with randomized response, the importance-factor
//! protocols that calibrate it, and the exact baselines it is compared to.
//!
//! The discrete protocols aggregate raw per-client vectors, so they work
//! with the unit-weight objective `F = Σ f_i`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::federated::{aggregate_sum, Aggregator, CommLedger, Direction, Payload};
use crate::matroid::{for_each_combination, Matroid};
use crate::multilinear::EXACT_LIMIT;
use crate::objectives::{ClientPopulation, Weighting};
use crate::rng::{label, stream};
use crate::subset::Subset;

/// Per-client importance `w_i = max_e f_i({e}) / F({e})`, together with the
/// histogram `F({e})` the server learned and the traffic of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceFactors {
    pub w: Vec<f64>,
    pub histogram: Vec<f64>,
    pub ledger: CommLedger,
}

impl ImportanceFactors {
    /// `κ_i = min(κ w_i, 1)`.
    pub fn kappa_i(&self, kappa: f64) -> Vec<f64> {
        participation_probabilities(&self.w, kappa)
    }
}

/// `κ_i = min(κ w_i, 1)`, and exactly 0 when `w_i = 0`.
pub fn participation_probabilities(w: &[f64], kappa: f64) -> Vec<f64> {
    w.iter()
        .map(|&wi| if wi > 0.0 { (kappa * wi).min(1.0) } else { 0.0 })
        .collect()
}

fn singleton_rows(pop: &ClientPopulation) -> Vec<Vec<f64>> {
    let n = pop.ground_size();
    pop.clients()
        .iter()
        .map(|c| (0..n).map(|e| c.oracle.value(&Subset::singleton(n, e))).collect())
        .collect()
}

fn importance_from_rows(
    rows: &[Vec<f64>],
    aggregator: Aggregator,
    uplink: Payload,
) -> Result<ImportanceFactors> {
    let n = rows.first().map_or(0, Vec::len);
    let mut ledger = CommLedger::new();
    for _ in rows {
        ledger.record_payload(0, Direction::Uplink, uplink);
    }
    let histogram = aggregator.sum(0, rows)?;
    for _ in rows {
        ledger.record_payload(1, Direction::Downlink, Payload::broadcast(n));
    }
    let w = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&histogram)
                .filter(|(_, &o)| o > 0.0)
                .map(|(v, o)| v / o)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ImportanceFactors {
        w,
        histogram,
        ledger,
    })
}

/// Two-round protocol for facility location: clients upload their score
/// rows, the server broadcasts the column sums `O[j]`, and each client takes
/// `w_i = max_j c(i,j) / O[j]` over columns with `O[j] > 0`.
pub fn importance_facility(pop: &ClientPopulation, aggregator: Aggregator) -> Result<ImportanceFactors> {
    let rows = singleton_rows(pop);
    importance_from_rows(&rows, aggregator, Payload::dense(pop.ground_size()))
}

/// Two-round protocol for max coverage: clients upload 0/1 membership
/// vectors, the server broadcasts group sizes `O[a]`, and each client takes
/// `w_i = max 1/O[a]` over its groups (0 if it belongs to none).
pub fn importance_coverage(pop: &ClientPopulation, aggregator: Aggregator) -> Result<ImportanceFactors> {
    let rows = singleton_rows(pop);
    for (i, row) in rows.iter().enumerate() {
        if let Some(v) = row.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::input(format!(
                "client {i} has singleton value {v}; coverage oracles take values 0 or 1"
            )));
        }
    }
    let n = pop.ground_size();
    importance_from_rows(
        &rows,
        aggregator,
        Payload::DenseVector {
            n,
            bits_per_coord: 1,
        },
    )
}

/// `⌈3 (r ln n + ln(2r) + ln n) / ε²⌉`: the union-bound scale with failure
/// probability `1/n`.
pub fn default_kappa(r: usize, n: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input(format!("epsilon: must lie in (0,1), got {epsilon}")));
    }
    if r == 0 || n == 0 {
        return Err(Error::input("rank and ground set must be nonempty"));
    }
    let (rf, ln_n) = (r as f64, (n as f64).ln());
    Ok((3.0 * (rf * ln_n + (2.0 * rf).ln() + ln_n) / (epsilon * epsilon)).ceil())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteParams {
    pub epsilon: f64,
    /// Replaces [`default_kappa`].
    pub kappa_override: Option<f64>,
    pub aggregator: Aggregator,
}

impl DiscreteParams {
    pub fn new(epsilon: f64) -> Self {
        DiscreteParams {
            epsilon,
            kappa_override: None,
            aggregator: Aggregator::Plain,
        }
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteRound {
    pub round: usize,
    pub participants: usize,
    /// `None` when the round stopped the run early.
    pub chosen: Option<usize>,
    pub uplink_bits: u64,
}

#[derive(Debug, Clone)]
pub struct DiscreteRun {
    pub set: Subset,
    pub kappa: f64,
    pub kappa_i: Vec<f64>,
    pub log: Vec<DiscreteRound>,
    pub ledger: CommLedger,
}

impl DiscreteRun {
    /// The run log as JSON lines.
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain struct serializes") + "\n")
            .collect()
    }
}

fn feasible_extensions(m: &dyn Matroid, s: &Subset) -> Vec<usize> {
    (0..m.ground_size())
        .filter(|&e| !s.contains(e) && m.can_add(s, e))
        .collect()
}

/// First element with the largest score; `None` if no score is positive.
fn argmax_positive(candidates: &[usize], score: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &e in candidates {
        let v = score(e);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((e, v));
        }
    }
    best.filter(|&(_, v)| v > 0.0).map(|(e, _)| e)
}

/// Federated greedy over `F = Σ f_i` with randomized response.
///
/// Each of `r` rounds, client `i` participates with probability `κ_i` and
/// uploads its marginal gains over the feasible extensions of `S`, scaled by
/// `1/κ_i`. The server adds the best aggregated element (ties to the
/// smallest id) and stops early once nothing positive arrives.
pub fn fed_discrete_greedy(
    pop: &ClientPopulation,
    m: &dyn Matroid,
    w: &[f64],
    params: DiscreteParams,
    seed: u64,
) -> Result<DiscreteRun> {
    let n = pop.ground_size();
    if m.ground_size() != n {
        return Err(Error::input("population and matroid disagree on the ground set"));
    }
    if w.len() != pop.len() {
        return Err(Error::input(format!(
            "{} importance factors for {} clients",
            w.len(),
            pop.len()
        )));
    }
    if let Some(bad) = w.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::input(format!("importance factor {bad} must be nonnegative")));
    }
    let r = m.rank();
    let kappa = match params.kappa_override {
        Some(k) if k > 0.0 && k.is_finite() => k,
        Some(k) => return Err(Error::input(format!("kappa_override: must be positive, got {k}"))),
        None => default_kappa(r, n, params.epsilon)?,
    };
    let kappa_i = participation_probabilities(w, kappa);
    let mut s = Subset::empty(n);
    let mut log = Vec::with_capacity(r);
    let mut ledger = CommLedger::new();

    for round in 0..r {
        let feasible = feasible_extensions(m, &s);
        let mut vectors = Vec::new();
        for (c, &k_i) in pop.clients().iter().zip(&kappa_i) {
            let mut coin = stream(seed, &[label::RESPONSE, round as u64, c.id as u64]);
            if feasible.is_empty() || !(coin.gen::<f64>() < k_i) {
                continue;
            }
            let base = c.oracle.value(&s);
            let mut delta = vec![0.0; n];
            for &e in &feasible {
                delta[e] = (c.oracle.value(&s.with(e)) - base) / k_i;
            }
            vectors.push(delta);
            ledger.record_payload(
                round,
                Direction::Uplink,
                Payload::SparseVector {
                    nnz: feasible.len(),
                    n,
                    bits_per_coord: 64,
                },
            );
        }
        let chosen = if vectors.is_empty() {
            None
        } else {
            let total = match params.aggregator {
                Aggregator::Plain => aggregate_sum(&vectors)?,
                agg => agg.sum(round, &vectors)?,
            };
            argmax_positive(&feasible, |e| total[e])
        };
        log.push(DiscreteRound {
            round,
            participants: vectors.len(),
            chosen,
            uplink_bits: ledger.round(round).map_or(0, |e| e.uplink_bits),
        });
        let Some(e) = chosen else { break };
        s.insert(e);
        for _ in 0..pop.len() {
            ledger.record_payload(round, Direction::Downlink, Payload::ElementSet { size: 1, n });
        }
    }

    Ok(DiscreteRun {
        set: s,
        kappa,
        kappa_i,
        log,
        ledger,
    })
}

/// Classical greedy: up to `r` passes, each adding the feasible element of
/// largest exact marginal gain (ties to the smallest id), stopping once no
/// gain is positive. Per-client gains are summed in id order.
pub fn centralized_greedy(pop: &ClientPopulation, m: &dyn Matroid, weighting: Weighting) -> Subset {
    let mut s = Subset::empty(pop.ground_size());
    for _ in 0..m.rank() {
        let feasible = feasible_extensions(m, &s);
        match argmax_positive(&feasible, |e| pop.marginal(&s, e, weighting)) {
            Some(e) => {
                s.insert(e);
            }
            None => break,
        }
    }
    s
}

/// Exact optimum over the bases of `m` (`n ≤ 20`), which suffices for
/// monotone objectives. Ties keep the lexicographically first base.
pub fn brute_force_opt(
    pop: &ClientPopulation,
    m: &dyn Matroid,
    weighting: Weighting,
) -> Result<(Subset, f64)> {
    let n = pop.ground_size();
    if n > EXACT_LIMIT {
        return Err(Error::Size {
            what: "brute_force_opt",
            n,
            limit: EXACT_LIMIT,
        });
    }
    if m.ground_size() != n {
        return Err(Error::input("population and matroid disagree on the ground set"));
    }
    let mut best: Option<(Subset, f64)> = None;
    for_each_combination(n, m.rank(), |ids| {
        let s = Subset::from_ids(n, ids).expect("ids in range");
        if !m.independent(&s) {
            return;
        }
        let v = pop.value(&s, weighting);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((s, v));
        }
    });
    best.ok_or_else(|| Error::Invariant("matroid has no base".into()))
}

/// A randomized-response reweighting of `F = Σ f_i`: client `i` survives with
/// probability `κ_i` at weight `1/κ_i`.
#[derive(Debug, Clone)]
pub struct SparsifiedObjective<'a> {
    pop: &'a ClientPopulation,
    kept: Vec<(usize, f64)>,
}

impl SparsifiedObjective<'_> {
    pub fn value(&self, s: &Subset) -> f64 {
        self.kept
            .iter()
            .map(|&(i, w)| w * self.pop.client(i).oracle.value(s))
            .sum()
    }

    /// Surviving clients and their weights.
    pub fn kept(&self) -> &[(usize, f64)] {
        &self.kept
    }
}

pub fn sparsified_value<'a>(
    pop: &'a ClientPopulation,
    kappa_i: &[f64],
    seed: u64,
) -> Result<SparsifiedObjective<'a>> {
    if kappa_i.len() != pop.len() {
        return Err(Error::input("one participation probability per client is required"));
    }
    let mut rng = stream(seed, &[label::SPARSIFY]);
    let kept = kappa_i
        .iter()
        .enumerate()
        .filter_map(|(i, &k)| (rng.gen::<f64>() < k).then(|| (i, 1.0 / k)))
        .collect();
    Ok(SparsifiedObjective { pop, kept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{PartitionMatroid, UniformMatroid};
    use crate::objectives::{Coverage, FacilityLocation, Modular, SetFunction};
    use std::sync::Arc;

    fn cov3() -> ClientPopulation {
        Coverage::new(vec![vec![0, 1], vec![1, 2], vec![3]], 4)
            .unwrap()
            .population()
    }

    #[test]
    fn facility_importance_example() {
        let fl = FacilityLocation::new(vec![vec![3.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let imp = importance_facility(&fl.population(), Aggregator::Plain).unwrap();
        assert_eq!(imp.histogram, vec![3.0, 3.0]);
        assert_eq!(imp.w, vec![1.0, 2.0 / 3.0]);
        assert_eq!(imp.ledger.rounds().len(), 2);

        let single = FacilityLocation::new(vec![vec![0.5, 4.0]]).unwrap();
        assert_eq!(importance_facility(&single.population(), Aggregator::Plain).unwrap().w, vec![1.0]);

        let same = FacilityLocation::new(vec![vec![1.0, 2.0]; 3]).unwrap();
        let w = importance_facility(&same.population(), Aggregator::Plain).unwrap().w;
        assert!(w.iter().all(|&v| v == w[0]));
    }

    #[test]
    fn zero_columns_are_skipped() {
        let fl = FacilityLocation::new(vec![vec![0.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let imp = importance_facility(&fl.population(), Aggregator::Plain).unwrap();
        assert_eq!(imp.w, vec![0.25, 0.75]);
    }

    #[test]
    fn coverage_importance_examples() {
        let imp = importance_coverage(&cov3(), Aggregator::Plain).unwrap();
        assert_eq!(imp.w, vec![0.5, 0.5, 0.5, 1.0]);
        let one = Coverage::new(vec![vec![0, 1, 2]], 3).unwrap();
        let w = importance_coverage(&one.population(), Aggregator::Plain).unwrap().w;
        assert_eq!(w, vec![1.0 / 3.0; 3]);
        let singles = Coverage::new(vec![vec![0], vec![1]], 3).unwrap();
        let w = importance_coverage(&singles.population(), Aggregator::Plain).unwrap().w;
        assert_eq!(w, vec![1.0, 1.0, 0.0]);
        let fl = FacilityLocation::new(vec![vec![0.5, 1.0]]).unwrap();
        assert!(importance_coverage(&fl.population(), Aggregator::Plain).is_err());
    }

    #[test]
    fn kappa_default() {
        assert_eq!(default_kappa(2, 3, 0.2).unwrap(), 352.0);
        assert!(default_kappa(2, 3, 1.0).is_err());
        assert_eq!(participation_probabilities(&[0.5, 0.0, 0.01], 4.0), vec![1.0, 0.0, 0.04]);
    }

    #[test]
    fn greedy_on_cov3() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 2).unwrap();
        let s = centralized_greedy(&pop, &m, Weighting::Unit);
        assert_eq!(s.to_vec(), vec![0, 1]);
        assert_eq!(pop.value(&s, Weighting::Unit), 3.0);

        let w = importance_coverage(&pop, Aggregator::Plain).unwrap().w;
        let run = fed_discrete_greedy(&pop, &m, &w, DiscreteParams::new(0.2), 5).unwrap();
        assert!(run.kappa_i.iter().all(|&k| k == 1.0));
        assert_eq!(run.set, s);
        assert!(run.log_jsonl().starts_with("{\"round\":0,\"participants\":4,\"chosen\":0,"));
    }

    #[test]
    fn greedy_is_optimal_for_modular() {
        let pop = ClientPopulation::uniform(vec![
            Arc::new(Modular::new(vec![1.0, 5.0, 2.0, 4.0]).unwrap()) as Arc<dyn SetFunction>,
        ])
        .unwrap();
        let m = PartitionMatroid::new(4, vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        let s = centralized_greedy(&pop, &m, Weighting::Unit);
        let (_, opt) = brute_force_opt(&pop, &m, Weighting::Unit).unwrap();
        assert_eq!(pop.value(&s, Weighting::Unit), opt);
    }

    #[test]
    fn greedy_keeps_only_positive_gains() {
        let pop = ClientPopulation::uniform(vec![
            Arc::new(Modular::new(vec![1.0, 0.0, 2.0]).unwrap()) as Arc<dyn SetFunction>,
        ])
        .unwrap();
        let m = UniformMatroid::new(3, 5).unwrap();
        assert_eq!(centralized_greedy(&pop, &m, Weighting::Unit).to_vec(), vec![0, 2]);
        let run = fed_discrete_greedy(&pop, &m, &[1.0], DiscreteParams::new(0.5), 0).unwrap();
        assert_eq!(run.set.to_vec(), vec![0, 2]);
        assert_eq!(run.log.last().unwrap().chosen, None);
    }

    #[test]
    fn brute_force_examples() {
        let pop = cov3();
        let m = UniformMatroid::new(3, 2).unwrap();
        assert_eq!(brute_force_opt(&pop, &m, Weighting::Unit).unwrap().1, 3.0);
        assert_eq!(brute_force_opt(&pop, &m, Weighting::Weighted).unwrap().1, 0.75);
        let all = UniformMatroid::new(3, 3).unwrap();
        let (s, v) = brute_force_opt(&pop, &all, Weighting::Weighted).unwrap();
        assert_eq!(v, pop.value(&Subset::full(3), Weighting::Weighted));
        assert_eq!(s, Subset::full(3));
        let zero = Coverage::new(vec![vec![], vec![]], 2).unwrap().population();
        let m2 = UniformMatroid::new(2, 1).unwrap();
        assert_eq!(brute_force_opt(&zero, &m2, Weighting::Weighted).unwrap().1, 0.0);
    }

    #[test]
    fn sparsified_examples() {
        let pop = cov3();
        let full = sparsified_value(&pop, &[1.0; 4], 3).unwrap();
        for mask in 0..8 {
            let s = Subset::from_mask(3, mask);
            assert_eq!(full.value(&s), pop.value(&s, Weighting::Unit));
        }
        let half = [0.5; 4];
        let s = Subset::from_ids(3, &[0]).unwrap();
        let draws = 10_000;
        let vals: Vec<f64> = (0..draws)
            .map(|d| sparsified_value(&pop, &half, d).unwrap().value(&s))
            .collect();
        let mean = vals.iter().sum::<f64>() / draws as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - 2.0).abs() <= 3.0 * se, "{mean} ± {se}");
    }
}

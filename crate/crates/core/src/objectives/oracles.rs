use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::objectives::{ClientPopulation, SetFunction};
use crate::subset::Subset;

fn check_scores(scores: &[f64], what: &str) -> Result<()> {
    if let Some(bad) = scores.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::input(format!(
            "{what} must be finite and nonnegative, found {bad}"
        )));
    }
    Ok(())
}

/// `f(A) = max_{j in A} c(j)` for one client's score row, with `f(∅) = 0`.
#[derive(Debug, Clone)]
pub struct FacilityRow {
    scores: Vec<f64>,
    max: f64,
}

impl FacilityRow {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        check_scores(&scores, "facility scores")?;
        if scores.is_empty() {
            return Err(Error::input("facility row must cover at least one facility"));
        }
        let max = scores.iter().copied().fold(0.0, f64::max);
        Ok(FacilityRow { scores, max })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

impl SetFunction for FacilityRow {
    fn ground_size(&self) -> usize {
        self.scores.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        s.iter().map(|j| self.scores[j]).fold(0.0, f64::max)
    }

    fn max_singleton(&self) -> f64 {
        self.max
    }
}

/// Facility-location instance: a nonnegative score matrix with one row per
/// client and one column per facility.
#[derive(Debug, Clone)]
pub struct FacilityLocation {
    scores: Vec<Vec<f64>>,
}

impl FacilityLocation {
    pub fn new(scores: Vec<Vec<f64>>) -> Result<Self> {
        let n = scores.first().map(Vec::len).unwrap_or(0);
        if scores.is_empty() || n == 0 {
            return Err(Error::input("score matrix must be at least 1x1"));
        }
        for (i, row) in scores.iter().enumerate() {
            if row.len() != n {
                return Err(Error::input(format!(
                    "score row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            check_scores(row, "facility scores")?;
        }
        Ok(FacilityLocation { scores })
    }

    pub fn clients(&self) -> usize {
        self.scores.len()
    }

    pub fn facilities(&self) -> usize {
        self.scores[0].len()
    }

    pub fn score(&self, client: usize, facility: usize) -> f64 {
        self.scores[client][facility]
    }

    pub fn client(&self, i: usize) -> FacilityRow {
        FacilityRow::new(self.scores[i].clone()).expect("rows validated on construction")
    }

    /// One client per row, weighted uniformly.
    pub fn population(&self) -> ClientPopulation {
        let oracles: Vec<Arc<dyn SetFunction>> = (0..self.clients())
            .map(|i| Arc::new(self.client(i)) as Arc<dyn SetFunction>)
            .collect();
        ClientPopulation::uniform(oracles).expect("nonempty, same ground set")
    }
}

/// Coverage indicator for one client: `f(A) = 1` iff some selected group
/// contains the client.
#[derive(Clone)]
pub struct CoverageClient {
    client_id: usize,
    member_of: Subset,
}

impl CoverageClient {
    /// `member_of` lists the groups (ground-set elements) containing the client.
    pub fn new(client_id: usize, member_of: Subset) -> Self {
        CoverageClient {
            client_id,
            member_of,
        }
    }

    pub fn client_id(&self) -> usize {
        self.client_id
    }

    pub fn groups(&self) -> &Subset {
        &self.member_of
    }
}

impl fmt::Debug for CoverageClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoverageClient")
            .field("client_id", &self.client_id)
            .field("member_of", &self.member_of)
            .finish()
    }
}

impl SetFunction for CoverageClient {
    fn ground_size(&self) -> usize {
        self.member_of.ground_size()
    }

    fn value(&self, s: &Subset) -> f64 {
        if self.member_of.intersects(s) {
            1.0
        } else {
            0.0
        }
    }

    fn max_singleton(&self) -> f64 {
        if self.member_of.is_empty() {
            0.0
        } else {
            1.0
        }
    }
}

/// Max-coverage instance: groups `G_0..G_{n-1}` over clients `0..N-1`.
#[derive(Debug, Clone)]
pub struct Coverage {
    groups: Vec<Vec<usize>>,
    clients: usize,
}

impl Coverage {
    pub fn new(groups: Vec<Vec<usize>>, clients: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::input("coverage instance needs at least one group"));
        }
        if clients == 0 {
            return Err(Error::input("coverage instance needs at least one client"));
        }
        for (a, g) in groups.iter().enumerate() {
            if let Some(c) = g.iter().find(|&&c| c >= clients) {
                return Err(Error::input(format!(
                    "group {a} references client {c}, but only {clients} clients exist"
                )));
            }
        }
        Ok(Coverage { groups, clients })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn clients(&self) -> usize {
        self.clients
    }

    pub fn client(&self, i: usize) -> CoverageClient {
        let n = self.groups.len();
        let mut member_of = Subset::empty(n);
        for (a, g) in self.groups.iter().enumerate() {
            if g.contains(&i) {
                member_of.insert(a);
            }
        }
        CoverageClient::new(i, member_of)
    }

    pub fn population(&self) -> ClientPopulation {
        let oracles: Vec<Arc<dyn SetFunction>> = (0..self.clients)
            .map(|i| Arc::new(self.client(i)) as Arc<dyn SetFunction>)
            .collect();
        ClientPopulation::uniform(oracles).expect("nonempty, same ground set")
    }
}

/// `f(S) = Σ_{e in S} w_e`.
#[derive(Debug, Clone)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_scores(&weights, "modular weights")?;
        Ok(Modular { weights })
    }

    /// Indicator of a single element: `f(S) = |S ∩ {e}|`.
    pub fn unit(n: usize, e: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[e] = 1.0;
        Modular { weights }
    }

    /// `f(S) = |S|`.
    pub fn cardinality(n: usize) -> Self {
        Modular {
            weights: vec![1.0; n],
        }
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        s.iter().map(|e| self.weights[e]).sum()
    }

    fn max_singleton(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

/// `f(S) = min(Σ_{e in S} w_e, cap)`, a budget-additive function.
#[derive(Debug, Clone)]
pub struct BudgetAdditive {
    weights: Vec<f64>,
    cap: f64,
}

impl BudgetAdditive {
    pub fn new(weights: Vec<f64>, cap: f64) -> Result<Self> {
        check_scores(&weights, "budget-additive weights")?;
        check_scores(&[cap], "budget-additive cap")?;
        Ok(BudgetAdditive { weights, cap })
    }
}

impl SetFunction for BudgetAdditive {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, s: &Subset) -> f64 {
        s.iter().map(|e| self.weights[e]).sum::<f64>().min(self.cap)
    }
}

/// Wraps an arbitrary closure. No properties are assumed; use
/// [`check_monotone`](crate::objectives::check_monotone) and
/// [`check_submodular`](crate::objectives::check_submodular) to validate.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&Subset) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f }
    }
}

impl<F> fmt::Debug for FnOracle<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOracle").field("n", &self.n).finish()
    }
}

impl<F> SetFunction for FnOracle<F>
where
    F: Fn(&Subset) -> f64 + Send + Sync,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, s: &Subset) -> f64 {
        (self.f)(s)
    }
}

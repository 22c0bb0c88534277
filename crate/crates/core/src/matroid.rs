//! Matroids, their polytopes, and greedy linear maximization.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::FractionalPoint;
use crate::subset::Subset;

/// Default slack for [`polytope_membership`].
pub const POLYTOPE_TOL: f64 = 1e-9;

/// Largest ground set for which generic polytope checks enumerate subsets.
pub const GENERIC_LIMIT: usize = 15;

/// An independence oracle over `{0, .., n-1}`.
pub trait Matroid: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;

    /// Independence of `s`; `s` is already known to live in this ground set.
    fn independent(&self, s: &Subset) -> bool;

    /// Rank of the whole matroid.
    fn rank(&self) -> usize;

    /// Whether `s + e` stays independent, given that `s` is independent.
    fn can_add(&self, s: &Subset, e: usize) -> bool {
        self.independent(&s.with(e))
    }

    /// `r(S)`; greedy is exact for matroids.
    fn rank_of(&self, s: &Subset) -> usize {
        let mut acc = Subset::empty(self.ground_size());
        for e in s.iter() {
            if self.can_add(&acc, e) {
                acc.insert(e);
            }
        }
        acc.len()
    }

    /// Closed-form polytope check when the structure allows one; `None`
    /// falls back to subset enumeration.
    fn polytope_closed_form(&self, _x: &[f64], _tol: f64) -> Option<bool> {
        None
    }
}

/// `I = {S : |S| ≤ k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMatroid {
    n: usize,
    k: usize,
}

impl UniformMatroid {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::input("uniform matroid needs n ≥ 1 and k ≥ 1"));
        }
        Ok(UniformMatroid { n, k })
    }

    pub fn capacity(&self) -> usize {
        self.k
    }
}

impl Matroid for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn independent(&self, s: &Subset) -> bool {
        s.len() <= self.k
    }

    fn rank(&self) -> usize {
        self.k.min(self.n)
    }

    fn can_add(&self, s: &Subset, _e: usize) -> bool {
        s.len() < self.k
    }

    fn rank_of(&self, s: &Subset) -> usize {
        s.len().min(self.k)
    }

    fn polytope_closed_form(&self, x: &[f64], tol: f64) -> Option<bool> {
        let boxed = x.iter().all(|&v| v >= -tol && v <= 1.0 + tol);
        Some(boxed && x.iter().sum::<f64>() <= self.k as f64 + tol)
    }
}

/// Disjoint blocks covering the ground set, each with its own capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    blocks: Vec<Vec<usize>>,
    caps: Vec<usize>,
    block_of: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Self> {
        if blocks.len() != caps.len() {
            return Err(Error::input(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                caps.len()
            )));
        }
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n {
                    return Err(Error::input(format!(
                        "block {b} contains element {e}, outside 0..{n}"
                    )));
                }
                if block_of[e] != usize::MAX {
                    return Err(Error::input(format!("element {e} appears in two blocks")));
                }
                block_of[e] = b;
            }
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::input(format!("element {e} is in no block")));
        }
        let m = PartitionMatroid {
            blocks,
            caps,
            block_of,
        };
        if m.rank() == 0 {
            return Err(Error::input("partition matroid has rank 0"));
        }
        Ok(m)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    fn counts(&self, s: &Subset) -> Vec<usize> {
        let mut counts = vec![0; self.blocks.len()];
        for e in s.iter() {
            counts[self.block_of[e]] += 1;
        }
        counts
    }
}

impl Matroid for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn independent(&self, s: &Subset) -> bool {
        self.counts(s)
            .iter()
            .zip(&self.caps)
            .all(|(c, cap)| c <= cap)
    }

    fn rank(&self) -> usize {
        self.blocks
            .iter()
            .zip(&self.caps)
            .map(|(b, &c)| b.len().min(c))
            .sum()
    }

    fn can_add(&self, s: &Subset, e: usize) -> bool {
        let b = self.block_of[e];
        let used = s.iter().filter(|&j| self.block_of[j] == b).count();
        used < self.caps[b]
    }

    fn rank_of(&self, s: &Subset) -> usize {
        self.counts(s)
            .iter()
            .zip(&self.caps)
            .map(|(&c, &cap)| c.min(cap))
            .sum()
    }

    fn polytope_closed_form(&self, x: &[f64], tol: f64) -> Option<bool> {
        if !x.iter().all(|&v| v >= -tol && v <= 1.0 + tol) {
            return Some(false);
        }
        let mut sums = vec![0.0; self.blocks.len()];
        for (e, &v) in x.iter().enumerate() {
            sums[self.block_of[e]] += v;
        }
        Some(
            sums.iter()
                .zip(&self.caps)
                .all(|(s, &c)| *s <= c as f64 + tol),
        )
    }
}

type IndependenceFn = dyn Fn(&Subset) -> bool + Send + Sync;

/// A matroid given only by an independence closure.
///
/// The closure is trusted to satisfy the matroid axioms; [`check_matroid_axioms`]
/// verifies them exhaustively on small ground sets.
#[derive(Clone)]
pub struct GenericMatroid {
    n: usize,
    rank: usize,
    oracle: Arc<IndependenceFn>,
}

impl GenericMatroid {
    pub fn new<F>(n: usize, oracle: F) -> Result<Self>
    where
        F: Fn(&Subset) -> bool + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::input("matroid ground set must be nonempty"));
        }
        if !oracle(&Subset::empty(n)) {
            return Err(Error::input("the empty set must be independent"));
        }
        let mut m = GenericMatroid {
            n,
            rank: 0,
            oracle: Arc::new(oracle),
        };
        m.rank = m.rank_of(&Subset::full(n));
        if m.rank == 0 {
            return Err(Error::input("matroid has rank 0"));
        }
        Ok(m)
    }
}

impl fmt::Debug for GenericMatroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericMatroid")
            .field("n", &self.n)
            .field("rank", &self.rank)
            .finish()
    }
}

impl Matroid for GenericMatroid {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn independent(&self, s: &Subset) -> bool {
        (self.oracle)(s)
    }

    fn rank(&self) -> usize {
        self.rank
    }
}

/// Serialized matroid description, as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatroidSpec {
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<usize>>, caps: Vec<usize> },
}

impl MatroidSpec {
    pub fn build(&self, n: usize) -> Result<Arc<dyn Matroid>> {
        Ok(match self {
            MatroidSpec::Uniform { k } => Arc::new(UniformMatroid::new(n, *k)?),
            MatroidSpec::Partition { blocks, caps } => {
                Arc::new(PartitionMatroid::new(n, blocks.clone(), caps.clone())?)
            }
        })
    }
}

/// The 0/1 indicator of a base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseIndicator(Subset);

impl BaseIndicator {
    /// Wraps `s` after checking that it is a base of `m`.
    pub fn new(m: &dyn Matroid, s: Subset) -> Result<Self> {
        check_ground(m, &s)?;
        if s.len() != m.rank() || !m.independent(&s) {
            return Err(Error::input(format!("{s:?} is not a base")));
        }
        Ok(BaseIndicator(s))
    }

    pub fn support(&self) -> &Subset {
        &self.0
    }

    pub fn into_support(self) -> Subset {
        self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.indicator()
    }

    /// `⟨1_B, w⟩`.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().map(|e| w[e]).sum()
    }
}

fn check_ground(m: &dyn Matroid, s: &Subset) -> Result<()> {
    if s.ground_size() != m.ground_size() {
        return Err(Error::input(format!(
            "subset lives in a ground set of size {}, matroid has {}",
            s.ground_size(),
            m.ground_size()
        )));
    }
    Ok(())
}

pub fn is_independent(m: &dyn Matroid, s: &Subset) -> Result<bool> {
    check_ground(m, s)?;
    Ok(m.independent(s))
}

pub fn rank_of_subset(m: &dyn Matroid, s: &Subset) -> Result<usize> {
    check_ground(m, s)?;
    Ok(m.rank_of(s))
}

/// Maximum-weight base by the greedy algorithm.
///
/// Elements are scanned by decreasing weight, ties by increasing id, and
/// kept whenever independence is preserved. Weights are compared exactly.
pub fn linear_maximize(m: &dyn Matroid, w: &[f64]) -> Result<BaseIndicator> {
    let n = m.ground_size();
    if w.len() != n {
        return Err(Error::input(format!(
            "weight vector has length {}, expected {n}",
            w.len()
        )));
    }
    if let Some((e, v)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::input(format!(
            "weight of element {e} is {v}; weights must be finite and nonnegative"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let r = m.rank();
    let mut s = Subset::empty(n);
    for e in order {
        if s.len() == r {
            break;
        }
        if m.can_add(&s, e) {
            s.insert(e);
        }
    }
    if s.len() != r {
        return Err(Error::Invariant(format!(
            "greedy stopped at {} elements, rank is {r}",
            s.len()
        )));
    }
    Ok(BaseIndicator(s))
}

/// Tests `x ≥ 0` and `x(S) ≤ r(S)` for every `S`, with slack `tol`.
///
/// Uniform and partition matroids use closed forms; other oracles enumerate
/// all `2^n` subsets and are limited to `n ≤ 15`.
pub fn polytope_membership(m: &dyn Matroid, x: &FractionalPoint, tol: f64) -> Result<bool> {
    let n = m.ground_size();
    let x = x.coords();
    if x.len() != n {
        return Err(Error::input(format!(
            "point has {} coordinates, matroid has {n} elements",
            x.len()
        )));
    }
    if let Some(answer) = m.polytope_closed_form(x, tol) {
        return Ok(answer);
    }
    if n > GENERIC_LIMIT {
        return Err(Error::Size {
            what: "polytope_membership",
            n,
            limit: GENERIC_LIMIT,
        });
    }
    if x.iter().any(|&v| v < -tol) {
        return Ok(false);
    }
    for mask in 1..1u64 << n {
        let s = Subset::from_mask(n, mask);
        let mass: f64 = s.iter().map(|e| x[e]).sum();
        if mass > m.rank_of(&s) as f64 + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Calls `visit` on every `r`-subset of `{0, .., n-1}` in lexicographic order.
pub fn for_each_combination(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every base of `m`, in lexicographic order of sorted ids.
pub fn bases(m: &dyn Matroid) -> Vec<BaseIndicator> {
    let n = m.ground_size();
    let mut out = Vec::new();
    for_each_combination(n, m.rank(), |ids| {
        let s = Subset::from_ids(n, ids).expect("ids in range");
        if m.independent(&s) {
            out.push(BaseIndicator(s));
        }
    });
    out
}

/// Exhaustively verifies that `∅` is independent, independence is downward
/// closed, and the augmentation axiom holds (`n ≤ 10`).
pub fn check_matroid_axioms(m: &dyn Matroid) -> Result<bool> {
    let n = m.ground_size();
    if n > 10 {
        return Err(Error::Size {
            what: "check_matroid_axioms",
            n,
            limit: 10,
        });
    }
    let ind: Vec<bool> = (0..1u64 << n)
        .map(|mask| m.independent(&Subset::from_mask(n, mask)))
        .collect();
    if !ind[0] {
        return Ok(false);
    }
    for a in 0..ind.len() {
        if !ind[a] {
            continue;
        }
        for e in 0..n {
            if a & (1 << e) != 0 && !ind[a & !(1 << e)] {
                return Ok(false);
            }
        }
        for b in 0..ind.len() {
            if !ind[b] || (b as u64).count_ones() <= (a as u64).count_ones() {
                continue;
            }
            let augmentable = (0..n).any(|e| b & (1 << e) != 0 && a & (1 << e) == 0 && ind[a | 1 << e]);
            if !augmentable {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

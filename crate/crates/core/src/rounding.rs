//! Swap rounding: collapsing a convex combination of bases into one base.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::{BaseIndicator, Matroid};
use crate::rng::Stream;
use crate::subset::Subset;

/// Weighted bases `Σ λ_j B_j`, kept in the order they were produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaseDecomposition {
    terms: Vec<(f64, BaseIndicator)>,
}

impl BaseDecomposition {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a decomposition from explicit terms; weights must be positive.
    pub fn from_terms(terms: Vec<(f64, BaseIndicator)>) -> Result<Self> {
        let mut d = Self::new();
        for (w, b) in terms {
            d.push(w, b)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, weight: f64, base: BaseIndicator) -> Result<()> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::input(format!("term weight {weight} must be positive")));
        }
        self.terms.push((weight, base));
        Ok(())
    }

    pub fn terms(&self) -> &[(f64, BaseIndicator)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ λ_j`.
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    /// The point `Σ λ_j 1_{B_j}` in `[0,1]^n`.
    pub fn point(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (w, b) in &self.terms {
            for e in b.support().iter() {
                x[e] += w;
            }
        }
        x
    }

    /// Sums the weights of repeated bases, keeping first-appearance order.
    /// The represented point is unchanged.
    pub fn compacted(&self) -> Self {
        let mut index: HashMap<&Subset, usize> = HashMap::new();
        let mut terms: Vec<(f64, BaseIndicator)> = Vec::new();
        for (w, b) in &self.terms {
            match index.get(b.support()) {
                Some(&i) => terms[i].0 += w,
                None => {
                    index.insert(b.support(), terms.len());
                    terms.push((*w, b.clone()));
                }
            }
        }
        BaseDecomposition { terms }
    }
}

/// Rescales the weights to sum to one.
pub fn normalize(dec: &BaseDecomposition) -> Result<BaseDecomposition> {
    if dec.is_empty() {
        return Err(Error::input("cannot normalize an empty decomposition"));
    }
    let total = dec.total();
    Ok(BaseDecomposition {
        terms: dec
            .terms
            .iter()
            .map(|(w, b)| (w / total, b.clone()))
            .collect(),
    })
}

fn is_base(m: &dyn Matroid, s: &Subset) -> bool {
    s.len() == m.rank() && m.independent(s)
}

/// Randomly merges the terms into a single base whose inclusion
/// probabilities equal the coordinates of the decomposed point.
///
/// Terms are merged left to right. Two bases are reconciled one exchange at
/// a time: `e` is the smallest id of `B₁ ∖ B₂`, `e'` the smallest id of
/// `B₂ ∖ B₁` for which both exchanged sets are bases, and the weights decide
/// which side gives way.
pub fn swap_round(dec: &BaseDecomposition, m: &dyn Matroid, rng: &mut Stream) -> Result<Subset> {
    let Some((first_w, first)) = dec.terms.first() else {
        return Err(Error::input("cannot round an empty decomposition"));
    };
    for (j, (_, b)) in dec.terms.iter().enumerate() {
        if b.support().ground_size() != m.ground_size() || !is_base(m, b.support()) {
            return Err(Error::input(format!("term {j} is not a base of the matroid")));
        }
    }
    let mut w1 = *first_w;
    let mut b1 = first.support().clone();
    for (w2, b2) in &dec.terms[1..] {
        let mut b2 = b2.support().clone();
        while b1 != b2 {
            let e = b1
                .iter()
                .find(|&e| !b2.contains(e))
                .expect("distinct bases of equal size differ on both sides");
            let exchange = b2.iter().filter(|&f| !b1.contains(f)).find(|&f| {
                let mut into2 = b2.without(f);
                into2.insert(e);
                let mut into1 = b1.without(e);
                into1.insert(f);
                is_base(m, &into2) && is_base(m, &into1)
            });
            let Some(f) = exchange else {
                return Err(Error::Invariant(format!(
                    "no exchange partner for element {e}: the oracle is not a matroid"
                )));
            };
            if rng.gen::<f64>() * (w1 + w2) < w1 {
                b2.remove(f);
                b2.insert(e);
            } else {
                b1.remove(e);
                b1.insert(f);
            }
        }
        w1 += w2;
    }
    Ok(b1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{bases, PartitionMatroid, UniformMatroid};
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn base(m: &dyn Matroid, ids: &[usize]) -> BaseIndicator {
        BaseIndicator::new(m, Subset::from_ids(m.ground_size(), ids).unwrap()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let m = UniformMatroid::new(3, 1).unwrap();
        let one = BaseDecomposition::from_terms(vec![(0.5, base(&m, &[0]))]).unwrap();
        assert_eq!(normalize(&one).unwrap().terms()[0].0, 1.0);
        let two = BaseDecomposition::from_terms(vec![(0.25, base(&m, &[0])), (0.25, base(&m, &[1]))])
            .unwrap();
        let n = normalize(&two).unwrap();
        assert_eq!(n.terms()[0].0, 0.5);
        assert_eq!(n.terms()[1].0, 0.5);
        let unit = normalize(&n).unwrap();
        assert_eq!(unit, n);
        assert!(normalize(&BaseDecomposition::new()).is_err());
        assert!(BaseDecomposition::new().push(0.0, base(&m, &[0])).is_err());
    }

    #[test]
    fn singleton_decomposition_returns_its_base() {
        let m = UniformMatroid::new(4, 2).unwrap();
        let d = BaseDecomposition::from_terms(vec![(1.0, base(&m, &[1, 3]))]).unwrap();
        let s = swap_round(&d, &m, &mut seeded(0)).unwrap();
        assert_eq!(s.to_vec(), vec![1, 3]);
    }

    #[test]
    fn two_point_marginals() {
        let m = UniformMatroid::new(2, 1).unwrap();
        let d = BaseDecomposition::from_terms(vec![(0.5, base(&m, &[0])), (0.5, base(&m, &[1]))])
            .unwrap();
        let mut rng = seeded(12);
        let hits = (0..10_000)
            .filter(|_| swap_round(&d, &m, &mut rng).unwrap().contains(0))
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "{freq}");
    }

    #[test]
    fn rejects_non_bases() {
        let m = UniformMatroid::new(3, 2).unwrap();
        let other = UniformMatroid::new(3, 1).unwrap();
        let d = BaseDecomposition::from_terms(vec![(1.0, base(&other, &[0]))]).unwrap();
        assert!(swap_round(&d, &m, &mut seeded(0)).is_err());
        assert!(swap_round(&BaseDecomposition::new(), &m, &mut seeded(0)).is_err());
    }

    #[test]
    fn compaction_preserves_the_point() {
        let m = UniformMatroid::new(3, 1).unwrap();
        let d = BaseDecomposition::from_terms(vec![
            (0.25, base(&m, &[0])),
            (0.25, base(&m, &[2])),
            (0.5, base(&m, &[0])),
        ])
        .unwrap();
        let c = d.compacted();
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(3), d.point(3));
    }

    proptest! {
        #[test]
        fn output_is_always_a_base(
            picks in prop::collection::vec((0usize..64, 1u32..10), 1..12),
            seed in any::<u64>(),
        ) {
            let m = PartitionMatroid::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]], vec![2, 1]).unwrap();
            let all = bases(&m);
            let terms = picks
                .iter()
                .map(|&(i, w)| (w as f64, all[i % all.len()].clone()))
                .collect();
            let d = BaseDecomposition::from_terms(terms).unwrap();
            let s = swap_round(&normalize(&d).unwrap(), &m, &mut seeded(seed)).unwrap();
            prop_assert!(m.independent(&s));
            prop_assert_eq!(s.len(), m.rank());
        }
    }
}

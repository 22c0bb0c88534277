//! Subsets of a ground set `{0, .., n-1}`.
//!
//! A [`Subset`] is a bitset sized to its ground set. Ground sets of up to 64
//! elements fit in a single inline word, larger ones spill to the heap.

use std::fmt;

use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    n: usize,
    words: SmallVec<[u64; 1]>,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(WORD).max(1)
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        Subset {
            n,
            words: smallvec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Subset::empty(n);
        for e in 0..n {
            s.insert(e);
        }
        s
    }

    /// Builds a subset from element ids, rejecting ids outside `0..n`.
    pub fn from_ids(n: usize, ids: &[usize]) -> Result<Self> {
        let mut s = Subset::empty(n);
        for &e in ids {
            if e >= n {
                return Err(Error::input(format!(
                    "element id {e} out of range for ground set of size {n}"
                )));
            }
            s.insert(e);
        }
        Ok(s)
    }

    /// Builds a subset from the low `n` bits of `mask` (`n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= WORD);
        let mut s = Subset::empty(n);
        s.words[0] = if n == WORD { mask } else { mask & ((1u64 << n) - 1) };
        s
    }

    /// The single-word bit representation, when `n <= 64`.
    pub fn as_mask(&self) -> Option<u64> {
        (self.n <= WORD).then(|| self.words[0])
    }

    pub fn singleton(n: usize, e: usize) -> Self {
        let mut s = Subset::empty(n);
        s.insert(e);
        s
    }

    /// Size of the ground set this subset lives in.
    pub fn ground_size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        e < self.n && self.words[e / WORD] >> (e % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, e: usize) -> bool {
        assert!(e < self.n, "element {e} out of range 0..{}", self.n);
        let was = self.contains(e);
        self.words[e / WORD] |= 1 << (e % WORD);
        !was
    }

    #[inline]
    pub fn remove(&mut self, e: usize) -> bool {
        let was = self.contains(e);
        if was {
            self.words[e / WORD] &= !(1 << (e % WORD));
        }
        was
    }

    /// Copy with `e` added.
    pub fn with(&self, e: usize) -> Self {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    /// Copy with `e` removed.
    pub fn without(&self, e: usize) -> Self {
        let mut s = self.clone();
        s.remove(e);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Subset) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    /// Sorted element ids.
    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// 0/1 indicator as reals.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.n)
            .map(|e| if self.contains(e) { 1.0 } else { 0.0 })
            .collect()
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Iterates over every subset of `{0, .., n-1}` in mask order (`n <= 63`).
pub fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
    assert!(n < WORD, "all_subsets supports n < 64");
    (0..1u64 << n).map(move |m| Subset::from_mask(n, m))
}

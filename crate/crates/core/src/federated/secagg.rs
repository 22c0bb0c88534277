//! Secure aggregation, simulated in-process.
//!
//! In masked mode each client encodes its vector in fixed point, adds
//! pairwise masks that cancel in the sum, and submits the result. The server
//! only ever combines submissions, so the individual vectors never appear in
//! the clear on the aggregation path.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{label, stream};

/// Fixed-point encoding with `scale_bits` fractional bits in the group
/// `Z / 2^modulus_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPoint {
    pub scale_bits: u32,
    pub modulus_bits: u32,
}

impl Default for FixedPoint {
    fn default() -> Self {
        FixedPoint {
            scale_bits: 24,
            modulus_bits: 64,
        }
    }
}

impl FixedPoint {
    pub fn new(scale_bits: u32, modulus_bits: u32) -> Result<Self> {
        if modulus_bits == 0 || modulus_bits > 64 || scale_bits + 1 >= modulus_bits {
            return Err(Error::input(format!(
                "fixed point needs 0 < s < b - 1 and b ≤ 64, got s={scale_bits}, b={modulus_bits}"
            )));
        }
        Ok(FixedPoint {
            scale_bits,
            modulus_bits,
        })
    }

    fn group_mask(&self) -> u64 {
        if self.modulus_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.modulus_bits) - 1
        }
    }

    /// Magnitudes must stay strictly below `2^bound_bits`.
    pub fn bound_bits(&self) -> u32 {
        self.modulus_bits - self.scale_bits - 1
    }

    fn scale(&self) -> f64 {
        (1u64 << self.scale_bits) as f64
    }

    fn check(&self, v: f64) -> Result<()> {
        let bound = 2f64.powi(self.bound_bits() as i32);
        if !(v.abs() < bound) {
            return Err(Error::Overflow {
                value: v,
                bound_bits: self.bound_bits(),
            });
        }
        Ok(())
    }

    pub fn encode(&self, v: f64) -> Result<u64> {
        self.check(v)?;
        let q = (v * self.scale()).round() as i64;
        Ok(q as u64 & self.group_mask())
    }

    pub fn decode(&self, u: u64) -> f64 {
        let shift = 64 - self.modulus_bits;
        let signed = ((u << shift) as i64) >> shift;
        signed as f64 / self.scale()
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        a.wrapping_add(b) & self.group_mask()
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        a.wrapping_sub(b) & self.group_mask()
    }
}

/// Rounds every coordinate to the fixed-point grid.
pub fn quantize(v: &[f64], fp: FixedPoint) -> Result<Vec<f64>> {
    v.iter().map(|&x| Ok(fp.decode(fp.encode(x)?))).collect()
}

fn check_lengths(vectors: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Err(Error::input("nothing to aggregate"));
    };
    let n = first.len();
    if let Some((slot, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != n) {
        return Err(Error::input(format!(
            "slot {slot} submitted {} coordinates, expected {n}",
            v.len()
        )));
    }
    Ok(n)
}

/// Coordinate-wise sum, accumulated in ascending slot order.
pub fn aggregate_sum(vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = check_lengths(vectors)?;
    let mut acc = vec![0.0; n];
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    Ok(acc)
}

/// Coordinate-wise mean: [`aggregate_sum`] divided by the number of slots.
pub fn aggregate_mean(vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = vectors.len() as f64;
    Ok(aggregate_sum(vectors)?.into_iter().map(|s| s / k).collect())
}

/// A masked submission, tagged with the slot that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedVector {
    pub slot: usize,
    pub data: Vec<u64>,
}

/// Pairwise masking for one round among `slots` participants.
///
/// The mask shared by slots `i < j` is derived from `(seed, round, i, j)`;
/// slot `i` adds it and slot `j` subtracts it.
#[derive(Debug, Clone)]
pub struct MaskingSession {
    seed: u64,
    round: usize,
    slots: usize,
    n: usize,
    fp: FixedPoint,
}

impl MaskingSession {
    pub fn new(seed: u64, round: usize, slots: usize, n: usize, fp: FixedPoint) -> Result<Self> {
        if slots == 0 {
            return Err(Error::input("masking session needs at least one slot"));
        }
        Ok(MaskingSession {
            seed,
            round,
            slots,
            n,
            fp,
        })
    }

    fn pair_mask(&self, i: usize, j: usize) -> Vec<u64> {
        let mut rng = stream(
            self.seed,
            &[label::MASK, self.round as u64, i as u64, j as u64],
        );
        let mask = self.fp.group_mask();
        (0..self.n).map(|_| rng.gen::<u64>() & mask).collect()
    }

    /// Encodes `v` and applies this slot's masks.
    pub fn submit(&self, slot: usize, v: &[f64]) -> Result<MaskedVector> {
        if slot >= self.slots {
            return Err(Error::input(format!(
                "slot {slot} outside session of {} slots",
                self.slots
            )));
        }
        if v.len() != self.n {
            return Err(Error::input(format!(
                "slot {slot} submitted {} coordinates, expected {}",
                v.len(),
                self.n
            )));
        }
        let mut data = v
            .iter()
            .map(|&x| self.fp.encode(x))
            .collect::<Result<Vec<u64>>>()?;
        for other in 0..self.slots {
            if other == slot {
                continue;
            }
            let (lo, hi) = if slot < other { (slot, other) } else { (other, slot) };
            let mask = self.pair_mask(lo, hi);
            for (d, m) in data.iter_mut().zip(mask) {
                *d = if slot < other {
                    self.fp.add(*d, m)
                } else {
                    self.fp.sub(*d, m)
                };
            }
        }
        Ok(MaskedVector { slot, data })
    }

    /// Group sum of one submission per slot. Masks cancel only when every
    /// slot is present.
    pub fn combine(&self, submissions: &[MaskedVector]) -> Result<Vec<u64>> {
        let mut seen = vec![false; self.slots];
        for s in submissions {
            if s.slot >= self.slots || std::mem::replace(&mut seen[s.slot], true) {
                return Err(Error::input(format!("slot {} submitted twice or unknown", s.slot)));
            }
        }
        if let Some(missing) = seen.iter().position(|&b| !b) {
            return Err(Error::input(format!("slot {missing} never submitted")));
        }
        let mut acc = vec![0u64; self.n];
        for s in submissions {
            for (a, &d) in acc.iter_mut().zip(&s.data) {
                *a = self.fp.add(*a, d);
            }
        }
        Ok(acc)
    }

    /// Decodes group elements back to reals.
    pub fn unmask(&self, sum: &[u64]) -> Vec<f64> {
        sum.iter().map(|&u| self.fp.decode(u)).collect()
    }
}

/// The aggregation contract used by the federated algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    /// Sums reals directly.
    #[default]
    Plain,
    /// Pairwise-masked fixed-point sums keyed by a session seed.
    Masked { fp: FixedPoint, seed: u64 },
}

impl Aggregator {
    pub fn masked(seed: u64) -> Self {
        Aggregator::Masked {
            fp: FixedPoint::default(),
            seed,
        }
    }

    pub fn sum(&self, round: usize, vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
        match *self {
            Aggregator::Plain => aggregate_sum(vectors),
            Aggregator::Masked { fp, seed } => {
                let n = check_lengths(vectors)?;
                // the decoded sum must itself fit the group
                for e in 0..n {
                    let mass: f64 = vectors.iter().map(|v| v[e].abs()).sum();
                    fp.check(mass)?;
                }
                let session = MaskingSession::new(seed, round, vectors.len(), n, fp)?;
                let subs = vectors
                    .iter()
                    .enumerate()
                    .map(|(slot, v)| session.submit(slot, v))
                    .collect::<Result<Vec<_>>>()?;
                Ok(session.unmask(&session.combine(&subs)?))
            }
        }
    }

    pub fn mean(&self, round: usize, vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
        let k = vectors.len() as f64;
        Ok(self.sum(round, vectors)?.into_iter().map(|s| s / k).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_examples() {
        let m = aggregate_mean(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(m, vec![0.5, 0.5]);
        assert_eq!(aggregate_mean(&[vec![0.25, 3.0]]).unwrap(), vec![0.25, 3.0]);
        assert!(aggregate_mean(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(aggregate_mean(&[]).is_err());
    }

    #[test]
    fn masks_cancel() {
        let agg = Aggregator::masked(5);
        let s = agg.sum(0, &[vec![1.5, 2.0], vec![0.5, 1.0]]).unwrap();
        assert_eq!(s, vec![2.0, 3.0]);
        let z = agg.sum(3, &[vec![0.0; 4], vec![0.0; 4], vec![0.0; 4]]).unwrap();
        assert_eq!(z, vec![0.0; 4]);
        let neg = agg.sum(1, &[vec![-1.25], vec![0.5]]).unwrap();
        assert_eq!(neg, vec![-0.75]);
    }

    #[test]
    fn lone_submission_hides_the_vector() {
        let fp = FixedPoint::default();
        let session = MaskingSession::new(11, 0, 2, 3, fp).unwrap();
        let raw = [0.25, 0.5, 1.0];
        let sub = session.submit(0, &raw).unwrap();
        let seen = session.unmask(&sub.data);
        let dist: f64 = seen.iter().zip(raw).map(|(a, b)| (a - b).abs()).sum();
        assert!(dist > 0.0);
        assert!(session.combine(&[sub]).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let fp = FixedPoint::default();
        assert_eq!(fp.bound_bits(), 39);
        assert!(matches!(fp.encode(2f64.powi(39)), Err(Error::Overflow { .. })));
        assert!(fp.encode(2f64.powi(39) - 1.0).is_ok());
        assert!(matches!(fp.encode(f64::NAN), Err(Error::Overflow { .. })));
        let small = FixedPoint::new(4, 8).unwrap();
        assert!(Aggregator::Masked { fp: small, seed: 0 }
            .sum(0, &[vec![5.0], vec![5.0]])
            .is_err());
        assert!(FixedPoint::new(10, 11).is_err());
    }

    #[test]
    fn round_trip_error_is_within_one_ulp_of_the_grid() {
        let fp = FixedPoint::default();
        for v in [0.1, 0.333, -7.77, 123.456] {
            let back = fp.decode(fp.encode(v).unwrap());
            assert!((back - v).abs() <= 2f64.powi(-24));
        }
    }

    proptest! {
        #[test]
        fn masked_equals_plain_on_quantized_inputs(
            vectors in (1usize..=16, 1usize..=6).prop_flat_map(|(k, n)| {
                prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n), k)
            }),
            seed in any::<u64>(),
            round in 0usize..1000,
        ) {
            let fp = FixedPoint::default();
            let q: Vec<Vec<f64>> = vectors.iter().map(|v| quantize(v, fp).unwrap()).collect();
            let plain = aggregate_sum(&q).unwrap();
            let masked = Aggregator::Masked { fp, seed }.sum(round, &vectors).unwrap();
            prop_assert_eq!(plain, masked);
        }
    }
}

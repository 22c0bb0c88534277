use rand::distributions::{Distribution, WeightedIndex};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objectives::ClientPopulation;
use crate::rng::Stream;

/// The multiset of clients chosen for one round, in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SamplingDraw {
    pub round: usize,
    pub chosen: Vec<usize>,
}

/// `k` independent draws with replacement, client `i` with probability `p_i`.
pub fn sample_clients(
    pop: &ClientPopulation,
    k: usize,
    round: usize,
    rng: &mut Stream,
) -> Result<SamplingDraw> {
    if k == 0 {
        return Err(Error::input("clients per round K must be at least 1"));
    }
    let dist = WeightedIndex::new(pop.weights())
        .map_err(|e| Error::input(format!("client weights cannot be sampled: {e}")))?;
    let chosen = (0..k).map(|_| dist.sample(rng)).collect();
    Ok(SamplingDraw { round, chosen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Modular, SetFunction};
    use crate::rng::seeded;
    use std::sync::Arc;

    fn pop(weights: Vec<f64>) -> ClientPopulation {
        let oracles = weights
            .iter()
            .map(|_| Arc::new(Modular::cardinality(2)) as Arc<dyn SetFunction>)
            .collect();
        ClientPopulation::new(oracles, weights).unwrap()
    }

    #[test]
    fn degenerate_distribution() {
        let d = sample_clients(&pop(vec![1.0, 0.0, 0.0]), 3, 0, &mut seeded(1)).unwrap();
        assert_eq!(d.chosen, vec![0, 0, 0]);
    }

    #[test]
    fn frequencies_follow_weights() {
        let p = pop(vec![0.5, 0.5]);
        let mut rng = seeded(4);
        let zeros = (0..10_000)
            .filter(|_| sample_clients(&p, 1, 0, &mut rng).unwrap().chosen[0] == 0)
            .count();
        let freq = zeros as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "{freq}");
    }

    #[test]
    fn reproducible_and_validated() {
        let p = pop(vec![0.2, 0.3, 0.5]);
        let a = sample_clients(&p, 5, 7, &mut seeded(9)).unwrap();
        let b = sample_clients(&p, 5, 7, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.chosen.len(), 5);
        assert!(sample_clients(&p, 0, 0, &mut seeded(9)).is_err());
    }
}

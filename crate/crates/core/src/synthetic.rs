//! Seeded desk-scale instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{ClientPopulation, Coverage, FacilityLocation};
use crate::rng::{label, stream};

/// Parameters of a synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SyntheticSpec {
    /// `groups` ground-set elements over `clients` clients; each client joins
    /// each group independently with probability `density`.
    Coverage {
        groups: usize,
        clients: usize,
        density: f64,
    },
    /// Scores drawn uniformly from `[low, high)`.
    Facility {
        facilities: usize,
        clients: usize,
        low: f64,
        high: f64,
    },
}

/// A concrete objective with its structure still visible.
#[derive(Debug, Clone)]
pub enum Instance {
    Coverage(Coverage),
    Facility(FacilityLocation),
}

impl Instance {
    /// Clients weighted uniformly.
    pub fn population(&self) -> ClientPopulation {
        match self {
            Instance::Coverage(c) => c.population(),
            Instance::Facility(f) => f.population(),
        }
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Instance::Coverage(c) => c.groups().len(),
            Instance::Facility(f) => f.facilities(),
        }
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Instance> {
    let mut rng = stream(seed, &[label::SYNTHETIC]);
    match *spec {
        SyntheticSpec::Coverage {
            groups,
            clients,
            density,
        } => {
            if groups == 0 || clients == 0 {
                return Err(Error::input("synthetic coverage needs groups ≥ 1 and clients ≥ 1"));
            }
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::input(format!("density: must lie in [0,1], got {density}")));
            }
            let members = (0..groups)
                .map(|_| (0..clients).filter(|_| rng.gen::<f64>() < density).collect())
                .collect();
            Ok(Instance::Coverage(Coverage::new(members, clients)?))
        }
        SyntheticSpec::Facility {
            facilities,
            clients,
            low,
            high,
        } => {
            if facilities == 0 || clients == 0 {
                return Err(Error::input(
                    "synthetic facility location needs facilities ≥ 1 and clients ≥ 1",
                ));
            }
            if !(low >= 0.0 && low <= high && high.is_finite()) {
                return Err(Error::input(format!(
                    "score range [{low}, {high}) must be nonnegative and ordered"
                )));
            }
            let scores = (0..clients)
                .map(|_| {
                    (0..facilities)
                        .map(|_| if low < high { rng.gen_range(low..high) } else { low })
                        .collect()
                })
                .collect();
            Ok(Instance::Facility(FacilityLocation::new(scores)?))
        }
    }
}

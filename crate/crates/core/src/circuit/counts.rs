use std::collections::BTreeMap;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact outcome probabilities keyed by bitstring.
pub type Distribution = BTreeMap<String, f64>;

/// Which end of a bitstring holds qubit (or clbit) 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BitOrder {
    /// Qubit 0 is the leftmost character. This is the crate-wide convention.
    #[default]
    QubitZeroLeft,
    /// Qubit 0 is the rightmost character, as most hardware SDKs report it.
    QubitZeroRight,
}

/// Integer shot counts per bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
    pub bit_order: BitOrder,
}

impl CountsTable {
    pub fn new(counts: BTreeMap<String, u64>, bit_order: BitOrder) -> Result<Self> {
        let mut width = None;
        for key in counts.keys() {
            check_bits(key)?;
            match width {
                None => width = Some(key.len()),
                Some(w) if w != key.len() => return Err(Error::MalformedBitstring(key.clone())),
                _ => {}
            }
        }
        Ok(CountsTable {
            shots: counts.values().sum(),
            counts,
            bit_order,
        })
    }

    pub fn width(&self) -> Option<usize> {
        self.counts.keys().next().map(String::len)
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Same table with every key reversed and the declared order flipped.
    pub fn reversed(&self) -> CountsTable {
        CountsTable {
            shots: self.shots,
            counts: self
                .counts
                .iter()
                .map(|(k, &v)| (k.chars().rev().collect(), v))
                .collect(),
            bit_order: match self.bit_order {
                BitOrder::QubitZeroLeft => BitOrder::QubitZeroRight,
                BitOrder::QubitZeroRight => BitOrder::QubitZeroLeft,
            },
        }
    }

    pub fn frequencies(&self) -> Distribution {
        let total = self.shots.max(1) as f64;
        self.counts
            .iter()
            .map(|(k, &v)| (k.clone(), v as f64 / total))
            .collect()
    }
}

pub fn check_bits(s: &str) -> Result<()> {
    if s.chars().all(|c| c == '0' || c == '1') {
        Ok(())
    } else {
        Err(Error::MalformedBitstring(s.to_string()))
    }
}

/// Draws `shots` samples from `dist` with a seeded ChaCha stream.
pub fn sample_distribution(
    dist: &Distribution,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<String, u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(dist, shots, &mut rng)
}

pub fn sample_with(
    dist: &Distribution,
    shots: u64,
    rng: &mut impl rand::Rng,
) -> Result<BTreeMap<String, u64>> {
    let keys: Vec<&String> = dist.keys().collect();
    let weights: Vec<f64> = dist.values().map(|p| p.max(0.0)).collect();
    let index = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidOp(format!("cannot sample distribution: {e}")))?;
    let mut hist = vec![0u64; keys.len()];
    for _ in 0..shots {
        hist[index.sample(rng)] += 1;
    }
    Ok(keys
        .into_iter()
        .zip(hist)
        .filter(|(_, n)| *n > 0)
        .map(|(k, n)| (k.clone(), n))
        .collect())
}

/// Total-variation distance between two distributions over the same keys.
pub fn total_variation(a: &Distribution, b: &Distribution) -> f64 {
    let mut tv = 0.0;
    for (k, &p) in a {
        tv += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &q) in b {
        if !a.contains_key(k) {
            tv += q.abs();
        }
    }
    tv / 2.0
}

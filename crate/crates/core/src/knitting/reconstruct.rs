use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::execute::JobResult;
use super::subexperiments::Subexperiment;
use crate::circuit::{check_bits, BitOrder, CountsTable, Distribution};
use crate::error::{Error, Result};

/// `(-1)^(number of ones)`; `+1` for the empty string.
pub fn parity(bits: &str) -> Result<i32> {
    check_bits(bits)?;
    Ok(if bits.bytes().filter(|&b| b == b'1').count() % 2 == 0 {
        1
    } else {
        -1
    })
}

/// Signed weights over observable bitstrings (clbit 0 leftmost).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub values: BTreeMap<String, f64>,
    pub n_obs_bits: usize,
}

impl QuasiDistribution {
    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    /// Negative weights set to zero, then renormalized.
    pub fn clipped(&self) -> Distribution {
        let pos: Distribution = self
            .values
            .iter()
            .map(|(k, &v)| (k.clone(), v.max(0.0)))
            .collect();
        let s: f64 = pos.values().sum();
        if s > 0.0 {
            pos.into_iter().map(|(k, v)| (k, v / s)).collect()
        } else {
            pos
        }
    }

    pub fn get(&self, key: &str) -> f64 {
        self.values.get(key).copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,value\n");
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k},{v:.12e}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Accumulated signed counts before clamping.
    pub raw: BTreeMap<String, f64>,
    /// `raw` divided by the per-job shot budget.
    pub quasi: QuasiDistribution,
    /// `max(0, floor(raw + 0.5))`.
    pub counts: CountsTable,
}

/// Job label to QPD coefficient.
pub fn coefficient_map(subs: &[Subexperiment]) -> BTreeMap<String, f64> {
    subs.iter()
        .map(|s| (s.job_label.clone(), s.coefficient))
        .collect()
}

/// `max(0, floor(x + 0.5))` on every entry.
pub fn clamp_round(values: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    values
        .iter()
        .map(|(k, &v)| (k.clone(), (v + 0.5).floor().max(0.0)))
        .collect()
}

fn sorted(results: &[JobResult]) -> Vec<&JobResult> {
    let mut r: Vec<&JobResult> = results.iter().collect();
    r.sort_by(|a, b| a.job_label.cmp(&b.job_label));
    r
}

/// Global counts from job results.
///
/// Each key splits into obs ‖ qpd; `c · parity(qpd) · n` is added at the
/// reversed obs key. Jobs with a shot count other than the first job's are
/// rescaled to it, which is a no-op for uniform allocation.
pub fn reconstruct_global_counts(
    results: &[JobResult],
    coefficients: &BTreeMap<String, f64>,
    n_obs_bits: usize,
) -> Result<Reconstruction> {
    let jobs = sorted(results);
    let reference = jobs.first().map_or(1.0, |j| j.shots);
    let mut g: BTreeMap<String, f64> = BTreeMap::new();
    for job in jobs {
        let c = *coefficients
            .get(&job.job_label)
            .ok_or_else(|| Error::MissingCoefficient(job.job_label.clone()))?;
        let scale = if job.shots == reference {
            1.0
        } else {
            reference / job.shots
        };
        let mut width = None;
        for (key, &n) in &job.counts {
            if key.len() < n_obs_bits || *width.get_or_insert(key.len()) != key.len() {
                return Err(Error::MalformedBitstring(key.clone()));
            }
            let (obs, qpd) = key.split_at(n_obs_bits);
            let sigma = f64::from(parity(qpd)?);
            let rev: String = obs.chars().rev().collect();
            *g.entry(rev).or_insert(0.0) += c * sigma * n * scale;
        }
    }
    let quasi = QuasiDistribution {
        values: g.iter().map(|(k, v)| (k.clone(), v / reference)).collect(),
        n_obs_bits,
    };
    let counts = CountsTable::new(
        clamp_round(&g)
            .into_iter()
            .map(|(k, v)| (k, v as u64))
            .collect(),
        BitOrder::QubitZeroLeft,
    )?;
    Ok(Reconstruction {
        raw: g,
        quasi,
        counts,
    })
}

/// `Σ_j c_j · mean(eigenvalue(obs) · parity(qpd))` for a Z/I observable
/// string over the obs bits (character `i` acts on clbit `i`).
pub fn knit_expectation(
    results: &[JobResult],
    coefficients: &BTreeMap<String, f64>,
    observable: &str,
) -> Result<f64> {
    let n_obs = observable.len();
    let mask: Vec<bool> = observable
        .chars()
        .map(|ch| match ch {
            'Z' | 'z' => Ok(true),
            'I' | 'i' => Ok(false),
            other => Err(Error::UnsupportedObservable(other)),
        })
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for job in sorted(results) {
        let c = *coefficients
            .get(&job.job_label)
            .ok_or_else(|| Error::MissingCoefficient(job.job_label.clone()))?;
        if job.n_obs != n_obs {
            return Err(Error::DimensionMismatch {
                expected: job.n_obs,
                found: n_obs,
            });
        }
        let mut acc = 0.0;
        for (key, &n) in &job.counts {
            if key.len() < n_obs {
                return Err(Error::MalformedBitstring(key.clone()));
            }
            let (obs, qpd) = key.split_at(n_obs);
            // obs is stored with clbit 0 rightmost.
            let ones = obs
                .bytes()
                .rev()
                .zip(&mask)
                .filter(|(b, &m)| m && *b == b'1')
                .count();
            let eig = if ones % 2 == 0 { 1.0 } else { -1.0 };
            acc += eig * f64::from(parity(qpd)?) * n;
        }
        total += c * acc / job.shots;
    }
    Ok(total)
}

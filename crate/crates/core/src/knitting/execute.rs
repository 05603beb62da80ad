use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::subexperiments::Subexperiment;
use crate::circuit::{
    analytic_distribution, analytic_distribution_from, sample_distribution, sample_noisy_counts,
    Circuit, Distribution,
};
use crate::error::{Error, Result};
use crate::mps::MpsState;

/// Shot budget analytic probabilities are scaled to before reconstruction.
pub const ANALYTIC_VIRTUAL_SHOTS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RunMode {
    Analytic,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Backend {
    #[default]
    StateVector,
    Mps {
        chi_max: usize,
        svd_cutoff: f64,
    },
}

/// How a sampled run spreads shots over the subexperiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ShotAllocation {
    /// `shots` per subexperiment.
    #[default]
    Uniform,
    /// The same total, split in proportion to `|coefficient|`.
    Importance,
}

impl FromStr for ShotAllocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ShotAllocation::Uniform),
            "importance" => Ok(ShotAllocation::Importance),
            _ => Err(Error::UnknownOption(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: RunMode,
    pub parallelism: usize,
    /// Two-qubit depolarizing rate; needs sampled mode when nonzero.
    pub noise_p: f64,
    pub backend: Backend,
    pub allocation: ShotAllocation,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: RunMode::Analytic,
            parallelism: 1,
            noise_p: 0.0,
            backend: Backend::StateVector,
            allocation: ShotAllocation::Uniform,
        }
    }
}

/// Output of one subexperiment. Keys are the obs bits with clbit 0
/// rightmost, followed by the qpd bits in record order. Counts are
/// integers in sampled mode and scaled probabilities in analytic mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    pub job_label: String,
    pub shots: f64,
    pub n_obs: usize,
    pub counts: BTreeMap<String, f64>,
}

/// Per-job RNG seed, derived from the run seed and the job's position.
pub fn job_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fragment_distribution(circuit: &Circuit, backend: Backend) -> Result<Distribution> {
    match backend {
        Backend::StateVector => analytic_distribution(circuit),
        Backend::Mps {
            chi_max,
            svd_cutoff,
        } => analytic_distribution_from(
            circuit,
            MpsState::zero(circuit.num_qubits(), chi_max, svd_cutoff)?,
        ),
    }
}

/// Exact joint distribution of a subexperiment's record (obs clbits then
/// qpd bits, clbit 0 leftmost), as a product over fragments.
pub fn subexperiment_distribution(sub: &Subexperiment, backend: Backend) -> Result<Distribution> {
    let width = sub.n_obs + sub.qpd_bit_count;
    if sub.fragments.len() == 1
        && sub.fragments[0]
            .record_positions
            .iter()
            .enumerate()
            .all(|(i, &p)| i == p)
    {
        let frag = &sub.fragments[0];
        if frag.record_positions.len() == width {
            return fragment_distribution(&frag.circuit, backend);
        }
    }
    let mut joint: Vec<(Vec<u8>, f64)> = vec![(vec![b'0'; width], 1.0)];
    for frag in &sub.fragments {
        let dist = fragment_distribution(&frag.circuit, backend)?;
        let mut next = Vec::with_capacity(joint.len() * dist.len());
        for (key, p) in &joint {
            for (local, q) in &dist {
                let mut k = key.clone();
                for (i, b) in local.bytes().enumerate() {
                    k[frag.record_positions[i]] = b;
                }
                next.push((k, p * q));
            }
        }
        joint = next;
    }
    let mut out = Distribution::new();
    for (k, p) in joint {
        *out.entry(String::from_utf8(k).expect("ascii bits"))
            .or_insert(0.0) += p;
    }
    Ok(out)
}

/// Natural record key to job key: obs part reversed, qpd part kept.
fn to_job_key(key: &str, n_obs: usize) -> String {
    let (obs, qpd) = key.split_at(n_obs);
    obs.chars().rev().chain(qpd.chars()).collect()
}

fn shots_for(subs: &[Subexperiment], shots: u64, allocation: ShotAllocation) -> Vec<u64> {
    match allocation {
        ShotAllocation::Uniform => vec![shots; subs.len()],
        ShotAllocation::Importance => {
            let total = shots as f64 * subs.len() as f64;
            let norm: f64 = subs.iter().map(|s| s.coefficient.abs()).sum();
            subs.iter()
                .map(|s| ((total * s.coefficient.abs() / norm).round() as u64).max(1))
                .collect()
        }
    }
}

fn run_one(sub: &Subexperiment, index: usize, shots: u64, opts: &RunOptions) -> Result<JobResult> {
    let (natural, total): (BTreeMap<String, f64>, f64) = match opts.mode {
        RunMode::Analytic => {
            if opts.noise_p != 0.0 {
                return Err(Error::Config(
                    "depolarizing noise needs sampled mode".into(),
                ));
            }
            let dist = subexperiment_distribution(sub, opts.backend)?;
            (
                dist.into_iter()
                    .map(|(k, p)| (k, p * ANALYTIC_VIRTUAL_SHOTS))
                    .collect(),
                ANALYTIC_VIRTUAL_SHOTS,
            )
        }
        RunMode::Sampled { seed, .. } => {
            let s = job_seed(seed, index);
            let counts = if opts.noise_p > 0.0 {
                sample_noisy_counts(&sub.joint, opts.noise_p, shots, s)?
            } else {
                sample_distribution(&subexperiment_distribution(sub, opts.backend)?, shots, s)?
            };
            (
                counts.into_iter().map(|(k, n)| (k, n as f64)).collect(),
                shots as f64,
            )
        }
    };
    Ok(JobResult {
        job_label: sub.job_label.clone(),
        shots: total,
        n_obs: sub.n_obs,
        counts: natural
            .into_iter()
            .map(|(k, v)| (to_job_key(&k, sub.n_obs), v))
            .collect(),
    })
}

/// Runs every subexperiment; the output is in label order whatever the
/// scheduling, and one failing job does not stop the others.
pub fn run_subexperiments(
    subs: &[Subexperiment],
    opts: &RunOptions,
) -> Result<Vec<Result<JobResult>>> {
    if opts.parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&opts.noise_p) {
        return Err(Error::ProbabilityOutOfRange(opts.noise_p));
    }
    let shots = match opts.mode {
        RunMode::Sampled { shots: 0, .. } => {
            return Err(Error::Config("sampled mode needs shots >= 1".into()))
        }
        RunMode::Sampled { shots, .. } => shots_for(subs, shots, opts.allocation),
        RunMode::Analytic => vec![0; subs.len()],
    };
    let mut order: Vec<usize> = (0..subs.len()).collect();
    order.sort_by(|&a, &b| subs[a].job_label.cmp(&subs[b].job_label));
    let work = |&i: &usize| run_one(&subs[i], i, shots[i], opts);
    if opts.parallelism == 1 {
        return Ok(order.iter().map(work).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| order.par_iter().map(work).collect()))
}

/// Unwraps a batch, failing on the first job error.
pub fn collect_results(batch: Vec<Result<JobResult>>) -> Result<Vec<JobResult>> {
    batch.into_iter().collect()
}

#[derive(Serialize, Deserialize)]
struct BatchDoc {
    jobs: Vec<JobResult>,
}

/// One JSON document holding every job's label, shots and counts.
pub fn batch_to_json(results: &[JobResult]) -> Result<String> {
    serde_json::to_string_pretty(&BatchDoc {
        jobs: results.to_vec(),
    })
    .map_err(|e| Error::Io(e.to_string()))
}

pub fn batch_from_json(text: &str) -> Result<Vec<JobResult>> {
    let doc: BatchDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    Ok(doc.jobs)
}

//! Subexperiment generation, execution, and reconstruction of global
//! counts from signed fragment results.

mod execute;
mod reconstruct;
mod subexperiments;

pub use execute::{
    batch_from_json, batch_to_json, collect_results, job_seed, run_subexperiments,
    subexperiment_distribution, Backend, JobResult, RunMode, RunOptions, ShotAllocation,
    ANALYTIC_VIRTUAL_SHOTS,
};
pub use reconstruct::{
    clamp_round, coefficient_map, knit_expectation, parity, reconstruct_global_counts,
    QuasiDistribution, Reconstruction,
};
pub use subexperiments::{job_label, materialize_subexperiments, SplicedFragment, Subexperiment};

use crate::circuit::Circuit;
use crate::cutting::CutPlan;
use crate::error::Result;

/// Materialize, run and reconstruct in one call.
#[derive(Debug, Clone)]
pub struct KnitOutput {
    pub subexperiments: Vec<Subexperiment>,
    pub results: Vec<JobResult>,
    pub reconstruction: Reconstruction,
}

pub fn knit(circuit: &Circuit, plan: &CutPlan, opts: &RunOptions) -> Result<KnitOutput> {
    let subexperiments = materialize_subexperiments(circuit, plan)?;
    let results = collect_results(run_subexperiments(&subexperiments, opts)?)?;
    let reconstruction = reconstruct_global_counts(
        &results,
        &coefficient_map(&subexperiments),
        circuit.num_clbits(),
    )?;
    Ok(KnitOutput {
        subexperiments,
        results,
        reconstruction,
    })
}

#[cfg(test)]
mod tests;

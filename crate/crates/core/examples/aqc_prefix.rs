//! Recompile the circuit prefix before the cut into nearest-neighbour blocks.
//!
//! Writes the optimizer trace CSV to stdout.

use cutknit::aqc::{compile_prefix, trace_csv, AqcConfig, AqcTarget};
use cutknit::pipeline::{plan_for, random_data, PipelineConfig};

fn main() {
    let data = random_data(2, 1, 21);
    let (circuit, plan) = plan_for(&PipelineConfig::default(), &data).unwrap();
    let cfg = AqcConfig {
        target: AqcTarget::FullPrefix,
        ..AqcConfig::default()
    };
    let r = compile_prefix(&circuit, &plan.cut_indices, &cfg).expect("compile");
    eprintln!(
        "blocks {} layers {} params {} | infidelity {:.3e} after {} iterations (converged {})",
        r.ansatz.blocks.len(),
        r.ansatz.layers,
        r.ansatz.num_parameters(),
        r.final_infidelity,
        r.iterations,
        r.converged
    );
    eprintln!(
        "two-qubit gates: prefix {} ansatz {}",
        r.prefix_two_qubit_gates, r.ansatz_two_qubit_gates
    );
    print!("{}", trace_csv(&r.trace));
}

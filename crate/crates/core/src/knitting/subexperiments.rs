use serde::Serialize;

use crate::circuit::{Circuit, GateOp};
use crate::cutting::{CutPlan, CutSetting, SlotRole};
use crate::error::{Error, Result};

/// A fragment circuit with its cut slots filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplicedFragment {
    pub circuit: Circuit,
    /// Global qubit of each local qubit.
    pub qubits: Vec<usize>,
    /// Position in the joint record (obs clbits, then qpd bits) of each
    /// local clbit.
    pub record_positions: Vec<usize>,
}

/// One circuit setting per cut, instantiated over all fragments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subexperiment {
    pub job_label: String,
    pub setting_ids: Vec<usize>,
    pub coefficient: f64,
    pub fragments: Vec<SplicedFragment>,
    /// All fragments on the global register; clbits are the original obs
    /// clbits followed by the qpd bits.
    pub joint: Circuit,
    pub n_obs: usize,
    pub qpd_bit_count: usize,
}

/// Stable, lexicographically sortable job label for a setting vector.
pub fn job_label(setting_ids: &[usize]) -> String {
    let parts: Vec<String> = setting_ids.iter().map(|s| format!("{s:02}")).collect();
    format!("s{}", parts.join("-"))
}

fn side_ops(setting: &CutSetting, role: SlotRole) -> &[GateOp] {
    match role {
        SlotRole::Control => &setting.control_side,
        SlotRole::Target => &setting.target_side,
    }
}

/// Cartesian product over the per-cut settings of `plan`, `Π |settings|`
/// subexperiments in label order.
pub fn materialize_subexperiments(circuit: &Circuit, plan: &CutPlan) -> Result<Vec<Subexperiment>> {
    let covered: usize = plan.fragments.iter().map(|f| f.qubits.len()).sum();
    if covered != circuit.num_qubits() {
        return Err(Error::PlanMismatch(format!(
            "fragments cover {covered} of {} qubits",
            circuit.num_qubits()
        )));
    }
    for &c in &plan.cut_indices {
        if !circuit.ops().get(c).is_some_and(GateOp::is_two_qubit) {
            return Err(Error::PlanMismatch(format!(
                "op {c} is not a two-qubit gate"
            )));
        }
    }
    let n_obs = circuit.num_clbits();
    let sizes: Vec<usize> = plan.settings_per_cut.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut choice = vec![0; sizes.len()];
        let mut rest = flat;
        for m in (0..sizes.len()).rev() {
            choice[m] = rest % sizes[m];
            rest /= sizes[m];
        }
        out.push(instantiate(circuit, plan, &choice, n_obs)?);
    }
    Ok(out)
}

fn instantiate(
    circuit: &Circuit,
    plan: &CutPlan,
    choice: &[usize],
    n_obs: usize,
) -> Result<Subexperiment> {
    let settings: Vec<&CutSetting> = choice
        .iter()
        .enumerate()
        .map(|(m, &s)| &plan.settings_per_cut[m][s])
        .collect();
    let mut offsets = Vec::with_capacity(settings.len());
    let mut qpd_bits = 0;
    for s in &settings {
        offsets.push(qpd_bits);
        qpd_bits += s.num_bits();
    }
    let mut fragments = Vec::with_capacity(plan.fragments.len());
    let mut joint_ops = Vec::new();
    for frag in &plan.fragments {
        let mut record_positions: Vec<usize> = frag.clbits.clone();
        let mut ops: Vec<GateOp> = Vec::new();
        let base = frag.circuit.ops();
        for pos in 0..=base.len() {
            for slot in frag.slots.iter().filter(|s| s.position == pos) {
                let setting = settings[slot.cut];
                for op in side_ops(setting, slot.role) {
                    let mapped = op.remapped(|_| slot.qubit);
                    ops.push(match mapped {
                        GateOp::MeasureZ { qubit, clbit } => {
                            // Term clbits already number control bits before target bits.
                            record_positions.push(n_obs + offsets[slot.cut] + clbit);
                            GateOp::MeasureZ {
                                qubit,
                                clbit: record_positions.len() - 1,
                            }
                        }
                        other => other,
                    });
                }
            }
            if let Some(op) = base.get(pos) {
                ops.push(*op);
            }
        }
        for op in &ops {
            let g = op.remapped(|q| frag.qubits[q]);
            joint_ops.push(match g {
                GateOp::MeasureZ { qubit, clbit } => GateOp::MeasureZ {
                    qubit,
                    clbit: record_positions[clbit],
                },
                other => other,
            });
        }
        fragments.push(SplicedFragment {
            circuit: Circuit::from_ops(frag.qubits.len(), record_positions.len(), ops)?,
            qubits: frag.qubits.clone(),
            record_positions,
        });
    }
    Ok(Subexperiment {
        job_label: job_label(choice),
        setting_ids: choice.to_vec(),
        coefficient: settings.iter().map(|s| s.coefficient).product(),
        fragments,
        joint: Circuit::from_ops(circuit.num_qubits(), n_obs + qpd_bits, joint_ops)?,
        n_obs,
        qpd_bit_count: qpd_bits,
    })
}

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotRole {
    Control,
    Target,
}

/// Where the local operations of one side of a cut get spliced in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    /// Index into the plan's cut list.
    pub cut: usize,
    pub role: SlotRole,
    /// Insert before this op of the fragment circuit.
    pub position: usize,
    /// Local qubit the side acts on.
    pub qubit: usize,
}

/// One connected component of the circuit after the cut gates are removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    /// Global qubit of each local qubit, ascending.
    pub qubits: Vec<usize>,
    /// Global clbit of each local clbit, ascending.
    pub clbits: Vec<usize>,
    pub circuit: Circuit,
    pub slots: Vec<Slot>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits `circuit` into the connected components left after removing the
/// two-qubit gates at `cuts` (ascending gate indices).
pub fn fragment_circuits(circuit: &Circuit, cuts: &[usize]) -> Result<Vec<Fragment>> {
    let ops = circuit.ops();
    for &c in cuts {
        match ops.get(c) {
            Some(op) if op.is_two_qubit() => {}
            Some(op) => {
                return Err(Error::PlanMismatch(format!(
                    "op {c} ({op}) is not a two-qubit gate"
                )))
            }
            None => {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    limit: ops.len(),
                })
            }
        }
    }
    let n = circuit.num_qubits();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, op) in ops.iter().enumerate() {
        if op.is_two_qubit() && !cuts.contains(&i) {
            let q = op.qubits();
            let (a, b) = (find(&mut parent, q[0]), find(&mut parent, q[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|q| find(&mut parent, q)).collect();
    let component_of = roots.clone();
    roots.sort_unstable();
    roots.dedup();

    let mut out = Vec::with_capacity(roots.len());
    for root in roots {
        let qubits: Vec<usize> = (0..n).filter(|&q| component_of[q] == root).collect();
        let local = |q: usize| qubits.iter().position(|&g| g == q);
        let mut clbits: Vec<usize> = ops
            .iter()
            .filter_map(|op| match *op {
                GateOp::MeasureZ { qubit, clbit } if local(qubit).is_some() => Some(clbit),
                _ => None,
            })
            .collect();
        clbits.sort_unstable();
        clbits.dedup();
        let mut frag_ops = Vec::new();
        let mut slots = Vec::new();
        for (i, op) in ops.iter().enumerate() {
            if let Some(k) = cuts.iter().position(|&c| c == i) {
                let q = op.qubits();
                for (role, g) in [(SlotRole::Control, q[0]), (SlotRole::Target, q[1])] {
                    if let Some(l) = local(g) {
                        slots.push(Slot {
                            cut: k,
                            role,
                            position: frag_ops.len(),
                            qubit: l,
                        });
                    }
                }
                continue;
            }
            if op.qubits().iter().all(|&q| local(q).is_some()) {
                let mut mapped = op.remapped(|q| local(q).expect("qubit in fragment"));
                if let GateOp::MeasureZ { clbit, .. } = *op {
                    let lc = clbits
                        .iter()
                        .position(|&c| c == clbit)
                        .expect("clbit collected");
                    mapped = mapped.with_clbit(lc);
                }
                frag_ops.push(mapped);
            }
        }
        out.push(Fragment {
            circuit: Circuit::from_ops(qubits.len(), clbits.len(), frag_ops)?,
            qubits,
            clbits,
            slots,
        });
    }
    Ok(out)
}

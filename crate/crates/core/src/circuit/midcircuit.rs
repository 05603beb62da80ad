//! Exact and sampled simulation of circuits with mid-circuit measurement and
//! reset.
//!
//! Analytic mode walks the tree of measurement outcomes on pure states, so
//! memory stays at one statevector per live branch. Measurements that form a
//! trailing block (nothing but `MeasureZ` on distinct qubits until the end)
//! are read off the final amplitudes instead of branching.

use std::collections::HashMap;

use super::counts::{sample_distribution, BitOrder, CountsTable, Distribution};
use super::ir::{Circuit, GateOp, StateLabel};
use super::statevector::{StateVector, DEFAULT_QUBIT_CAP};
use crate::error::{Error, Result};

pub const MAX_MIDCIRCUIT_BRANCH_OPS: usize = 16;
const BRANCH_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMode {
    Analytic,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimOutput {
    Probabilities(Distribution),
    Counts(CountsTable),
}

/// Runs `circuit` and reports the classical register (clbit 0 leftmost).
pub fn simulate_with_midcircuit(circuit: &Circuit, mode: SimMode) -> Result<SimOutput> {
    let dist = analytic_distribution(circuit)?;
    match mode {
        SimMode::Analytic => Ok(SimOutput::Probabilities(dist)),
        SimMode::Sampled { shots, seed } => {
            let counts = sample_distribution(&dist, shots, seed)?;
            Ok(SimOutput::Counts(CountsTable::new(
                counts,
                BitOrder::QubitZeroLeft,
            )?))
        }
    }
}

/// Index where the trailing block of terminal measurements starts.
fn terminal_start(ops: &[GateOp]) -> usize {
    let mut seen = Vec::new();
    let mut start = ops.len();
    for (i, op) in ops.iter().enumerate().rev() {
        match *op {
            GateOp::MeasureZ { qubit, .. } if !seen.contains(&qubit) => {
                seen.push(qubit);
                start = i;
            }
            _ => break,
        }
    }
    start
}

/// Pure-state backend the branch walker can drive.
pub trait BranchState: Clone {
    fn num_qubits(&self) -> usize;
    fn apply_unitary(&mut self, op: &GateOp) -> Result<()>;
    fn prob_one(&mut self, qubit: usize) -> f64;
    fn collapse(&mut self, qubit: usize, outcome: bool) -> f64;
    fn reprepare(&mut self, qubit: usize, outcome: bool, label: StateLabel);
    /// Basis-state probabilities, qubit 0 as most significant bit.
    fn probabilities(&self) -> Vec<f64>;
}

impl BranchState for StateVector {
    fn num_qubits(&self) -> usize {
        StateVector::num_qubits(self)
    }
    fn apply_unitary(&mut self, op: &GateOp) -> Result<()> {
        self.apply_op(op)
    }
    fn prob_one(&mut self, qubit: usize) -> f64 {
        StateVector::prob_one(self, qubit)
    }
    fn collapse(&mut self, qubit: usize, outcome: bool) -> f64 {
        StateVector::collapse(self, qubit, outcome)
    }
    fn reprepare(&mut self, qubit: usize, outcome: bool, label: StateLabel) {
        StateVector::reprepare(self, qubit, outcome, label)
    }
    fn probabilities(&self) -> Vec<f64> {
        StateVector::probabilities(self)
    }
}

/// Exact joint distribution of the classical register.
pub fn analytic_distribution(circuit: &Circuit) -> Result<Distribution> {
    if circuit.num_qubits() > DEFAULT_QUBIT_CAP {
        return Err(Error::QubitCapExceeded {
            num_qubits: circuit.num_qubits(),
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    analytic_distribution_from(circuit, StateVector::zero(circuit.num_qubits()))
}

/// Same as [`analytic_distribution`], starting from a caller-supplied
/// `|0...0>` state of any backend.
pub fn analytic_distribution_from<S: BranchState>(
    circuit: &Circuit,
    initial: S,
) -> Result<Distribution> {
    if initial.num_qubits() != circuit.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.num_qubits(),
            found: initial.num_qubits(),
        });
    }
    let nc = circuit.num_clbits();
    if nc > 64 {
        return Err(Error::ClbitOutOfRange {
            index: nc,
            num_clbits: 64,
        });
    }
    let ops = circuit.ops();
    let t = terminal_start(ops);
    let branching = ops[..t].iter().filter(|o| !o.is_unitary()).count();
    if branching > MAX_MIDCIRCUIT_BRANCH_OPS {
        return Err(Error::BranchCapExceeded {
            count: branching,
            cap: MAX_MIDCIRCUIT_BRANCH_OPS,
        });
    }
    let terminal: Vec<(usize, usize)> = ops[t..]
        .iter()
        .filter_map(|o| match *o {
            GateOp::MeasureZ { qubit, clbit } => Some((qubit, clbit)),
            _ => None,
        })
        .collect();
    let mut acc: HashMap<u64, f64> = HashMap::new();
    let walker = Walker {
        ops: &ops[..t],
        terminal: &terminal,
        num_clbits: nc,
    };
    walker.walk(initial, 0, 0, 1.0, &mut acc)?;
    Ok(acc
        .into_iter()
        .map(|(mask, p)| (mask_to_bits(mask, nc), p))
        .collect())
}

fn mask_to_bits(mask: u64, width: usize) -> String {
    (0..width)
        .map(|k| {
            if mask >> (width - 1 - k) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

struct Walker<'a> {
    ops: &'a [GateOp],
    terminal: &'a [(usize, usize)],
    num_clbits: usize,
}

impl Walker<'_> {
    fn clbit_mask(&self, clbit: usize) -> u64 {
        1 << (self.num_clbits - 1 - clbit)
    }

    fn walk<S: BranchState>(
        &self,
        mut state: S,
        mut pos: usize,
        record: u64,
        weight: f64,
        acc: &mut HashMap<u64, f64>,
    ) -> Result<()> {
        while pos < self.ops.len() {
            let op = self.ops[pos];
            pos += 1;
            match op {
                GateOp::MeasureZ { qubit, clbit } => {
                    let m = self.clbit_mask(clbit);
                    let p1 = state.prob_one(qubit);
                    for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                        if p <= BRANCH_EPS {
                            continue;
                        }
                        let mut branch = state.clone();
                        branch.collapse(qubit, outcome);
                        let rec = if outcome { record | m } else { record & !m };
                        self.walk(branch, pos, rec, weight * p, acc)?;
                    }
                    return Ok(());
                }
                GateOp::Prepare {
                    qubit,
                    state: label,
                } => {
                    let p1 = state.prob_one(qubit);
                    if p1 <= BRANCH_EPS || 1.0 - p1 <= BRANCH_EPS {
                        let outcome = p1 > 0.5;
                        state.collapse(qubit, outcome);
                        state.reprepare(qubit, outcome, label);
                        continue;
                    }
                    for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                        let mut branch = state.clone();
                        branch.collapse(qubit, outcome);
                        branch.reprepare(qubit, outcome, label);
                        self.walk(branch, pos, record, weight * p, acc)?;
                    }
                    return Ok(());
                }
                _ => state.apply_unitary(&op)?,
            }
        }
        self.finish(&state, record, weight, acc);
        Ok(())
    }

    fn finish<S: BranchState>(
        &self,
        state: &S,
        record: u64,
        weight: f64,
        acc: &mut HashMap<u64, f64>,
    ) {
        let n = state.num_qubits();
        let mut base = record;
        for &(_, clbit) in self.terminal {
            base &= !self.clbit_mask(clbit);
        }
        let lanes: Vec<(usize, u64)> = self
            .terminal
            .iter()
            .map(|&(q, c)| (1usize << (n - 1 - q), self.clbit_mask(c)))
            .collect();
        for (i, p) in state.probabilities().into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut key = base;
            for &(qs, cm) in &lanes {
                if i & qs != 0 {
                    key |= cm;
                }
            }
            *acc.entry(key).or_insert(0.0) += weight * p;
        }
    }
}

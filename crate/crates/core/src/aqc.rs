//! Variational recompilation of the circuit prefix that precedes the cuts.
//!
//! The prefix up to the last cut gate is split off, its cut gates removed,
//! and the remainder is rewritten as a chain of nearest-neighbour blocks
//! (Ry-Rz on both qubits, CX, Ry-Rz on both qubits). The block parameters
//! start at values that reproduce the truncated prefix exactly and are then
//! tuned by gradient descent on the infidelity to an MPS target.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{op_matrix, CMatrix, Circuit, GateOp};
use crate::error::{Error, Result};
use crate::mps::{simulate_mps, MpsState, DEFAULT_CHI_MAX, DEFAULT_SVD_CUTOFF};

pub const PARAMS_PER_BLOCK: usize = 8;
pub const DEFAULT_EPSILON: f64 = 1e-3;
const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.1;
const MAX_BACKTRACKS: usize = 30;
const ANGLE_TOL: f64 = 1e-12;

/// A circuit cut at the last cut gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixSplit {
    /// Ops up to and including the last cut gate.
    pub prefix: Circuit,
    /// `prefix` with the cut gates removed.
    pub truncated: Circuit,
    pub cut_gates: Vec<GateOp>,
    /// Original positions of the cut gates.
    pub cut_positions: Vec<usize>,
    pub suffix: Circuit,
}

impl PrefixSplit {
    /// The original op sequence, rebuilt by putting each cut gate back.
    pub fn reassembled_ops(&self) -> Vec<GateOp> {
        let mut out = Vec::with_capacity(self.prefix.len() + self.suffix.len());
        let mut rest = self.truncated.ops().iter();
        let mut cut = 0;
        for pos in 0..self.prefix.len() {
            if self.cut_positions.get(cut) == Some(&pos) {
                out.push(self.cut_gates[cut]);
                cut += 1;
            } else if let Some(op) = rest.next() {
                out.push(*op);
            }
        }
        out.extend_from_slice(self.suffix.ops());
        out
    }
}

pub fn split_prefix_suffix(circuit: &Circuit, cut_indices: &[usize]) -> Result<PrefixSplit> {
    let mut cuts = cut_indices.to_vec();
    cuts.sort_unstable();
    cuts.dedup();
    let ops = circuit.ops();
    for &c in &cuts {
        match ops.get(c) {
            Some(op) if op.is_two_qubit() => {}
            _ => {
                return Err(Error::PlanMismatch(format!(
                    "op {c} is not a two-qubit gate in the prefix"
                )))
            }
        }
    }
    let boundary = cuts.last().map_or(ops.len(), |&c| c + 1);
    let (n, nc) = (circuit.num_qubits(), circuit.num_clbits());
    let prefix = Circuit::from_ops(n, nc, ops[..boundary].to_vec())?;
    let truncated = Circuit::from_ops(
        n,
        nc,
        ops[..boundary]
            .iter()
            .enumerate()
            .filter(|(i, _)| !cuts.contains(i))
            .map(|(_, o)| *o)
            .collect(),
    )?;
    Ok(PrefixSplit {
        prefix,
        truncated,
        cut_gates: cuts.iter().map(|&c| ops[c]).collect(),
        cut_positions: cuts,
        suffix: Circuit::from_ops(n, nc, ops[boundary..].to_vec())?,
    })
}

/// A two-qubit block on `(first, first + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnsatzBlock {
    pub first: usize,
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ansatz {
    pub num_qubits: usize,
    pub blocks: Vec<AnsatzBlock>,
    pub layers: usize,
    pub theta0: Vec<f64>,
}

impl Ansatz {
    pub fn num_parameters(&self) -> usize {
        self.blocks.len() * PARAMS_PER_BLOCK
    }

    /// Blocks grouped by layer.
    pub fn layer_blocks(&self) -> Vec<Vec<AnsatzBlock>> {
        let mut out = vec![Vec::new(); self.layers];
        for b in &self.blocks {
            out[b.layer].push(*b);
        }
        out
    }

    pub fn circuit(&self, theta: &[f64]) -> Result<Circuit> {
        if theta.len() != self.num_parameters() {
            return Err(Error::DimensionMismatch {
                expected: self.num_parameters(),
                found: theta.len(),
            });
        }
        let mut c = Circuit::new(self.num_qubits, 0);
        for (b, t) in self.blocks.iter().zip(theta.chunks(PARAMS_PER_BLOCK)) {
            let (a, q) = (b.first, b.first + 1);
            for op in [
                GateOp::Ry(a, t[0]),
                GateOp::Rz(a, t[1]),
                GateOp::Ry(q, t[2]),
                GateOp::Rz(q, t[3]),
                GateOp::CX {
                    control: a,
                    target: q,
                },
                GateOp::Ry(a, t[4]),
                GateOp::Rz(a, t[5]),
                GateOp::Ry(q, t[6]),
                GateOp::Rz(q, t[7]),
            ] {
                c.push(op)?;
            }
        }
        Ok(c)
    }
}

/// `U = e^{i phi} Rz(gamma) Ry(beta) Rz(alpha)`; returns `(alpha, beta, gamma)`.
pub fn zyz_angles(u: &CMatrix) -> (f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let s = det.sqrt();
    let (a, b) = (u[(0, 0)] / s, u[(1, 0)] / s);
    let beta = 2.0 * b.norm().atan2(a.norm());
    let (sum, diff) = if b.norm() < ANGLE_TOL {
        (-2.0 * a.arg(), 0.0)
    } else if a.norm() < ANGLE_TOL {
        (0.0, 2.0 * b.arg())
    } else {
        (-2.0 * a.arg(), 2.0 * b.arg())
    };
    // sum = gamma + alpha, diff = gamma - alpha
    ((sum - diff) / 2.0, beta, (sum + diff) / 2.0)
}

fn wrapped(x: f64) -> f64 {
    let t = x.rem_euclid(2.0 * std::f64::consts::PI);
    t.min(2.0 * std::f64::consts::PI - t)
}

/// Gate stream over adjacent `CX(q, q+1)` and single-qubit matrices.
enum Item {
    Local(usize, CMatrix),
    Cx(usize),
}

fn h(q: usize) -> Item {
    Item::Local(q, op_matrix(&GateOp::H(q)).expect("H has a matrix"))
}

/// `CX(control, target)` for any pair, lowered to adjacent `CX(lo, lo+1)`.
fn lower_cx(control: usize, target: usize, out: &mut Vec<Item>) {
    if control < target {
        if target - control == 1 {
            out.push(Item::Cx(control));
            return;
        }
        // Move the control next to the target, act, move it back.
        for q in control..target - 1 {
            swap(q, out);
        }
        out.push(Item::Cx(target - 1));
        for q in (control..target - 1).rev() {
            swap(q, out);
        }
    } else {
        out.extend([h(control), h(target)]);
        lower_cx(target, control, out);
        out.extend([h(control), h(target)]);
    }
}

fn swap(q: usize, out: &mut Vec<Item>) {
    out.push(Item::Cx(q));
    out.extend([h(q), h(q + 1)]);
    out.push(Item::Cx(q));
    out.extend([h(q), h(q + 1)]);
    out.push(Item::Cx(q));
}

fn lower(circuit: &Circuit) -> Result<Vec<Item>> {
    let mut out = Vec::new();
    for op in circuit.ops() {
        match *op {
            GateOp::CX { control, target } => lower_cx(control, target, &mut out),
            GateOp::CZ(a, b) => {
                out.push(h(b));
                lower_cx(a, b, &mut out);
                out.push(h(b));
            }
            GateOp::MeasureZ { .. } | GateOp::Prepare { .. } => {
                return Err(Error::InvalidOp(format!(
                    "{op} cannot be absorbed into the ansatz"
                )))
            }
            _ => out.push(Item::Local(op.qubits()[0], op_matrix(op)?)),
        }
    }
    Ok(out)
}

struct Compiled {
    blocks: Vec<AnsatzBlock>,
    theta: Vec<f64>,
    /// Qubits whose trailing unitary does not fit the last post-rotation.
    uncovered: Vec<usize>,
}

/// Walks the lowered stream, turning each CX into a block and each run of
/// single-qubit gates into the post-rotation of the previous block on that
/// qubit plus the pre-rotation of the next one.
fn compile_stream(n: usize, items: &[Item]) -> Compiled {
    let mut pending: Vec<CMatrix> = vec![CMatrix::identity(2, 2); n];
    // (block index, slot offset of the qubit's post-rotation) of the last block per qubit.
    let mut last: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut last_layer = vec![0usize; n];
    let mut blocks: Vec<AnsatzBlock> = Vec::new();
    let mut theta: Vec<f64> = Vec::new();
    for item in items {
        match item {
            Item::Local(q, m) => pending[*q] = m * &pending[*q],
            Item::Cx(a) => {
                let b = *a + 1;
                let idx = blocks.len();
                let layer = last_layer[*a].max(last_layer[b]);
                blocks.push(AnsatzBlock { first: *a, layer });
                last_layer[*a] = layer + 1;
                last_layer[b] = layer + 1;
                theta.extend([0.0; PARAMS_PER_BLOCK]);
                for (q, pre, post) in [(*a, 0, 4), (b, 2, 6)] {
                    let (alpha, beta, gamma) = zyz_angles(&pending[q]);
                    let base = idx * PARAMS_PER_BLOCK;
                    match last[q] {
                        Some((prev, prev_post)) => {
                            // post(prev): Ry 0, Rz alpha; pre(this): Ry beta, Rz gamma
                            theta[prev * PARAMS_PER_BLOCK + prev_post + 1] = alpha;
                        }
                        None => {
                            // On |0> the leading Rz(alpha) is a phase.
                        }
                    }
                    theta[base + pre] = beta;
                    theta[base + pre + 1] = gamma;
                    pending[q] = CMatrix::identity(2, 2);
                    last[q] = Some((idx, post));
                }
            }
        }
    }
    let mut uncovered = Vec::new();
    for q in 0..n {
        let (alpha, beta, gamma) = zyz_angles(&pending[q]);
        match last[q] {
            Some((blk, post)) => {
                let base = blk * PARAMS_PER_BLOCK + post;
                if wrapped(alpha) < ANGLE_TOL {
                    theta[base] = beta;
                    theta[base + 1] = gamma;
                } else if wrapped(beta) < ANGLE_TOL {
                    theta[base + 1] = alpha + gamma;
                } else {
                    uncovered.push(q);
                }
            }
            None => {
                if wrapped(beta) > ANGLE_TOL {
                    uncovered.push(q);
                }
            }
        }
    }
    let layers = blocks.iter().map(|b| b.layer + 1).max().unwrap_or(0);
    let _ = layers;
    Compiled {
        blocks,
        theta,
        uncovered,
    }
}

fn identity_pair(q: usize, n: usize, out: &mut Vec<Item>) {
    let first = if q + 1 < n { q } else { q - 1 };
    out.push(Item::Cx(first));
    out.push(Item::Cx(first));
}

/// Ansatz whose parameters `theta0` reproduce `truncated` on `|0...0>` up to
/// global phase, followed by `extra_layers` rounds of identity block pairs on
/// every adjacent pair to give the optimizer room.
pub fn build_ansatz(truncated: &Circuit, extra_layers: usize) -> Result<Ansatz> {
    let n = truncated.num_qubits();
    if n < 2 {
        return Err(Error::InvalidOp(
            "the block ansatz needs at least two qubits".into(),
        ));
    }
    let mut items = lower(truncated)?;
    let mut compiled = compile_stream(n, &items);
    if !compiled.uncovered.is_empty() {
        for &q in &compiled.uncovered.clone() {
            identity_pair(q, n, &mut items);
        }
        compiled = compile_stream(n, &items);
        debug_assert!(compiled.uncovered.is_empty());
    }
    if compiled.blocks.is_empty() && extra_layers == 0 {
        // A single layer of blocks acts trivially on |0...0> at theta = 0.
        for q in (0..n - 1).step_by(2) {
            items.push(Item::Cx(q));
        }
        compiled = compile_stream(n, &items);
    }
    for _ in 0..extra_layers {
        for q in 0..n - 1 {
            items.push(Item::Cx(q));
            items.push(Item::Cx(q));
        }
    }
    if extra_layers > 0 {
        compiled = compile_stream(n, &items);
    }
    let layers = compiled
        .blocks
        .iter()
        .map(|b| b.layer + 1)
        .max()
        .unwrap_or(0);
    Ok(Ansatz {
        num_qubits: n,
        blocks: compiled.blocks,
        layers,
        theta0: compiled.theta,
    })
}

/// Which state the ansatz is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AqcTarget {
    /// The untruncated prefix followed by the inverse cut gates, so the
    /// assembled circuit (ansatz, then cut gates, then suffix) targets the
    /// original circuit.
    #[default]
    Compensated,
    /// The untruncated prefix itself.
    FullPrefix,
}

impl FromStr for AqcTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_prefix" => Ok(AqcTarget::FullPrefix),
            "compensated" => Ok(AqcTarget::Compensated),
            _ => Err(Error::UnknownOption(s.to_string())),
        }
    }
}

impl AqcTarget {
    pub fn name(self) -> &'static str {
        match self {
            AqcTarget::FullPrefix => "full_prefix",
            AqcTarget::Compensated => "compensated",
        }
    }
}

/// MPS of the prefix target. Warns when truncation already costs more than
/// 1e-8 of the norm, since no ε below that floor is reachable.
pub fn prefix_target(split: &PrefixSplit, kind: AqcTarget, chi_max: usize) -> Result<MpsState> {
    let mut ops = split.prefix.without_measurements().ops().to_vec();
    if kind == AqcTarget::Compensated {
        // CX and CZ are their own inverses.
        ops.extend(split.cut_gates.iter().rev().copied());
    }
    let c = Circuit::from_ops(split.prefix.num_qubits(), 0, ops)?;
    let state = simulate_mps(&c, chi_max, DEFAULT_SVD_CUTOFF)?;
    if state.discarded_weight() > 1e-8 {
        log::warn!(
            "target MPS discarded weight {:.3e} at chi {chi_max}; infidelities below it are not attainable",
            state.discarded_weight()
        );
    }
    Ok(state)
}

/// `1 - |<target|psi(theta)>|^2`, clamped into [0, 1].
pub fn infidelity(ansatz: &Ansatz, theta: &[f64], target: &MpsState) -> Result<f64> {
    if target.num_qubits() != ansatz.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: ansatz.num_qubits,
            found: target.num_qubits(),
        });
    }
    let psi = simulate_mps(&ansatz.circuit(theta)?, target.chi_max, target.svd_cutoff)?;
    let ov: C64 = target.overlap(&psi)?;
    let f = ov.norm_sqr() / (target.norm_sqr() * psi.norm_sqr());
    let l = 1.0 - f;
    if !l.is_finite() {
        return Err(Error::NonFiniteLoss(0));
    }
    Ok(l.clamp(0.0, 1.0))
}

/// Parameter-shift gradient: every parameter drives one Pauli rotation, so
/// `dL/dθ_k = (L(θ_k + π/2) - L(θ_k - π/2)) / 2` exactly.
pub fn gradient(ansatz: &Ansatz, theta: &[f64], target: &MpsState) -> Result<Vec<f64>> {
    (0..theta.len())
        .into_par_iter()
        .map(|k| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[k] += FRAC_PI_2;
            minus[k] -= FRAC_PI_2;
            Ok((infidelity(ansatz, &plus, target)? - infidelity(ansatz, &minus, target)?) / 2.0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimization {
    pub theta: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Gradient descent with Armijo backtracking from `theta0`. Stops once the
/// loss drops below `epsilon`, after `max_iters` iterations, or when no
/// step satisfies the sufficient-decrease test.
pub fn optimize(
    ansatz: &Ansatz,
    target: &MpsState,
    epsilon: f64,
    max_iters: usize,
) -> Result<Optimization> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if max_iters == 0 {
        return Err(Error::Config("max_iters must be at least 1".into()));
    }
    let mut theta = ansatz.theta0.clone();
    let mut loss = infidelity(ansatz, &theta, target)?;
    let mut trace = vec![TraceRow {
        iteration: 0,
        loss,
        step: 0.0,
    }];
    let mut iterations = 0;
    while loss >= epsilon && iterations < max_iters {
        iterations += 1;
        let g = gradient(ansatz, &theta, target)?;
        let g2: f64 = g.iter().map(|x| x * x).sum();
        if !g2.is_finite() {
            return Err(Error::NonFiniteLoss(iterations));
        }
        let mut step = INITIAL_STEP;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = theta.iter().zip(&g).map(|(t, d)| t - step * d).collect();
            let l =
                infidelity(ansatz, &trial, target).map_err(|_| Error::NonFiniteLoss(iterations))?;
            if l <= loss - ARMIJO_C * step * g2 {
                accepted = Some((trial, l));
                break;
            }
            step *= SHRINK;
        }
        match accepted {
            Some((t, l)) => {
                theta = t;
                loss = l;
                trace.push(TraceRow {
                    iteration: iterations,
                    loss,
                    step,
                });
            }
            None => break,
        }
    }
    Ok(Optimization {
        converged: loss < epsilon,
        theta,
        loss,
        iterations,
        trace,
    })
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iteration,loss,step\n");
    for r in trace {
        let _ = writeln!(out, "{},{:.12e},{:.6e}", r.iteration, r.loss, r.step);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AqcConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub extra_layers: usize,
    pub chi_max: usize,
    pub target: AqcTarget,
}

impl Default for AqcConfig {
    fn default() -> Self {
        AqcConfig {
            epsilon: DEFAULT_EPSILON,
            max_iters: 500,
            extra_layers: 1,
            chi_max: DEFAULT_CHI_MAX,
            target: AqcTarget::Compensated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompilationResult {
    pub ansatz: Ansatz,
    pub optimized_parameters: Vec<f64>,
    pub final_infidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Ansatz, then the cut gates, then the suffix.
    pub compiled_circuit: Circuit,
    /// Positions of the reinserted cut gates in `compiled_circuit`.
    pub cut_indices: Vec<usize>,
    pub trace: Vec<TraceRow>,
    pub prefix_two_qubit_gates: usize,
    pub ansatz_two_qubit_gates: usize,
}

/// `suffix ∘ cut gates ∘ ansatz(theta)` over the original register.
pub fn assemble(
    split: &PrefixSplit,
    ansatz: &Ansatz,
    theta: &[f64],
) -> Result<(Circuit, Vec<usize>)> {
    let body = ansatz.circuit(theta)?;
    let mut c = Circuit::new(split.suffix.num_qubits(), split.suffix.num_clbits());
    for op in body.ops() {
        c.push(*op)?;
    }
    let mut cut_indices = Vec::new();
    for g in &split.cut_gates {
        cut_indices.push(c.len());
        c.push(*g)?;
    }
    for op in split.suffix.ops() {
        c.push(*op)?;
    }
    Ok((c, cut_indices))
}

/// Split, build the ansatz, optimize against the chosen target, reassemble.
pub fn compile_prefix(
    circuit: &Circuit,
    cut_indices: &[usize],
    cfg: &AqcConfig,
) -> Result<CompilationResult> {
    let split = split_prefix_suffix(circuit, cut_indices)?;
    let ansatz = build_ansatz(&split.truncated, cfg.extra_layers)?;
    let target = prefix_target(&split, cfg.target, cfg.chi_max)?;
    let opt = optimize(&ansatz, &target, cfg.epsilon, cfg.max_iters)?;
    let (compiled_circuit, cuts) = assemble(&split, &ansatz, &opt.theta)?;
    Ok(CompilationResult {
        ansatz_two_qubit_gates: ansatz.blocks.len(),
        prefix_two_qubit_gates: split.prefix.two_qubit_gate_count(),
        ansatz,
        optimized_parameters: opt.theta,
        final_infidelity: opt.loss,
        iterations: opt.iterations,
        converged: opt.converged,
        compiled_circuit,
        cut_indices: cuts,
        trace: opt.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        pauli_y, pauli_z, phase_distance, rotation, simulate_statevector, StateVector,
    };
    use crate::encoder::{build_encoder_circuit, data_to_angles};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c21() -> Circuit {
        build_encoder_circuit(&data_to_angles(&[0.3, -0.6, 0.9, 0.1], 2, 1).unwrap()).unwrap()
    }

    fn fidelity(a: &Circuit, b: &Circuit) -> f64 {
        let sa = simulate_statevector(&a.without_measurements()).unwrap();
        let sb = simulate_statevector(&b.without_measurements()).unwrap();
        sa.fidelity(&sb).unwrap()
    }

    #[test]
    fn zyz_reconstructs_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = rotation(&pauli_z(), rng.gen_range(-4.0..4.0))
                * rotation(&pauli_y(), rng.gen_range(-4.0..4.0))
                * rotation(&pauli_z(), rng.gen_range(-4.0..4.0));
            let (a, b, g) = zyz_angles(&u);
            let r = rotation(&pauli_z(), g) * rotation(&pauli_y(), b) * rotation(&pauli_z(), a);
            assert!(phase_distance(&u, &r) < 1e-10);
        }
        let h = op_matrix(&GateOp::H(0)).unwrap();
        let (a, b, g) = zyz_angles(&h);
        let r = rotation(&pauli_z(), g) * rotation(&pauli_y(), b) * rotation(&pauli_z(), a);
        assert!(phase_distance(&h, &r) < 1e-10);
    }

    #[test]
    fn split_reassembles() {
        let c = c21();
        let s = split_prefix_suffix(&c, &[5]).unwrap();
        assert_eq!(s.reassembled_ops(), c.ops());
        assert_eq!(s.truncated.len(), s.prefix.len() - 1);
        let none = split_prefix_suffix(&c, &[]).unwrap();
        assert_eq!(none.prefix, c);
        assert!(none.suffix.is_empty());
        let data: Vec<f64> = (0..24).map(|i| (i as f64 / 12.0) - 1.0).collect();
        let big = build_encoder_circuit(&data_to_angles(&data, 3, 3).unwrap()).unwrap();
        let two: Vec<usize> = big
            .ops()
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_two_qubit())
            .map(|(i, _)| i)
            .skip(3)
            .take(2)
            .collect();
        let s = split_prefix_suffix(&big, &two).unwrap();
        assert_eq!(s.truncated.len(), s.prefix.len() - 2);
        assert_eq!(s.reassembled_ops(), big.ops());
        assert!(split_prefix_suffix(&c, &[0]).is_err());
    }

    #[test]
    fn theta0_reproduces_truncated_prefixes() {
        let empty = Circuit::new(3, 0);
        let a = build_ansatz(&empty, 0).unwrap();
        assert_eq!(a.layers, 1);
        assert!(a.theta0.iter().all(|&t| t == 0.0));
        assert!(fidelity(&a.circuit(&a.theta0).unwrap(), &empty) > 1.0 - 1e-12);

        let ry = Circuit::from_ops(2, 0, vec![GateOp::Ry(0, 0.4)]).unwrap();
        let a = build_ansatz(&ry, 0).unwrap();
        assert!(a.theta0.contains(&0.4));
        assert!(fidelity(&a.circuit(&a.theta0).unwrap(), &ry) > 1.0 - 1e-12);

        let s = split_prefix_suffix(&c21(), &[5]).unwrap();
        for extra in 0..3 {
            let a = build_ansatz(&s.truncated, extra).unwrap();
            assert_eq!(a.num_parameters(), a.blocks.len() * 8);
            assert_eq!(
                a.layer_blocks().iter().map(Vec::len).sum::<usize>(),
                a.blocks.len()
            );
            assert!(a.blocks.iter().all(|b| b.first + 1 < a.num_qubits));
            assert!(fidelity(&a.circuit(&a.theta0).unwrap(), &s.truncated) > 1.0 - 1e-9);
        }
    }

    #[test]
    fn theta0_handles_long_range_and_reversed_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let mut c = Circuit::new(n, 0);
            for _ in 0..15 {
                let q = rng.gen_range(0..n);
                let t = (q + rng.gen_range(1..n)) % n;
                let op = match rng.gen_range(0..7) {
                    0 => GateOp::H(q),
                    1 => GateOp::Ry(q, rng.gen_range(-3.0..3.0)),
                    2 => GateOp::Rz(q, rng.gen_range(-3.0..3.0)),
                    3 => GateOp::S(q),
                    4 => GateOp::CZ(q, t),
                    _ => GateOp::CX {
                        control: q,
                        target: t,
                    },
                };
                c.push(op).unwrap();
            }
            let a = build_ansatz(&c, 0).unwrap();
            let f = fidelity(&a.circuit(&a.theta0).unwrap(), &c);
            assert!(f > 1.0 - 1e-9, "fidelity {f}");
        }
        assert!(build_ansatz(&Circuit::new(1, 0), 0).is_err());
        let m = Circuit::from_ops(2, 1, vec![GateOp::MeasureZ { qubit: 0, clbit: 0 }]).unwrap();
        assert!(build_ansatz(&m, 0).is_err());
    }

    #[test]
    fn infidelity_bounds() {
        let s = split_prefix_suffix(&c21(), &[5]).unwrap();
        let a = build_ansatz(&s.truncated, 1).unwrap();
        let trunc_target = simulate_mps(&s.truncated, 64, 1e-14).unwrap();
        assert!(infidelity(&a, &a.theta0, &trunc_target).unwrap() < 1e-9);
        // |000> against |111>.
        let flip = Circuit::from_ops(2, 0, vec![GateOp::X(0), GateOp::X(1)]).unwrap();
        let a2 = build_ansatz(&Circuit::new(2, 0), 0).unwrap();
        let t2 = simulate_mps(&flip, 8, 1e-14).unwrap();
        assert!((infidelity(&a2, &a2.theta0, &t2).unwrap() - 1.0).abs() < 1e-12);
        let wrong = MpsState::zero(4, 8, 1e-14).unwrap();
        assert!(infidelity(&a, &a.theta0, &wrong).is_err());
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = Circuit::new(5, 0);
        for q in 0..5 {
            c.push(GateOp::Ry(q, rng.gen_range(-2.0..2.0))).unwrap();
        }
        for q in 0..4 {
            c.push(GateOp::CX {
                control: q,
                target: q + 1,
            })
            .unwrap();
        }
        let a = build_ansatz(&c, 1).unwrap();
        let target = simulate_mps(&c, 64, 1e-14).unwrap();
        let theta: Vec<f64> = (0..a.num_parameters())
            .map(|_| rng.gen_range(-3.0..3.0))
            .collect();
        let g = gradient(&a, &theta, &target).unwrap();
        let h = 1e-5;
        for k in 0..theta.len() {
            let mut p = theta.clone();
            let mut m = theta.clone();
            p[k] += h;
            m[k] -= h;
            let fd = (infidelity(&a, &p, &target).unwrap() - infidelity(&a, &m, &target).unwrap())
                / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6, "param {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn optimizer_stops_at_iteration_zero_on_an_exact_start() {
        let s = split_prefix_suffix(&c21(), &[5]).unwrap();
        let a = build_ansatz(&s.truncated, 0).unwrap();
        let target = prefix_target(&s, AqcTarget::Compensated, 64).unwrap();
        let r = optimize(&a, &target, 1e-3, 10).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
        assert!(optimize(&a, &target, 0.0, 10).is_err());
        assert!(optimize(&a, &target, 1e-3, 0).is_err());
    }

    #[test]
    fn c21_prefix_converges_with_monotone_trace() {
        let c = c21();
        let cfg = AqcConfig {
            target: AqcTarget::FullPrefix,
            ..AqcConfig::default()
        };
        let r = compile_prefix(&c, &[5], &cfg).unwrap();
        assert!(r.converged, "final loss {}", r.final_infidelity);
        assert!(r.iterations <= 500);
        assert!(r.trace.windows(2).all(|w| w[1].loss <= w[0].loss));
        assert!(trace_csv(&r.trace).starts_with("iteration,loss,step\n"));
    }

    #[test]
    fn assembly_at_theta0_matches_original() {
        let c = c21();
        let s = split_prefix_suffix(&c, &[5]).unwrap();
        let a = build_ansatz(&s.truncated, 1).unwrap();
        let (compiled, cuts) = assemble(&s, &a, &a.theta0).unwrap();
        assert_eq!(cuts, vec![a.circuit(&a.theta0).unwrap().len()]);
        assert!(fidelity(&compiled, &c) > 1.0 - 1e-9);
        let sv: StateVector = simulate_statevector(&c.without_measurements()).unwrap();
        assert_eq!(sv.num_qubits(), 3);
    }
}

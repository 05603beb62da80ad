//! Matrix-product-state simulator over the shared circuit IR.
//!
//! Site `j` holds a tensor `T[a][s][b]` (left bond, physical, right bond),
//! stored row-major. The state is kept in mixed canonical form: every site
//! left of `center` is a left isometry and every site right of it a right
//! isometry, so the norm lives entirely in the center tensor and two-site
//! truncations are optimal in the 2-norm.

use std::fmt::Write as _;

use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::circuit::{
    op_matrix, state_vector, to_array2, to_array4, BranchState, GateOp, StateLabel, StateVector,
};
use crate::error::{Error, Result};
use crate::linalg::{svd, Svd};

pub const DEFAULT_CHI_MAX: usize = 64;
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-12;
/// Singular values closer than this count as degenerate.
const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
struct Site {
    left: usize,
    right: usize,
    data: Vec<C64>,
}

impl Site {
    fn zero() -> Self {
        Site {
            left: 1,
            right: 1,
            data: vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    #[inline]
    fn at(&self, a: usize, s: usize, b: usize) -> C64 {
        self.data[(a * 2 + s) * self.right + b]
    }

    /// Matrix view with rows (a, s) and columns b.
    fn as_left_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.left * 2, self.right, &self.data)
    }

    /// Matrix view with rows a and columns (s, b).
    fn as_right_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.left, 2 * self.right, &self.data)
    }

    fn from_row_major(left: usize, right: usize, m: &DMatrix<C64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Site { left, right, data }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsState {
    num_qubits: usize,
    sites: Vec<Site>,
    center: usize,
    pub chi_max: usize,
    pub svd_cutoff: f64,
    discarded_weight: f64,
    max_bond_seen: usize,
}

pub fn mps_from_zero(num_qubits: usize) -> Result<MpsState> {
    MpsState::zero(num_qubits, DEFAULT_CHI_MAX, DEFAULT_SVD_CUTOFF)
}

pub fn mps_apply(state: &mut MpsState, op: &GateOp) -> Result<()> {
    state.apply_op(op)
}

pub fn mps_amplitude(state: &MpsState, bits: &str) -> Result<C64> {
    state.amplitude(bits)
}

/// `|<a|b>|^2` between two MPS.
pub fn mps_fidelity(a: &MpsState, b: &MpsState) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr())
}

/// `|<a|b>|^2` between an MPS and a dense statevector.
pub fn mps_statevector_fidelity(a: &MpsState, b: &StateVector) -> Result<f64> {
    a.to_statevector().fidelity(b)
}

impl MpsState {
    pub fn zero(num_qubits: usize, chi_max: usize, svd_cutoff: f64) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidOp("an MPS needs at least one site".into()));
        }
        if chi_max == 0 {
            return Err(Error::Config("chi_max must be at least 1".into()));
        }
        Ok(MpsState {
            num_qubits,
            sites: vec![Site::zero(); num_qubits],
            center: 0,
            chi_max,
            svd_cutoff,
            discarded_weight: 0.0,
            max_bond_seen: 1,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Bond dimensions between neighbouring sites (length `n - 1`).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites
            .iter()
            .take(self.num_qubits - 1)
            .map(|s| s.right)
            .collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Largest bond dimension reached at any point of the evolution.
    pub fn max_bond_seen(&self) -> usize {
        self.max_bond_seen
    }

    /// Accumulated squared singular-value weight discarded by truncation.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sites[self.center]
            .data
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_op(&mut self, op: &GateOp) -> Result<()> {
        let qs = op.qubits();
        for &q in &qs {
            self.check_qubit(q)?;
        }
        if !op.is_unitary() {
            return Err(Error::NonUnitaryOp(op.to_string()));
        }
        let m = op_matrix(op)?;
        if qs.len() == 1 {
            self.apply_single(qs[0], &to_array2(&m));
            Ok(())
        } else {
            self.apply_two(qs[0], qs[1], &to_array4(&m));
            Ok(())
        }
    }

    pub fn apply_single(&mut self, q: usize, u: &[[C64; 2]; 2]) {
        let site = &mut self.sites[q];
        let r = site.right;
        for a in 0..site.left {
            for b in 0..r {
                let i0 = (a * 2) * r + b;
                let i1 = (a * 2 + 1) * r + b;
                let (x0, x1) = (site.data[i0], site.data[i1]);
                site.data[i0] = u[0][0] * x0 + u[0][1] * x1;
                site.data[i1] = u[1][0] * x0 + u[1][1] * x1;
            }
        }
    }

    /// Two-qubit gate with matrix index `2*s_first + s_second`; routes
    /// non-adjacent pairs through SWAP chains and restores the order after.
    pub fn apply_two(&mut self, first: usize, second: usize, u: &[[C64; 4]; 4]) {
        let (lo, hi) = if first < second {
            (first, second)
        } else {
            (second, first)
        };
        for k in lo..hi - 1 {
            self.apply_adjacent(k, &SWAP);
        }
        let m = if first < second { *u } else { reverse_pair(u) };
        self.apply_adjacent(hi - 1, &m);
        for k in (lo..hi - 1).rev() {
            self.apply_adjacent(k, &SWAP);
        }
    }

    /// Moves the orthogonality center to `target` with QR steps.
    pub fn move_center(&mut self, target: usize) {
        while self.center < target {
            let c = self.center;
            let m = self.sites[c].as_left_matrix();
            let left = self.sites[c].left;
            let qr = m.qr();
            let (q, r) = (qr.q(), qr.r());
            let k = q.ncols();
            self.sites[c] = Site::from_row_major(left, k, &q);
            let next = &self.sites[c + 1];
            let merged = &r * next.as_right_matrix();
            let right = next.right;
            self.sites[c + 1] = Site::from_row_major(k, right, &merged);
            self.center += 1;
        }
        while self.center > target {
            let c = self.center;
            let m = self.sites[c].as_right_matrix();
            let right = self.sites[c].right;
            let qr = m.adjoint().qr();
            let (q, r) = (qr.q(), qr.r());
            let k = q.ncols();
            self.sites[c] = Site::from_row_major(k, right, &q.adjoint());
            let prev = &self.sites[c - 1];
            let merged = prev.as_left_matrix() * r.adjoint();
            let left = prev.left;
            self.sites[c - 1] = Site::from_row_major(left, k, &merged);
            self.center -= 1;
        }
    }

    fn apply_adjacent(&mut self, i: usize, u: &[[C64; 4]; 4]) {
        if self.center < i {
            self.move_center(i);
        } else if self.center > i + 1 {
            self.move_center(i + 1);
        }
        let (a_site, b_site) = (&self.sites[i], &self.sites[i + 1]);
        let (l, mid, r) = (a_site.left, a_site.right, b_site.right);
        let zero = C64::new(0.0, 0.0);
        // theta[a][t1][t2][c] before the gate.
        let mut theta = vec![zero; l * 4 * r];
        for a in 0..l {
            for t1 in 0..2 {
                for b in 0..mid {
                    let x = a_site.at(a, t1, b);
                    if x == zero {
                        continue;
                    }
                    for t2 in 0..2 {
                        for c in 0..r {
                            theta[((a * 2 + t1) * 2 + t2) * r + c] += x * b_site.at(b, t2, c);
                        }
                    }
                }
            }
        }
        // Rows (a, s1), columns (s2, c).
        let mut m = DMatrix::<C64>::zeros(l * 2, 2 * r);
        for a in 0..l {
            for c in 0..r {
                let t: [C64; 4] =
                    std::array::from_fn(|k| theta[((a * 2 + k / 2) * 2 + k % 2) * r + c]);
                for (s, row) in u.iter().enumerate() {
                    let v = row[0] * t[0] + row[1] * t[1] + row[2] * t[2] + row[3] * t[3];
                    m[(a * 2 + s / 2, (s % 2) * r + c)] = v;
                }
            }
        }
        let Svd {
            u: uu,
            s: sv,
            v_t: vt,
        } = svd(&m);
        let (keep, dropped) = truncation_rank(&sv, self.chi_max, self.svd_cutoff);
        if dropped > 0.0 {
            debug!("truncated bond {i}: kept {keep}, discarded weight {dropped:.3e}");
        }
        self.discarded_weight += dropped;
        let kept_norm: f64 = sv[..keep].iter().map(|s| s * s).sum::<f64>().sqrt();
        let left = uu.columns(0, keep).into_owned();
        let mut right = vt.rows(0, keep).into_owned();
        for (k, s) in sv[..keep].iter().enumerate() {
            right.row_mut(k).scale_mut(s / kept_norm);
        }
        self.sites[i] = Site::from_row_major(l, keep, &left);
        self.sites[i + 1] = Site::from_row_major(keep, r, &right);
        self.center = i + 1;
        self.max_bond_seen = self.max_bond_seen.max(keep);
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&mut self, q: usize) -> f64 {
        self.move_center(q);
        let site = &self.sites[q];
        let mut p = 0.0;
        for a in 0..site.left {
            for b in 0..site.right {
                p += site.at(a, 1, b).norm_sqr();
            }
        }
        p / self.norm_sqr()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes; returns the
    /// outcome probability.
    pub fn collapse(&mut self, q: usize, outcome: bool) -> f64 {
        self.move_center(q);
        let total = self.norm_sqr();
        let keep = usize::from(outcome);
        let site = &mut self.sites[q];
        let r = site.right;
        let mut p = 0.0;
        for a in 0..site.left {
            for b in 0..r {
                let idx = (a * 2 + (1 - keep)) * r + b;
                site.data[idx] = C64::new(0.0, 0.0);
                p += site.data[(a * 2 + keep) * r + b].norm_sqr();
            }
        }
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            site.data.iter_mut().for_each(|z| *z *= s);
        }
        p / total
    }

    /// After a collapse onto `outcome`, rotates the qubit into `label`.
    pub fn reprepare(&mut self, q: usize, outcome: bool, label: StateLabel) {
        let v = state_vector(label);
        // Unitary mapping |outcome> to |label>: columns (|label>, |label_perp>).
        let perp = [-v[1].conj(), v[0].conj()];
        let u = if outcome {
            [[perp[0], v[0]], [perp[1], v[1]]]
        } else {
            [[v[0], perp[0]], [v[1], perp[1]]]
        };
        self.apply_single(q, &u);
    }

    pub fn amplitude(&self, bits: &str) -> Result<C64> {
        if bits.len() != self.num_qubits || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::MalformedBitstring(bits.to_string()));
        }
        let mut row = vec![C64::new(1.0, 0.0)];
        for (site, ch) in self.sites.iter().zip(bits.chars()) {
            let s = usize::from(ch == '1');
            let mut next = vec![C64::new(0.0, 0.0); site.right];
            for (a, &x) in row.iter().enumerate() {
                for (b, slot) in next.iter_mut().enumerate() {
                    *slot += x * site.at(a, s, b);
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &MpsState) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        let mut env = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
        for (a, b) in self.sites.iter().zip(&other.sites) {
            let mut next = DMatrix::<C64>::zeros(a.right, b.right);
            for s in 0..2 {
                let am = DMatrix::from_fn(a.left, a.right, |i, j| a.at(i, s, j));
                let bm = DMatrix::from_fn(b.left, b.right, |i, j| b.at(i, s, j));
                next += am.adjoint() * &env * bm;
            }
            env = next;
        }
        Ok(env[(0, 0)])
    }

    /// Dense amplitudes, qubit 0 as most significant bit.
    pub fn to_statevector(&self) -> StateVector {
        let mut psi: Vec<C64> = vec![C64::new(1.0, 0.0)];
        let mut width = 1;
        for site in &self.sites {
            let r = site.right;
            let mut next = vec![C64::new(0.0, 0.0); psi.len() / width * 2 * r];
            let rows = psi.len() / width;
            for idx in 0..rows {
                for a in 0..width {
                    let x = psi[idx * width + a];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..2 {
                        for b in 0..r {
                            next[(idx * 2 + s) * r + b] += x * site.at(a, s, b);
                        }
                    }
                }
            }
            psi = next;
            width = r;
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            psi.iter_mut().for_each(|z| *z /= norm);
        }
        StateVector::from_amplitudes(psi).expect("MPS contraction yields 2^n amplitudes")
    }

    /// Bond-dimension profile as CSV (`bond,dim`).
    pub fn bond_profile_csv(&self) -> String {
        let mut out = String::from("bond,dim\n");
        for (i, d) in self.bond_dims().iter().enumerate() {
            let _ = writeln!(out, "{i},{d}");
        }
        out
    }
}

impl BranchState for MpsState {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }
    fn apply_unitary(&mut self, op: &GateOp) -> Result<()> {
        self.apply_op(op)
    }
    fn prob_one(&mut self, qubit: usize) -> f64 {
        MpsState::prob_one(self, qubit)
    }
    fn collapse(&mut self, qubit: usize, outcome: bool) -> f64 {
        MpsState::collapse(self, qubit, outcome)
    }
    fn reprepare(&mut self, qubit: usize, outcome: bool, label: StateLabel) {
        MpsState::reprepare(self, qubit, outcome, label)
    }
    fn probabilities(&self) -> Vec<f64> {
        self.to_statevector().probabilities()
    }
}

/// Runs every op of a unitary circuit on a fresh MPS.
pub fn simulate_mps(
    circuit: &crate::circuit::Circuit,
    chi_max: usize,
    svd_cutoff: f64,
) -> Result<MpsState> {
    let mut state = MpsState::zero(circuit.num_qubits().max(1), chi_max, svd_cutoff)?;
    for op in circuit.ops() {
        state.apply_op(op)?;
    }
    Ok(state)
}

const fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const SWAP: [[C64; 4]; 4] = [
    [c(1.0), c(0.0), c(0.0), c(0.0)],
    [c(0.0), c(0.0), c(1.0), c(0.0)],
    [c(0.0), c(1.0), c(0.0), c(0.0)],
    [c(0.0), c(0.0), c(0.0), c(1.0)],
];

/// Same gate with the roles of its two qubits exchanged.
fn reverse_pair(u: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    let p = |k: usize| (k % 2) * 2 + k / 2;
    std::array::from_fn(|i| std::array::from_fn(|j| u[p(i)][p(j)]))
}

/// Number of singular values to keep and the relative weight dropped.
/// `sv` is sorted descending. A degenerate pair straddling the cut is
/// dropped together.
fn truncation_rank(sv: &[f64], chi_max: usize, cutoff: f64) -> (usize, f64) {
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let top = sv.first().copied().unwrap_or(0.0);
    let mut keep = sv
        .iter()
        .take_while(|&&s| s > cutoff * top.max(1.0))
        .count()
        .max(1);
    keep = keep.min(chi_max);
    while keep > 1
        && keep < sv.len()
        && (sv[keep - 1] - sv[keep]).abs() <= DEGENERACY_TOL
        && sv[keep] > cutoff
    {
        keep -= 1;
    }
    let dropped: f64 = sv[keep..].iter().map(|s| s * s).sum();
    (keep, if total > 0.0 { dropped / total } else { 0.0 })
}

//! Dense gate matrices.
//!
//! Two-qubit matrices use the ordering of [`GateOp::qubits`]: the first listed
//! qubit is the most significant bit of the 4-dimensional index, so `CX` maps
//! `|10>` to `|11>`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::ir::{GateKind, GateOp, StateLabel};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn hadamard() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])
}

/// `|0><0|`, the Z-measurement element.
pub fn projector_zero() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)])
}

pub fn projector_one() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
}

/// `exp(-i angle/2 * axis)` for a Pauli `axis`.
pub fn rotation(axis: &CMatrix, angle: f64) -> CMatrix {
    identity(2) * c((angle / 2.0).cos(), 0.) - axis * c(0., (angle / 2.0).sin())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn state_vector(label: StateLabel) -> [C64; 2] {
    let h = FRAC_1_SQRT_2;
    match label {
        StateLabel::Zero => [c(1., 0.), c(0., 0.)],
        StateLabel::One => [c(0., 0.), c(1., 0.)],
        StateLabel::Plus => [c(h, 0.), c(h, 0.)],
        StateLabel::Minus => [c(h, 0.), c(-h, 0.)],
        StateLabel::PlusI => [c(h, 0.), c(0., h)],
        StateLabel::MinusI => [c(h, 0.), c(0., -h)],
    }
}

/// Unitary for `kind`, or the projector `|0><0|` for `MeasureZ`.
pub fn gate_matrix(kind: GateKind, angle: Option<f64>) -> Result<CMatrix> {
    match (kind.is_rotation(), angle) {
        (true, None) => return Err(Error::MissingAngle(kind)),
        (false, Some(_)) => return Err(Error::UnexpectedAngle(kind)),
        _ => {}
    }
    let m = match kind {
        GateKind::H => hadamard(),
        GateKind::X => pauli_x(),
        GateKind::Y => pauli_y(),
        GateKind::Z => pauli_z(),
        GateKind::S => CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)]),
        GateKind::Sdg => {
            CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)])
        }
        GateKind::Rx => rotation(&pauli_x(), angle.unwrap_or_default()),
        GateKind::Ry => rotation(&pauli_y(), angle.unwrap_or_default()),
        GateKind::Rz => rotation(&pauli_z(), angle.unwrap_or_default()),
        GateKind::CX => {
            let mut m = CMatrix::zeros(4, 4);
            m[(0, 0)] = c(1., 0.);
            m[(1, 1)] = c(1., 0.);
            m[(2, 3)] = c(1., 0.);
            m[(3, 2)] = c(1., 0.);
            m
        }
        GateKind::CZ => {
            let mut m = identity(4);
            m[(3, 3)] = c(-1., 0.);
            m
        }
        GateKind::MeasureZ => projector_zero(),
        GateKind::PrepareState => return Err(Error::NoMatrix(kind)),
    };
    Ok(m)
}

/// Matrix of a unitary op (errors on measurement and reset).
pub fn op_matrix(op: &GateOp) -> Result<CMatrix> {
    if !op.is_unitary() {
        return Err(Error::NonUnitaryOp(op.to_string()));
    }
    gate_matrix(op.kind(), op.angle())
}

/// Fixed-size copy of a 2x2 matrix, used by the simulators' inner loops.
pub fn to_array2(m: &CMatrix) -> [[C64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn to_array4(m: &CMatrix) -> [[C64; 4]; 4] {
    let mut out = [[C64::default(); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = m[(r, col)];
        }
    }
    out
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Distance between `a` and `b` after removing the best single global phase.
///
/// The phase is taken from the largest-magnitude entry of `b`; a zero `b`
/// compares directly.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (idx, best) = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(i, v)| (i, *v))
        .unwrap_or((0, C64::default()));
    if best.norm() < 1e-14 {
        return max_abs_diff(a, b);
    }
    let ratio = a.as_slice()[idx] / best;
    if ratio.norm() < 1e-14 {
        return max_abs_diff(a, b);
    }
    let phase = ratio / ratio.norm();
    max_abs_diff(a, &(b * phase))
}

pub fn equal_up_to_phase(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && phase_distance(a, b) < tol
}

/// Deviation of `u` from unitarity, `max |U^dag U - I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

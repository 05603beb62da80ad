//! Conformance check of the Clifford decomposition table.
//!
//! Products are read as matrix products (rightmost factor acts first).
//! Rotation rows compare up to global phase. `Π` rows contain the
//! measurement element `P0 = |0><0|` and are compared as Kraus elements,
//! again up to phase; a row whose product is not a projector fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use super::gates::{
    gate_matrix, hadamard, identity, pauli_x, pauli_y, pauli_z, phase_distance, projector_zero,
    rotation, CMatrix,
};
use super::ir::GateKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    H,
    S,
    Sdg,
    Z,
    P0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRowReport {
    pub gate: &'static str,
    pub decomposition: &'static str,
    /// Max elementwise distance after phase alignment.
    pub distance: f64,
    pub passed: bool,
    pub note: &'static str,
}

const TOL: f64 = 1e-10;

fn factor(f: Factor) -> CMatrix {
    match f {
        Factor::H => hadamard(),
        Factor::S => gate_matrix(GateKind::S, None).unwrap_or_else(|_| identity(2)),
        Factor::Sdg => gate_matrix(GateKind::Sdg, None).unwrap_or_else(|_| identity(2)),
        Factor::Z => pauli_z(),
        Factor::P0 => projector_zero(),
    }
}

fn product(seq: &[Factor]) -> CMatrix {
    seq.iter().fold(identity(2), |acc, f| acc * factor(*f))
}

fn projector(v: [C64; 2]) -> CMatrix {
    let col = CMatrix::from_column_slice(2, 1, &v);
    &col * col.adjoint()
}

/// pi rotation about the bisector of two Pauli axes; exchanges them.
fn axis_swap(a: CMatrix, b: CMatrix) -> CMatrix {
    rotation(&((a + b) * C64::new(FRAC_1_SQRT_2, 0.0)), PI)
}

fn is_projector(m: &CMatrix) -> bool {
    let herm = (m - m.adjoint())
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
        < TOL;
    let idem = (m * m - m).iter().map(|x| x.norm()).fold(0.0, f64::max) < TOL;
    herm && idem
}

/// Checks every row of the decomposition table and reports pass/fail per row.
pub fn verify_clifford_table() -> Vec<TableRowReport> {
    use Factor::*;
    let h = FRAC_1_SQRT_2;
    let rows: Vec<(&'static str, &'static str, Vec<Factor>, Option<CMatrix>)> = vec![
        ("X", "H·Z·H", vec![H, Z, H], Some(pauli_x())),
        ("Y", "H·Z·H·Z", vec![H, Z, H, Z], Some(pauli_y())),
        ("Z", "S^2", vec![S, S], Some(pauli_z())),
        (
            "R_X",
            "H·S†·H",
            vec![H, Sdg, H],
            Some(rotation(&pauli_x(), -PI / 2.0)),
        ),
        (
            "R_Y",
            "S·H·S†·H·S†",
            vec![S, H, Sdg, H, Sdg],
            Some(rotation(&pauli_y(), -PI / 2.0)),
        ),
        (
            "R_Z",
            "S†",
            vec![Sdg],
            Some(rotation(&pauli_z(), -PI / 2.0)),
        ),
        (
            "R_YZ",
            "H·S†·H·Z",
            vec![H, Sdg, H, Z],
            Some(axis_swap(pauli_y(), pauli_z())),
        ),
        (
            "R_ZX",
            "S†·H·S†·H·S†",
            vec![Sdg, H, Sdg, H, Sdg],
            Some(axis_swap(pauli_z(), pauli_x())),
        ),
        (
            "R_XY",
            "H·Z·H·S†",
            vec![H, Z, H, Sdg],
            Some(axis_swap(pauli_x(), pauli_y())),
        ),
        (
            "ΠX",
            "S·H·S·H·P0·H·S†·H·S†",
            vec![S, H, S, H, P0, H, Sdg, H, Sdg],
            Some(projector([C64::new(h, 0.), C64::new(h, 0.)])),
        ),
        (
            "ΠY",
            "H·S†·H·P0·H·S·H",
            vec![H, Sdg, H, P0, H, S, H],
            Some(projector([C64::new(h, 0.), C64::new(0., h)])),
        ),
        ("ΠZ", "P0", vec![P0], Some(projector_zero())),
        (
            "Π_YZ",
            "S·H·S·H·P0·H·S·H·S†",
            vec![S, H, S, H, P0, H, S, H, Sdg],
            None,
        ),
        (
            "Π_ZX",
            "H·S†·H·P0·H·S·H·Z",
            vec![H, Sdg, H, P0, H, S, H, Z],
            None,
        ),
        ("Π_XY", "P0·H·Z·H", vec![P0, H, Z, H], None),
    ];
    rows.into_iter()
        .map(|(gate, decomposition, seq, lhs)| {
            let rhs = product(&seq);
            match lhs {
                Some(l) => {
                    let d = phase_distance(&rhs, &l);
                    TableRowReport {
                        gate,
                        decomposition,
                        distance: d,
                        passed: d < TOL,
                        note: if seq.contains(&P0) {
                            "measurement element, equal up to phase"
                        } else {
                            "unitary, equal up to phase"
                        },
                    }
                }
                None => TableRowReport {
                    gate,
                    decomposition,
                    distance: f64::NAN,
                    passed: is_projector(&rhs),
                    note: "product is not a projective measurement element",
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str) -> TableRowReport {
        verify_clifford_table()
            .into_iter()
            .find(|r| r.gate == name)
            .unwrap()
    }

    #[test]
    fn x_row_passes() {
        assert!(row("X").passed);
    }

    #[test]
    fn rz_row_is_sdg_up_to_phase() {
        let r = row("R_Z");
        assert!(r.passed && r.distance < 1e-12);
    }

    #[test]
    fn pi_z_row_is_p0() {
        assert!(row("ΠZ").passed);
    }

    #[test]
    fn all_unitary_rows_pass() {
        for r in verify_clifford_table()
            .iter()
            .filter(|r| !r.gate.starts_with('Π'))
        {
            assert!(r.passed, "{} failed with distance {}", r.gate, r.distance);
        }
    }

    #[test]
    fn mixed_projector_rows_are_flagged() {
        let report = verify_clifford_table();
        assert!(row("ΠX").passed && row("ΠY").passed);
        let failed: Vec<_> = report
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.gate)
            .collect();
        assert_eq!(failed, vec!["Π_YZ", "Π_ZX", "Π_XY"]);
    }
}

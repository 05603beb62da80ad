use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{GateOp, StateLabel};
use crate::encoder::fwht_scaled;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CutStrategy {
    /// Six signed local settings, measurement terms weighted by outcome parity.
    #[default]
    GateCut,
    /// Same six settings with every measurement term split by outcome.
    PauliTable,
}

impl CutStrategy {
    pub fn name(self) -> &'static str {
        match self {
            CutStrategy::GateCut => "gate_cut",
            CutStrategy::PauliTable => "pauli_table",
        }
    }
}

impl FromStr for CutStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate_cut" => Ok(CutStrategy::GateCut),
            "pauli_table" => Ok(CutStrategy::PauliTable),
            _ => Err(Error::UnknownOption(s.to_string())),
        }
    }
}

/// How the recorded bits of a term enter its weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    /// Weight `(-1)^(number of ones)`; `+1` when nothing is recorded.
    Parity,
    /// Weight 1 when the recorded bits equal this pattern, else 0.
    Outcome(Vec<bool>),
}

/// One signed local term of a cut.
///
/// Side ops use local qubit indices (the CX control or target is local qubit
/// 0). `MeasureZ` clbits number the term's recorded bits: control side first,
/// then target side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpdTerm {
    pub coefficient: f64,
    pub control_side: Vec<GateOp>,
    pub target_side: Vec<GateOp>,
    pub setting_id: usize,
    pub weighting: Weighting,
}

impl QpdTerm {
    pub fn num_bits(&self) -> usize {
        count_measurements(&self.control_side) + count_measurements(&self.target_side)
    }

    /// Weight of this term for a given record.
    pub fn weight(&self, bits: &[bool]) -> f64 {
        match &self.weighting {
            Weighting::Parity => {
                if bits.iter().filter(|&&b| b).count() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Weighting::Outcome(pattern) => {
                if pattern.as_slice() == bits {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// A circuit setting: the terms sharing one pair of side operations,
/// folded into a single coefficient times the parity of the recorded bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSetting {
    pub setting_id: usize,
    pub coefficient: f64,
    pub control_side: Vec<GateOp>,
    pub target_side: Vec<GateOp>,
}

impl CutSetting {
    pub fn num_bits(&self) -> usize {
        count_measurements(&self.control_side) + count_measurements(&self.target_side)
    }
}

fn count_measurements(ops: &[GateOp]) -> usize {
    ops.iter()
        .filter(|o| matches!(o, GateOp::MeasureZ { .. }))
        .count()
}

fn m(qubit: usize, clbit: usize) -> GateOp {
    GateOp::MeasureZ { qubit, clbit }
}

/// The six settings of a CX cut, control and target each on local qubit 0.
///
/// CX is `exp(i pi/4 Z(x)X)` up to local `exp(-i pi/4 Z)`, `exp(-i pi/4 X)`
/// and a phase; expanding the interaction and folding the local corrections
/// into each term gives these rows. Γ = 3.
fn cx_settings() -> Vec<(f64, Vec<GateOp>, Vec<GateOp>)> {
    use GateOp::*;
    vec![
        (0.5, vec![S(0)], vec![H(0), S(0), H(0)]),
        (0.5, vec![Sdg(0)], vec![H(0), Sdg(0), H(0)]),
        (0.5, vec![m(0, 0)], vec![]),
        (-0.5, vec![m(0, 0)], vec![X(0)]),
        (0.5, vec![], vec![H(0), m(0, 0), H(0)]),
        (-0.5, vec![Z(0)], vec![H(0), m(0, 0), H(0)]),
    ]
}

fn all_patterns(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n)
        .map(|k| (0..n).map(|i| k >> (n - 1 - i) & 1 == 1).collect())
        .collect()
}

/// Signed terms of a CX cut.
///
/// `GateCut` gives the six parity-weighted settings directly. `PauliTable`
/// lists every measurement setting once per outcome with the sign folded into
/// the coefficient, which gives 2 + 4·2 = 10 rows over the same 6 settings.
pub fn expand_cut_cx(strategy: CutStrategy) -> Vec<QpdTerm> {
    let mut out = Vec::new();
    for (id, (c, ctrl, tgt)) in cx_settings().into_iter().enumerate() {
        let bits = count_measurements(&ctrl) + count_measurements(&tgt);
        match strategy {
            CutStrategy::GateCut => out.push(QpdTerm {
                coefficient: c,
                control_side: ctrl,
                target_side: tgt,
                setting_id: id,
                weighting: Weighting::Parity,
            }),
            CutStrategy::PauliTable => {
                for pattern in all_patterns(bits) {
                    let sign = if pattern.iter().filter(|&&b| b).count() % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    out.push(QpdTerm {
                        coefficient: c * sign,
                        control_side: ctrl.clone(),
                        target_side: tgt.clone(),
                        setting_id: id,
                        weighting: Weighting::Outcome(pattern),
                    });
                }
            }
        }
    }
    out
}

/// Terms of a CZ cut: the CX terms with the target side conjugated by H.
pub fn expand_cut_cz(strategy: CutStrategy) -> Vec<QpdTerm> {
    expand_cut_cx(strategy)
        .into_iter()
        .map(|mut t| {
            let mut tgt = vec![GateOp::H(0)];
            tgt.extend(t.target_side);
            tgt.push(GateOp::H(0));
            t.target_side = tgt;
            t
        })
        .collect()
}

/// Folds terms into settings. Fails if some setting's weights are not a
/// constant times the parity of its record.
pub fn merge_settings(terms: &[QpdTerm]) -> Result<Vec<CutSetting>> {
    let mut ids: Vec<usize> = terms.iter().map(|t| t.setting_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let group: Vec<&QpdTerm> = terms.iter().filter(|t| t.setting_id == id).collect();
        let head = group[0];
        if group
            .iter()
            .any(|t| t.control_side != head.control_side || t.target_side != head.target_side)
        {
            return Err(Error::InvalidOp(format!(
                "setting {id} mixes different side operations"
            )));
        }
        let n = head.num_bits();
        let f = |bits: &[bool]| {
            group
                .iter()
                .map(|t| t.coefficient * t.weight(bits))
                .sum::<f64>()
        };
        let coefficient = f(&vec![false; n]);
        for pattern in all_patterns(n) {
            let parity = if pattern.iter().filter(|&&b| b).count() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            if (f(&pattern) - coefficient * parity).abs() > 1e-12 {
                return Err(Error::InvalidOp(format!(
                    "setting {id} is not parity weighted"
                )));
            }
        }
        out.push(CutSetting {
            setting_id: id,
            coefficient,
            control_side: head.control_side.clone(),
            target_side: head.target_side.clone(),
        });
    }
    Ok(out)
}

/// Σ|c| over a term list.
pub fn gamma(terms: &[QpdTerm]) -> f64 {
    terms.iter().map(|t| t.coefficient.abs()).sum()
}

/// Sampling overhead of `k` CX cuts, `3^(2k)`.
pub fn qpd_overhead(k: u32) -> u128 {
    9u128.pow(k)
}

/// Π Γ² over the given per-cut term lists.
pub fn sampling_variance_bound(cuts: &[Vec<QpdTerm>]) -> f64 {
    cuts.iter().map(|t| gamma(t).powi(2)).product()
}

/// Number of signed terms summed in post-processing for `cuts` cuts.
pub fn post_processing_terms(strategy: CutStrategy, cuts: u32) -> u128 {
    (expand_cut_cx(strategy).len() as u128).pow(cuts)
}

/// A row of a single-wire cut: measure `observable`, then prepare `state`
/// and weight by the outcome eigenvalue times `coefficient`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireRow {
    pub observable: char,
    pub state: StateLabel,
    pub coefficient: f64,
}

/// The eight-row wire table as printed in the reference material, pairing
/// `I` with `|±>`, `X` with `|0>,|1>` and `Z` with `|±>`.
pub fn printed_wire_table() -> Vec<WireRow> {
    use StateLabel::*;
    let row = |observable, state, coefficient| WireRow {
        observable,
        state,
        coefficient,
    };
    vec![
        row('I', Plus, 0.5),
        row('I', Minus, 0.5),
        row('X', Zero, 0.5),
        row('X', One, -0.5),
        row('Y', MinusI, 0.5),
        row('Y', PlusI, -0.5),
        row('Z', Plus, 0.5),
        row('Z', Minus, -0.5),
    ]
}

/// The standard identity wire cut with the same row structure.
pub fn identity_wire_table() -> Vec<WireRow> {
    use StateLabel::*;
    let row = |observable, state, coefficient| WireRow {
        observable,
        state,
        coefficient,
    };
    vec![
        row('I', Zero, 0.5),
        row('I', One, 0.5),
        row('X', Plus, 0.5),
        row('X', Minus, -0.5),
        row('Y', PlusI, 0.5),
        row('Y', MinusI, -0.5),
        row('Z', Zero, 0.5),
        row('Z', One, -0.5),
    ]
}

/// Which Z-type operator a UCRy generator couples to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ControlPauli {
    Z0,
    Z1,
    Z0Z1,
}

impl ControlPauli {
    /// `exp(-i phi/2 A)` on the controls.
    fn rotation(self, phi: f64) -> Vec<GateOp> {
        match self {
            ControlPauli::Z0 => vec![GateOp::Rz(0, phi)],
            ControlPauli::Z1 => vec![GateOp::Rz(1, phi)],
            ControlPauli::Z0Z1 => vec![
                GateOp::CX {
                    control: 0,
                    target: 1,
                },
                GateOp::Rz(1, phi),
                GateOp::CX {
                    control: 0,
                    target: 1,
                },
            ],
        }
    }

    fn pauli(self) -> Vec<GateOp> {
        match self {
            ControlPauli::Z0 => vec![GateOp::Z(0)],
            ControlPauli::Z1 => vec![GateOp::Z(1)],
            ControlPauli::Z0Z1 => vec![GateOp::Z(0), GateOp::Z(1)],
        }
    }

    fn measure(self, clbit: usize) -> Vec<GateOp> {
        match self {
            ControlPauli::Z0 => vec![m(0, clbit)],
            ControlPauli::Z1 => vec![m(1, clbit)],
            ControlPauli::Z0Z1 => vec![
                GateOp::CX {
                    control: 0,
                    target: 1,
                },
                m(1, clbit),
                GateOp::CX {
                    control: 0,
                    target: 1,
                },
            ],
        }
    }
}

fn measure_y(clbit: usize) -> Vec<GateOp> {
    vec![
        GateOp::Sdg(0),
        GateOp::H(0),
        m(0, clbit),
        GateOp::H(0),
        GateOp::S(0),
    ]
}

/// One factor of a product term: coefficient, control ops, target ops, and
/// whether it records a bit on the control (`Some(true)`) or target side.
type Factor = (f64, Vec<GateOp>, Vec<GateOp>, Option<bool>);

/// Six local terms of `exp(i theta A(x)Y)` for a ±1-valued `A`.
fn interaction_factors(a: ControlPauli, theta: f64) -> Vec<Factor> {
    let (c, s) = (theta.cos(), theta.sin());
    let cs = c * s;
    let mut out: Vec<Factor> = vec![
        (c * c, vec![], vec![], None),
        (s * s, a.pauli(), vec![GateOp::Y(0)], None),
        // exp(±i pi/4 Y) = Ry(∓pi/2)
        (
            cs,
            a.measure(0),
            vec![GateOp::Ry(0, -FRAC_PI_2)],
            Some(true),
        ),
        (
            -cs,
            a.measure(0),
            vec![GateOp::Ry(0, FRAC_PI_2)],
            Some(true),
        ),
        // exp(±i pi/4 A) = rotation(∓pi/2)
        (cs, a.rotation(-FRAC_PI_2), measure_y(0), Some(false)),
        (-cs, a.rotation(FRAC_PI_2), measure_y(0), Some(false)),
    ];
    out.retain(|f| f.0.abs() > 1e-15);
    out
}

fn shift_clbits(ops: &[GateOp], by: usize) -> Vec<GateOp> {
    ops.iter()
        .map(|op| match *op {
            GateOp::MeasureZ { qubit, clbit } => GateOp::MeasureZ {
                qubit,
                clbit: clbit + by,
            },
            other => other,
        })
        .collect()
}

/// Terms of a cut uniformly controlled Ry on two controls (local qubits 0,
/// 1 on the control side) and one target (local qubit 0 on the target side).
///
/// With `i = 2 b0 + b1` the target rotates by `angles[i]`. The gate factors
/// into a local `Ry(beta0)` and three commuting `exp(-i beta/2 A(x)Y)`
/// interactions, `beta` the scaled Walsh-Hadamard transform of the angles.
/// Each interaction with a nonzero angle contributes six local terms, so the
/// expansion has `6^k` terms for `k` active interactions.
/// Coefficient, control ops, target ops, control bits, target bits.
type Partial = (f64, Vec<GateOp>, Vec<GateOp>, usize, usize);

pub fn expand_cut_ucry(angles: &[f64]) -> Result<Vec<QpdTerm>> {
    if angles.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: angles.len(),
        });
    }
    let beta = fwht_scaled(angles)?;
    let generators = [
        (ControlPauli::Z0, beta[2]),
        (ControlPauli::Z1, beta[1]),
        (ControlPauli::Z0Z1, beta[3]),
    ];
    let mut acc: Vec<Partial> = vec![(1.0, vec![], vec![], 0, 0)];
    for (a, b) in generators {
        if b == 0.0 {
            continue;
        }
        let factors = interaction_factors(a, -b / 2.0);
        let mut next = Vec::with_capacity(acc.len() * factors.len());
        for (c0, ctrl0, tgt0, nc, nt) in &acc {
            for (c1, ctrl1, tgt1, side) in &factors {
                let mut ctrl = ctrl0.clone();
                let mut tgt = tgt0.clone();
                let (mut nc, mut nt) = (*nc, *nt);
                match side {
                    Some(true) => {
                        ctrl.extend(shift_clbits(ctrl1, nc));
                        tgt.extend(tgt1.iter().copied());
                        nc += 1;
                    }
                    Some(false) => {
                        ctrl.extend(ctrl1.iter().copied());
                        tgt.extend(shift_clbits(tgt1, nt));
                        nt += 1;
                    }
                    None => {
                        ctrl.extend(ctrl1.iter().copied());
                        tgt.extend(tgt1.iter().copied());
                    }
                }
                next.push((c0 * c1, ctrl, tgt, nc, nt));
            }
        }
        acc = next;
    }
    let terms = acc
        .into_iter()
        .enumerate()
        .map(|(id, (c, ctrl, mut tgt, nc, _))| {
            // Target bits follow the control bits in the term's record.
            tgt = shift_clbits(&tgt, nc);
            if beta[0] != 0.0 {
                tgt.push(GateOp::Ry(0, beta[0]));
            }
            QpdTerm {
                coefficient: c,
                control_side: ctrl,
                target_side: tgt,
                setting_id: id,
                weighting: Weighting::Parity,
            }
        })
        .collect();
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cx_term_structure() {
        let g = expand_cut_cx(CutStrategy::GateCut);
        assert_eq!(g.len(), 6);
        assert!((gamma(&g) - 3.0).abs() < 1e-15);
        let p = expand_cut_cx(CutStrategy::PauliTable);
        assert_eq!(p.len(), 10);
        assert!(p.iter().all(|t| (t.coefficient.abs() - 0.5).abs() < 1e-15));
        let mut ids: Vec<usize> = p.iter().map(|t| t.setting_id).collect();
        ids.dedup();
        assert_eq!(ids, (0..6).collect::<Vec<_>>());
        assert!(p.iter().all(|t| t.num_bits() <= 1));
    }

    #[test]
    fn both_strategies_merge_to_the_same_settings() {
        let a = merge_settings(&expand_cut_cx(CutStrategy::GateCut)).unwrap();
        let b = merge_settings(&expand_cut_cx(CutStrategy::PauliTable)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert!((a.iter().map(|s| s.coefficient.abs()).sum::<f64>() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn merge_rejects_non_parity_settings() {
        let mut t = expand_cut_cx(CutStrategy::PauliTable);
        t.retain(|t| t.weighting != Weighting::Outcome(vec![true]));
        assert!(merge_settings(&t).is_err());
    }

    #[test]
    fn overhead_law() {
        assert_eq!(qpd_overhead(0), 1);
        assert_eq!(qpd_overhead(1), 9);
        assert_eq!(qpd_overhead(2), 81);
        let cut = expand_cut_cx(CutStrategy::GateCut);
        for k in 0..4 {
            let cuts = vec![cut.clone(); k];
            assert!((sampling_variance_bound(&cuts) - qpd_overhead(k as u32) as f64).abs() < 1e-9);
        }
        assert_eq!(post_processing_terms(CutStrategy::GateCut, 2), 36);
        assert_eq!(post_processing_terms(CutStrategy::PauliTable, 2), 100);
    }

    #[test]
    fn cz_terms_wrap_the_target() {
        for t in expand_cut_cz(CutStrategy::GateCut) {
            assert_eq!(t.target_side.first(), Some(&GateOp::H(0)));
            assert_eq!(t.target_side.last(), Some(&GateOp::H(0)));
        }
    }

    #[test]
    fn ucry_term_counts() {
        assert_eq!(expand_cut_ucry(&[0.0; 4]).unwrap().len(), 1);
        assert_eq!(expand_cut_ucry(&[0.3, 0.3, 0.3, 0.3]).unwrap().len(), 1);
        // Only the Z0 interaction is active.
        assert_eq!(expand_cut_ucry(&[0.2, 0.2, 0.6, 0.6]).unwrap().len(), 6);
        assert_eq!(expand_cut_ucry(&[0.1, 0.5, -0.7, 1.9]).unwrap().len(), 216);
        assert!(expand_cut_ucry(&[0.1; 3]).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [CutStrategy::GateCut, CutStrategy::PauliTable] {
            assert_eq!(s.name().parse::<CutStrategy>().unwrap(), s);
        }
        assert!("wire".parse::<CutStrategy>().is_err());
    }
}

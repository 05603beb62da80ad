use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate alphabet understood by every backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    Rx,
    Ry,
    Rz,
    CX,
    CZ,
    MeasureZ,
    PrepareState,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::CX | GateKind::CZ)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::MeasureZ => "MEASURE",
            GateKind::PrepareState => "PREP",
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "S" => GateKind::S,
            "SDG" => GateKind::Sdg,
            "RX" => GateKind::Rx,
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "CX" => GateKind::CX,
            "CZ" => GateKind::CZ,
            "MEASURE" => GateKind::MeasureZ,
            "PREP" => GateKind::PrepareState,
            _ => return Err(Error::UnknownGate(s.to_string())),
        })
    }
}

/// Single-qubit eigenstates a qubit can be reset into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateLabel {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl StateLabel {
    pub const ALL: [StateLabel; 6] = [
        StateLabel::Zero,
        StateLabel::One,
        StateLabel::Plus,
        StateLabel::Minus,
        StateLabel::PlusI,
        StateLabel::MinusI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StateLabel::Zero => "zero",
            StateLabel::One => "one",
            StateLabel::Plus => "plus",
            StateLabel::Minus => "minus",
            StateLabel::PlusI => "plus_i",
            StateLabel::MinusI => "minus_i",
        }
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StateLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidOp(format!("unknown state label `{s}`")))
    }
}

/// One operation of a circuit. Qubits are zero-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    CX { control: usize, target: usize },
    CZ(usize, usize),
    MeasureZ { qubit: usize, clbit: usize },
    Prepare { qubit: usize, state: StateLabel },
}

impl GateOp {
    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::H(_) => GateKind::H,
            GateOp::X(_) => GateKind::X,
            GateOp::Y(_) => GateKind::Y,
            GateOp::Z(_) => GateKind::Z,
            GateOp::S(_) => GateKind::S,
            GateOp::Sdg(_) => GateKind::Sdg,
            GateOp::Rx(..) => GateKind::Rx,
            GateOp::Ry(..) => GateKind::Ry,
            GateOp::Rz(..) => GateKind::Rz,
            GateOp::CX { .. } => GateKind::CX,
            GateOp::CZ(..) => GateKind::CZ,
            GateOp::MeasureZ { .. } => GateKind::MeasureZ,
            GateOp::Prepare { .. } => GateKind::PrepareState,
        }
    }

    /// Qubits in matrix order (control first for CX).
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::H(q)
            | GateOp::X(q)
            | GateOp::Y(q)
            | GateOp::Z(q)
            | GateOp::S(q)
            | GateOp::Sdg(q)
            | GateOp::Rx(q, _)
            | GateOp::Ry(q, _)
            | GateOp::Rz(q, _)
            | GateOp::MeasureZ { qubit: q, .. }
            | GateOp::Prepare { qubit: q, .. } => vec![q],
            GateOp::CX { control, target } => vec![control, target],
            GateOp::CZ(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateOp::Rx(_, a) | GateOp::Ry(_, a) | GateOp::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateOp::MeasureZ { .. } | GateOp::Prepare { .. })
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind().is_two_qubit()
    }

    /// Same operation with qubits renamed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> GateOp {
        match *self {
            GateOp::H(q) => GateOp::H(map(q)),
            GateOp::X(q) => GateOp::X(map(q)),
            GateOp::Y(q) => GateOp::Y(map(q)),
            GateOp::Z(q) => GateOp::Z(map(q)),
            GateOp::S(q) => GateOp::S(map(q)),
            GateOp::Sdg(q) => GateOp::Sdg(map(q)),
            GateOp::Rx(q, a) => GateOp::Rx(map(q), a),
            GateOp::Ry(q, a) => GateOp::Ry(map(q), a),
            GateOp::Rz(q, a) => GateOp::Rz(map(q), a),
            GateOp::CX { control, target } => GateOp::CX {
                control: map(control),
                target: map(target),
            },
            GateOp::CZ(a, b) => GateOp::CZ(map(a), map(b)),
            GateOp::MeasureZ { qubit, clbit } => GateOp::MeasureZ {
                qubit: map(qubit),
                clbit,
            },
            GateOp::Prepare { qubit, state } => GateOp::Prepare {
                qubit: map(qubit),
                state,
            },
        }
    }

    pub fn with_clbit(&self, clbit: usize) -> GateOp {
        match *self {
            GateOp::MeasureZ { qubit, .. } => GateOp::MeasureZ { qubit, clbit },
            other => other,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.kind().name();
        match *self {
            GateOp::CX { control, target } => write!(f, "{name} {control},{target}"),
            GateOp::CZ(a, b) => write!(f, "{name} {a},{b}"),
            GateOp::Rx(q, a) | GateOp::Ry(q, a) | GateOp::Rz(q, a) => write!(f, "{name} {q} {a:?}"),
            GateOp::MeasureZ { qubit, clbit } => write!(f, "{name} {qubit} {clbit}"),
            GateOp::Prepare { qubit, state } => write!(f, "{name} {qubit} {}", state.name()),
            _ => write!(f, "{name} {}", self.qubits()[0]),
        }
    }
}

/// Ordered gate list over indexed qubits. Ops run left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            ops: Vec::new(),
        }
    }

    pub fn from_ops(num_qubits: usize, num_clbits: usize, ops: Vec<GateOp>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits, num_clbits);
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn is_unitary(&self) -> bool {
        self.ops.iter().all(GateOp::is_unitary)
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        validate_op(&op, self.num_qubits, self.num_clbits)?;
        self.ops.push(op);
        Ok(())
    }

    /// Appends a terminal Z measurement of every qubit, qubit `q` into clbit `offset + q`.
    pub fn measure_all(&mut self, offset: usize) -> Result<()> {
        self.num_clbits = self.num_clbits.max(offset + self.num_qubits);
        for q in 0..self.num_qubits {
            self.push(GateOp::MeasureZ {
                qubit: q,
                clbit: offset + q,
            })?;
        }
        Ok(())
    }

    pub fn set_num_clbits(&mut self, n: usize) -> Result<()> {
        for op in &self.ops {
            validate_op(op, self.num_qubits, n)?;
        }
        self.num_clbits = n;
        Ok(())
    }

    /// Unitary part only (drops measurements and resets).
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_clbits: 0,
            ops: self
                .ops
                .iter()
                .copied()
                .filter(GateOp::is_unitary)
                .collect(),
        }
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_two_qubit()).count()
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {} clbits {}\n", self.num_qubits, self.num_clbits);
        for op in &self.ops {
            out.push_str(&op.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Parse {
            line: hline,
            msg: format!("expected `qubits N clbits M`, found `{header}`"),
        };
        if h.len() != 4 || h[0] != "qubits" || h[2] != "clbits" {
            return Err(bad_header());
        }
        let nq: usize = h[1].parse().map_err(|_| bad_header())?;
        let nc: usize = h[3].parse().map_err(|_| bad_header())?;
        let mut circuit = Circuit::new(nq, nc);
        for (line, l) in lines {
            let op = parse_op(l).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            circuit.push(op).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(circuit)
    }
}

fn parse_op(line: &str) -> Result<GateOp> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let kind: GateKind = parts[0].parse()?;
    let arg = |i: usize| -> Result<&str> {
        parts
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidOp(format!("`{line}` is missing field {i}")))
    };
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::InvalidOp(format!("bad index `{s}`")))
    };
    let angle = |s: &str| -> Result<f64> {
        let a: f64 = s
            .parse()
            .map_err(|_| Error::InvalidOp(format!("bad angle `{s}`")))?;
        if a.is_finite() {
            Ok(a)
        } else {
            Err(Error::InvalidOp(format!("non-finite angle `{s}`")))
        }
    };
    let expect_fields = |n: usize| -> Result<()> {
        if parts.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidOp(format!(
                "`{line}` has {} fields, expected {n}",
                parts.len()
            )))
        }
    };
    let op = match kind {
        GateKind::CX | GateKind::CZ => {
            expect_fields(2)?;
            let (a, b) = arg(1)?
                .split_once(',')
                .ok_or_else(|| Error::InvalidOp(format!("`{line}` needs `q1,q2`")))?;
            let (a, b) = (num(a)?, num(b)?);
            if kind == GateKind::CX {
                GateOp::CX {
                    control: a,
                    target: b,
                }
            } else {
                GateOp::CZ(a, b)
            }
        }
        GateKind::Rx | GateKind::Ry | GateKind::Rz => {
            expect_fields(3)?;
            let (q, a) = (num(arg(1)?)?, angle(arg(2)?)?);
            match kind {
                GateKind::Rx => GateOp::Rx(q, a),
                GateKind::Ry => GateOp::Ry(q, a),
                _ => GateOp::Rz(q, a),
            }
        }
        GateKind::MeasureZ => {
            expect_fields(3)?;
            GateOp::MeasureZ {
                qubit: num(arg(1)?)?,
                clbit: num(arg(2)?)?,
            }
        }
        GateKind::PrepareState => {
            expect_fields(3)?;
            GateOp::Prepare {
                qubit: num(arg(1)?)?,
                state: arg(2)?.parse()?,
            }
        }
        _ => {
            expect_fields(2)?;
            let q = num(arg(1)?)?;
            match kind {
                GateKind::H => GateOp::H(q),
                GateKind::X => GateOp::X(q),
                GateKind::Y => GateOp::Y(q),
                GateKind::Z => GateOp::Z(q),
                GateKind::S => GateOp::S(q),
                _ => GateOp::Sdg(q),
            }
        }
    };
    Ok(op)
}

fn validate_op(op: &GateOp, num_qubits: usize, num_clbits: usize) -> Result<()> {
    let qs = op.qubits();
    for &q in &qs {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits,
            });
        }
    }
    if qs.len() == 2 && qs[0] == qs[1] {
        return Err(Error::InvalidOp(format!(
            "`{op}` needs two distinct qubits"
        )));
    }
    if let Some(a) = op.angle() {
        if !a.is_finite() {
            return Err(Error::InvalidOp(format!("`{op}` has a non-finite angle")));
        }
    }
    if let GateOp::MeasureZ { clbit, .. } = *op {
        if clbit >= num_clbits {
            return Err(Error::ClbitOutOfRange {
                index: clbit,
                num_clbits,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_parses_every_kind() {
        let text = "qubits 3 clbits 2\nH 0\nSDG 1\nRY 2 0.25\nCX 0,2\nCZ 1,2\nMEASURE 2 1\nPREP 2 minus_i\n";
        let c = Circuit::from_text(text).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(
            c.ops()[3],
            GateOp::CX {
                control: 0,
                target: 2
            }
        );
        assert_eq!(c.to_text(), text);
    }

    #[test]
    fn rejects_bad_ops() {
        let mut c = Circuit::new(2, 1);
        assert!(c
            .push(GateOp::CX {
                control: 1,
                target: 1
            })
            .is_err());
        assert!(c.push(GateOp::H(2)).is_err());
        assert!(c.push(GateOp::Ry(0, f64::NAN)).is_err());
        assert!(c.push(GateOp::MeasureZ { qubit: 0, clbit: 1 }).is_err());
        assert!(Circuit::from_text("qubits 1 clbits 0\nFOO 0\n").is_err());
        assert!(Circuit::from_text("qubits 1 clbits 0\nRY 0\n").is_err());
        assert!(Circuit::from_text("nonsense\n").is_err());
    }

    #[test]
    fn parse_error_reports_line() {
        let err = Circuit::from_text("qubits 1 clbits 0\nH 0\nH 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}

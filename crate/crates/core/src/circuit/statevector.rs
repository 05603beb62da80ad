use num_complex::Complex64 as C64;

use super::gates::{op_matrix, state_vector, to_array2, to_array4};
use super::ir::{Circuit, GateOp, StateLabel};
use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Dense state over `2^n` amplitudes. Qubit 0 is the most significant bit of
/// the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![C64::default(); 1 << num_qubits];
        amplitudes[0] = C64::new(1.0, 0.0);
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(StateVector {
            num_qubits: n.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    pub fn apply_single(&mut self, qubit: usize, m: &[[C64; 2]; 2]) {
        let stride = self.stride(qubit);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(2 * stride) {
            for i in block..block + stride {
                let (a0, a1) = (amps[i], amps[i + stride]);
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Applies a 4x4 matrix whose most significant index bit is `first`.
    pub fn apply_pair(&mut self, first: usize, second: usize, m: &[[C64; 4]; 4]) {
        let (sa, sb) = (self.stride(first), self.stride(second));
        for i in 0..self.amplitudes.len() {
            if i & sa != 0 || i & sb != 0 {
                continue;
            }
            let idx = [i, i | sb, i | sa, i | sa | sb];
            let v = idx.map(|k| self.amplitudes[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amplitudes[k] =
                    m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }

    pub fn apply_op(&mut self, op: &GateOp) -> Result<()> {
        for &q in &op.qubits() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        match *op {
            GateOp::CX { control, target } => {
                let (sc, st) = (self.stride(control), self.stride(target));
                for i in 0..self.amplitudes.len() {
                    if i & sc != 0 && i & st == 0 {
                        self.amplitudes.swap(i, i | st);
                    }
                }
            }
            GateOp::CZ(a, b) => {
                let (sa, sb) = (self.stride(a), self.stride(b));
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & sa != 0 && i & sb != 0 {
                        *amp = -*amp;
                    }
                }
            }
            _ => {
                let m = op_matrix(op)?;
                let qs = op.qubits();
                if qs.len() == 1 {
                    self.apply_single(qs[0], &to_array2(&m));
                } else {
                    self.apply_pair(qs[0], qs[1], &to_array4(&m));
                }
            }
        }
        Ok(())
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let s = self.stride(qubit);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & s != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `qubit` onto `outcome` and renormalizes. Returns the outcome
    /// probability; the state is left unnormalized when it is zero.
    pub fn collapse(&mut self, qubit: usize, outcome: bool) -> f64 {
        let s = self.stride(qubit);
        let mut p = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & s != 0) != outcome {
                *a = C64::default();
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            let n = p.sqrt();
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        p
    }

    /// Replaces a qubit already collapsed to `|outcome>` by `label`.
    pub fn reprepare(&mut self, qubit: usize, outcome: bool, label: StateLabel) {
        let s = self.stride(qubit);
        let v = state_vector(label);
        for i in 0..self.amplitudes.len() {
            if i & s != 0 {
                continue;
            }
            let base = if outcome {
                self.amplitudes[i | s]
            } else {
                self.amplitudes[i]
            };
            self.amplitudes[i] = base * v[0];
            self.amplitudes[i | s] = base * v[1];
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Pure-state evolution of a measurement-free circuit from `|0...0>`.
pub fn simulate_statevector(circuit: &Circuit) -> Result<StateVector> {
    simulate_statevector_capped(circuit, DEFAULT_QUBIT_CAP)
}

pub fn simulate_statevector_capped(circuit: &Circuit, cap: usize) -> Result<StateVector> {
    if circuit.num_qubits() > cap {
        return Err(Error::QubitCapExceeded {
            num_qubits: circuit.num_qubits(),
            cap,
        });
    }
    if let Some(op) = circuit.ops().iter().find(|o| !o.is_unitary()) {
        return Err(Error::NonUnitaryOp(op.to_string()));
    }
    let mut state = StateVector::zero(circuit.num_qubits());
    for op in circuit.ops() {
        state.apply_op(op)?;
    }
    Ok(state)
}

/// Basis index of a bitstring with qubit 0 leftmost.
pub fn index_of_bits(bits: &str) -> Result<usize> {
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::MalformedBitstring(bits.to_string())),
    })
}

pub fn bits_of_index(index: usize, width: usize) -> String {
    (0..width)
        .map(|k| {
            if index >> (width - 1 - k) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn hadamard_on_one_qubit() {
        let c = Circuit::from_ops(1, 0, vec![GateOp::H(0)]).unwrap();
        let s = simulate_statevector(&c).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn ghz_three() {
        let c = Circuit::from_ops(
            3,
            0,
            vec![
                GateOp::H(0),
                GateOp::CX {
                    control: 0,
                    target: 1,
                },
                GateOp::CX {
                    control: 1,
                    target: 2,
                },
            ],
        )
        .unwrap();
        let s = simulate_statevector(&c).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let c = Circuit::from_ops(3, 0, vec![GateOp::X(0)]).unwrap();
        let s = simulate_statevector(&c).unwrap();
        assert_eq!(s.amplitude(0b100), C64::new(1.0, 0.0));
        assert_eq!(index_of_bits("100").unwrap(), 4);
        assert_eq!(bits_of_index(4, 3), "100");
    }

    #[test]
    fn apply_pair_matches_dedicated_cx() {
        let cx =
            to_array4(&super::super::gates::gate_matrix(super::super::GateKind::CX, None).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let amps: Vec<C64> = (0..8).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let mut a = StateVector::from_amplitudes(amps).unwrap();
        let mut b = a.clone();
        a.apply_pair(2, 0, &cx);
        b.apply_op(&GateOp::CX {
            control: 2,
            target: 0,
        })
        .unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_measurements_and_cap() {
        let mut c = Circuit::new(1, 1);
        c.push(GateOp::MeasureZ { qubit: 0, clbit: 0 }).unwrap();
        assert!(matches!(
            simulate_statevector(&c),
            Err(Error::NonUnitaryOp(_))
        ));
        let big = Circuit::new(5, 0);
        assert!(matches!(
            simulate_statevector_capped(&big, 4),
            Err(Error::QubitCapExceeded { .. })
        ));
    }

    #[test]
    fn norm_drift_over_many_random_gates() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 5;
        let mut s = StateVector::zero(n);
        for _ in 0..10_000 {
            let q = rng.gen_range(0..n);
            let op = match rng.gen_range(0..8) {
                0 => GateOp::H(q),
                1 => GateOp::S(q),
                2 => GateOp::Rx(q, rng.gen_range(-3.0..3.0)),
                3 => GateOp::Ry(q, rng.gen_range(-3.0..3.0)),
                4 => GateOp::Rz(q, rng.gen_range(-3.0..3.0)),
                5 => GateOp::Y(q),
                6 => GateOp::CX {
                    control: q,
                    target: (q + 1) % n,
                },
                _ => GateOp::CZ(q, (q + 2) % n),
            };
            s.apply_op(&op).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

//! Trajectory-sampled two-qubit depolarizing noise.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::counts::sample_with;
use super::ir::{Circuit, GateOp};
use super::midcircuit::analytic_distribution;
use crate::error::{Error, Result};

/// One sampled noisy circuit and the number of Pauli pairs it received.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub circuit: Circuit,
    pub insertions: usize,
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

fn pauli_op(which: usize, q: usize) -> Option<GateOp> {
    match which {
        1 => Some(GateOp::X(q)),
        2 => Some(GateOp::Y(q)),
        3 => Some(GateOp::Z(q)),
        _ => None,
    }
}

/// Draws the per-gate Pauli choices (0 = none, 1..=15 = pair index).
fn draw_pattern(num_gates: usize, p: f64, rng: &mut impl Rng) -> Vec<u8> {
    (0..num_gates)
        .map(|_| {
            if rng.gen::<f64>() < p {
                rng.gen_range(1..16u8)
            } else {
                0
            }
        })
        .collect()
}

fn build_trajectory(circuit: &Circuit, pattern: &[u8]) -> Result<Trajectory> {
    let mut out = Circuit::new(circuit.num_qubits(), circuit.num_clbits());
    let mut k = 0;
    let mut insertions = 0;
    for op in circuit.ops() {
        out.push(*op)?;
        if op.is_two_qubit() {
            let choice = pattern[k] as usize;
            k += 1;
            if choice > 0 {
                insertions += 1;
                let qs = op.qubits();
                for (factor, q) in [(choice / 4, qs[0]), (choice % 4, qs[1])] {
                    if let Some(g) = pauli_op(factor, q) {
                        out.push(g)?;
                    }
                }
            }
        }
    }
    Ok(Trajectory {
        circuit: out,
        insertions,
    })
}

/// After every two-qubit gate, with probability `p` inserts a uniformly random
/// non-identity two-qubit Pauli.
pub fn apply_depolarizing_noise(circuit: &Circuit, p: f64, rng_seed: u64) -> Result<Trajectory> {
    check_p(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pattern = draw_pattern(circuit.two_qubit_gate_count(), p, &mut rng);
    build_trajectory(circuit, &pattern)
}

/// Shot counts under trajectory noise: one noisy circuit per shot.
///
/// Shots that drew the same Pauli pattern share one exact distribution, so
/// the cost scales with the number of distinct trajectories.
pub fn sample_noisy_counts(
    circuit: &Circuit,
    p: f64,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<String, u64>> {
    check_p(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = circuit.two_qubit_gate_count();
    let mut groups: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    for _ in 0..shots {
        *groups.entry(draw_pattern(gates, p, &mut rng)).or_insert(0) += 1;
    }
    let mut counts = BTreeMap::new();
    for (pattern, n) in groups {
        let traj = build_trajectory(circuit, &pattern)?;
        let dist = analytic_distribution(&traj.circuit)?;
        for (k, v) in sample_with(&dist, n, &mut rng)? {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cx() -> Circuit {
        Circuit::from_ops(
            3,
            0,
            vec![
                GateOp::H(0),
                GateOp::CX {
                    control: 0,
                    target: 1,
                },
                GateOp::Ry(2, 0.3),
                GateOp::CZ(1, 2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_noise_leaves_circuit_alone() {
        let c = two_cx();
        let t = apply_depolarizing_noise(&c, 0.0, 1).unwrap();
        assert_eq!(t.circuit, c);
        assert_eq!(t.insertions, 0);
    }

    #[test]
    fn full_noise_inserts_after_every_pair_gate() {
        let c = two_cx();
        for seed in 0..20 {
            let t = apply_depolarizing_noise(&c, 1.0, seed).unwrap();
            assert_eq!(t.insertions, 2);
            assert!(t.circuit.len() > c.len());
        }
    }

    #[test]
    fn insertion_rate_matches_p() {
        let c = two_cx();
        let (trials, p) = (10_000u64, 0.01);
        let total: usize = (0..trials)
            .map(|s| apply_depolarizing_noise(&c, p, s).unwrap().insertions)
            .sum();
        let rate = total as f64 / (trials as f64 * 2.0);
        assert!((rate - p).abs() < 0.003, "rate {rate}");
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(apply_depolarizing_noise(&two_cx(), 1.5, 0).is_err());
        assert!(apply_depolarizing_noise(&two_cx(), -0.1, 0).is_err());
    }

    #[test]
    fn noisy_counts_are_reproducible() {
        let mut c = two_cx();
        c.measure_all(0).unwrap();
        let a = sample_noisy_counts(&c, 0.2, 2000, 5).unwrap();
        assert_eq!(a, sample_noisy_counts(&c, 0.2, 2000, 5).unwrap());
        assert_eq!(a.values().sum::<u64>(), 2000);
    }
}

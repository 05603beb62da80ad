use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuit::{analytic_distribution, simulate_with_midcircuit, GateOp, SimMode, SimOutput};
use crate::cutting::{sparse_cut_select, CutStrategy, DistanceMode};
use crate::encoder::{build_encoder_circuit, data_to_angles};

fn c21() -> Circuit {
    build_encoder_circuit(&data_to_angles(&[0.3, -0.6, 0.9, 0.1], 2, 1).unwrap()).unwrap()
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for _ in 0..depth {
        let q = rng.gen_range(0..n);
        let op = match rng.gen_range(0..6) {
            0 => GateOp::H(q),
            1 => GateOp::Ry(q, rng.gen_range(-3.0..3.0)),
            2 => GateOp::Rz(q, rng.gen_range(-3.0..3.0)),
            3 => GateOp::S(q),
            _ => {
                let mut t = rng.gen_range(0..n);
                while t == q {
                    t = rng.gen_range(0..n);
                }
                if rng.gen_bool(0.8) {
                    GateOp::CX {
                        control: q,
                        target: t,
                    }
                } else {
                    GateOp::CZ(q, t)
                }
            }
        };
        c.push(op).unwrap();
    }
    c.measure_all(0).unwrap();
    c
}

fn assert_exact(circuit: &Circuit, cuts: &[usize], strategy: CutStrategy, tol: f64) {
    let plan = CutPlan::new(circuit, cuts, strategy).unwrap();
    let out = knit(circuit, &plan, &RunOptions::default()).unwrap();
    let truth = analytic_distribution(circuit).unwrap();
    let q = &out.reconstruction.quasi;
    for (k, v) in &q.values {
        assert!(
            (v - truth.get(k).copied().unwrap_or(0.0)).abs() < tol,
            "{k}: {v}"
        );
    }
    for (k, p) in &truth {
        assert!((q.get(k) - p).abs() < tol, "{k}: {p}");
    }
    assert!((q.total() - 1.0).abs() < tol);
}

#[test]
fn parity_contract() {
    assert_eq!(parity("").unwrap(), 1);
    assert_eq!(parity("1").unwrap(), -1);
    assert_eq!(parity("0110").unwrap(), 1);
    assert_eq!(parity("0111").unwrap(), -1);
    assert!(parity("01a").is_err());
}

#[test]
fn clamp_rounds_half_up_and_drops_negatives() {
    let v: BTreeMap<String, f64> = [("00", -0.3), ("01", 2.5), ("10", 1.49), ("11", -7.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let r = clamp_round(&v);
    assert_eq!(r["00"], 0.0);
    assert_eq!(r["01"], 3.0);
    assert_eq!(r["10"], 1.0);
    assert_eq!(r["11"], 0.0);
}

proptest! {
    #[test]
    fn clamp_round_is_idempotent(vals in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
        let m: BTreeMap<String, f64> = vals.iter().enumerate().map(|(i, &v)| (format!("{i:05b}"), v)).collect();
        let once = clamp_round(&m);
        prop_assert_eq!(clamp_round(&once), once);
    }
}

#[test]
fn subexperiment_counts_follow_the_product_rule() {
    let data: Vec<f64> = (0..24).map(|i| (i as f64 / 12.0) - 1.0).collect();
    let c = build_encoder_circuit(&data_to_angles(&data, 3, 3).unwrap()).unwrap();
    let picked = sparse_cut_select(
        &c,
        &[0, 1, 2],
        &[3, 4, 5],
        3,
        DistanceMode::VirtualAbs,
        None,
    )
    .unwrap();
    let zero =
        materialize_subexperiments(&c, &CutPlan::new(&c, &[], CutStrategy::GateCut).unwrap())
            .unwrap();
    assert_eq!(zero.len(), 1);
    assert_eq!(zero[0].joint, c);
    assert_eq!(zero[0].qpd_bit_count, 0);
    for m in 1..=3 {
        let plan = CutPlan::from_candidates(&c, &picked[..m], CutStrategy::GateCut).unwrap();
        let subs = materialize_subexperiments(&c, &plan).unwrap();
        assert_eq!(subs.len(), 6usize.pow(m as u32));
        assert!(subs.iter().all(|s| s.qpd_bit_count <= m));
        assert!(subs.windows(2).all(|w| w[0].job_label < w[1].job_label));
        // Cut gates are gone from every spliced circuit.
        assert!(subs
            .iter()
            .all(|s| s.joint.two_qubit_gate_count() == c.two_qubit_gate_count() - m));
    }
}

#[test]
fn c21_single_cut_is_exact_for_both_strategies() {
    let c = c21();
    let cut = sparse_cut_select(&c, &[0, 1], &[2], 1, DistanceMode::VirtualAbs, None).unwrap()[0]
        .gate_index;
    assert_eq!(cut, 5);
    assert_exact(&c, &[cut], CutStrategy::GateCut, 1e-10);
    assert_exact(&c, &[cut], CutStrategy::PauliTable, 1e-10);
}

#[test]
fn random_circuits_knit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..30 {
        let n = rng.gen_range(2..=7);
        let c = random_circuit(&mut rng, n, 24);
        let pairs: Vec<usize> = c
            .ops()
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_two_qubit())
            .map(|(i, _)| i)
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let k = rng.gen_range(1..=pairs.len().min(2));
        let mut cuts: Vec<usize> = Vec::new();
        while cuts.len() < k {
            let p = pairs[rng.gen_range(0..pairs.len())];
            if !cuts.contains(&p) {
                cuts.push(p);
            }
        }
        let strategy = if trial % 2 == 0 {
            CutStrategy::GateCut
        } else {
            CutStrategy::PauliTable
        };
        assert_exact(&c, &cuts, strategy, 1e-9);
    }
}

#[test]
fn fragment_product_matches_joint_circuit() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    for sub in materialize_subexperiments(&c, &plan).unwrap() {
        let a = subexperiment_distribution(&sub, Backend::StateVector).unwrap();
        let b = analytic_distribution(&sub.joint).unwrap();
        assert_eq!(a.len(), b.len());
        for (k, p) in &a {
            assert!((p - b[k]).abs() < 1e-12);
        }
        let total: f64 = a.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mps_backend_agrees() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    let sv = knit(&c, &plan, &RunOptions::default()).unwrap();
    let opts = RunOptions {
        backend: Backend::Mps {
            chi_max: 64,
            svd_cutoff: 1e-14,
        },
        ..RunOptions::default()
    };
    let mps = knit(&c, &plan, &opts).unwrap();
    for (k, v) in &sv.reconstruction.quasi.values {
        assert!((v - mps.reconstruction.quasi.get(k)).abs() < 1e-10);
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    let subs = materialize_subexperiments(&c, &plan).unwrap();
    for mode in [
        RunMode::Analytic,
        RunMode::Sampled {
            shots: 2000,
            seed: 9,
        },
    ] {
        let run = |p| {
            let opts = RunOptions {
                mode,
                parallelism: p,
                ..RunOptions::default()
            };
            collect_results(run_subexperiments(&subs, &opts).unwrap()).unwrap()
        };
        let serial = run(1);
        assert_eq!(serial, run(6));
        assert_eq!(serial, run(3));
        assert_eq!(serial, run(1));
    }
}

#[test]
fn sampled_runs_reproduce_and_converge() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    let opts = RunOptions {
        mode: RunMode::Sampled {
            shots: 100_000,
            seed: 4,
        },
        ..RunOptions::default()
    };
    let a = knit(&c, &plan, &opts).unwrap();
    let b = knit(&c, &plan, &opts).unwrap();
    assert_eq!(a.results, b.results);
    assert_eq!(a.reconstruction.counts, b.reconstruction.counts);
    let truth = analytic_distribution(&c).unwrap();
    for (k, p) in &truth {
        assert!((a.reconstruction.quasi.get(k) - p).abs() < 0.03);
    }
}

#[test]
fn analytic_jobs_are_normalized() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::PauliTable).unwrap();
    let out = knit(&c, &plan, &RunOptions::default()).unwrap();
    assert_eq!(out.results.len(), 6);
    for r in &out.results {
        let s: f64 = r.counts.values().sum();
        assert!((s / r.shots - 1.0).abs() < 1e-12);
    }
}

#[test]
fn expectation_values() {
    let mut ghz = Circuit::new(2, 0);
    ghz.push(GateOp::H(0)).unwrap();
    ghz.push(GateOp::CX {
        control: 0,
        target: 1,
    })
    .unwrap();
    ghz.measure_all(0).unwrap();
    let plan = CutPlan::new(&ghz, &[], CutStrategy::GateCut).unwrap();
    let out = knit(&ghz, &plan, &RunOptions::default()).unwrap();
    let coeffs = coefficient_map(&out.subexperiments);
    assert!((knit_expectation(&out.results, &coeffs, "II").unwrap() - 1.0).abs() < 1e-12);
    assert!((knit_expectation(&out.results, &coeffs, "ZZ").unwrap() - 1.0).abs() < 1e-12);
    assert!(knit_expectation(&out.results, &coeffs, "ZX").is_err());

    let c = c21();
    let truth = analytic_distribution(&c).unwrap();
    let z_data: f64 = truth
        .iter()
        .map(|(k, p)| if k.as_bytes()[2] == b'1' { -p } else { *p })
        .sum();
    let z_addr: f64 = truth
        .iter()
        .map(|(k, p)| if k.as_bytes()[0] == b'1' { -p } else { *p })
        .sum();
    for strategy in [CutStrategy::GateCut, CutStrategy::PauliTable] {
        let plan = CutPlan::new(&c, &[5], strategy).unwrap();
        let out = knit(&c, &plan, &RunOptions::default()).unwrap();
        let coeffs = coefficient_map(&out.subexperiments);
        assert!((knit_expectation(&out.results, &coeffs, "IIZ").unwrap() - z_data).abs() < 1e-10);
        assert!((knit_expectation(&out.results, &coeffs, "ZII").unwrap() - z_addr).abs() < 1e-10);
    }
}

#[test]
fn zero_cuts_pass_through_with_key_reversal() {
    let c = c21();
    let plan = CutPlan::new(&c, &[], CutStrategy::GateCut).unwrap();
    let (shots, seed) = (5000, 21);
    let opts = RunOptions {
        mode: RunMode::Sampled { shots, seed },
        ..RunOptions::default()
    };
    let out = knit(&c, &plan, &opts).unwrap();
    let direct = match simulate_with_midcircuit(
        &c,
        SimMode::Sampled {
            shots,
            seed: job_seed(seed, 0),
        },
    )
    .unwrap()
    {
        SimOutput::Counts(t) => t,
        SimOutput::Probabilities(_) => unreachable!(),
    };
    // The job itself reports platform order.
    let job: BTreeMap<String, u64> = out.results[0]
        .counts
        .iter()
        .map(|(k, &v)| (k.clone(), v as u64))
        .collect();
    assert_eq!(job, direct.reversed().counts);
    assert_eq!(out.reconstruction.counts, direct);
}

#[test]
fn reconstruction_errors() {
    let job = JobResult {
        job_label: "s00".into(),
        shots: 10.0,
        n_obs: 2,
        counts: [("01".to_string(), 5.0), ("110".to_string(), 5.0)]
            .into_iter()
            .collect(),
    };
    let coeffs: BTreeMap<String, f64> = [("s00".to_string(), 1.0)].into_iter().collect();
    assert!(reconstruct_global_counts(std::slice::from_ref(&job), &coeffs, 2).is_err());
    assert!(reconstruct_global_counts(&[job], &BTreeMap::new(), 2).is_err());
}

#[test]
fn importance_allocation_keeps_the_total() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    let opts = RunOptions {
        mode: RunMode::Sampled {
            shots: 50_000,
            seed: 2,
        },
        allocation: ShotAllocation::Importance,
        ..RunOptions::default()
    };
    let out = knit(&c, &plan, &opts).unwrap();
    let total: f64 = out.results.iter().map(|r| r.shots).sum();
    assert_eq!(total, 300_000.0);
    let truth = analytic_distribution(&c).unwrap();
    for (k, p) in &truth {
        assert!((out.reconstruction.quasi.get(k) - p).abs() < 0.03);
    }
}

#[test]
fn noisy_runs_need_sampled_mode() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    let bad = RunOptions {
        noise_p: 0.02,
        ..RunOptions::default()
    };
    let batch = run_subexperiments(&materialize_subexperiments(&c, &plan).unwrap(), &bad).unwrap();
    assert!(batch.iter().all(Result::is_err));
    let ok = RunOptions {
        mode: RunMode::Sampled {
            shots: 2000,
            seed: 1,
        },
        noise_p: 0.02,
        ..RunOptions::default()
    };
    let a = knit(&c, &plan, &ok).unwrap();
    assert_eq!(a.results, knit(&c, &plan, &ok).unwrap().results);
}

#[test]
fn batch_json_round_trip() {
    let c = c21();
    let plan = CutPlan::new(&c, &[5], CutStrategy::GateCut).unwrap();
    let out = knit(&c, &plan, &RunOptions::default()).unwrap();
    let text = batch_to_json(&out.results).unwrap();
    assert_eq!(batch_from_json(&text).unwrap(), out.results);
    assert!(out
        .reconstruction
        .quasi
        .to_csv()
        .starts_with("bitstring,value\n"));
}

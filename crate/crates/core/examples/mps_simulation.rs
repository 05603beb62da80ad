//! Matrix product state simulation of a GHZ chain against the dense simulator.
//!
//! `cargo run --release --example mps_simulation -- [qubits]`

use cutknit::circuit::{simulate_statevector, Circuit, GateOp};
use cutknit::mps::{mps_statevector_fidelity, simulate_mps};

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .map_or(12, |s| s.parse().expect("qubit count"));
    let mut c = Circuit::new(n, 0);
    c.push(GateOp::H(0)).unwrap();
    for q in 0..n - 1 {
        c.push(GateOp::CX {
            control: q,
            target: q + 1,
        })
        .unwrap();
    }
    let mps = simulate_mps(&c, 64, 1e-12).expect("mps");
    println!("max bond dimension {}", mps.max_bond_dim());
    println!("discarded weight {:.2e}", mps.discarded_weight());
    if n <= 20 {
        let sv = simulate_statevector(&c).expect("statevector");
        println!(
            "fidelity vs statevector {:.15}",
            mps_statevector_fidelity(&mps, &sv).unwrap()
        );
    }
    print!("{}", mps.bond_profile_csv());
}

//! Pick cut gates on an encoder circuit by virtual and by physical distance.
//!
//! `cargo run --release --example cut_selection -- [n_addr] [n_data] [max_cuts]`

use cutknit::cutting::{sparse_cut_select, CouplingMap, CutPlan, CutStrategy, DistanceMode};
use cutknit::encoder::{build_encoder_circuit, data_to_angles};
use cutknit::pipeline::random_data;

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("integer"))
        .collect();
    let (na, nd, m) = (
        args.first().copied().unwrap_or(3),
        args.get(1).copied().unwrap_or(3),
        args.get(2).copied().unwrap_or(2),
    );
    let payload = data_to_angles(&random_data(na, nd, 0), na, nd).unwrap();
    let circuit = build_encoder_circuit(&payload).unwrap();
    let addr: Vec<usize> = (0..na).collect();
    let data: Vec<usize> = (na..na + nd).collect();
    let map = CouplingMap::heavy_hex_sample();
    for mode in [DistanceMode::VirtualAbs, DistanceMode::PhysicalShortestPath] {
        let picked = sparse_cut_select(&circuit, &addr, &data, m, mode, Some(&map)).unwrap();
        println!("{}:", mode.name());
        for c in &picked {
            println!(
                "  op {} cx({} -> {}) distance {}",
                c.gate_index, c.control, c.target, c.distance
            );
        }
        let plan = CutPlan::from_candidates(&circuit, &picked, CutStrategy::GateCut).unwrap();
        println!(
            "  fragments {} subexperiments {} gamma {}",
            plan.fragments.len(),
            plan.subexperiment_count(),
            plan.gamma_total
        );
    }
}

//! Subexperiment counts and cut-pipeline wall time against the number of cuts.
//!
//! `cargo run --release --example overhead_scaling -- [n_addr] [n_data] [analytic|sampled]`

use cutknit::cutting::{post_processing_terms, qpd_overhead, CutStrategy};
use cutknit::pipeline::{plan_for, random_data, time_cut_pipeline, ModeKind, PipelineConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let mode = if arg(2, "analytic") == "sampled" {
        ModeKind::Sampled
    } else {
        ModeKind::Analytic
    };
    let cfg = PipelineConfig {
        n_addr: arg(0, "3").parse().unwrap(),
        n_data: arg(1, "3").parse().unwrap(),
        mode,
        shots: 1000,
        ..PipelineConfig::default()
    };
    let data = random_data(cfg.n_addr, cfg.n_data, 3);
    println!(
        "cuts,subexperiments,pauli_table_terms,variance_bound,median_wall_s,log_ratio_over_log6"
    );
    let mut prev: Option<f64> = None;
    for m in 0..=3usize {
        let c = PipelineConfig {
            max_cuts: m,
            ..cfg.clone()
        };
        let (_, plan) = plan_for(&c, &data).expect("plan");
        let t = time_cut_pipeline(&cfg, &data, m, 3).expect("timing");
        let slope = prev.map_or(String::new(), |p| {
            format!("{:.3}", (t / p).ln() / 6f64.ln())
        });
        println!(
            "{m},{},{},{},{t:.6},{slope}",
            plan.subexperiment_count(),
            post_processing_terms(CutStrategy::PauliTable, m as u32),
            qpd_overhead(m as u32)
        );
        prev = Some(t);
    }
}

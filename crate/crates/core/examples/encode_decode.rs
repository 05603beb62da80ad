//! Encode random data, cut and knit it, decode, and report the error.
//!
//! `cargo run --release --example encode_decode -- [n_addr] [n_data] [shots|analytic] [cuts]`

use cutknit::pipeline::{random_data, run_pipeline, ModeKind, PipelineConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let shots = arg(2, "analytic");
    let mut cfg = PipelineConfig {
        n_addr: arg(0, "3").parse().unwrap(),
        n_data: arg(1, "2").parse().unwrap(),
        max_cuts: arg(3, "1").parse().unwrap(),
        parallelism: 4,
        ..PipelineConfig::default()
    };
    if shots != "analytic" {
        cfg.mode = ModeKind::Sampled;
        cfg.shots = shots.parse().unwrap();
    }
    let data = random_data(cfg.n_addr, cfg.n_data, 9);
    for seed in 0..4 {
        let run = run_pipeline(
            &PipelineConfig {
                seed,
                ..cfg.clone()
            },
            &data,
        )
        .expect("pipeline");
        let max = data
            .iter()
            .zip(&run.decoded)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "seed {seed}: rmse {:.3e} max_abs {max:.3e} rvf {:.6} subexperiments {}",
            run.record.rmse, run.record.rvf, run.record.subexperiment_count
        );
    }
}

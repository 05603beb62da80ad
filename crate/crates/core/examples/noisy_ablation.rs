//! Noisy uncut baseline against the cut pipeline.
//!
//! `cargo run --release --example noisy_ablation -- [n_addr] [n_data] [shots] [p]`

use cutknit::pipeline::{ablation_csv, random_data, run_ablation, ModeKind, PipelineConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let cfg = PipelineConfig {
        n_addr: arg(0, "2").parse().unwrap(),
        n_data: arg(1, "1").parse().unwrap(),
        shots: arg(2, "20000").parse().unwrap(),
        noise_p: arg(3, "0.02").parse().unwrap(),
        mode: ModeKind::Sampled,
        parallelism: 4,
        ..PipelineConfig::default()
    };
    let data = random_data(cfg.n_addr, cfg.n_data, 1);
    let rows = run_ablation(&cfg, &data, &[0, 1, 2], 10).expect("ablation");
    print!("{}", ablation_csv(&rows));
}

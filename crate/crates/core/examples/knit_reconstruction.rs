//! Cut the two-address one-data encoder once and knit the fragments back.

use cutknit::circuit::analytic_distribution;
use cutknit::cutting::CutStrategy;
use cutknit::knitting::{knit, RunMode, RunOptions};
use cutknit::pipeline::{plan_for, random_data, PipelineConfig};

fn main() {
    let data = random_data(2, 1, 5);
    for strategy in [CutStrategy::GateCut, CutStrategy::PauliTable] {
        let cfg = PipelineConfig {
            strategy,
            ..PipelineConfig::default()
        };
        let (circuit, plan) = plan_for(&cfg, &data).unwrap();
        let exact = analytic_distribution(&circuit).unwrap();
        for mode in [
            RunMode::Analytic,
            RunMode::Sampled {
                shots: 20_000,
                seed: 1,
            },
        ] {
            let out = knit(
                &circuit,
                &plan,
                &RunOptions {
                    mode,
                    ..RunOptions::default()
                },
            )
            .unwrap();
            let worst = exact
                .iter()
                .map(|(k, v)| (out.reconstruction.quasi.get(k) - v).abs())
                .fold(0.0, f64::max);
            println!(
                "{} {:?}: {} jobs, cut at op {:?}, max |quasi - exact| {worst:.2e}",
                strategy.name(),
                mode,
                out.results.len(),
                plan.cut_indices
            );
        }
    }
}

//! Push a 32x32 grayscale image through the cut pipeline and back.
//!
//! `cargo run --release --example image_roundtrip -- [in.pgm] [out.pgm]`
//! Without arguments a seeded random image is used and nothing is written.

use cutknit::pipeline::{parse_pgm, run_image, write_pgm, PgmFormat, PgmImage, PipelineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let img = match args.first() {
        Some(p) => parse_pgm(&std::fs::read(p).expect("read image")).expect("parse image"),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(32);
            PgmImage {
                width: 32,
                height: 32,
                maxval: 255,
                pixels: (0..1024).map(|_| rng.gen_range(0..=255)).collect(),
                format: PgmFormat::Raw,
                comments: vec![],
            }
        }
    };
    let cfg = PipelineConfig {
        n_addr: 9,
        n_data: 2,
        max_cuts: 2,
        parallelism: 4,
        ..PipelineConfig::default()
    };
    let r = run_image(&cfg, &img).expect("image pipeline");
    let changed = r
        .image
        .pixels
        .iter()
        .zip(&img.pixels)
        .filter(|(a, b)| a != b)
        .count();
    println!(
        "cuts {} subexperiments {} rmse {:.3e} ({:.4}% of range) rvf {:.6} pixels changed {changed} time {:.2}s",
        r.run.plan.num_cuts(),
        r.run.record.subexperiment_count,
        r.rmse,
        100.0 * r.relative_error,
        r.rvf,
        r.run.record.wall_time_s
    );
    if let Some(out) = args.get(1) {
        std::fs::write(out, write_pgm(&r.image, false)).expect("write image");
    }
}

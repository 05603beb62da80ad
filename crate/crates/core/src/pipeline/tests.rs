use super::*;
use crate::circuit::analytic_distribution;

fn cfg(n_addr: usize, n_data: usize, max_cuts: usize) -> PipelineConfig {
    PipelineConfig {
        n_addr,
        n_data,
        max_cuts,
        ..PipelineConfig::default()
    }
}

#[test]
fn one_cut_analytic_roundtrip() {
    let data = random_data(2, 1, 11);
    let run = run_pipeline(&cfg(2, 1, 1), &data).unwrap();
    assert_eq!(run.plan.num_cuts(), 1);
    assert_eq!(run.record.subexperiment_count, 6);
    for (a, b) in data.iter().zip(&run.decoded) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert!(run.record.rvf > 0.999999);
}

#[test]
fn zero_cuts_match_direct_simulation() {
    let data = random_data(3, 2, 4);
    let run = run_pipeline(&cfg(3, 2, 0), &data).unwrap();
    let payload = data_to_angles(&data, 3, 2).unwrap();
    let direct = analytic_distribution(&build_encoder_circuit(&payload).unwrap()).unwrap();
    let d = decode_distribution(&direct, 3, 2).unwrap();
    for (a, b) in d.data.iter().zip(&run.decoded) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(run.record.subexperiment_count, 1);
}

#[test]
fn aqc_stage_preserves_the_decoded_values() {
    let data = random_data(2, 1, 12);
    let c = PipelineConfig {
        aqc_enabled: true,
        ..cfg(2, 1, 1)
    };
    let run = run_pipeline(&c, &data).unwrap();
    let a = run.aqc.as_ref().unwrap();
    assert!(a.converged);
    assert_eq!(run.plan.cut_indices, a.cut_indices);
    for (x, y) in data.iter().zip(&run.decoded) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn sampled_runs_are_byte_identical() {
    let data = random_data(2, 2, 3);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, crate::encoder::data_to_csv(&data)).unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let c = PipelineConfig {
            mode: ModeKind::Sampled,
            shots: 2000,
            seed: 42,
            parallelism: 1 + run,
            input: Some(input.clone()),
            output_dir: dir.path().join(format!("run{run}")),
            ..cfg(2, 2, 1)
        };
        cmd_pipeline(&c).unwrap();
        let files: Vec<Vec<u8>> = ["decoded.csv", "counts.csv", "quasi.csv"]
            .iter()
            .map(|f| fs::read(c.output_dir.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_echo_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, crate::encoder::data_to_csv(&random_data(2, 1, 1))).unwrap();
    let first = PipelineConfig {
        mode: ModeKind::Sampled,
        shots: 500,
        seed: 5,
        input: Some(input),
        output_dir: dir.path().join("a"),
        ..cfg(2, 1, 1)
    };
    cmd_pipeline(&first).unwrap();
    let echo = fs::read_to_string(first.output_dir.join("config.echo")).unwrap();
    let mut second = PipelineConfig::parse(&echo).unwrap();
    assert_eq!(second, first);
    second.output_dir = dir.path().join("b");
    cmd_pipeline(&second).unwrap();
    for f in ["decoded.csv", "counts.csv", "quasi.csv"] {
        assert_eq!(
            fs::read(first.output_dir.join(f)).unwrap(),
            fs::read(second.output_dir.join(f)).unwrap()
        );
    }
}

#[test]
fn stage_errors_carry_distinct_exit_codes() {
    let err = cmd_pipeline(&PipelineConfig::default()).unwrap_err();
    assert_eq!(err.stage, Stage::Input);
    let bad = PipelineConfig {
        shots: 0,
        mode: ModeKind::Sampled,
        ..PipelineConfig::default()
    };
    assert_eq!(
        run_pipeline(&bad, &[0.0; 4]).unwrap_err().stage,
        Stage::Config
    );
    assert_eq!(
        run_pipeline(&cfg(2, 1, 1), &[0.0; 3]).unwrap_err().stage,
        Stage::Encode
    );
    assert_eq!(
        run_pipeline(&cfg(2, 1, 50), &[0.0; 4]).unwrap_err().stage,
        Stage::Cut
    );
    let all = [
        Stage::Config,
        Stage::Input,
        Stage::Encode,
        Stage::Cut,
        Stage::Aqc,
        Stage::Knit,
        Stage::Decode,
        Stage::Output,
        Stage::Verify,
    ];
    let mut codes: Vec<i32> = all.iter().map(|s| s.exit_code()).collect();
    codes.sort_unstable();
    codes.dedup();
    assert_eq!(codes.len(), all.len());
    assert!(codes.iter().all(|&c| c > 1));
    assert!(err.to_string().starts_with("[input]"));
}

#[test]
fn constant_image_survives_quantization() {
    let img = PgmImage {
        width: 4,
        height: 2,
        maxval: 255,
        pixels: vec![77; 8],
        format: PgmFormat::Raw,
        comments: vec![],
    };
    let r = run_image(&cfg(2, 2, 1), &img).unwrap();
    assert_eq!(r.image.pixels, img.pixels);
    assert_eq!(r.padded, 0);
}

#[test]
fn image_capacity_and_padding() {
    let img = PgmImage {
        width: 40,
        height: 25,
        maxval: 255,
        pixels: (0..1000).map(|i| (i * 7 % 256) as u16).collect(),
        format: PgmFormat::Plain,
        comments: vec![],
    };
    // Nine address and two data qubits hold 1024 values.
    let c = cfg(9, 2, 0);
    let capacity = (1usize << c.n_addr) * c.n_data;
    assert_eq!(capacity - img.pixels.len(), 24);
    let small = cfg(4, 2, 0);
    assert_eq!(run_image(&small, &img).unwrap_err().stage, Stage::Input);
}

#[test]
fn image_command_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let pin = dir.path().join("in.pgm");
    let pout = dir.path().join("out.pgm");
    let img = PgmImage {
        width: 3,
        height: 2,
        maxval: 15,
        pixels: vec![0, 3, 6, 9, 12, 15],
        format: PgmFormat::Plain,
        comments: vec!["tiny".into()],
    };
    fs::write(&pin, write_pgm(&img, true)).unwrap();
    let c = PipelineConfig {
        output_dir: dir.path().join("o"),
        ..cfg(2, 2, 1)
    };
    let r = cmd_image(&c, &pin, &pout).unwrap();
    assert_eq!(r.padded, 2);
    let back = parse_pgm(&fs::read(&pout).unwrap()).unwrap();
    assert_eq!(back.pixels, img.pixels);
    assert!(fs::read_to_string(c.output_dir.join("image_metrics.csv"))
        .unwrap()
        .starts_with("pixels,padded,rmse,relative_error,rvf\n"));
}

#[test]
fn ablation_rows_follow_the_product_rule() {
    let c = PipelineConfig {
        mode: ModeKind::Sampled,
        shots: 300,
        noise_p: 0.02,
        ..cfg(2, 1, 0)
    };
    let data = random_data(2, 1, 2);
    let rows = run_ablation(&c, &data, &[0, 1, 2], 2).unwrap();
    let subs: Vec<usize> = rows.iter().map(|r| r.subexperiment_count).collect();
    assert_eq!(subs, vec![1, 6, 36]);
    assert_eq!(rows[0].relative_improvement, 0.0);
    assert!(rows.iter().all(|r| r.uncut_rmse.len() == 2));
    assert_eq!(
        run_ablation(&c, &data, &[9], 1).unwrap_err().stage,
        Stage::Cut
    );
}

#[test]
fn verify_passes() {
    let r = cmd_verify().unwrap();
    assert!(r.passed(), "{}", r.to_text());
    assert!(r
        .to_text()
        .contains("INFO channel wire/printed_vs_identity"));
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cutknit::pipeline::{
    cmd_ablation, cmd_image, cmd_pipeline, cmd_verify, PipelineConfig, Stage, StageError,
    BENCH_HEADER,
};

#[derive(Parser)]
#[command(
    name = "cutknit",
    version,
    about = "Cut-and-knit simulation of data-encoder circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a data file, cut, knit and decode it.
    Pipeline(ConfigArgs),
    /// Run a PGM image through the pipeline.
    Image {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "in")]
        pgm_in: PathBuf,
        #[arg(long = "out")]
        pgm_out: PathBuf,
    },
    /// Noisy uncut baseline against the cut pipeline over several cut counts.
    Ablation {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated cut counts.
        #[arg(long, default_value = "0,1,2", value_delimiter = ',')]
        cuts: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
    },
    /// Clifford table, channel conformance and knit exactness checks.
    Verify,
}

/// Flags override values from `--config`; every flag mirrors a config key.
#[derive(Args)]
struct ConfigArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    n_addr: Option<String>,
    #[arg(long)]
    n_data: Option<String>,
    #[arg(long)]
    max_cuts: Option<String>,
    /// analytic | sampled
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    noise_p: Option<String>,
    /// statevector | mps
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    chi_max: Option<String>,
    /// gate_cut | pauli_table
    #[arg(long)]
    strategy: Option<String>,
    /// uniform | importance
    #[arg(long)]
    allocation: Option<String>,
    #[arg(long)]
    parallelism: Option<String>,
    #[arg(long)]
    aqc_enabled: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// virtual_abs | physical_shortest_path
    #[arg(long)]
    distance_mode: Option<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    coupling_map: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig, StageError> {
        let tag = |source| StageError {
            stage: Stage::Config,
            source,
        };
        let mut cfg = match &self.config {
            Some(p) => {
                PipelineConfig::parse(&std::fs::read_to_string(p).map_err(|e| tag(e.into()))?)
                    .map_err(tag)?
            }
            None => PipelineConfig::default(),
        };
        let flags = [
            ("n_addr", &self.n_addr),
            ("n_data", &self.n_data),
            ("max_cuts", &self.max_cuts),
            ("mode", &self.mode),
            ("shots", &self.shots),
            ("seed", &self.seed),
            ("noise_p", &self.noise_p),
            ("backend", &self.backend),
            ("chi_max", &self.chi_max),
            ("strategy", &self.strategy),
            ("allocation", &self.allocation),
            ("parallelism", &self.parallelism),
            ("aqc_enabled", &self.aqc_enabled),
            ("epsilon", &self.epsilon),
            ("distance_mode", &self.distance_mode),
            ("input", &self.input),
            ("output_dir", &self.output_dir),
            ("coupling_map", &self.coupling_map),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v).map_err(tag)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                tag(cutknit::Error::Config(format!(
                    "expected KEY=VALUE, got `{kv}`"
                )))
            })?;
            cfg.set(k.trim(), v.trim()).map_err(tag)?;
        }
        cfg.validate().map_err(tag)?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Pipeline(args) => {
            let cfg = args.resolve()?;
            let r = cmd_pipeline(&cfg)?;
            println!("{BENCH_HEADER}\n{}", r.record.csv_row());
        }
        Command::Image {
            cfg,
            pgm_in,
            pgm_out,
        } => {
            let cfg = cfg.resolve()?;
            let r = cmd_image(&cfg, &pgm_in, &pgm_out)?;
            println!(
                "pixels {} padded {} rmse {:.6e} relative_error {:.4}% rvf {:.6}",
                r.image.pixels.len(),
                r.padded,
                r.rmse,
                100.0 * r.relative_error,
                r.rvf
            );
        }
        Command::Ablation { cfg, cuts, seeds } => {
            let cfg = cfg.resolve()?;
            let rows = cmd_ablation(&cfg, &cuts, seeds)?;
            print!("{}", cutknit::pipeline::ablation_csv(&rows));
        }
        Command::Verify => {
            let report = cmd_verify().map_err(|source| StageError {
                stage: Stage::Verify,
                source,
            })?;
            print!("{}", report.to_text());
            if !report.passed() {
                return Err(StageError {
                    stage: Stage::Verify,
                    source: cutknit::Error::Config("conformance checks failed".into()),
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage.exit_code() as u8)
        }
    }
}

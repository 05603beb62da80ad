//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::aqc::AqcTarget;
use crate::cutting::{CutStrategy, DistanceMode};
use crate::error::{Error, Result};
use crate::knitting::{Backend, RunMode, RunOptions, ShotAllocation};
use crate::mps::{DEFAULT_CHI_MAX, DEFAULT_SVD_CUTOFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ModeKind {
    #[default]
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BackendKind {
    #[default]
    Statevector,
    Mps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub n_addr: usize,
    pub n_data: usize,
    pub max_cuts: usize,
    pub mode: ModeKind,
    pub shots: u64,
    pub seed: u64,
    pub noise_p: f64,
    pub backend: BackendKind,
    pub chi_max: usize,
    pub strategy: CutStrategy,
    pub allocation: ShotAllocation,
    pub parallelism: usize,
    pub aqc_enabled: bool,
    pub epsilon: f64,
    pub aqc_max_iters: usize,
    pub aqc_extra_layers: usize,
    pub aqc_target: AqcTarget,
    pub distance_mode: DistanceMode,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub coupling_map: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_addr: 2,
            n_data: 1,
            max_cuts: 1,
            mode: ModeKind::Analytic,
            shots: 10_000,
            seed: 0,
            noise_p: 0.0,
            backend: BackendKind::Statevector,
            chi_max: DEFAULT_CHI_MAX,
            strategy: CutStrategy::GateCut,
            allocation: ShotAllocation::Uniform,
            parallelism: 1,
            aqc_enabled: false,
            epsilon: 1e-3,
            aqc_max_iters: 500,
            aqc_extra_layers: 1,
            aqc_target: AqcTarget::Compensated,
            distance_mode: DistanceMode::VirtualAbs,
            input: None,
            output_dir: PathBuf::from("out"),
            coupling_map: None,
        }
    }
}

/// Every key accepted by [`PipelineConfig::set`], in echo order.
pub const CONFIG_KEYS: &[&str] = &[
    "n_addr",
    "n_data",
    "max_cuts",
    "mode",
    "shots",
    "seed",
    "noise_p",
    "backend",
    "chi_max",
    "strategy",
    "allocation",
    "parallelism",
    "aqc_enabled",
    "epsilon",
    "aqc_max_iters",
    "aqc_extra_layers",
    "aqc_target",
    "distance_mode",
    "input",
    "output_dir",
    "coupling_map",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn path(value: &str) -> Option<PathBuf> {
    if value.is_empty() || value == "none" {
        None
    } else {
        Some(PathBuf::from(value))
    }
}

impl PipelineConfig {
    /// Parses a config document; later lines win, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_addr" => self.n_addr = num(key, value)?,
            "n_data" => self.n_data = num(key, value)?,
            "max_cuts" => self.max_cuts = num(key, value)?,
            "mode" => {
                self.mode = match value {
                    "analytic" => ModeKind::Analytic,
                    "sampled" => ModeKind::Sampled,
                    _ => return Err(Error::UnknownOption(value.into())),
                }
            }
            "shots" => self.shots = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "noise_p" => self.noise_p = num(key, value)?,
            "backend" => {
                self.backend = match value {
                    "statevector" => BackendKind::Statevector,
                    "mps" => BackendKind::Mps,
                    _ => return Err(Error::UnknownOption(value.into())),
                }
            }
            "chi_max" => self.chi_max = num(key, value)?,
            "strategy" => self.strategy = value.parse()?,
            "allocation" => self.allocation = value.parse()?,
            "parallelism" => self.parallelism = num(key, value)?,
            "aqc_enabled" => self.aqc_enabled = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "aqc_max_iters" => self.aqc_max_iters = num(key, value)?,
            "aqc_extra_layers" => self.aqc_extra_layers = num(key, value)?,
            "aqc_target" => self.aqc_target = value.parse()?,
            "distance_mode" => self.distance_mode = value.parse()?,
            "input" => self.input = path(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "coupling_map" => self.coupling_map = path(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let p = |o: &Option<PathBuf>| {
            o.as_ref()
                .map_or("none".to_string(), |p| p.display().to_string())
        };
        Some(match key {
            "n_addr" => self.n_addr.to_string(),
            "n_data" => self.n_data.to_string(),
            "max_cuts" => self.max_cuts.to_string(),
            "mode" => match self.mode {
                ModeKind::Analytic => "analytic".into(),
                ModeKind::Sampled => "sampled".into(),
            },
            "shots" => self.shots.to_string(),
            "seed" => self.seed.to_string(),
            // `{:?}` prints the shortest string that parses back exactly.
            "noise_p" => format!("{:?}", self.noise_p),
            "backend" => match self.backend {
                BackendKind::Statevector => "statevector".into(),
                BackendKind::Mps => "mps".into(),
            },
            "chi_max" => self.chi_max.to_string(),
            "strategy" => self.strategy.name().into(),
            "allocation" => match self.allocation {
                ShotAllocation::Uniform => "uniform".into(),
                ShotAllocation::Importance => "importance".into(),
            },
            "parallelism" => self.parallelism.to_string(),
            "aqc_enabled" => self.aqc_enabled.to_string(),
            "epsilon" => format!("{:?}", self.epsilon),
            "aqc_max_iters" => self.aqc_max_iters.to_string(),
            "aqc_extra_layers" => self.aqc_extra_layers.to_string(),
            "aqc_target" => self.aqc_target.name().into(),
            "distance_mode" => self.distance_mode.name().into(),
            "input" => p(&self.input),
            "output_dir" => self.output_dir.display().to_string(),
            "coupling_map" => p(&self.coupling_map),
            _ => return None,
        })
    }

    /// The fully resolved config; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in CONFIG_KEYS {
            let _ = writeln!(out, "{k} = {}", self.get(k).expect("listed key"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_addr == 0 || self.n_data == 0 {
            return bad("n_addr and n_data must be at least 1".into());
        }
        if self.n_addr + self.n_data > 24 {
            return bad(format!(
                "{} qubits exceed the 24-qubit limit",
                self.n_addr + self.n_data
            ));
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return bad(format!("noise_p {} outside [0, 1]", self.noise_p));
        }
        if self.mode == ModeKind::Sampled && self.shots == 0 {
            return bad("sampled mode needs shots >= 1".into());
        }
        if self.mode == ModeKind::Analytic && self.noise_p > 0.0 {
            return bad("noise_p > 0 needs mode = sampled".into());
        }
        if self.chi_max == 0 {
            return bad("chi_max must be at least 1".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon {} outside (0, 1)", self.epsilon));
        }
        if self.aqc_max_iters == 0 {
            return bad("aqc_max_iters must be at least 1".into());
        }
        if self.distance_mode == DistanceMode::PhysicalShortestPath && self.coupling_map.is_none() {
            log::info!("no coupling_map given; using the built-in heavy-hex sample");
        }
        Ok(())
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            mode: match self.mode {
                ModeKind::Analytic => RunMode::Analytic,
                ModeKind::Sampled => RunMode::Sampled {
                    shots: self.shots,
                    seed: self.seed,
                },
            },
            parallelism: self.parallelism,
            noise_p: self.noise_p,
            backend: match self.backend {
                BackendKind::Statevector => Backend::StateVector,
                BackendKind::Mps => Backend::Mps {
                    chi_max: self.chi_max,
                    svd_cutoff: DEFAULT_SVD_CUTOFF,
                },
            },
            allocation: self.allocation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_roundtrips() {
        let mut cfg = PipelineConfig::default();
        for (k, v) in [
            ("mode", "sampled"),
            ("noise_p", "0.02"),
            ("epsilon", "0.000123"),
            ("strategy", "pauli_table"),
            ("backend", "mps"),
            ("input", "data/x.csv"),
            ("aqc_target", "full_prefix"),
            ("distance_mode", "physical_shortest_path"),
        ] {
            cfg.set(k, v).unwrap();
        }
        assert_eq!(PipelineConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.to_text().lines().count(), CONFIG_KEYS.len());
    }

    #[test]
    fn comments_overrides_and_errors() {
        let cfg =
            PipelineConfig::parse("# run\nn_addr = 3 # three\n\nn_addr=4\nseed = 9\n").unwrap();
        assert_eq!((cfg.n_addr, cfg.seed), (4, 9));
        assert!(matches!(
            PipelineConfig::parse("bogus = 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            PipelineConfig::parse("\nshots"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(PipelineConfig::parse("mode = fast").is_err());
    }

    #[test]
    fn validation() {
        assert!(PipelineConfig::default().validate().is_ok());
        let mut c = PipelineConfig {
            noise_p: 0.1,
            ..PipelineConfig::default()
        };
        assert!(c.validate().is_err());
        c.mode = ModeKind::Sampled;
        assert!(c.validate().is_ok());
        c.shots = 0;
        assert!(c.validate().is_err());
        let c = PipelineConfig {
            n_data: 0,
            ..PipelineConfig::default()
        };
        assert!(c.validate().is_err());
        let c = PipelineConfig {
            epsilon: 1.5,
            ..PipelineConfig::default()
        };
        assert!(c.validate().is_err());
    }
}

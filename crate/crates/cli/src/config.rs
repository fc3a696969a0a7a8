//! Optional TOML config. Keys mirror the long flag names with underscores;
//! any key may be given and explicit flags always win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::args::{CommonArgs, Format, MetricArg, Program, UnitArg};
use crate::verify::Suite;

pub const WORKERS_ENV: &str = "RDPC_WORKERS";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub units: Option<UnitArg>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub emit_plot_script: Option<bool>,

    pub a: Option<f64>,
    pub p1: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_s: Option<f64>,
    pub theta1: Option<f64>,
    pub mu_x: Option<f64>,
    pub mu_s: Option<f64>,

    pub d: Option<OneOrMany>,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub rate: Option<f64>,

    pub program: Option<Program>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_steps: Option<usize>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub c_steps: Option<usize>,

    pub resolution: Option<f64>,
    pub sigma_steps: Option<usize>,
    pub theta_steps: Option<usize>,
    pub no_refine: Option<bool>,

    pub sigma_n: Option<f64>,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub a_steps: Option<usize>,
    pub minimize: Option<MetricArg>,
    pub subject_to: Option<MetricArg>,
    pub bound_min: Option<f64>,
    pub bound_max: Option<f64>,
    pub bound_steps: Option<usize>,

    pub suite: Option<Vec<Suite>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    pub fn single(&self) -> Result<f64> {
        match self {
            OneOrMany::One(v) => Ok(*v),
            OneOrMany::Many(v) if v.len() == 1 => Ok(v[0]),
            OneOrMany::Many(_) => bail!("config key `d` must be a single number for this command"),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Common settings after merging flags, config and environment.
#[derive(Debug, Clone)]
pub struct Settings {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub units: Option<UnitArg>,
    pub seed: u64,
    pub workers: usize,
    pub emit_plot_script: bool,
}

impl Settings {
    pub fn resolve(flags: &CommonArgs, cfg: &FileConfig) -> Result<Self> {
        let workers = match flags.workers.or(cfg.workers) {
            Some(n) => n,
            None => match std::env::var(WORKERS_ENV) {
                Ok(v) => v.trim().parse().with_context(|| format!("{WORKERS_ENV}={v:?} is not a count"))?,
                Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
            },
        };
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        let settings = Self {
            out: flags.out.clone().or_else(|| cfg.out.clone()),
            format: flags.format.or(cfg.format),
            units: flags.units.or(cfg.units),
            seed: flags.seed.or(cfg.seed).unwrap_or(0),
            workers,
            emit_plot_script: flags.emit_plot_script || cfg.emit_plot_script.unwrap_or(false),
        };
        if settings.emit_plot_script && settings.out.is_none() {
            bail!("--emit-plot-script requires --out");
        }
        Ok(settings)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

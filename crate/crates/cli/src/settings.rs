//! Command-line flags merged over the config file.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;
use serde::Serialize;
use weyl_core::config::{parse_list, parse_rational, ConfigFile, LambdaGrid};
use weyl_core::counting::ProductSpec;
use weyl_core::lattice::WeightSpec;
use weyl_core::spectra::FactorSpec;

#[derive(Debug, Parser)]
#[command(name = "weyl", version, about = "Weyl-law remainder experiments on product spectra and weighted lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Factor eigenvalues with multiplicities or cluster populations.
    Spectrum,
    /// Product counting function with its interior/boundary split.
    Count,
    /// Remainder of the product counting function and its envelope exponent.
    Weyl,
    /// Weighted lattice count remainder.
    Lattice,
    /// Thin-annulus sums and the cluster-index reduction chain.
    Annulus,
    /// Mollified weighted counts and the sandwich inequality.
    Mollify,
    /// Poisson-summation identity, transform decay and dyadic shells.
    FourierCheck,
    /// Envelope fit of a two-column CSV.
    Fit,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Count => "count",
            Command::Weyl => "weyl",
            Command::Lattice => "lattice",
            Command::Annulus => "annulus",
            Command::Mollify => "mollify",
            Command::FourierCheck => "fourier-check",
            Command::Fit => "fit",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR", default_value = "weyl-out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Run seed; factors without their own seed inherit it.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// geometric:a:b:count, linear:a:b:count or list:x,y,...
    #[arg(long, global = true, value_name = "GRID")]
    pub lambda_grid: Option<String>,
    /// auto, auto*f or a positive number.
    #[arg(long, global = true, value_name = "EPS")]
    pub epsilon: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    pub c: Option<f64>,
    #[arg(long = "cutoff-M", global = true, value_name = "K")]
    pub cutoff_m: Option<i64>,
    #[arg(long, global = true, value_name = "X")]
    pub tolerance: Option<f64>,
    /// Weighted-lattice dimensions, e.g. 2,1.
    #[arg(long, global = true, value_name = "LIST")]
    pub dims: Option<String>,
    /// Rational shift, e.g. 1/4,0.
    #[arg(long, global = true, value_name = "LIST")]
    pub shift: Option<String>,
    /// Use |m+y|² ≤ λ²+|y|² for sphere products.
    #[arg(long, global = true)]
    pub shifted_ball: bool,
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, value_name = "K")]
    pub k_max: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub windows: Option<usize>,
    /// Dyadic levels of the frequency sum.
    #[arg(long, global = true, value_name = "J")]
    pub levels: Option<u32>,
    /// Exit 1 unless the sandwich inequality holds on the whole grid.
    #[arg(long, global = true)]
    pub check_sandwich: bool,
    /// Exit 1 unless every fitted exponent is within its bound.
    #[arg(long, global = true)]
    pub check_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum EpsilonPolicy {
    /// `factor · λ^{-(n-1)/(n+1)}`.
    Auto {
        factor: f64,
    },
    Fixed {
        epsilon: f64,
    },
}

impl EpsilonPolicy {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "auto" {
            return Ok(EpsilonPolicy::Auto { factor: 1.0 });
        }
        let p = if let Some(f) = t.strip_prefix("auto*") {
            EpsilonPolicy::Auto { factor: f.trim().parse().map_err(|_| anyhow!("bad epsilon factor '{f}'"))? }
        } else {
            EpsilonPolicy::Fixed { epsilon: t.parse().map_err(|_| anyhow!("bad epsilon '{t}'"))? }
        };
        match p {
            EpsilonPolicy::Auto { factor: v } | EpsilonPolicy::Fixed { epsilon: v } if !(v > 0.0 && v.is_finite()) => {
                bail!("epsilon must be positive, got '{t}'")
            }
            _ => Ok(p),
        }
    }

    pub fn at(&self, lambda: f64, n: usize) -> f64 {
        match *self {
            EpsilonPolicy::Auto { factor } => factor * lambda.powf(-(n as f64 - 1.0) / (n as f64 + 1.0)),
            EpsilonPolicy::Fixed { epsilon } => epsilon,
        }
    }
}

/// Everything a subcommand needs, validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub factors: Vec<FactorSpec>,
    pub grid: Option<Vec<f64>>,
    pub grid_text: Option<String>,
    pub epsilon: Option<EpsilonPolicy>,
    pub c: f64,
    pub cutoff: i64,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub dims: Option<Vec<u32>>,
    pub shift: Option<Vec<Rational64>>,
    pub k_max: u64,
    pub windows: Option<usize>,
    pub levels: Option<u32>,
    pub shifted_ball: bool,
    pub check_sandwich: bool,
    pub check_bound: bool,
    pub out: PathBuf,
    pub input: Option<PathBuf>,
    pub config_path: Option<PathBuf>,
    pub config_source: Option<String>,
    pub args: Vec<String>,
}

/// Reproducibility record embedded in every JSON output.
#[derive(Debug, Serialize)]
pub struct Provenance {
    pub command: &'static str,
    pub args: Vec<String>,
    pub config_path: Option<String>,
    pub config: Option<String>,
    pub lambda_grid: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn resolve(command: Command, flags: &CommonArgs, args: Vec<String>) -> Result<Self> {
        let (file, source) = match &flags.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                let cfg =
                    ConfigFile::parse_with_seed(&text, flags.seed).with_context(|| format!("in {}", path.display()))?;
                (Some(cfg), Some(text))
            }
            None => (None, None),
        };
        let run = file.as_ref().map(|f| f.run.clone()).unwrap_or_default();

        let (grid, grid_text) = match &flags.lambda_grid {
            Some(text) => {
                let g = LambdaGrid::parse(text).map_err(|m| anyhow!("--lambda-grid: {m}"))?;
                (Some(g.values().context("--lambda-grid")?), Some(text.clone()))
            }
            None => match &run.lambda_grid {
                Some(g) => (Some(g.values().context("lambda_grid in config")?), Some(format!("{g:?}"))),
                None => (None, None),
            },
        };
        let epsilon = match flags.epsilon.as_ref().or(run.epsilon.as_ref()) {
            Some(t) => Some(EpsilonPolicy::parse(t)?),
            None => None,
        };
        let c = flags.c.or(run.c).unwrap_or(1.0);
        if !(c > 0.0 && c.is_finite()) {
            bail!("annulus constant c must be positive, got {c}");
        }
        let cutoff = flags.cutoff_m.or(run.cutoff).unwrap_or(10);
        if cutoff < 1 {
            bail!("cutoff M must be at least 1, got {cutoff}");
        }
        let tolerance = flags.tolerance.or(run.tolerance);
        if let Some(t) = tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("tolerance must be nonnegative, got {t}");
            }
        }
        let workers = flags.workers.or(run.workers);
        if workers == Some(0) {
            bail!("worker count must be at least 1");
        }
        let dims = match &flags.dims {
            Some(t) => Some(
                parse_list(t, |x| x.parse::<u32>().map_err(|_| format!("bad dimension '{x}'")))
                    .map_err(|m| anyhow!("--dims: {m}"))?,
            ),
            None => run.dims.clone(),
        };
        let shift = match &flags.shift {
            Some(t) => Some(parse_list(t, parse_rational).map_err(|m| anyhow!("--shift: {m}"))?),
            None => run.shift.clone(),
        };
        let windows = flags.windows.or(run.windows);
        if let Some(w) = windows {
            if w < 3 {
                bail!("need at least 3 windows, got {w}");
            }
        }
        let cfg = Self {
            command,
            factors: file.map(|f| f.factors).unwrap_or_default(),
            grid,
            grid_text,
            epsilon,
            c,
            cutoff,
            tolerance,
            seed: flags.seed.or(run.seed),
            workers,
            dims,
            shift,
            k_max: flags.k_max.or(run.k_max).unwrap_or(10),
            windows,
            levels: flags.levels.or(run.levels),
            shifted_ball: flags.shifted_ball,
            check_sandwich: flags.check_sandwich,
            check_bound: flags.check_bound,
            out: flags.out.clone(),
            input: flags.input.clone(),
            config_path: flags.config.clone(),
            config_source: source,
            args,
        };
        if let Some(d) = &cfg.dims {
            cfg.weight_spec_from_dims(d)?;
        }
        Ok(cfg)
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            command: self.command.name(),
            args: self.args.clone(),
            config_path: self.config_path.as_ref().map(|p| p.display().to_string()),
            config: self.config_source.clone(),
            lambda_grid: self.grid_text.clone(),
            seed: self.seed,
            workers: self.workers,
        }
    }

    pub fn grid(&self) -> Result<&[f64]> {
        match &self.grid {
            Some(g) if !g.is_empty() => Ok(g),
            _ => bail!("{} needs a lambda grid (--lambda-grid or lambda_grid in [run])", self.command.name()),
        }
    }

    pub fn product(&self) -> Result<ProductSpec> {
        if self.factors.is_empty() {
            bail!("{} needs [factor] sections in --config", self.command.name());
        }
        Ok(ProductSpec::new(self.factors.clone())?)
    }

    fn weight_spec_from_dims(&self, dims: &[u32]) -> Result<WeightSpec> {
        let weighted = dims.iter().take_while(|&&d| d >= 2).count();
        let shift = match &self.shift {
            Some(s) => s.clone(),
            None => vec![Rational64::from_integer(0); dims.len()],
        };
        Ok(WeightSpec::new(dims.to_vec(), weighted, shift)?)
    }

    /// From `--dims`/`--shift` when given, else from the configured product.
    pub fn weight_spec(&self) -> Result<WeightSpec> {
        if let Some(d) = &self.dims {
            return self.weight_spec_from_dims(d);
        }
        if !self.factors.is_empty() {
            let mut w = self.product()?.weight_spec();
            if let Some(s) = &self.shift {
                w.shift = s.clone();
                w.validate()?;
            }
            return Ok(w);
        }
        bail!("{} needs --dims or [factor] sections", self.command.name())
    }
}

//! Unwrapper selection shared by `unwrap` and `bench`.

use std::fmt::Write as _;

use clap::ValueEnum;
use phz_core::baselines::{unwrap_goldstein, unwrap_irls, unwrap_itoh, unwrap_ls_dct, IrlsConfig};
use phz_core::{Grid2D, WeightBounds};
use phz_pudip::{unwrap_pudip, GeneratorConfig, TrainConfig};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Itoh,
    Ls,
    Goldstein,
    Irls,
    Pudip,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Itoh => "itoh",
            Method::Ls => "ls",
            Method::Goldstein => "goldstein",
            Method::Irls => "irls",
            Method::Pudip => "pudip",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s.trim(), true)
            .map_err(|_| CliError::Usage(format!("unknown method {s:?}; expected itoh, ls, goldstein, irls or pudip")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// 32 channels, 3 levels, 600 iterations, bounds [0.1, 10].
    #[default]
    Desk,
    /// 128 channels, 5 levels, 1000 iterations, bounds [0.1, 8].
    Paper,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s.trim(), true)
            .map_err(|_| CliError::Usage(format!("unknown profile {s:?}; expected desk or paper")))
    }
}

/// Overrides applied on top of a profile.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MethodOptions {
    pub profile: Profile,
    pub seed: u64,
    pub iterations: Option<usize>,
    pub lr: Option<f64>,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub refresh_every: Option<usize>,
    pub input_channels: Option<usize>,
    pub stages: Option<usize>,
    pub body_channels: Option<usize>,
}

impl MethodOptions {
    pub fn bounds(&self, default: WeightBounds) -> Result<WeightBounds> {
        let lo = self.eps_min.unwrap_or(default.eps_min());
        let hi = self.eps_max.unwrap_or(default.eps_max());
        WeightBounds::new(lo, hi).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn pudip_configs(&self) -> Result<(GeneratorConfig, TrainConfig)> {
        let (mut g, mut t) = match self.profile {
            Profile::Desk => (GeneratorConfig::desk(), TrainConfig::desk()),
            Profile::Paper => (GeneratorConfig::paper(), TrainConfig::paper()),
        };
        t.seed = self.seed;
        t.weight_bounds = self.bounds(t.weight_bounds)?;
        if let Some(n) = self.iterations {
            t.iterations = n;
            t.refresh_every = t.refresh_every.min(n.max(1));
        }
        t.lr = self.lr.unwrap_or(t.lr);
        t.refresh_every = self.refresh_every.unwrap_or(t.refresh_every);
        g.input_channels = self.input_channels.unwrap_or(g.input_channels);
        g.stages = self.stages.unwrap_or(g.stages);
        g.body_channels = self.body_channels.unwrap_or(g.body_channels);
        g.validate()?;
        t.validate()?;
        Ok((g, t))
    }
}

/// Unwraps `psi` and returns the estimate with a text run log.
pub fn run_method(method: Method, psi: &Grid2D, opts: &MethodOptions) -> Result<(Grid2D, String)> {
    psi.ensure_finite()?;
    let header = format!("# method={}\n", method.name());
    match method {
        Method::Itoh => Ok((unwrap_itoh(psi), header)),
        Method::Ls => Ok((unwrap_ls_dct(psi), header)),
        Method::Goldstein => Ok((unwrap_goldstein(psi), header)),
        Method::Irls => {
            let defaults = IrlsConfig::default();
            let cfg = IrlsConfig {
                bounds: opts.bounds(defaults.bounds)?,
                outer_iters: opts.iterations.unwrap_or(defaults.outer_iters),
                ..defaults
            };
            cfg.validate()?;
            let (out, report) = unwrap_irls(psi, &cfg)?;
            let mut log = header;
            for (k, round) in report.rounds.iter().enumerate() {
                if !round.energy.is_finite() {
                    return Err(CliError::Numerical(format!("IRLS energy became non-finite in round {k}")));
                }
                let _ = writeln!(log, "{k}\t{:?}", round.energy);
            }
            Ok((out, log))
        }
        Method::Pudip => {
            let (g, t) = opts.pudip_configs()?;
            let (out, report) = unwrap_pudip(psi, &g, &t)?;
            Ok((out, header + &report.to_log()))
        }
    }
}

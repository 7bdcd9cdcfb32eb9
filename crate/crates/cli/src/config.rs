//! Experiment configuration and its flat `key = value` file format.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use levylab_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    AlphaExact,
    AlphaMc,
    LevyBound,
    Angles,
    IsometryCheck,
    Proximity,
    Leader,
    F2,
    LiftCover,
    Scan,
    AlmostInvariant,
    Folner,
    LevySequence,
    Hamming,
}

impl Experiment {
    pub const ALL: [Experiment; 14] = [
        Experiment::AlphaExact,
        Experiment::AlphaMc,
        Experiment::LevyBound,
        Experiment::Angles,
        Experiment::IsometryCheck,
        Experiment::Proximity,
        Experiment::Leader,
        Experiment::F2,
        Experiment::LiftCover,
        Experiment::Scan,
        Experiment::AlmostInvariant,
        Experiment::Folner,
        Experiment::LevySequence,
        Experiment::Hamming,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::AlphaExact => "alpha-exact",
            Experiment::AlphaMc => "alpha-mc",
            Experiment::LevyBound => "levy-bound",
            Experiment::Angles => "angles",
            Experiment::IsometryCheck => "isometry-check",
            Experiment::Proximity => "proximity",
            Experiment::Leader => "leader",
            Experiment::F2 => "f2",
            Experiment::LiftCover => "lift-cover",
            Experiment::Scan => "scan",
            Experiment::AlmostInvariant => "almost-invariant",
            Experiment::Folner => "folner",
            Experiment::LevySequence => "levy-sequence",
            Experiment::Hamming => "hamming",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown subcommand `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Flags shared by every subcommand. Each subcommand reads a subset and
/// rejects the rest.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Params {
    /// Ambient dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Sphere dimension, rank or permutation degree (see the subcommand).
    #[arg(long)]
    pub n: Option<usize>,
    /// Cayley ball radius R.
    #[arg(long = "radius", short = 'R')]
    pub r: Option<usize>,
    /// Neighbourhood radius epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of shifts or transformations.
    #[arg(long)]
    pub k: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub m: Option<usize>,
    /// Witness-search sample budget.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Grid points on [0, eps].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Principal angle of a constant-angle frame pair.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Acting group (see the subcommand).
    #[arg(long)]
    pub group: Option<String>,
    /// Search strategy: greedy-swap or exhaustive.
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here and print a summary table instead.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Params {
    /// Names of the optional parameters that are set, `seed`, `out` and
    /// `format` excluded.
    pub fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! push {
            ($($field:ident => $key:literal),*) => {
                $(if self.$field.is_some() { keys.push($key); })*
            };
        }
        push!(d => "d", n => "n", r => "R", eps => "eps", k => "k", m => "m", budget => "budget",
              steps => "steps", theta => "theta", group => "group", strategy => "strategy");
        keys
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, params: Params) -> Self {
        Self { experiment, params }
    }

    /// Serializes to `key = value` lines. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!("subcommand = {}\n", self.experiment);
        let mut line = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(out, "{k} = {v}");
            }
        };
        line("d", p.d.map(|v| v.to_string()));
        line("n", p.n.map(|v| v.to_string()));
        line("R", p.r.map(|v| v.to_string()));
        line("eps", p.eps.map(|v| format!("{v:?}")));
        line("k", p.k.map(|v| v.to_string()));
        line("m", p.m.map(|v| v.to_string()));
        line("budget", p.budget.map(|v| v.to_string()));
        line("steps", p.steps.map(|v| v.to_string()));
        line("theta", p.theta.map(|v| format!("{v:?}")));
        line("group", p.group.clone());
        line("strategy", p.strategy.clone());
        line("seed", Some(p.seed.to_string()));
        line("out", p.out.as_ref().map(|o| o.display().to_string()));
        line("format", p.format.map(|f| f.as_str().to_string()));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut experiment = None;
        let mut p = Params::default();
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected `key = value`", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                bail!(invalid(format!("line {}: duplicate key `{key}`", no + 1)));
            }
            let ctx = || format!("line {}: bad value for `{key}`", no + 1);
            match key {
                "subcommand" => experiment = Some(value.parse::<Experiment>()?),
                "d" => p.d = Some(num(value).with_context(ctx)?),
                "n" => p.n = Some(num(value).with_context(ctx)?),
                "R" => p.r = Some(num(value).with_context(ctx)?),
                "eps" => p.eps = Some(num(value).with_context(ctx)?),
                "k" => p.k = Some(num(value).with_context(ctx)?),
                "m" => p.m = Some(num(value).with_context(ctx)?),
                "budget" => p.budget = Some(num(value).with_context(ctx)?),
                "steps" => p.steps = Some(num(value).with_context(ctx)?),
                "theta" => p.theta = Some(num(value).with_context(ctx)?),
                "group" => p.group = Some(value.to_string()),
                "strategy" => p.strategy = Some(value.to_string()),
                "seed" => p.seed = num(value).with_context(ctx)?,
                "out" => p.out = Some(PathBuf::from(value)),
                "format" => {
                    p.format = Some(
                        Format::from_str(value, false)
                            .map_err(|_| invalid(format!("unknown format `{value}`")))?,
                    )
                }
                other => bail!(invalid(format!("line {}: unknown key `{other}`", no + 1))),
            }
        }
        let experiment =
            experiment.ok_or_else(|| invalid("config has no `subcommand` key".into()))?;
        Ok(Self {
            experiment,
            params: p,
        })
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn num<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| anyhow!(invalid(format!("`{s}`: {e}"))))
}

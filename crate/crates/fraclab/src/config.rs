//! Flat `key = value` configuration with layered overrides.
//!
//! Lines are `key = value`; `#` starts a comment; lists are comma separated.
//! Layers are applied in order (defaults, file, command line) and later
//! layers win.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use fraclab_core::analysis::SupNorm;
use fraclab_core::optim::{NoiseScaling, PerturbationKind};
use fraclab_core::{FgnMethod, HurstParameter};

/// A user-facing configuration problem; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Unparsed key/value pairs.
pub type RawConfig = BTreeMap<String, String>;

pub fn parse_text(text: &str) -> Result<RawConfig> {
    let mut out = RawConfig::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("line {}: expected `key = value`", lineno + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_file(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_text(&text).with_context(|| format!("in config {}", path.display()))
}

/// Parses `key=value` command-line overrides.
pub fn parse_overrides(items: &[String]) -> Result<RawConfig> {
    let mut out = RawConfig::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_error(format!("override `{item}` must be key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| config_error(format!("`{key}`: cannot parse `{v}`")))
}

pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_value(key, s)).collect()
}

pub fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_error(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// One entry of the optimizer grid: a Hurst exponent or `anti`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HSpec {
    Anti,
    Hurst(HurstParameter),
}

impl HSpec {
    pub fn kind(self) -> PerturbationKind {
        match self {
            Self::Anti => PerturbationKind::AntiWhite,
            Self::Hurst(h) => PerturbationKind::Fractional(h),
        }
    }

    pub fn hurst(self) -> Option<HurstParameter> {
        match self {
            Self::Anti => None,
            Self::Hurst(h) => Some(h),
        }
    }
}

impl fmt::Display for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Anti => f.write_str("anti"),
            Self::Hurst(h) => write!(f, "{}", h.value()),
        }
    }
}

impl FromStr for HSpec {
    type Err = ConfigError;
    fn from_str(s: &str) -> std::result::Result<Self, ConfigError> {
        let s = s.trim();
        if s == "anti" {
            return Ok(Self::Anti);
        }
        let v: f64 = s.parse().map_err(|_| ConfigError(format!("H value `{s}` is not a number or `anti`")))?;
        HurstParameter::new(v)
            .map(Self::Hurst)
            .map_err(|_| ConfigError(format!("H value {v} is outside (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Styblinski,
    Saddle,
    Bistable,
    SupScaling,
    SigmaSweep,
    Dimension,
}

impl ExperimentKind {
    pub const ALL: [Self; 6] = [
        Self::Styblinski,
        Self::Saddle,
        Self::Bistable,
        Self::SupScaling,
        Self::SigmaSweep,
        Self::Dimension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Styblinski => "styblinski",
            Self::Saddle => "saddle",
            Self::Bistable => "bistable",
            Self::SupScaling => "sup_scaling",
            Self::SigmaSweep => "sigma_sweep",
            Self::Dimension => "dimension",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> std::result::Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| ConfigError(format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Landscape selection plus every landscape parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSpec {
    pub name: String,
    pub dim: usize,
    /// Diagonal of the `quadratic` landscape; empty means identity.
    pub diag: Vec<f64>,
    pub negative_directions: usize,
    pub lambda: f64,
    /// `shallow_deep`, `sharp_flat` or six numbers `v0,v1,v2,a,c,m`.
    pub bistable: String,
    pub k0: f64,
}

impl Default for LandscapeSpec {
    fn default() -> Self {
        Self {
            name: "styblinski_tang".into(),
            dim: 2,
            diag: Vec::new(),
            negative_directions: 5,
            lambda: 1e-4,
            bistable: "shallow_deep".into(),
            k0: fraclab_core::objectives::BiStableParams::DEFAULT_K0,
        }
    }
}

fn scaling_name(s: NoiseScaling) -> &'static str {
    match s {
        NoiseScaling::PhysicalTime => "physical",
        NoiseScaling::UnitSpacing => "unit",
    }
}

pub fn parse_scaling(key: &str, v: &str) -> Result<NoiseScaling> {
    match v.trim() {
        "physical" => Ok(NoiseScaling::PhysicalTime),
        "unit" => Ok(NoiseScaling::UnitSpacing),
        _ => Err(config_error(format!("`{key}`: expected physical or unit, got `{v}`"))),
    }
}

fn norm_name(n: SupNorm) -> &'static str {
    match n {
        SupNorm::Euclidean => "euclidean",
        SupNorm::Max => "max",
        SupNorm::SignedScalar => "signed_scalar",
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub runs: usize,
    pub steps: usize,
    pub eta: f64,
    pub sigma: f64,
    pub sigmas: Vec<f64>,
    pub hs: Vec<HSpec>,
    pub landscape: LandscapeSpec,
    /// Empty means the origin.
    pub init: Vec<f64>,
    pub normalize_variance: bool,
    pub scaling: NoiseScaling,
    pub method: FgnMethod,
    pub radius: f64,
    pub checkpoints: Vec<f64>,
    pub beta: f64,
    pub horizon: f64,
    pub norm: SupNorm,
    pub centered: bool,
    pub trajectories: usize,
    pub curve_stride: usize,
    pub points: usize,
    pub workers: usize,
    pub out: String,
}

fn hgrid(values: &[f64]) -> Vec<HSpec> {
    values.iter().map(|&v| HSpec::Hurst(HurstParameter::new(v).expect("default grid"))).collect()
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    /// Desk-scale defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            seed: 0,
            runs: 1,
            steps: 1,
            eta: 0.01,
            sigma: 1.0,
            sigmas: Vec::new(),
            hs: Vec::new(),
            landscape: LandscapeSpec::default(),
            init: Vec::new(),
            normalize_variance: false,
            scaling: NoiseScaling::PhysicalTime,
            method: FgnMethod::Circulant,
            radius: 1.0,
            checkpoints: vec![0.1, 1.0],
            beta: 0.5,
            horizon: 1.0,
            norm: SupNorm::Euclidean,
            centered: true,
            trajectories: 0,
            curve_stride: 100,
            points: 1 << 16,
            workers: default_workers(),
            out: format!("out/{}", kind.name()),
        };
        let saddle_landscape = LandscapeSpec {
            name: "embedded_saddle".into(),
            dim: 100,
            ..LandscapeSpec::default()
        };
        match kind {
            ExperimentKind::Styblinski => Self {
                runs: 200,
                steps: 10_000,
                eta: 0.01,
                sigma: 1.25,
                hs: hgrid(&[0.1, 0.3, 0.5, 0.7, 0.9]),
                init: vec![2.7, 2.7],
                ..base
            },
            ExperimentKind::Saddle => Self {
                runs: 5,
                steps: 100_000,
                eta: 0.005,
                sigma: 0.005,
                hs: [HSpec::Anti].into_iter().chain(hgrid(&[0.3, 0.4, 0.5])).collect(),
                landscape: saddle_landscape,
                scaling: NoiseScaling::UnitSpacing,
                ..base
            },
            ExperimentKind::SigmaSweep => Self {
                runs: 5,
                steps: 10_000,
                eta: 0.005,
                sigmas: vec![0.05, 0.005, 0.0005, 0.00005],
                hs: [HSpec::Anti].into_iter().chain(hgrid(&[0.3, 0.4, 0.5])).collect(),
                landscape: saddle_landscape,
                scaling: NoiseScaling::UnitSpacing,
                ..base
            },
            ExperimentKind::Bistable => Self {
                runs: 300,
                steps: 1000,
                eta: 1.0,
                sigma: 80.0,
                normalize_variance: true,
                hs: hgrid(&[0.4, 0.5, 0.6]),
                landscape: LandscapeSpec {
                    name: "bistable".into(),
                    dim: 1,
                    ..LandscapeSpec::default()
                },
                init: vec![0.0],
                trajectories: 5,
                ..base
            },
            ExperimentKind::SupScaling => Self {
                runs: 500,
                steps: 10_000,
                sigmas: vec![1e-3, 1e-2, 1e-1, 1.0],
                hs: hgrid(&(0..15).map(|i| (20 + 5 * i) as f64 / 100.0).collect::<Vec<_>>()),
                landscape: LandscapeSpec {
                    dim: 1,
                    ..LandscapeSpec::default()
                },
                ..base
            },
            ExperimentKind::Dimension => Self {
                runs: 20,
                hs: hgrid(&[0.2, 0.5, 0.8]),
                ..base
            },
        }
    }

    /// Defaults for `kind`, then each layer in order.
    pub fn resolve(kind: ExperimentKind, layers: &[&RawConfig]) -> Result<Self> {
        let mut cfg = Self::defaults(kind);
        for layer in layers {
            for (k, v) in layer.iter() {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => {
                let kind: ExperimentKind = parse_value(key, v)?;
                if kind != self.experiment {
                    return Err(config_error(format!(
                        "config is for experiment `{kind}` but `{}` was requested",
                        self.experiment
                    )));
                }
            }
            "seed" => self.seed = parse_value(key, v)?,
            "runs" => self.runs = parse_value(key, v)?,
            "steps" => self.steps = parse_value(key, v)?,
            "eta" => self.eta = parse_value(key, v)?,
            "sigma" => self.sigma = parse_value(key, v)?,
            "sigmas" => self.sigmas = parse_list(key, v)?,
            "hs" => self.hs = parse_list(key, v)?,
            "landscape" => self.landscape.name = v.trim().to_string(),
            "dim" => self.landscape.dim = parse_value(key, v)?,
            "diag" => self.landscape.diag = parse_list(key, v)?,
            "negative_directions" => self.landscape.negative_directions = parse_value(key, v)?,
            "lambda" => self.landscape.lambda = parse_value(key, v)?,
            "bistable" => self.landscape.bistable = v.trim().to_string(),
            "k0" => self.landscape.k0 = parse_value(key, v)?,
            "init" => self.init = parse_list(key, v)?,
            "normalize_variance" => self.normalize_variance = parse_bool(key, v)?,
            "scaling" => self.scaling = parse_scaling(key, v)?,
            "method" => self.method = parse_value(key, v)?,
            "radius" => self.radius = parse_value(key, v)?,
            "checkpoints" => self.checkpoints = parse_list(key, v)?,
            "beta" => self.beta = parse_value(key, v)?,
            "horizon" => self.horizon = parse_value(key, v)?,
            "norm" => self.norm = parse_value(key, v)?,
            "centered" => self.centered = parse_bool(key, v)?,
            "trajectories" => self.trajectories = parse_value(key, v)?,
            "curve_stride" => self.curve_stride = parse_value(key, v)?,
            "points" => self.points = parse_value(key, v)?,
            "workers" => self.workers = parse_value(key, v)?,
            "out" => self.out = v.trim().to_string(),
            _ => return Err(config_error(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(config_error(m));
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if self.steps == 0 {
            return fail("steps must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail("eta must be positive");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || self.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return fail("noise scales must be finite and non-negative");
        }
        if self.hs.is_empty() {
            return fail("hs must list at least one H value");
        }
        if self.radius.is_nan() || self.radius <= 0.0 {
            return fail("radius must be positive");
        }
        if self.checkpoints.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
            return fail("checkpoints are fractions of the budget in (0, 1]");
        }
        if self.curve_stride == 0 {
            return fail("curve_stride must be at least 1");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail("horizon must be positive");
        }
        let needs_fractional = matches!(self.experiment, ExperimentKind::SupScaling | ExperimentKind::Dimension);
        if needs_fractional && self.hs.iter().any(|h| h.hurst().is_none()) {
            return fail("`anti` is only meaningful for optimizer experiments");
        }
        if matches!(self.experiment, ExperimentKind::SupScaling | ExperimentKind::SigmaSweep) && self.sigmas.is_empty() {
            return fail("sigmas must list at least one value");
        }
        if self.experiment == ExperimentKind::SupScaling && self.runs < 2 {
            return fail("sup_scaling needs at least two runs per point");
        }
        if self.experiment == ExperimentKind::Dimension && self.points < fraclab_core::analysis::BOX_COUNT_MIN_POINTS {
            return fail("dimension needs at least 1024 points per path");
        }
        if matches!(
            self.experiment,
            ExperimentKind::Styblinski | ExperimentKind::Saddle | ExperimentKind::Bistable | ExperimentKind::SigmaSweep
        ) {
            crate::landscape::build(&self.landscape, self.seed)?;
            if !self.init.is_empty() && self.init.len() != self.landscape_dim() {
                return fail("init length must match the landscape dimension");
            }
        }
        Ok(())
    }

    pub fn landscape_dim(&self) -> usize {
        crate::landscape::dimension(&self.landscape)
    }

    /// Starting point, the origin when `init` is empty.
    pub fn start(&self) -> Vec<f64> {
        if self.init.is_empty() {
            vec![0.0; self.landscape_dim()]
        } else {
            self.init.clone()
        }
    }

    /// Every setting that affects results, in a fixed order. Feeding it back
    /// through [`parse_text`] reproduces the run; `workers` and `out` are
    /// left out because they never change the numbers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let l = &self.landscape;
        [
            ("experiment", self.experiment.to_string()),
            ("seed", self.seed.to_string()),
            ("runs", self.runs.to_string()),
            ("steps", self.steps.to_string()),
            ("eta", self.eta.to_string()),
            ("sigma", self.sigma.to_string()),
            ("sigmas", join(&self.sigmas)),
            ("hs", join(&self.hs)),
            ("landscape", l.name.clone()),
            ("dim", l.dim.to_string()),
            ("diag", join(&l.diag)),
            ("negative_directions", l.negative_directions.to_string()),
            ("lambda", l.lambda.to_string()),
            ("bistable", l.bistable.clone()),
            ("k0", l.k0.to_string()),
            ("init", join(&self.init)),
            ("normalize_variance", self.normalize_variance.to_string()),
            ("scaling", scaling_name(self.scaling).to_string()),
            ("method", self.method.to_string()),
            ("radius", self.radius.to_string()),
            ("checkpoints", join(&self.checkpoints)),
            ("beta", self.beta.to_string()),
            ("horizon", self.horizon.to_string()),
            ("norm", norm_name(self.norm).to_string()),
            ("centered", self.centered.to_string()),
            ("trajectories", self.trajectories.to_string()),
            ("curve_stride", self.curve_stride.to_string()),
            ("points", self.points.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

//! The single-shot subcommands: `sample`, `simulate`, `optimize`.

use std::path::Path;

use anyhow::{Context, Result};
use fraclab_core::analysis::mean_var;
use fraclab_core::fou::{FouSimulator, FouSystem};
use fraclab_core::linalg::DenseMatrix;
use fraclab_core::noise::{fgn_to_path, sample_fgn};
use fraclab_core::optim::{Fpgd, NoiseScaling, RunConfig};
use fraclab_core::{FgnMethod, HurstParameter, SeedStream};
use serde_json::json;

use crate::config::{config_error, parse_bool, parse_list, parse_scaling, parse_value, HSpec, LandscapeSpec, RawConfig};
use crate::landscape;
use crate::output::{fmt_f64, render_pairs, state_columns, OutputDir, Table};
use crate::parallel::Pool;

/// State columns are dropped from per-run CSVs above this dimension.
pub const MAX_STATE_COLUMNS: usize = 10;

#[derive(Debug, Clone)]
pub struct SampleArgs {
    pub h: f64,
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub method: FgnMethod,
}

/// One fBM path as `step,t,increment,value`, written to the file `out`.
pub fn sample(args: &SampleArgs, out: &Path) -> Result<()> {
    let h = HurstParameter::new(args.h).map_err(|e| config_error(e.to_string()))?;
    if args.n == 0 || args.dt.is_nan() || args.dt <= 0.0 {
        return Err(config_error("need n >= 1 and dt > 0"));
    }
    let fgn = sample_fgn(args.n, h, SeedStream::root(args.seed), args.method)?;
    let path = fgn_to_path(&fgn, args.dt)?;
    let scale = args.dt.powf(args.h);
    let mut t = Table::new(["step", "t", "increment", "value"]);
    for (k, time) in path.times().enumerate() {
        let inc = if k == 0 { 0.0 } else { scale * fgn.values[k - 1] };
        t.push(vec![k.to_string(), fmt_f64(time), fmt_f64(inc), fmt_f64(path.values[k])]);
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(out, t.render()).with_context(|| format!("writing {}", out.display()))
}

/// fOU simulation settings: `drift` holds `d` diagonal entries or `d²`
/// row-major entries, `d` being the length of `init`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub drift: Vec<f64>,
    pub sigma: f64,
    pub init: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
    pub h: f64,
    pub method: FgnMethod,
    pub centered: bool,
    pub runs: usize,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            drift: vec![-1.0],
            sigma: 1.0,
            init: vec![0.0],
            horizon: 1.0,
            steps: 1000,
            h: 0.5,
            method: FgnMethod::Circulant,
            centered: false,
            runs: 1,
            seed: 0,
        }
    }
}

impl SimulateConfig {
    pub fn resolve(layers: &[&RawConfig]) -> Result<Self> {
        let mut c = Self::default();
        for layer in layers {
            for (k, v) in layer.iter() {
                match k.as_str() {
                    "drift" => c.drift = parse_list(k, v)?,
                    "sigma" => c.sigma = parse_value(k, v)?,
                    "init" => c.init = parse_list(k, v)?,
                    "horizon" => c.horizon = parse_value(k, v)?,
                    "steps" => c.steps = parse_value(k, v)?,
                    "h" => c.h = parse_value(k, v)?,
                    "method" => c.method = parse_value(k, v)?,
                    "centered" => c.centered = parse_bool(k, v)?,
                    "runs" => c.runs = parse_value(k, v)?,
                    "seed" => c.seed = parse_value(k, v)?,
                    _ => return Err(config_error(format!("unknown key `{k}`"))),
                }
            }
        }
        if c.runs == 0 {
            return Err(config_error("runs must be at least 1"));
        }
        c.system()?;
        Ok(c)
    }

    pub fn system(&self) -> Result<FouSystem> {
        let d = self.init.len();
        let drift = if self.drift.len() == d {
            DenseMatrix::from_diagonal(&self.drift)
        } else if self.drift.len() == d * d {
            DenseMatrix::from_row_major(d, d, self.drift.clone()).map_err(|e| config_error(e.to_string()))?
        } else {
            return Err(config_error("drift needs d (diagonal) or d*d (row-major) entries, d = len(init)"));
        };
        let h = HurstParameter::new(self.h).map_err(|e| config_error(e.to_string()))?;
        FouSystem::new(drift, self.sigma, self.init.clone(), self.horizon, self.steps, h).map_err(|e| config_error(e.to_string()))
    }

    fn echo(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        vec![
            ("drift".into(), list(&self.drift)),
            ("sigma".into(), self.sigma.to_string()),
            ("init".into(), list(&self.init)),
            ("horizon".into(), self.horizon.to_string()),
            ("steps".into(), self.steps.to_string()),
            ("h".into(), self.h.to_string()),
            ("method".into(), self.method.to_string()),
            ("centered".into(), self.centered.to_string()),
            ("runs".into(), self.runs.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

/// Writes `paths.csv` (`run,step,t,x_1..x_d`), `summary.json` and the manifest.
pub fn simulate(cfg: &SimulateConfig, out: &Path, workers: usize) -> Result<Vec<u8>> {
    let sim = FouSimulator::with_method(cfg.system()?, cfg.method)?;
    let d = cfg.init.len();
    let times: Vec<f64> = (0..=cfg.steps)
        .map(|k| if k == cfg.steps { cfg.horizon } else { cfg.horizon * k as f64 / cfg.steps as f64 })
        .collect();
    let root = SeedStream::root(cfg.seed);
    let paths = Pool::new(workers)?
        .map(cfg.runs, |r| {
            let mut states = Vec::with_capacity((cfg.steps + 1) * d);
            sim.simulate_with(root.derive(r as u64), cfg.centered, |_, x| states.extend_from_slice(x))
                .map(|_| states)
        })
        .into_iter()
        .collect::<fraclab_core::Result<Vec<_>>>()?;

    let mut table = Table::new(["run".to_string(), "step".into(), "t".into()].into_iter().chain(state_columns(d)));
    for (r, states) in paths.iter().enumerate() {
        for (k, x) in states.chunks_exact(d).enumerate() {
            let mut row = vec![r.to_string(), k.to_string(), fmt_f64(times[k])];
            row.extend(x.iter().map(|v| fmt_f64(*v)));
            table.push(row);
        }
    }
    let (mut means, mut vars) = (Vec::new(), Vec::new());
    for i in 0..d {
        let ends: Vec<f64> = paths.iter().map(|s| s[cfg.steps * d + i]).collect();
        let (m, v) = mean_var(&ends);
        means.push(m);
        vars.push(v);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write_csv("paths.csv", &table)?;
    dir.write_text("config.txt", &render_pairs(&cfg.echo()))?;
    dir.write_json("summary.json", &json!({ "runs": cfg.runs, "terminal_mean": means, "terminal_variance": vars }))?;
    dir.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub landscape: LandscapeSpec,
    pub h: HSpec,
    pub eta: f64,
    pub sigma: f64,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub init: Vec<f64>,
    pub normalize_variance: bool,
    pub scaling: NoiseScaling,
    pub method: FgnMethod,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            landscape: LandscapeSpec::default(),
            h: HSpec::Hurst(HurstParameter::BROWNIAN),
            eta: 0.01,
            sigma: 1.0,
            steps: 1000,
            runs: 1,
            seed: 0,
            init: Vec::new(),
            normalize_variance: false,
            scaling: NoiseScaling::PhysicalTime,
            method: FgnMethod::Circulant,
        }
    }
}

impl OptimizeConfig {
    pub fn resolve(layers: &[&RawConfig]) -> Result<Self> {
        let mut c = Self::default();
        for layer in layers {
            for (k, v) in layer.iter() {
                let l = &mut c.landscape;
                match k.as_str() {
                    "landscape" => l.name = v.trim().to_string(),
                    "dim" => l.dim = parse_value(k, v)?,
                    "diag" => l.diag = parse_list(k, v)?,
                    "negative_directions" => l.negative_directions = parse_value(k, v)?,
                    "lambda" => l.lambda = parse_value(k, v)?,
                    "bistable" => l.bistable = v.trim().to_string(),
                    "k0" => l.k0 = parse_value(k, v)?,
                    "h" => c.h = parse_value(k, v)?,
                    "eta" => c.eta = parse_value(k, v)?,
                    "sigma" => c.sigma = parse_value(k, v)?,
                    "steps" => c.steps = parse_value(k, v)?,
                    "runs" => c.runs = parse_value(k, v)?,
                    "seed" => c.seed = parse_value(k, v)?,
                    "init" => c.init = parse_list(k, v)?,
                    "normalize_variance" => c.normalize_variance = parse_bool(k, v)?,
                    "scaling" => c.scaling = parse_scaling(k, v)?,
                    "method" => c.method = parse_value(k, v)?,
                    _ => return Err(config_error(format!("unknown key `{k}`"))),
                }
            }
        }
        if c.runs == 0 {
            return Err(config_error("runs must be at least 1"));
        }
        let obj = landscape::build(&c.landscape, c.seed)?;
        if !c.init.is_empty() && c.init.len() != obj.dim() {
            return Err(config_error("init length must match the landscape dimension"));
        }
        c.run_config(obj.dim()).validate().map_err(|e| config_error(e.to_string()))?;
        Ok(c)
    }

    fn run_config(&self, dim: usize) -> RunConfig {
        RunConfig {
            eta: self.eta,
            sigma: self.sigma,
            steps: self.steps,
            init: if self.init.is_empty() { vec![0.0; dim] } else { self.init.clone() },
            normalize_variance: self.normalize_variance,
            scaling: self.scaling,
            method: self.method,
        }
    }
}

/// Writes `runs.csv` (`run,step,loss[,x_1..x_d]`), `summary.json` and the manifest.
pub fn optimize(cfg: &OptimizeConfig, out: &Path, workers: usize) -> Result<Vec<u8>> {
    let obj = landscape::build(&cfg.landscape, cfg.seed)?;
    let d = obj.dim();
    let fpgd = Fpgd::new(&obj, cfg.run_config(d), cfg.h.kind())?;
    let root = SeedStream::root(cfg.seed);
    let runs = Pool::new(workers)?.map(cfg.runs, |r| fpgd.run(root.derive(r as u64)));

    let with_state = d <= MAX_STATE_COLUMNS;
    let mut header = vec!["run".to_string(), "step".into(), "loss".into()];
    if with_state {
        header.extend(state_columns(d));
    }
    let mut table = Table::new(header);
    for (r, traj) in runs.iter().enumerate() {
        for (k, x) in traj.iter().enumerate() {
            let mut row = vec![r.to_string(), k.to_string(), fmt_f64(traj.losses[k])];
            if with_state {
                row.extend(x.iter().map(|v| fmt_f64(*v)));
            }
            table.push(row);
        }
    }
    let finals: Vec<f64> = runs.iter().filter(|t| !t.diverged).map(|t| *t.losses.last().unwrap()).collect();
    let diverged = runs.iter().filter(|t| t.diverged).count();
    let mut dir = OutputDir::create(out)?;
    dir.write_csv("runs.csv", &table)?;
    dir.write_json(
        "summary.json",
        &json!({
            "landscape": cfg.landscape.name,
            "h": cfg.h.to_string(),
            "runs": cfg.runs,
            "diverged": diverged,
            "final_losses": finals,
        }),
    )?;
    dir.finish()
}

//! The named experiments. Each writes plot-ready CSV files, `config.txt`,
//! `report.json` and `manifest.json` into the output directory.
//!
//! Run `r` of grid point `i` draws from `SeedStream::root(seed)` derived by
//! `[i, r]` (`[σ index, H index, r]` for sweeps over σ), so results depend
//! on the configuration only, never on scheduling.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use fraclab_core::analysis::{
    box_counting_dimension, cdf_breakpoints, empirical_cdf, fit_inverse_sqrt, mean_var, styblinski_tang_catalog,
    sup_sample, Region, ScalingFit, SupEstimate,
};
use fraclab_core::fou::{FouSimulator, FouSystem};
use fraclab_core::linalg::DenseMatrix;
use fraclab_core::noise::{fgn_to_path, FgnSampler};
use fraclab_core::objectives::Objective;
use fraclab_core::optim::{Fpgd, RunConfig};
use fraclab_core::{HurstParameter, SeedStream};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{config_error, ExperimentConfig, ExperimentKind, HSpec};
use crate::landscape;
use crate::output::{fmt_f64, render_pairs, state_columns, OutputDir, Table};
use crate::parallel::Pool;

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub out: PathBuf,
    pub config: Vec<(String, String)>,
    pub summary: Value,
    /// Runs that diverged, one line per grid point affected.
    pub failures: Vec<String>,
    pub manifest: Vec<u8>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: OutputDir,
    pool: Pool,
    failures: Vec<String>,
}

impl Ctx<'_> {
    fn seed(&self, path: &[u64]) -> SeedStream {
        SeedStream::root(self.cfg.seed).derive_path(path)
    }

    fn run_config(&self, sigma: f64) -> RunConfig {
        let cfg = self.cfg;
        RunConfig {
            eta: cfg.eta,
            sigma,
            steps: cfg.steps,
            init: cfg.start(),
            normalize_variance: cfg.normalize_variance,
            scaling: cfg.scaling,
            method: cfg.method,
        }
    }

    fn note_divergence(&mut self, what: String, diverged: usize) {
        if diverged > 0 {
            self.failures.push(format!("{what}: {diverged} of {} runs diverged", self.cfg.runs));
        }
    }
}

/// File-name fragment for a grid point.
pub fn tag(h: HSpec) -> String {
    match h {
        HSpec::Anti => "anti".into(),
        HSpec::Hurst(h) => format!("h{}", h.value()),
    }
}

fn cdf_table(times: &[Option<usize>], budget: usize) -> Result<Table> {
    let mut t = Table::new(["step", "probability"]);
    for (k, p) in cdf_breakpoints(&empirical_cdf(times, budget)?) {
        t.push(vec![k.to_string(), fmt_f64(p)]);
    }
    Ok(t)
}

fn fraction_by(times: &[Option<usize>], step: usize) -> f64 {
    times.iter().filter(|t| t.is_some_and(|t| t <= step)).count() as f64 / times.len() as f64
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut ctx = Ctx {
        cfg,
        out: OutputDir::create(&cfg.out)?,
        pool: Pool::new(cfg.workers)?,
        failures: Vec::new(),
    };
    let summary = match cfg.experiment {
        ExperimentKind::Styblinski => styblinski(&mut ctx)?,
        ExperimentKind::Saddle => loss_curves(&mut ctx, &[cfg.sigma], false)?,
        ExperimentKind::SigmaSweep => loss_curves(&mut ctx, &cfg.sigmas.clone(), true)?,
        ExperimentKind::Bistable => bistable(&mut ctx)?,
        ExperimentKind::SupScaling => sup_scaling(&mut ctx)?,
        ExperimentKind::Dimension => dimension(&mut ctx)?,
    };
    let echo = cfg.echo();
    let Ctx { mut out, failures, .. } = ctx;
    out.write_text("config.txt", &render_pairs(&echo))?;
    let config_obj: BTreeMap<_, _> = echo.iter().cloned().collect();
    out.write_json(
        "report.json",
        &json!({
            "experiment": cfg.experiment.name(),
            "config": config_obj,
            "summary": summary,
            "failures": failures,
        }),
    )?;
    let root = out.root().to_path_buf();
    let manifest = out.finish()?;
    Ok(ExperimentReport {
        out: root,
        config: echo,
        summary,
        failures,
        manifest,
    })
}

const STYBLINSKI_EVENTS: [&str; 3] = ["exit_shallow", "reach_medium", "reach_deep"];
const STYBLINSKI_LABELS: [&str; 5] = ["shallow", "medium", "deep", "outside", "diverged"];

#[derive(Serialize)]
struct CheckpointCounts {
    step: usize,
    fraction: f64,
    counts: BTreeMap<&'static str, usize>,
}

fn checkpoint_steps(cfg: &ExperimentConfig) -> Vec<usize> {
    let mut steps: Vec<usize> = cfg
        .checkpoints
        .iter()
        .map(|f| ((f * cfg.steps as f64).round() as usize).clamp(1, cfg.steps))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

fn styblinski(ctx: &mut Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    if cfg.landscape.name != "styblinski_tang" || cfg.landscape.dim != 2 {
        return Err(config_error("the styblinski experiment needs the two-dimensional styblinski_tang landscape"));
    }
    let obj = landscape::build(&cfg.landscape, cfg.seed)?;
    let catalog = styblinski_tang_catalog(cfg.radius).map_err(|e| config_error(format!("region catalog: {e}")))?;
    let checkpoints = checkpoint_steps(cfg);
    let mut bars = Table::new(["h", "checkpoint", "step", "shallow", "medium", "deep", "outside", "diverged"]);
    let mut per_h = Vec::new();

    for (i, &h) in cfg.hs.iter().enumerate() {
        let fpgd = Fpgd::new(&obj, ctx.run_config(cfg.sigma), h.kind())?;
        let runs = ctx.pool.map(cfg.runs, |r| {
            let mut events: [Option<usize>; 3] = [None; 3];
            let mut labels = vec!["diverged"; checkpoints.len()];
            let summary = fpgd.run_with(ctx.seed(&[i as u64, r as u64]), |k, x, _| {
                let label = match catalog.classify(x) {
                    "shallow" => "shallow",
                    "medium" => "medium",
                    "deep" => "deep",
                    _ => "outside",
                };
                let hit = [label != "shallow", label == "medium", label == "deep"];
                for (e, h) in events.iter_mut().zip(hit) {
                    if h && e.is_none() {
                        *e = Some(k);
                    }
                }
                if let Ok(j) = checkpoints.binary_search(&k) {
                    labels[j] = label;
                }
            });
            (events, labels, summary.diverged)
        });

        let diverged = runs.iter().filter(|r| r.2).count();
        ctx.note_divergence(format!("H={h}"), diverged);
        let mut cdf_at_budget = BTreeMap::new();
        let mut left_shallow = Vec::new();
        for (e, name) in STYBLINSKI_EVENTS.iter().enumerate() {
            let times: Vec<Option<usize>> = runs.iter().map(|r| r.0[e]).collect();
            ctx.out.write_csv(&format!("cdf/{}_{name}.csv", tag(h)), &cdf_table(&times, cfg.steps)?)?;
            cdf_at_budget.insert(*name, fraction_by(&times, cfg.steps));
            if e == 0 {
                left_shallow = checkpoints.iter().map(|&c| fraction_by(&times, c)).collect();
            }
        }
        let mut cps = Vec::new();
        for (j, &step) in checkpoints.iter().enumerate() {
            let mut counts: BTreeMap<&'static str, usize> = STYBLINSKI_LABELS.iter().map(|l| (*l, 0)).collect();
            for r in &runs {
                *counts.get_mut(r.1[j]).expect("known label") += 1;
            }
            let mut row = vec![h.to_string(), fmt_f64(step as f64 / cfg.steps as f64), step.to_string()];
            row.extend(STYBLINSKI_LABELS.iter().map(|l| counts[l].to_string()));
            bars.push(row);
            cps.push(CheckpointCounts {
                step,
                fraction: step as f64 / cfg.steps as f64,
                counts,
            });
        }
        let deep_at_budget = cps.last().map_or(0, |c| c.counts["deep"]) as f64 / cfg.runs as f64;
        per_h.push(json!({
            "h": h.to_string(),
            "runs": cfg.runs,
            "diverged": diverged,
            "deep_fraction": deep_at_budget,
            "left_shallow_by_checkpoint": left_shallow,
            "cdf_at_budget": cdf_at_budget,
            "checkpoints": cps,
        }));
    }
    ctx.out.write_csv("bars.csv", &bars)?;
    Ok(json!({ "checkpoint_steps": checkpoints, "per_h": per_h }))
}

/// Mean loss per step over the runs still finite at that step.
fn mean_curve(runs: &[Vec<f64>], steps: usize) -> Vec<(f64, usize)> {
    (0..=steps)
        .map(|k| {
            let vals: Vec<f64> = runs.iter().filter_map(|l| l.get(k).copied()).collect();
            let n = vals.len();
            (if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 }, n)
        })
        .collect()
}

fn loss_curves(ctx: &mut Ctx, sigmas: &[f64], sweep: bool) -> Result<Value> {
    let cfg = ctx.cfg;
    let obj = landscape::build(&cfg.landscape, cfg.seed)?;
    let mut header = vec!["h", "step", "mean_loss", "runs"];
    if sweep {
        header.insert(0, "sigma");
    }
    let mut table = Table::new(header);
    let mut per_point = Vec::new();

    for (si, &sigma) in sigmas.iter().enumerate() {
        for (hi, &h) in cfg.hs.iter().enumerate() {
            let fpgd = Fpgd::new(&obj, ctx.run_config(sigma), h.kind())?;
            let runs = ctx.pool.map(cfg.runs, |r| {
                let path: Vec<u64> = if sweep { vec![si as u64, hi as u64, r as u64] } else { vec![hi as u64, r as u64] };
                let mut losses = Vec::with_capacity(cfg.steps + 1);
                let summary = fpgd.run_with(ctx.seed(&path), |_, _, loss| losses.push(loss));
                (losses, summary.diverged)
            });
            let diverged = runs.iter().filter(|r| r.1).count();
            ctx.note_divergence(format!("sigma={sigma} H={h}"), diverged);
            let losses: Vec<Vec<f64>> = runs.into_iter().map(|r| r.0).collect();
            let curve = mean_curve(&losses, cfg.steps);
            for (k, (m, n)) in curve.iter().enumerate() {
                if k % cfg.curve_stride == 0 || k == cfg.steps {
                    let mut row = vec![h.to_string(), k.to_string(), fmt_f64(*m), n.to_string()];
                    if sweep {
                        row.insert(0, fmt_f64(sigma));
                    }
                    table.push(row);
                }
            }
            let first_negative = curve.iter().position(|(m, _)| *m < 0.0);
            let finals: Vec<f64> = losses.iter().filter(|l| l.len() == cfg.steps + 1).map(|l| l[cfg.steps]).collect();
            per_point.push(json!({
                "sigma": sigma,
                "h": h.to_string(),
                "runs": cfg.runs,
                "diverged": diverged,
                "initial_loss": obj.value(&cfg.start()),
                "final_mean_loss": curve[cfg.steps].0,
                "final_losses": finals,
                "min_mean_loss": curve.iter().map(|c| c.0).fold(f64::INFINITY, f64::min),
                "first_negative_step": first_negative,
            }));
        }
    }
    ctx.out.write_csv("loss_curves.csv", &table)?;
    Ok(json!({ "per_point": per_point }))
}

fn bistable(ctx: &mut Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    if cfg.landscape.name != "bistable" {
        return Err(config_error("the bistable experiment needs the bistable landscape"));
    }
    let obj = landscape::build_bistable(&cfg.landscape)?;
    let target = Region::Above(obj.params().c);
    let mut per_h = Vec::new();

    for (i, &h) in cfg.hs.iter().enumerate() {
        let fpgd = Fpgd::new(&obj, ctx.run_config(cfg.sigma), h.kind())?;
        let runs = ctx.pool.map(cfg.runs, |r| {
            let keep = r < cfg.trajectories;
            let mut exit = None;
            let mut traj = Vec::new();
            let summary = fpgd.run_with(ctx.seed(&[i as u64, r as u64]), |k, x, loss| {
                if exit.is_none() && target.contains(x) {
                    exit = Some(k);
                }
                if keep {
                    traj.push((k, loss, x[0]));
                }
            });
            (exit, traj, summary.diverged)
        });
        let diverged = runs.iter().filter(|r| r.2).count();
        ctx.note_divergence(format!("H={h}"), diverged);

        let mut t = Table::new(["run".to_string(), "step".into(), "loss".into()].into_iter().chain(state_columns(1)));
        for (r, run) in runs.iter().enumerate().take(cfg.trajectories) {
            for &(k, loss, x) in &run.1 {
                t.push(vec![r.to_string(), k.to_string(), fmt_f64(loss), fmt_f64(x)]);
            }
        }
        ctx.out.write_csv(&format!("trajectories/{}.csv", tag(h)), &t)?;
        let times: Vec<Option<usize>> = runs.iter().map(|r| r.0).collect();
        ctx.out.write_csv(&format!("cdf/{}_exit.csv", tag(h)), &cdf_table(&times, cfg.steps)?)?;
        let p = fraction_by(&times, cfg.steps);
        per_h.push(json!({
            "h": h.to_string(),
            "runs": cfg.runs,
            "diverged": diverged,
            "exit_probability": p,
            "exit_probability_std_error": (p * (1.0 - p) / cfg.runs as f64).sqrt(),
        }));
    }
    Ok(json!({ "target": format!("x >= {}", obj.params().c), "per_h": per_h }))
}

#[derive(Serialize)]
struct EstimateJson {
    h: f64,
    mean: f64,
    std_error: f64,
    runs: usize,
}

fn fit_json(fit: Option<ScalingFit>) -> Value {
    fit.map_or(Value::Null, |f| json!({ "w0": f.w0, "w1": f.w1, "rel_error": f.rel_error }))
}

fn sup_scaling(ctx: &mut Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    let d = cfg.landscape.dim.max(1);
    let init = if cfg.init.is_empty() { vec![0.0; d] } else { cfg.init.clone() };
    if init.len() != d {
        return Err(config_error("init length must match dim"));
    }
    let hs: Vec<HurstParameter> = cfg.hs.iter().filter_map(|h| h.hurst()).collect();
    let mut table = Table::new(["sigma", "h", "mean", "std_error", "runs"]);
    let mut per_sigma = Vec::new();

    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
        let mut estimates = Vec::new();
        for (hi, &h) in hs.iter().enumerate() {
            let system = FouSystem::new(DenseMatrix::from_diagonal(&vec![cfg.beta; d]), sigma, init.clone(), cfg.horizon, cfg.steps, h)
                .map_err(|e| config_error(format!("fOU system: {e}")))?;
            let sim = FouSimulator::with_method(system, cfg.method)?;
            let samples = ctx
                .pool
                .map(cfg.runs, |r| sup_sample(&sim, ctx.seed(&[si as u64, hi as u64, r as u64]), cfg.centered, cfg.norm))
                .into_iter()
                .collect::<fraclab_core::Result<Vec<f64>>>()
                .with_context(|| format!("sigma={sigma} H={}", h.value()))?;
            let est = SupEstimate::from_samples(h, &samples)?;
            table.push(vec![fmt_f64(sigma), fmt_f64(h.value()), fmt_f64(est.mean), fmt_f64(est.std_error), est.runs.to_string()]);
            estimates.push(est);
        }
        let fit = if hs.len() >= 3 {
            Some(fit_inverse_sqrt(&hs, &estimates.iter().map(|e| e.mean).collect::<Vec<_>>())?)
        } else {
            None
        };
        let ests: Vec<EstimateJson> = estimates
            .iter()
            .map(|e| EstimateJson {
                h: e.h.value(),
                mean: e.mean,
                std_error: e.std_error,
                runs: e.runs,
            })
            .collect();
        per_sigma.push(json!({ "sigma": sigma, "estimates": ests, "fit": fit_json(fit) }));
    }
    ctx.out.write_csv("estimates.csv", &table)?;
    Ok(json!({ "beta": cfg.beta, "per_sigma": per_sigma }))
}

fn dimension(ctx: &mut Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    let n = cfg.points - 1;
    let dt = 1.0 / n as f64;
    let mut table = Table::new(["h", "path", "dimension"]);
    let mut per_h = Vec::new();
    for (i, h) in cfg.hs.iter().filter_map(|h| h.hurst()).enumerate() {
        let sampler = FgnSampler::new(n, h, cfg.method)?;
        let dims = ctx
            .pool
            .map(cfg.runs, |r| {
                let fgn = sampler.sample(ctx.seed(&[i as u64, r as u64]));
                box_counting_dimension(&fgn_to_path(&fgn, dt)?)
            })
            .into_iter()
            .collect::<fraclab_core::Result<Vec<f64>>>()?;
        for (r, d) in dims.iter().enumerate() {
            table.push(vec![fmt_f64(h.value()), r.to_string(), fmt_f64(*d)]);
        }
        let (mean, var) = mean_var(&dims);
        per_h.push(json!({
            "h": h.value(),
            "paths": dims.len(),
            "mean": mean,
            "std_error": (var / dims.len() as f64).sqrt(),
            "expected": 2.0 - h.value(),
        }));
    }
    ctx.out.write_csv("dimension.csv", &table)?;
    Ok(json!({ "points": cfg.points, "per_h": per_h }))
}

//! The fPGD optimizer family:
//!
//! `x_{n+1} = x_n − η ∇f(x_n) + σ [B^H_{η(n+1)} − B^H_{ηn}]`
//!
//! PGD is `H = 1/2`; Anti-PGD (the `H ↓ 0` limit) replaces the fBM increment
//! by `ζ_{n+1} − ζ_n` with `ζ` i.i.d. standard normal.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::noise::{FgnMethod, FgnSampler, HurstParameter};
use crate::objectives::Objective;
use crate::seed::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationKind {
    Fractional(HurstParameter),
    AntiWhite,
}

impl PerturbationKind {
    /// Hurst exponent, `0` for the anti-correlated white limit.
    pub fn hurst_value(&self) -> f64 {
        match self {
            Self::Fractional(h) => h.value(),
            Self::AntiWhite => 0.0,
        }
    }
}

/// How one step of the driving fBM is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseScaling {
    /// Increments over physical time `η`: unit-spacing fGN times `η^H`.
    #[default]
    PhysicalTime,
    /// Unit-spacing fGN, every step has variance `σ²` whatever `H`.
    UnitSpacing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub eta: f64,
    pub sigma: f64,
    pub steps: usize,
    pub init: Vec<f64>,
    /// Use `σ·N^{−H}` so the summed perturbation has variance `σ²` for every `H`.
    pub normalize_variance: bool,
    pub scaling: NoiseScaling,
    pub method: FgnMethod,
}

impl RunConfig {
    pub fn new(eta: f64, sigma: f64, steps: usize, init: Vec<f64>) -> Self {
        Self {
            eta,
            sigma,
            steps,
            init,
            normalize_variance: false,
            scaling: NoiseScaling::PhysicalTime,
            method: FgnMethod::Circulant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidArgument("eta must be finite and positive"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument("sigma must be finite and non-negative"));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1"));
        }
        if !self.init.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("initial point must be finite"));
        }
        Ok(())
    }

    /// `σ`, or `σ·N^{−H}` with variance normalisation.
    pub fn effective_sigma(&self, kind: PerturbationKind) -> f64 {
        if self.normalize_variance {
            self.sigma * math::powf(self.steps as f64, -kind.hurst_value())
        } else {
            self.sigma
        }
    }

    /// Factor multiplying one unit-spacing noise draw.
    pub fn step_noise_scale(&self, kind: PerturbationKind) -> f64 {
        let s = self.effective_sigma(kind);
        match (kind, self.scaling) {
            (PerturbationKind::Fractional(h), NoiseScaling::PhysicalTime) => s * math::powf(self.eta, h.value()),
            _ => s,
        }
    }
}

/// Iterates and losses of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    /// Row-major `(len × dim)`.
    pub iterates: Vec<f64>,
    pub losses: Vec<f64>,
    pub diverged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn iterate(&self, k: usize) -> &[f64] {
        &self.iterates[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.iterates.chunks_exact(self.dim.max(1))
    }

    pub fn last(&self) -> &[f64] {
        self.iterate(self.len() - 1)
    }
}

/// Outcome of a streamed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    /// Index of the last finite iterate.
    pub last_step: usize,
    pub diverged: bool,
}

/// fPGD with its noise sampler prepared once for a given configuration.
pub struct Fpgd<O> {
    objective: O,
    cfg: RunConfig,
    kind: PerturbationKind,
    sampler: Option<FgnSampler>,
    noise_scale: f64,
}

impl<O: Objective> Fpgd<O> {
    pub fn new(objective: O, cfg: RunConfig, kind: PerturbationKind) -> Result<Self> {
        cfg.validate()?;
        if objective.dim() != cfg.init.len() {
            return Err(Error::DimensionMismatch {
                expected: objective.dim(),
                got: cfg.init.len(),
            });
        }
        let sampler = match kind {
            PerturbationKind::Fractional(h) if cfg.sigma > 0.0 => Some(FgnSampler::new(cfg.steps, h, cfg.method)?),
            _ => None,
        };
        let noise_scale = cfg.step_noise_scale(kind);
        Ok(Self { objective, cfg, kind, sampler, noise_scale })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    /// Per-coordinate perturbations, coordinate-major `(d × N)`.
    ///
    /// Coordinate `i` draws from `seed.derive(i)`.
    pub fn perturbations(&self, seed: SeedStream) -> Vec<f64> {
        let d = self.objective.dim();
        let n = self.cfg.steps;
        let mut out = vec![0.0; d * n];
        if self.cfg.sigma == 0.0 {
            return out;
        }
        for (i, row) in out.chunks_exact_mut(n).enumerate() {
            let stream = seed.derive(i as u64);
            match self.kind {
                PerturbationKind::Fractional(_) => {
                    if let Some(sampler) = &self.sampler {
                        sampler.sample_into(stream, row);
                    }
                }
                PerturbationKind::AntiWhite => {
                    let mut g = stream.gaussian();
                    let mut prev = g.draw();
                    for v in row.iter_mut() {
                        let next = g.draw();
                        *v = next - prev;
                        prev = next;
                    }
                }
            }
            for v in row.iter_mut() {
                *v *= self.noise_scale;
            }
        }
        out
    }

    /// Runs once, calling `visit(k, x_k, f(x_k))` for every finite iterate.
    pub fn run_with(&self, seed: SeedStream, mut visit: impl FnMut(usize, &[f64], f64)) -> RunSummary {
        let d = self.objective.dim();
        let n = self.cfg.steps;
        let eta = self.cfg.eta;
        let noise = self.perturbations(seed);
        let mut x = self.cfg.init.clone();
        let mut grad = vec![0.0; d];

        visit(0, &x, self.objective.value(&x));
        for k in 0..n {
            self.objective.gradient_into(&x, &mut grad);
            for i in 0..d {
                x[i] += -eta * grad[i] + noise[i * n + k];
            }
            let loss = self.objective.value(&x);
            if !loss.is_finite() || !x.iter().all(|v| v.is_finite()) {
                return RunSummary { last_step: k, diverged: true };
            }
            visit(k + 1, &x, loss);
        }
        RunSummary { last_step: n, diverged: false }
    }

    pub fn run(&self, seed: SeedStream) -> Trajectory {
        let d = self.objective.dim();
        let mut iterates = Vec::with_capacity(d * (self.cfg.steps + 1));
        let mut losses = Vec::with_capacity(self.cfg.steps + 1);
        let summary = self.run_with(seed, |_, x, loss| {
            iterates.extend_from_slice(x);
            losses.push(loss);
        });
        Trajectory { dim: d, iterates, losses, diverged: summary.diverged }
    }
}

pub fn run_fpgd<O: Objective>(obj: O, cfg: &RunConfig, kind: PerturbationKind, seed: SeedStream) -> Result<Trajectory> {
    Ok(Fpgd::new(obj, cfg.clone(), kind)?.run(seed))
}

/// Perturbed gradient descent: fPGD at `H = 1/2`.
pub fn run_pgd<O: Objective>(obj: O, cfg: &RunConfig, seed: SeedStream) -> Result<Trajectory> {
    run_fpgd(obj, cfg, PerturbationKind::Fractional(HurstParameter::BROWNIAN), seed)
}

/// Anti-PGD: perturbations `σ(ζ_{n+1} − ζ_n)`.
pub fn run_anti_pgd<O: Objective>(obj: O, cfg: &RunConfig, seed: SeedStream) -> Result<Trajectory> {
    run_fpgd(obj, cfg, PerturbationKind::AntiWhite, seed)
}

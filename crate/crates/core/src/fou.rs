//! Fractional Ornstein–Uhlenbeck process `dX = A X dt + σ dB^H`.
//!
//! The scalar case stores `A = [β]`, i.e. `dX = βX dt`; a mean-reverting
//! process has `β < 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::noise::{FgnMethod, FgnSampler, HurstParameter};
use crate::quad;
use crate::seed::SeedStream;

/// Absolute tolerance used by [`fou_increment_variance`].
pub const VARIANCE_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FouSystem {
    pub drift: DenseMatrix,
    pub sigma: f64,
    pub init: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
    pub h: HurstParameter,
}

impl FouSystem {
    pub fn new(drift: DenseMatrix, sigma: f64, init: Vec<f64>, horizon: f64, steps: usize, h: HurstParameter) -> Result<Self> {
        let sys = Self { drift, sigma, init, horizon, steps, h };
        sys.validate()?;
        Ok(sys)
    }

    /// One-dimensional system `dX = βX dt + σ dB^H`, `X_0 = x0`.
    pub fn scalar(beta: f64, sigma: f64, x0: f64, horizon: f64, steps: usize, h: HurstParameter) -> Result<Self> {
        Self::new(DenseMatrix::scalar(beta), sigma, vec![x0], horizon, steps, h)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.drift.is_square() {
            return Err(Error::InvalidArgument("drift matrix must be square"));
        }
        if self.drift.rows() != self.init.len() {
            return Err(Error::DimensionMismatch {
                expected: self.drift.rows(),
                got: self.init.len(),
            });
        }
        if !self.drift.is_finite() || !self.init.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("drift and initial state must be finite"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument("sigma must be finite and non-negative"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument("horizon must be finite and positive"));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.init.len()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// The same system with the noise switched off.
    pub fn noise_free(&self) -> Self {
        Self { sigma: 0.0, ..self.clone() }
    }
}

/// Simulated states on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    pub times: Vec<f64>,
    /// `(n + 1) × d`.
    pub states: DenseMatrix,
}

impl PathMatrix {
    pub fn state(&self, k: usize) -> &[f64] {
        self.states.row(k)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Euler–Maruyama simulator with the fGN sampler prepared once.
pub struct FouSimulator {
    system: FouSystem,
    sampler: FgnSampler,
    noise_scale: f64,
}

impl FouSimulator {
    pub fn new(system: FouSystem) -> Result<Self> {
        Self::with_method(system, FgnMethod::Circulant)
    }

    pub fn with_method(system: FouSystem, method: FgnMethod) -> Result<Self> {
        system.validate()?;
        let sampler = FgnSampler::new(system.steps, system.h, method)?;
        let noise_scale = system.sigma * math::powf(system.dt(), system.h.value());
        Ok(Self { system, sampler, noise_scale })
    }

    pub fn system(&self) -> &FouSystem {
        &self.system
    }

    /// Runs one replicate, handing each grid state to `visit(k, state)`.
    ///
    /// With `centered` the visitor sees `X_k − E[X_k]`, where the mean is
    /// the noise-free iterate of the same scheme. Coordinate `i` is driven
    /// by the fGN stream `seed.derive(i)`.
    pub fn simulate_with(&self, seed: SeedStream, centered: bool, mut visit: impl FnMut(usize, &[f64])) -> Result<()> {
        let sys = &self.system;
        let d = sys.dim();
        let n = sys.steps;
        let dt = sys.dt();

        let mut noise = vec![0.0; d * n];
        if sys.sigma > 0.0 {
            for (i, chunk) in noise.chunks_exact_mut(n).enumerate() {
                self.sampler.sample_into(seed.derive(i as u64), chunk);
            }
        }

        let diag = sys.drift.diagonal_if_diagonal();
        let mut x = sys.init.clone();
        let mut mean = sys.init.clone();
        let mut ax = vec![0.0; d];
        let mut view = vec![0.0; d];

        let emit = |k: usize, x: &[f64], mean: &[f64], view: &mut [f64], visit: &mut dyn FnMut(usize, &[f64])| {
            if centered {
                for ((v, a), b) in view.iter_mut().zip(x).zip(mean) {
                    *v = a - b;
                }
                visit(k, view);
            } else {
                visit(k, x);
            }
        };
        emit(0, &x, &mean, &mut view, &mut visit);

        for k in 0..n {
            apply_drift(&sys.drift, diag.as_deref(), &x, &mut ax);
            for i in 0..d {
                x[i] += dt * ax[i] + self.noise_scale * noise[i * n + k];
            }
            if centered {
                apply_drift(&sys.drift, diag.as_deref(), &mean, &mut ax);
                for i in 0..d {
                    mean[i] += dt * ax[i];
                }
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::Diverged { step: k + 1 });
            }
            emit(k + 1, &x, &mean, &mut view, &mut visit);
        }
        Ok(())
    }

    pub fn simulate(&self, seed: SeedStream) -> Result<PathMatrix> {
        let d = self.system.dim();
        let n = self.system.steps;
        let mut states = DenseMatrix::zeros(n + 1, d);
        self.simulate_with(seed, false, |k, x| {
            for (i, v) in x.iter().enumerate() {
                states[(k, i)] = *v;
            }
        })?;
        Ok(PathMatrix {
            times: grid(self.system.horizon, n),
            states,
        })
    }
}

fn apply_drift(a: &DenseMatrix, diag: Option<&[f64]>, x: &[f64], out: &mut [f64]) {
    match diag {
        Some(diag) => {
            for ((o, d), v) in out.iter_mut().zip(diag).zip(x) {
                *o = d * v;
            }
        }
        None => a.mul_vec_into(x, out),
    }
}

fn grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| if k == n { horizon } else { horizon * k as f64 / n as f64 })
        .collect()
}

/// One Euler–Maruyama path of `system` (circulant fGN).
pub fn simulate_fou(system: &FouSystem, seed: SeedStream) -> Result<PathMatrix> {
    FouSimulator::new(system.clone())?.simulate(seed)
}

/// Subtracts the noise-free path of `system` from `path`.
pub fn centered_path(path: &PathMatrix, system: &FouSystem) -> Result<PathMatrix> {
    let d = system.dim();
    if path.states.cols() != d || path.len() != system.steps + 1 {
        return Err(Error::DimensionMismatch {
            expected: system.steps + 1,
            got: path.len(),
        });
    }
    let mean = simulate_fou(&system.noise_free(), SeedStream::root(0))?;
    let mut states = path.states.clone();
    for k in 0..path.len() {
        for i in 0..d {
            states[(k, i)] -= mean.states[(k, i)];
        }
    }
    Ok(PathMatrix {
        times: path.times.clone(),
        states,
    })
}

/// Increment variance `Var[X_t − X_s]` of the scalar process started at 0,
/// from the two-integral representation
///
/// `σ²H e^{2βt} ∫₀^{t−s} z^{2H−1} e^{−βz} dz + σ²H e^{2βs} ∫₀^{t−s} z^{2H−1} e^{βz} dz`
///
/// with `β` the drift coefficient of `dX = βX dt + σ dB^H`. At `s = 0` this
/// is exactly `Var[X_t]`.
pub fn fou_increment_variance(t: f64, s: f64, beta: f64, sigma: f64, h: HurstParameter) -> Result<f64> {
    if !(s >= 0.0 && s <= t && t.is_finite()) {
        return Err(Error::InvalidArgument("need 0 <= s <= t"));
    }
    let tau = t - s;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let hv = h.value();
    let first = quad::integrate_power_weight(hv, |z| math::exp(-beta * z), tau, VARIANCE_QUAD_TOL)?;
    let second = quad::integrate_power_weight(hv, |z| math::exp(beta * z), tau, VARIANCE_QUAD_TOL)?;
    Ok(sigma * sigma * hv * (math::exp(2.0 * beta * t) * first.value + math::exp(2.0 * beta * s) * second.value))
}

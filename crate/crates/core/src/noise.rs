//! Fractional Gaussian noise and fractional Brownian motion.
//!
//! Noise is always generated at unit spacing and rescaled by `dt^H`, which is
//! exact by self-similarity. Two exact samplers are provided:
//!
//! * [`FgnMethod::Cholesky`] factors the `n × n` Toeplitz covariance once
//!   (capped at [`DEFAULT_CHOLESKY_CAP`]) and is the reference sampler.
//! * [`FgnMethod::Circulant`] embeds the covariance in a `2n` circulant whose
//!   eigenvalues come from one FFT; each draw costs one more FFT.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::PackedCholesky;
use crate::math;
use crate::seed::SeedStream;

pub const DEFAULT_CHOLESKY_CAP: usize = 4096;

/// Negative circulant eigenvalues smaller than this fraction of the largest
/// one are treated as round-off and clamped to zero.
pub const CIRCULANT_NEGATIVE_TOLERANCE: f64 = 1e-10;

/// Hurst exponent, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstParameter(f64);

impl HurstParameter {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::InvalidHurst(h))
        }
    }

    /// Standard Brownian motion.
    pub const BROWNIAN: Self = Self(0.5);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HurstParameter {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

/// `E[B^H(t) B^H(s)]`.
pub fn fbm_cov(t: f64, s: f64, h: HurstParameter) -> f64 {
    let p = 2.0 * h.value();
    0.5 * (math::abs_pow(t, p) + math::abs_pow(s, p) - math::abs_pow(t - s, p))
}

/// Autocovariance of unit-spacing fGN at lag `k`.
pub fn fgn_autocov(k: usize, h: HurstParameter) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let p = 2.0 * h.value();
    let k = k as f64;
    0.5 * (math::powf(k + 1.0, p) - 2.0 * math::powf(k, p) + math::abs_pow(k - 1.0, p))
}

/// First `n` autocovariances `γ(0), …, γ(n-1)`.
pub fn fgn_autocov_row(n: usize, h: HurstParameter) -> Vec<f64> {
    (0..n).map(|k| fgn_autocov(k, h)).collect()
}

/// Unit-spacing fGN draws.
#[derive(Debug, Clone, PartialEq)]
pub struct FgnSequence {
    pub h: HurstParameter,
    pub values: Vec<f64>,
}

/// fBM sampled on the grid `{k·dt}`, `values[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub h: HurstParameter,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl FbmPath {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FgnMethod {
    Cholesky,
    Circulant,
}

impl core::str::FromStr for FgnMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Self::Cholesky),
            "circulant" => Ok(Self::Circulant),
            _ => Err(Error::InvalidArgument("method must be `cholesky` or `circulant`")),
        }
    }
}

impl core::fmt::Display for FgnMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Self::Cholesky => "cholesky",
            Self::Circulant => "circulant",
        })
    }
}

enum Backend {
    Cholesky(PackedCholesky),
    #[cfg(feature = "std")]
    Circulant(circulant::Embedding),
}

/// A prepared sampler for fGN of fixed length and Hurst parameter.
///
/// Preparation (factorisation or eigenvalue FFT) happens once; [`sample`]
/// is then pure in its seed and can be shared across threads.
///
/// [`sample`]: FgnSampler::sample
pub struct FgnSampler {
    n: usize,
    h: HurstParameter,
    backend: Backend,
}

impl FgnSampler {
    pub fn new(n: usize, h: HurstParameter, method: FgnMethod) -> Result<Self> {
        match method {
            FgnMethod::Cholesky => Self::cholesky_with_cap(n, h, DEFAULT_CHOLESKY_CAP),
            FgnMethod::Circulant => Self::circulant(n, h),
        }
    }

    pub fn cholesky_with_cap(n: usize, h: HurstParameter, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("fGN length must be at least 1"));
        }
        if n > cap {
            return Err(Error::CholeskyCapExceeded { n, cap });
        }
        let factor = PackedCholesky::toeplitz(&fgn_autocov_row(n, h))?;
        Ok(Self {
            n,
            h,
            backend: Backend::Cholesky(factor),
        })
    }

    #[cfg(feature = "std")]
    pub fn circulant(n: usize, h: HurstParameter) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("fGN length must be at least 1"));
        }
        Ok(Self {
            n,
            h,
            backend: Backend::Circulant(circulant::Embedding::new(n, h)?),
        })
    }

    #[cfg(not(feature = "std"))]
    pub fn circulant(_n: usize, _h: HurstParameter) -> Result<Self> {
        Err(Error::MethodUnavailable)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> HurstParameter {
        self.h
    }

    pub fn method(&self) -> FgnMethod {
        match self.backend {
            Backend::Cholesky(_) => FgnMethod::Cholesky,
            #[cfg(feature = "std")]
            Backend::Circulant(_) => FgnMethod::Circulant,
        }
    }

    /// Writes one draw of length `n` into `out`.
    pub fn sample_into(&self, seed: SeedStream, out: &mut [f64]) {
        assert_eq!(out.len(), self.n, "output buffer length");
        let mut gauss = seed.gaussian();
        match &self.backend {
            Backend::Cholesky(factor) => {
                let mut z = vec![0.0; self.n];
                gauss.fill(&mut z);
                factor.mul_lower_into(&z, out);
            }
            #[cfg(feature = "std")]
            Backend::Circulant(emb) => emb.sample_into(&mut gauss, out),
        }
    }

    pub fn sample(&self, seed: SeedStream) -> FgnSequence {
        let mut values = vec![0.0; self.n];
        self.sample_into(seed, &mut values);
        FgnSequence { h: self.h, values }
    }
}

/// One fGN draw of length `n`.
pub fn sample_fgn(n: usize, h: HurstParameter, seed: SeedStream, method: FgnMethod) -> Result<FgnSequence> {
    Ok(FgnSampler::new(n, h, method)?.sample(seed))
}

/// Cumulates unit-spacing fGN into fBM on the grid `{k·dt}`.
pub fn fgn_to_path(fgn: &FgnSequence, dt: f64) -> Result<FbmPath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument("dt must be finite and positive"));
    }
    let scale = math::powf(dt, fgn.h.value());
    let mut values = Vec::with_capacity(fgn.values.len() + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for x in &fgn.values {
        acc += x;
        values.push(scale * acc);
    }
    Ok(FbmPath { h: fgn.h, dt, values })
}

#[cfg(feature = "std")]
mod circulant {
    use std::sync::Arc;

    use rustfft::num_complex::Complex64;
    use rustfft::{Fft, FftPlanner};

    use super::{fgn_autocov, HurstParameter, CIRCULANT_NEGATIVE_TOLERANCE};
    use crate::error::{Error, Result};
    use crate::math;
    use crate::seed::GaussianSource;

    pub(super) struct Embedding {
        n: usize,
        /// `sqrt(λ_k / m)` for the `m = 2n` circulant eigenvalues.
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    }

    impl Embedding {
        pub(super) fn new(n: usize, h: HurstParameter) -> Result<Self> {
            let m = 2 * n;
            // First row: γ(0..=n), then γ(n-1..=1) mirrored.
            let mut row: Vec<Complex64> = (0..=n).map(|k| Complex64::new(fgn_autocov(k, h), 0.0)).collect();
            row.extend((1..n).rev().map(|k| Complex64::new(fgn_autocov(k, h), 0.0)));
            debug_assert_eq!(row.len(), m);

            let mut planner = FftPlanner::<f64>::new();
            let fft = planner.plan_fft_forward(m);
            fft.process(&mut row);

            let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
            let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
            if min < -CIRCULANT_NEGATIVE_TOLERANCE * max {
                return Err(Error::NegativeEigenvalue { value: min, max });
            }
            let scale = row.iter().map(|c| math::sqrt(c.re.max(0.0) / m as f64)).collect();
            Ok(Self { n, scale, fft })
        }

        pub(super) fn sample_into(&self, gauss: &mut GaussianSource, out: &mut [f64]) {
            let mut buf: Vec<Complex64> = self
                .scale
                .iter()
                .map(|s| {
                    let re = gauss.draw();
                    let im = gauss.draw();
                    Complex64::new(s * re, s * im)
                })
                .collect();
            self.fft.process(&mut buf);
            for (o, c) in out.iter_mut().zip(&buf[..self.n]) {
                *o = c.re;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> HurstParameter {
        HurstParameter::new(v).unwrap()
    }

    #[test]
    fn hurst_bounds_are_strict() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(HurstParameter::new(bad).is_err());
        }
        assert!(HurstParameter::new(1e-9).is_ok());
    }

    #[test]
    fn fbm_cov_examples() {
        assert_eq!(fbm_cov(1.0, 1.0, h(0.5)), 1.0);
        assert!((fbm_cov(2.0, 3.0, h(0.5)) - 2.0).abs() < 1e-15);
        for v in [0.1, 0.5, 0.9] {
            assert_eq!(fbm_cov(1.0, 0.0, h(v)), 0.0);
        }
    }

    #[test]
    fn fgn_autocov_examples() {
        assert_eq!(fgn_autocov(0, h(0.3)), 1.0);
        for k in 1..10 {
            assert!(fgn_autocov(k, h(0.5)).abs() < 1e-15);
        }
        let g = fgn_autocov(1, h(0.25));
        assert!((g - (libm::pow(2.0, -0.5) - 1.0)).abs() < 1e-15);
        assert!((g + 0.29289).abs() < 1e-5);
    }

    #[test]
    fn cholesky_cap_and_length_checked() {
        assert!(matches!(
            FgnSampler::cholesky_with_cap(10, h(0.5), 8),
            Err(Error::CholeskyCapExceeded { n: 10, cap: 8 })
        ));
        assert!(FgnSampler::new(0, h(0.5), FgnMethod::Cholesky).is_err());
    }

    #[test]
    fn single_draw_is_standard_normal_scale() {
        // n = 1: covariance is [1] so the draw is the raw normal.
        let a = sample_fgn(1, h(0.8), SeedStream::new(3, 1), FgnMethod::Cholesky).unwrap();
        let z = SeedStream::new(3, 1).gaussian().draw();
        assert_eq!(a.values, vec![z]);
    }

    #[test]
    fn path_rescaling() {
        let fgn = FgnSequence { h: h(0.3), values: vec![1.0, -2.0, 0.5] };
        let p = fgn_to_path(&fgn, 1.0).unwrap();
        assert_eq!(p.values, vec![0.0, 1.0, -1.0, -0.5]);
        let q = fgn_to_path(&fgn, 4.0).unwrap();
        let s = libm::pow(4.0, 0.3);
        assert!((q.values[1] - s).abs() < 1e-15);
        let zeros = FgnSequence { h: h(0.3), values: vec![0.0; 5] };
        assert!(fgn_to_path(&zeros, 0.1).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(fgn_to_path(&fgn, 0.0).is_err());
    }

    #[cfg(feature = "std")]
    #[test]
    fn circulant_eigenvalues_nonnegative_over_grid() {
        for v in [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            for n in [1, 2, 3, 17, 256, 1000] {
                FgnSampler::circulant(n, h(v)).unwrap();
            }
        }
    }

    #[cfg(feature = "std")]
    #[test]
    fn determinism_both_methods() {
        for m in [FgnMethod::Cholesky, FgnMethod::Circulant] {
            let a = sample_fgn(512, h(0.3), SeedStream::new(9, 2), m).unwrap();
            let b = sample_fgn(512, h(0.3), SeedStream::new(9, 2), m).unwrap();
            assert_eq!(a, b);
            let c = sample_fgn(512, h(0.3), SeedStream::new(9, 3), m).unwrap();
            assert_ne!(a, c);
        }
    }
}

//! Test landscapes with analytic gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::seed::SeedStream;

/// A differentiable landscape of fixed dimension.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        g
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
}

impl<T: Objective + ?Sized> Objective for alloc::boxed::Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
}

/// `½ xᵀ M x + λ Σ x_i⁴`; `λ = 0` gives the plain quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedQuadratic {
    m: DenseMatrix,
    sym: DenseMatrix,
    diag: Option<Vec<f64>>,
    lambda: f64,
}

impl RegularizedQuadratic {
    pub fn new(m: DenseMatrix, lambda: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument("matrix must be square"));
        }
        if !m.is_finite() || !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidArgument("matrix and lambda must be finite, lambda >= 0"));
        }
        let sym = m.symmetric_part();
        let diag = m.diagonal_if_diagonal();
        Ok(Self { m, sym, diag, lambda })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Objective for RegularizedQuadratic {
    fn dim(&self) -> usize {
        self.m.rows()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let quad = match &self.diag {
            Some(d) => d.iter().zip(x).map(|(a, v)| a * v * v).sum(),
            None => self.m.quadratic_form(x),
        };
        let quartic: f64 = x.iter().map(|v| v * v * v * v).sum();
        0.5 * quad + self.lambda * quartic
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.diag {
            Some(d) => {
                for ((o, a), v) in out.iter_mut().zip(d).zip(x) {
                    *o = a * v;
                }
            }
            None => self.sym.mul_vec_into(x, out),
        }
        if self.lambda != 0.0 {
            for (o, v) in out.iter_mut().zip(x) {
                *o += 4.0 * self.lambda * v * v * v;
            }
        }
    }
}

/// `½ xᵀ A x` with gradient `½(A + Aᵀ) x`.
pub fn quadratic(a: DenseMatrix) -> Result<RegularizedQuadratic> {
    RegularizedQuadratic::new(a, 0.0)
}

pub fn regularized_quadratic(m: DenseMatrix, lambda: f64) -> Result<RegularizedQuadratic> {
    RegularizedQuadratic::new(m, lambda)
}

/// Diagonal `M` with entries `U[0, 1]`, the `num_negative` smallest negated.
pub fn make_embedded_saddle(d: usize, num_negative: usize, lambda: f64, seed: SeedStream) -> Result<RegularizedQuadratic> {
    if num_negative == 0 || num_negative > d {
        return Err(Error::InvalidArgument("need 0 < num_negative <= d"));
    }
    let mut source = seed.gaussian();
    let mut diag: Vec<f64> = (0..d).map(|_| source.next_uniform()).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    for &i in &order[..num_negative] {
        diag[i] = -diag[i];
    }
    RegularizedQuadratic::new(DenseMatrix::from_diagonal(&diag), lambda)
}

/// `½ Σ (x_i⁴ − 16 x_i² + 5 x_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StyblinskiTang {
    dim: usize,
}

impl StyblinskiTang {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    /// Per-coordinate value `½(x⁴ − 16x² + 5x)`.
    pub fn coordinate_value(x: f64) -> f64 {
        0.5 * (x * x * x * x - 16.0 * x * x + 5.0 * x)
    }

    /// Per-coordinate derivative `2x³ − 16x + 2.5`.
    pub fn coordinate_derivative(x: f64) -> f64 {
        2.0 * x * x * x - 16.0 * x + 2.5
    }

    /// Roots of the per-coordinate derivative in increasing order: the deep
    /// minimum, the local maximum, the shallow minimum.
    pub fn coordinate_stationary_points() -> [f64; 3] {
        let f = Self::coordinate_derivative;
        [bisect(f, -4.0, -2.0), bisect(f, -1.0, 1.0), bisect(f, 2.0, 4.0)]
    }
}

pub fn styblinski_tang_2d() -> StyblinskiTang {
    StyblinskiTang::new(2)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-15 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Objective for StyblinskiTang {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| Self::coordinate_value(*v)).sum()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = Self::coordinate_derivative(*v);
        }
    }
}

/// Parameters of the piecewise-quadratic double well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiStableParams {
    pub v0: f64,
    pub v1: f64,
    pub v2: f64,
    pub a: f64,
    pub c: f64,
    pub m: f64,
    pub k0: f64,
}

impl BiStableParams {
    /// Left curvature used when none is given.
    pub const DEFAULT_K0: f64 = 1.0;

    pub fn new(v0: f64, v1: f64, v2: f64, a: f64, c: f64, m: f64) -> Self {
        Self { v0, v1, v2, a, c, m, k0: Self::DEFAULT_K0 }
    }

    pub fn with_k0(self, k0: f64) -> Self {
        Self { k0, ..self }
    }

    /// Shallow-to-deep landscape.
    pub fn shallow_deep() -> Self {
        Self::new(0.0, 45.0, -12.5, 3.5, 13.9, 18.0)
    }

    /// Sharp-to-flat landscape with equal depths.
    pub fn sharp_flat() -> Self {
        Self::new(0.0, 30.0, 0.0, 1.2, 8.7, 15.0)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.c)
    }

    /// Value at the left seam, shared by all three pieces.
    fn seam_value(&self) -> f64 {
        self.v0 + 0.5 * self.k0 * self.a * self.a
    }

    /// Middle curvature from continuity at `a` (and, by symmetry, at `c`).
    pub fn k1(&self) -> f64 {
        let half = 0.5 * (self.c - self.a);
        2.0 * (self.v1 - self.seam_value()) / (half * half)
    }

    /// Right curvature from continuity at `c`.
    pub fn k2(&self) -> f64 {
        let dist = self.c - self.m;
        2.0 * (self.seam_value() - self.v2) / (dist * dist)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiStable {
    params: BiStableParams,
    k1: f64,
    k2: f64,
}

pub fn bistable(params: BiStableParams) -> Result<BiStable> {
    let p = params;
    let finite = [p.v0, p.v1, p.v2, p.a, p.c, p.m, p.k0].iter().all(|v| v.is_finite());
    if !finite || !(p.k0 > 0.0) {
        return Err(Error::InvalidArgument("bi-stable parameters must be finite with k0 > 0"));
    }
    if !(0.0 < p.a && p.a < p.c && p.c < p.m) {
        return Err(Error::InvalidArgument("bi-stable breakpoints need 0 < a < c < m"));
    }
    let (k1, k2) = (p.k1(), p.k2());
    if !(k1 > 0.0 && k2 > 0.0) {
        return Err(Error::InvalidArgument("derived curvatures k1, k2 must be positive"));
    }
    Ok(BiStable { params, k1, k2 })
}

impl BiStable {
    pub fn params(&self) -> &BiStableParams {
        &self.params
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let p = &self.params;
        if x <= p.a {
            p.v0 + 0.5 * p.k0 * x * x
        } else if x <= p.c {
            let u = x - p.midpoint();
            p.v1 - 0.5 * self.k1 * u * u
        } else {
            let u = x - p.m;
            p.v2 + 0.5 * self.k2 * u * u
        }
    }

    /// Piecewise derivative; at the seams the left limit is used.
    pub fn derivative_at(&self, x: f64) -> f64 {
        let p = &self.params;
        if x <= p.a {
            p.k0 * x
        } else if x <= p.c {
            -self.k1 * (x - p.midpoint())
        } else {
            self.k2 * (x - p.m)
        }
    }
}

impl Objective for BiStable {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.value_at(x[0])
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.derivative_at(x[0]);
    }
}

/// Central differences `(f(x + εe_i) − f(x − εe_i)) / 2ε`.
pub fn finite_diff_gradient(obj: &(impl Objective + ?Sized), x: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive"));
    }
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            probe[i] = x[i] + eps;
            let up = obj.value(&probe);
            probe[i] = x[i] - eps;
            let down = obj.value(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * eps)
        })
        .collect())
}

/// Largest relative deviation between the analytic and central-difference
/// gradients, relative to `max(1, ‖∇f‖_∞)`.
pub fn gradient_check(obj: &(impl Objective + ?Sized), x: &[f64], eps: f64) -> Result<f64> {
    let fd = finite_diff_gradient(obj, x, eps)?;
    let g = obj.gradient(x);
    let scale = math::norm_inf(&g).max(1.0);
    Ok(g.iter().zip(&fd).map(|(a, b)| math::abs(a - b)).fold(0.0, f64::max) / scale)
}

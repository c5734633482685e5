//! Monte-Carlo statistics: expected suprema and their `1/√H` fit, hitting
//! times and their empirical CDFs, minima classification and the
//! box-counting dimension of sampled paths.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fou::{FouSimulator, FouSystem};
use crate::math;
use crate::noise::{FbmPath, HurstParameter};
use crate::objectives::StyblinskiTang;
use crate::optim::Trajectory;
use crate::seed::SeedStream;

/// Functional whose running supremum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupNorm {
    #[default]
    Euclidean,
    Max,
    /// The state itself; one-dimensional systems only.
    SignedScalar,
}

impl SupNorm {
    pub fn apply(&self, x: &[f64]) -> f64 {
        match self {
            Self::Euclidean => math::norm2(x),
            Self::Max => math::norm_inf(x),
            Self::SignedScalar => x[0],
        }
    }
}

impl core::str::FromStr for SupNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "max" => Ok(Self::Max),
            "signed_scalar" | "signed" => Ok(Self::SignedScalar),
            _ => Err(Error::InvalidArgument("norm must be euclidean, max or signed_scalar")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    pub h: HurstParameter,
    pub mean: f64,
    pub std_error: f64,
    pub runs: usize,
}

impl SupEstimate {
    pub fn from_samples(h: HurstParameter, samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("need at least two runs"));
        }
        let (mean, var) = mean_var(samples);
        Ok(Self {
            h,
            mean,
            std_error: math::sqrt(var / samples.len() as f64),
            runs: samples.len(),
        })
    }
}

/// Supremum over the grid of one replicate.
pub fn sup_sample(sim: &FouSimulator, seed: SeedStream, centered: bool, norm: SupNorm) -> Result<f64> {
    if norm == SupNorm::SignedScalar && sim.system().dim() != 1 {
        return Err(Error::InvalidArgument("signed_scalar supremum needs a one-dimensional system"));
    }
    let mut sup = f64::NEG_INFINITY;
    sim.simulate_with(seed, centered, |_, x| {
        let v = norm.apply(x);
        if v > sup {
            sup = v;
        }
    })?;
    Ok(sup)
}

/// `E[sup_t F(X_t)]` over `runs` replicates; replicate `r` uses `seed.derive(r)`.
pub fn expected_sup(system: &FouSystem, runs: usize, seed: SeedStream, centered: bool, norm: SupNorm) -> Result<SupEstimate> {
    if runs < 2 {
        return Err(Error::InvalidArgument("need at least two runs"));
    }
    let sim = FouSimulator::new(system.clone())?;
    let samples = (0..runs)
        .map(|r| sup_sample(&sim, seed.derive(r as u64), centered, norm))
        .collect::<Result<Vec<_>>>()?;
    SupEstimate::from_samples(system.h, &samples)
}

/// Least-squares fit `w0 + w1 / √H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub w0: f64,
    pub w1: f64,
    /// `‖residual‖₂ / ‖data‖₂`.
    pub rel_error: f64,
}

impl ScalingFit {
    pub fn predict(&self, h: f64) -> f64 {
        self.w0 + self.w1 / math::sqrt(h)
    }
}

pub fn fit_inverse_sqrt(h_grid: &[HurstParameter], estimates: &[f64]) -> Result<ScalingFit> {
    if h_grid.len() != estimates.len() {
        return Err(Error::DimensionMismatch {
            expected: h_grid.len(),
            got: estimates.len(),
        });
    }
    if h_grid.len() < 3 {
        return Err(Error::InvalidArgument("need at least three grid points"));
    }
    let xs: Vec<f64> = h_grid.iter().map(|h| 1.0 / math::sqrt(h.value())).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = estimates.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mut distinct: Vec<f64> = h_grid.iter().map(|h| h.value()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateDesign);
    }
    let sxy: f64 = xs.iter().zip(estimates).map(|(x, y)| (x - mx) * (y - my)).sum();
    let w1 = sxy / sxx;
    let w0 = my - w1 * mx;
    let resid: Vec<f64> = xs.iter().zip(estimates).map(|(x, y)| y - (w0 + w1 * x)).collect();
    let data_norm = math::norm2(estimates);
    let rel_error = if data_norm > 0.0 { math::norm2(&resid) / data_norm } else { 0.0 };
    Ok(ScalingFit { w0, w1, rel_error })
}

/// Target set for hitting times. Threshold regions test the first coordinate;
/// `Below(t)` is `x < t` and `Above(t)` is `x ≥ t`, so the two split the line.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Below(f64),
    Above(f64),
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("ball radius must be positive"));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius
            }
            Self::Below(t) => x[0] < *t,
            Self::Above(t) => x[0] >= *t,
        }
    }

    fn disjoint_from(&self, other: &Region) -> bool {
        use Region::*;
        match (self, other) {
            (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
                let d2: f64 = c1.iter().zip(c2).map(|(a, b)| (a - b) * (a - b)).sum();
                math::sqrt(d2) > r1 + r2
            }
            (Ball { center, radius }, Below(t)) | (Below(t), Ball { center, radius }) => center[0] - radius >= *t,
            (Ball { center, radius }, Above(t)) | (Above(t), Ball { center, radius }) => center[0] + radius < *t,
            (Below(lo), Above(hi)) | (Above(hi), Below(lo)) => lo <= hi,
            (Below(_), Below(_)) | (Above(_), Above(_)) => false,
        }
    }
}

/// Smallest `k` with `iterate[k] ∈ region`.
pub fn first_hitting(traj: &Trajectory, region: &Region) -> Option<usize> {
    traj.iter().position(|x| region.contains(x))
}

/// Smallest `k` with `iterate[k] ∉ region`.
pub fn first_exit(traj: &Trajectory, region: &Region) -> Option<usize> {
    traj.iter().position(|x| !region.contains(x))
}

/// First entry step per named region, `None` if never entered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingRecord {
    pub entries: Vec<(String, Option<usize>)>,
}

impl HittingRecord {
    pub fn new(labels: impl IntoIterator<Item = String>) -> Self {
        Self {
            entries: labels.into_iter().map(|l| (l, None)).collect(),
        }
    }

    /// Records step `k` for every region in `regions` (aligned with the
    /// labels) that contains `x` and has not been entered yet.
    pub fn observe(&mut self, k: usize, x: &[f64], regions: &[Region]) {
        for ((_, hit), region) in self.entries.iter_mut().zip(regions) {
            if hit.is_none() && region.contains(x) {
                *hit = Some(k);
            }
        }
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.entries.iter().find(|(l, _)| l == label).and_then(|(_, t)| *t)
    }
}

/// `F(k) = #{times ≤ k} / total` for `k = 0..=budget`; `None` counts as
/// beyond the budget.
pub fn empirical_cdf(times: &[Option<usize>], budget: usize) -> Result<Vec<(usize, f64)>> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1"));
    }
    let mut counts = vec![0usize; budget + 1];
    for t in times.iter().flatten() {
        if *t <= budget {
            counts[*t] += 1;
        }
    }
    let total = times.len();
    let mut acc = 0usize;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            acc += c;
            (k, if total == 0 { 0.0 } else { acc as f64 / total as f64 })
        })
        .collect())
}

/// The CDF reduced to step `0`, every step where it jumps, and `budget`.
pub fn cdf_breakpoints(cdf: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (i, &(k, p)) in cdf.iter().enumerate() {
        let changed = out.last().is_none_or(|&(_, q)| q != p);
        if i == 0 || changed || i + 1 == cdf.len() {
            out.push((k, p));
        }
    }
    out
}

pub const OUTSIDE: &str = "outside";

/// Named, pairwise disjoint regions. Labels may repeat (e.g. two `medium`
/// balls).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCatalog {
    entries: Vec<(String, Region)>,
}

impl RegionCatalog {
    pub fn new(entries: Vec<(String, Region)>) -> Result<Self> {
        for i in 0..entries.len() {
            for j in 0..i {
                if !entries[i].1.disjoint_from(&entries[j].1) {
                    return Err(Error::OverlappingRegions(entries[j].0.clone(), entries[i].0.clone()));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(String, Region)] {
        &self.entries
    }

    /// Label of the containing region, or [`OUTSIDE`].
    pub fn classify(&self, point: &[f64]) -> &str {
        self.entries
            .iter()
            .find(|(_, r)| r.contains(point))
            .map_or(OUTSIDE, |(l, _)| l.as_str())
    }
}

pub fn classify_minimum<'a>(point: &[f64], catalog: &'a RegionCatalog) -> &'a str {
    catalog.classify(point)
}

/// Balls around the four minima of the two-dimensional Styblinski–Tang
/// function, labelled `shallow`, `medium`, `medium`, `deep`.
pub fn styblinski_tang_catalog(radius: f64) -> Result<RegionCatalog> {
    let [deep, _, shallow] = StyblinskiTang::coordinate_stationary_points();
    RegionCatalog::new(vec![
        ("shallow".to_string(), Region::ball(vec![shallow, shallow], radius)?),
        ("medium".to_string(), Region::ball(vec![deep, shallow], radius)?),
        ("medium".to_string(), Region::ball(vec![shallow, deep], radius)?),
        ("deep".to_string(), Region::ball(vec![deep, deep], radius)?),
    ])
}

/// Minimum number of points a path needs for [`box_counting_dimension`].
pub const BOX_COUNT_MIN_POINTS: usize = 1 << 10;

/// Box-counting dimension of the graph `{(t, value)}`, both axes scaled to
/// `[0, 1]`.
///
/// At dyadic level `j` the time axis is cut into `2^j` columns and each
/// column contributes the number of `2^{-j}` boxes spanned by the path over
/// that column (endpoints shared with the next column, so the graph is
/// treated as connected). The dimension is the least-squares slope of
/// `log N` against `log 2^j`, dropping the two coarsest and two finest
/// levels.
pub fn box_counting_dimension(path: &FbmPath) -> Result<f64> {
    box_counting_dimension_of(&path.values)
}

pub fn box_counting_dimension_of(values: &[f64]) -> Result<f64> {
    if values.len() < BOX_COUNT_MIN_POINTS {
        return Err(Error::PathTooShort {
            min: BOX_COUNT_MIN_POINTS,
            got: values.len(),
        });
    }
    let segments = values.len() - 1;
    let finest = usize::BITS - 1 - segments.leading_zeros();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;

    let mut points = Vec::new();
    for level in 0..=finest {
        let cols = 1usize << level;
        let mut count = 0usize;
        for c in 0..cols {
            let start = c * segments / cols;
            let end = (c + 1) * segments / cols;
            let (mut cmin, mut cmax) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in &values[start..=end] {
                cmin = cmin.min(*v);
                cmax = cmax.max(*v);
            }
            let boxes = if span > 0.0 {
                let idx = |v: f64| (math::floor((v - lo) / span * cols as f64) as usize).min(cols - 1);
                idx(cmax) - idx(cmin) + 1
            } else {
                1
            };
            count += boxes;
        }
        points.push((level as f64 * core::f64::consts::LN_2, math::ln(count as f64)));
    }
    let window = &points[2..points.len() - 2];
    Ok(ls_slope(window))
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / na - j as f64 / nb));
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical_value(na: usize, nb: usize, alpha: f64) -> f64 {
    let c = math::sqrt(-0.5 * math::ln(alpha / 2.0));
    let (na, nb) = (na as f64, nb as f64);
    c * math::sqrt((na + nb) / (na * nb))
}

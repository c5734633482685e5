//! Statistical properties of the fPGD perturbations.

use fraclab_core::analysis::mean_var;
use fraclab_core::linalg::DenseMatrix;
use fraclab_core::objectives::quadratic;
use fraclab_core::optim::{Fpgd, NoiseScaling, PerturbationKind, RunConfig};
use fraclab_core::{HurstParameter, SeedStream};

fn flat_1d() -> fraclab_core::objectives::RegularizedQuadratic {
    quadratic(DenseMatrix::scalar(0.0)).unwrap()
}

/// Lag-one correlation estimate with a standard error across runs.
fn lag_one_correlation(kind: PerturbationKind, steps: usize, runs: u64) -> (f64, f64) {
    let cfg = RunConfig::new(0.01, 1.0, steps, vec![0.0]);
    let fpgd = Fpgd::new(flat_1d(), cfg, kind).unwrap();
    let per_run: Vec<f64> = (0..runs)
        .map(|r| {
            let p = fpgd.perturbations(SeedStream::new(77, r));
            let num: f64 = p.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (steps - 1) as f64;
            let den: f64 = p.iter().map(|v| v * v).sum::<f64>() / steps as f64;
            num / den
        })
        .collect();
    let (m, v) = mean_var(&per_run);
    (m, (v / runs as f64).sqrt())
}

#[test]
fn lag_one_correlation_matches_theory() {
    let (m, se) = lag_one_correlation(PerturbationKind::AntiWhite, 512, 400);
    assert!((m + 0.5).abs() <= 4.0 * se + 2e-3, "anti {m}");
    let mut last = f64::INFINITY;
    for hv in [0.25, 0.2, 0.1, 0.05] {
        let expect = 2f64.powf(2.0 * hv - 1.0) - 1.0;
        let (m, se) = lag_one_correlation(PerturbationKind::Fractional(HurstParameter::new(hv).unwrap()), 512, 400);
        assert!((m - expect).abs() <= 4.0 * se + 2e-3, "H={hv}: {m} vs {expect}");
        assert!(m < last);
        last = m;
    }
    assert!((2f64.powf(-0.5) - 1.0 + 0.2929).abs() < 1e-4);
}

fn terminal_displacements(cfg: &RunConfig, kind: PerturbationKind, runs: u64) -> Vec<f64> {
    let fpgd = Fpgd::new(flat_1d(), cfg.clone(), kind).unwrap();
    (0..runs)
        .map(|r| {
            let t = fpgd.run(SeedStream::new(3, r));
            t.last()[0] - cfg.init[0]
        })
        .collect()
}

fn assert_variance(xs: &[f64], expect: f64, what: &str) {
    let (_, v) = mean_var(xs);
    let se = expect * (2.0 / (xs.len() - 1) as f64).sqrt();
    assert!((v - expect).abs() <= 4.0 * se, "{what}: {v} vs {expect}");
}

#[test]
fn pgd_is_a_random_walk() {
    let cfg = RunConfig::new(0.01, 0.3, 200, vec![1.0]);
    let xs = terminal_displacements(&cfg, PerturbationKind::Fractional(HurstParameter::BROWNIAN), 3000);
    assert_variance(&xs, 200.0 * 0.09 * 0.01, "pgd");
}

#[test]
fn anti_pgd_telescopes() {
    let cfg = RunConfig::new(0.01, 0.3, 200, vec![0.0]);
    let xs = terminal_displacements(&cfg, PerturbationKind::AntiWhite, 3000);
    assert_variance(&xs, 2.0 * 0.09, "anti");
}

#[test]
fn normalized_variance_is_hurst_free() {
    for (eta, scaling) in [(1.0, NoiseScaling::PhysicalTime), (0.1, NoiseScaling::UnitSpacing)] {
        for hv in [0.3, 0.8] {
            let mut cfg = RunConfig::new(eta, 2.0, 300, vec![0.0]);
            cfg.normalize_variance = true;
            cfg.scaling = scaling;
            let xs = terminal_displacements(&cfg, PerturbationKind::Fractional(HurstParameter::new(hv).unwrap()), 2000);
            assert_variance(&xs, 4.0, "normalized");
        }
    }
}

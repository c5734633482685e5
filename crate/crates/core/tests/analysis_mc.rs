use fraclab_core::analysis::{box_counting_dimension, expected_sup, HittingRecord, Region, SupNorm};
use fraclab_core::fou::FouSystem;
use fraclab_core::noise::{fgn_to_path, sample_fgn, FgnMethod};
use fraclab_core::{HurstParameter, SeedStream};

fn h(v: f64) -> HurstParameter {
    HurstParameter::new(v).unwrap()
}

#[test]
fn standard_error_shrinks_with_runs() {
    let sys = FouSystem::scalar(0.5, 1.0, 0.0, 1.0, 256, h(0.4)).unwrap();
    let small = expected_sup(&sys, 800, SeedStream::root(1), true, SupNorm::Euclidean).unwrap();
    let large = expected_sup(&sys, 1600, SeedStream::root(2), true, SupNorm::Euclidean).unwrap();
    let ratio = large.std_error / small.std_error;
    assert!((0.6..=0.85).contains(&ratio), "{ratio}");
    assert!(small.mean > 0.0 && large.mean > 0.0);
}

#[test]
fn brownian_supremum_near_reflection_value() {
    let sys = FouSystem::scalar(0.0, 1.0, 0.0, 1.0, 2000, HurstParameter::BROWNIAN).unwrap();
    let est = expected_sup(&sys, 2000, SeedStream::root(3), false, SupNorm::SignedScalar).unwrap();
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    // The grid maximum sits below the continuous one by about 0.58·√Δ.
    let bias = 0.5826 * (1.0f64 / 2000.0).sqrt();
    assert!((est.mean + bias - exact).abs() <= 4.0 * est.std_error, "{}", est.mean);
}

#[test]
fn box_counting_tracks_roughness() {
    for hv in [0.2, 0.5, 0.8] {
        let mean: f64 = (0..5)
            .map(|r| {
                let fgn = sample_fgn(1 << 14, h(hv), SeedStream::new(8, r), FgnMethod::Circulant).unwrap();
                box_counting_dimension(&fgn_to_path(&fgn, 1.0).unwrap()).unwrap()
            })
            .sum::<f64>()
            / 5.0;
        assert!((mean - (2.0 - hv)).abs() <= 0.15, "H={hv}: {mean}");
    }
}

#[test]
fn hitting_record_keeps_first_entry() {
    let regions = [Region::Below(0.0), Region::Above(2.0)];
    let mut rec = HittingRecord::new(["lo".to_string(), "hi".to_string()]);
    for (k, x) in [1.0, -1.0, 3.0, -2.0, 2.5].iter().enumerate() {
        rec.observe(k, &[*x], &regions);
    }
    assert_eq!(rec.get("lo"), Some(1));
    assert_eq!(rec.get("hi"), Some(2));
    assert_eq!(rec.get("missing"), None);
}

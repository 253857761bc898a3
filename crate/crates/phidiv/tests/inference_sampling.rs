//! Sampling-based checks of the inference layer: the Wald test holds its
//! size at a nondegenerate null, and two-sample intervals behave across
//! unequal sizes.

use std::sync::Arc;

use phidiv::inference::{estimate, wald_test, Alternative, EstimateRequest};
use phidiv::measures::{divergence, MeasureKind};
use phidiv::pmf::{sample_counts, ProbabilityVector, SmoothingPolicy, Support};
use phidiv::rng::derive_seed;

fn reference_pair() -> (ProbabilityVector, ProbabilityVector) {
    let s = Arc::new(Support::new(["c1", "c2", "c3"]).unwrap());
    (
        ProbabilityVector::new(Arc::clone(&s), vec![0.4, 0.25, 0.35]).unwrap(),
        ProbabilityVector::new(s, vec![0.27, 0.32, 0.41]).unwrap(),
    )
}

#[test]
fn wald_test_holds_its_size_at_the_true_value() {
    let (p, q) = reference_pair();
    let kind: MeasureKind = "kl".parse().unwrap();
    let truth = divergence(kind, &p, &q).unwrap();
    let n = 20_000;
    let replications = 2000u64;
    let mut rejections = 0;
    for k in 0..replications {
        let pc = sample_counts(&p, n, derive_seed(101, &[k, 0])).unwrap();
        let qc = sample_counts(&q, n, derive_seed(101, &[k, 1])).unwrap();
        let est = estimate(&EstimateRequest::two_sample(
            kind,
            pc,
            qc,
            SmoothingPolicy::Strict,
        ))
        .unwrap();
        let result = wald_test(&est, truth, Alternative::TwoSided, 0.95).unwrap();
        if result.p_value.unwrap() < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / replications as f64;
    assert!(
        (0.03..=0.07).contains(&rate),
        "type-I error rate {rate} outside 0.05 ± 0.02"
    );
}

#[test]
fn two_sample_statistic_is_normal_at_unequal_sizes() {
    // The two-sample scaling sqrt(nm / (m·Vp + n·Vq)) must standardize the
    // error for arbitrary size ratios, not just n = m.
    let (p, q) = reference_pair();
    let kind: MeasureKind = "kl".parse().unwrap();
    let truth = divergence(kind, &p, &q).unwrap();
    let (vp, vq) = phidiv::measures::variance_components(kind, &p, &q).unwrap();
    let (n, m) = (30_000usize, 10_000usize);
    let scale = ((n * m) as f64 / (m as f64 * vp + n as f64 * vq)).sqrt();
    let draws: Vec<f64> = (0..1500u64)
        .map(|k| {
            let pc = sample_counts(&p, n, derive_seed(103, &[k, 0])).unwrap();
            let qc = sample_counts(&q, m, derive_seed(103, &[k, 1])).unwrap();
            let est = estimate(&EstimateRequest::two_sample(
                kind,
                pc,
                qc,
                SmoothingPolicy::Strict,
            ))
            .unwrap();
            scale * (est.value - truth)
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let sd = (draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (draws.len() - 1) as f64)
        .sqrt();
    let (_, ks_p) = phidiv::montecarlo::ks_normality(&draws).unwrap();
    assert!(mean.abs() < 0.1, "mean {mean}");
    assert!((sd - 1.0).abs() < 0.1, "sd {sd}");
    assert!(ks_p > 0.01, "KS p-value {ks_p}");
}

#[test]
fn greater_alternative_has_power_at_separated_pair() {
    let (p, q) = reference_pair();
    let kind: MeasureKind = "kl".parse().unwrap();
    let pc = sample_counts(&p, 30_000, derive_seed(102, &[0])).unwrap();
    let qc = sample_counts(&q, 30_000, derive_seed(102, &[1])).unwrap();
    let est = estimate(&EstimateRequest::two_sample(
        kind,
        pc,
        qc,
        SmoothingPolicy::Strict,
    ))
    .unwrap();
    let result = wald_test(&est, 0.0, Alternative::Greater, 0.95).unwrap();
    assert!(result.p_value.unwrap() < 1e-3);
}

//! Finite supports, probability vectors, count tables, sample batches, and
//! seeded categorical sampling.
//!
//! A [`Support`] fixes the label ordering once; every vector built over it
//! stores values positionally in that order, so all hot-loop comparisons are
//! positional and never do label matching. All types are immutable after
//! construction and safe to share across threads.

use std::sync::Arc;

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Tolerance for the simplex constraint `Σ probs = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// An ordered finite alphabet of distinct labels, size ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    labels: Vec<String>,
}

impl Support {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::SupportTooSmall(labels.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Support { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, j: usize) -> &str {
        &self.labels[j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn same_support(a: &Arc<Support>, b: &Arc<Support>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn check_same_support(a: &Arc<Support>, b: &Arc<Support>) -> Result<()> {
    if same_support(a, b) {
        Ok(())
    } else {
        Err(Error::SupportMismatch)
    }
}

/// A probability mass function over a [`Support`], stored positionally.
///
/// Entries are nonnegative and sum to one within [`SIMPLEX_TOLERANCE`].
/// Zero entries are allowed at construction; operations that divide by an
/// entry or take its logarithm enforce strict positivity themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    support: Arc<Support>,
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(support: Arc<Support>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: probs.len(),
            });
        }
        for (j, &v) in probs.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "entry {j} (label \"{}\") is {v}",
                    support.label(j)
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "entries sum to {sum}, expected 1 within {SIMPLEX_TOLERANCE:e}"
            )));
        }
        Ok(ProbabilityVector { support, probs })
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.probs[j]
    }

    /// True when every entry is strictly positive.
    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&v| v > 0.0)
    }

    /// Index of the first zero entry, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.probs.iter().position(|&v| v <= 0.0)
    }

    /// Returns the same distribution re-expressed over `support`, matching
    /// entries by label. Intended for aligning file inputs once at the
    /// boundary; fails if the label sets differ.
    pub fn reordered(&self, support: &Arc<Support>) -> Result<Self> {
        if same_support(&self.support, support) {
            return Ok(ProbabilityVector {
                support: Arc::clone(support),
                probs: self.probs.clone(),
            });
        }
        if self.support.len() != support.len() {
            return Err(Error::SupportMismatch);
        }
        let mut probs = Vec::with_capacity(support.len());
        for label in support.labels() {
            let j = self
                .support
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            probs.push(self.probs[j]);
        }
        Ok(ProbabilityVector {
            support: Arc::clone(support),
            probs,
        })
    }
}

/// How to turn counts with zero cells into a strictly positive pmf.
///
/// `Strict` keeps the raw relative frequencies; any zero cell then surfaces
/// as a positivity error in the formulas that need to divide by it or take
/// its log. `Smooth(λ)` applies additive smoothing `(count + λ)/(n + λr)`,
/// which changes the estimator and is therefore opt-in.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SmoothingPolicy {
    #[default]
    Strict,
    Smooth(f64),
}

/// Default smoothing constant when `Smooth` is requested without a value.
pub const DEFAULT_SMOOTHING_LAMBDA: f64 = 0.5;

/// Observed counts per support point.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    support: Arc<Support>,
    counts: Vec<u64>,
    total: u64,
}

impl CountTable {
    pub fn new(support: Arc<Support>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptySample);
        }
        Ok(CountTable {
            support,
            counts,
            total,
        })
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Relative frequencies, optionally smoothed.
    pub fn to_pmf(&self, policy: SmoothingPolicy) -> Result<ProbabilityVector> {
        let n = self.total as f64;
        let probs: Vec<f64> = match policy {
            SmoothingPolicy::Strict => self.counts.iter().map(|&c| c as f64 / n).collect(),
            SmoothingPolicy::Smooth(lambda) => {
                if lambda <= 0.0 || !lambda.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "smoothing constant must be positive and finite, got {lambda}"
                    )));
                }
                let denom = n + lambda * self.support.len() as f64;
                self.counts
                    .iter()
                    .map(|&c| (c as f64 + lambda) / denom)
                    .collect()
            }
        };
        ProbabilityVector::new(Arc::clone(&self.support), probs)
    }

    /// See [`ProbabilityVector::reordered`].
    pub fn reordered(&self, support: &Arc<Support>) -> Result<Self> {
        if same_support(&self.support, support) {
            return Ok(CountTable {
                support: Arc::clone(support),
                counts: self.counts.clone(),
                total: self.total,
            });
        }
        if self.support.len() != support.len() {
            return Err(Error::SupportMismatch);
        }
        let mut counts = Vec::with_capacity(support.len());
        for label in support.labels() {
            let j = self
                .support
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            counts.push(self.counts[j]);
        }
        Ok(CountTable {
            support: Arc::clone(support),
            counts,
            total: self.total,
        })
    }
}

/// An i.i.d. sample, stored as indices into its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    support: Arc<Support>,
    observations: Vec<u32>,
}

impl SampleBatch {
    /// Builds a batch from label strings, rejecting labels outside `support`.
    pub fn from_labels<I, S>(support: Arc<Support>, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut observations = Vec::new();
        for label in labels {
            let label = label.as_ref();
            let j = support
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            observations.push(j as u32);
        }
        Ok(SampleBatch {
            support,
            observations,
        })
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Observation labels in draw order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.observations
            .iter()
            .map(move |&j| self.support.label(j as usize))
    }

    pub(crate) fn indices(&self) -> &[u32] {
        &self.observations
    }
}

/// Empirical pmf and count table of a sample: `p̂_j = #{X_i = c_j} / n`.
pub fn empirical_pmf(samples: &SampleBatch) -> Result<(ProbabilityVector, CountTable)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = vec![0u64; samples.support().len()];
    for &j in samples.indices() {
        counts[j as usize] += 1;
    }
    let table = CountTable::new(Arc::clone(samples.support()), counts)?;
    let pmf = table.to_pmf(SmoothingPolicy::Strict)?;
    Ok((pmf, table))
}

/// Sup-norm deviation `max_j |p̂_j − p_j|` between two pmfs on one support.
pub fn sup_deviation(estimate: &ProbabilityVector, truth: &ProbabilityVector) -> Result<f64> {
    check_same_support(estimate.support(), truth.support())?;
    Ok(estimate
        .probs()
        .iter()
        .zip(truth.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Joint deviation `max(a_n, b_m)` of two one-sample deviations.
pub fn joint_sup_deviation(a_n: f64, b_m: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a_n) && (0.0..=1.0).contains(&b_m));
    a_n.max(b_m)
}

/// True when every entry of both vectors is strictly positive (the
/// boundedness assumption under which logs and negative powers are safe).
pub fn validate_bd(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<bool> {
    check_same_support(p.support(), q.support())?;
    Ok(p.is_strictly_positive() && q.is_strictly_positive())
}

fn draw_index(cdf: &[f64], u: f64) -> u32 {
    // First j with u < cdf[j]; zero-probability cells are never hit because
    // their cdf step is empty.
    cdf.partition_point(|&c| u >= c) as u32
}

/// Draws `n` i.i.d. observations from `p` by inverse CDF over the fixed
/// support ordering. Deterministic for fixed `(seed, n, p)`.
pub fn sample_categorical(p: &ProbabilityVector, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let cdf = cumulative(p);
    let mut rng = SplitMix64::new(seed);
    let observations = (0..n).map(|_| draw_index(&cdf, rng.next_f64())).collect();
    Ok(SampleBatch {
        support: Arc::clone(p.support()),
        observations,
    })
}

/// Like [`sample_categorical`] but accumulates counts directly, skipping the
/// per-observation storage. Same stream, same results:
/// `empirical_pmf(sample_categorical(p, n, s))` and
/// `sample_counts(p, n, s)` agree.
pub fn sample_counts(p: &ProbabilityVector, n: usize, seed: u64) -> Result<CountTable> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let cdf = cumulative(p);
    let mut rng = SplitMix64::new(seed);
    let mut counts = vec![0u64; p.len()];
    for _ in 0..n {
        counts[draw_index(&cdf, rng.next_f64()) as usize] += 1;
    }
    CountTable::new(Arc::clone(p.support()), counts)
}

fn cumulative(p: &ProbabilityVector) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = p
        .probs()
        .iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect();
    // Guard the top end against rounding below 1.
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_seed;

    fn support3() -> Arc<Support> {
        Arc::new(Support::new(["c1", "c2", "c3"]).unwrap())
    }

    fn pv(support: &Arc<Support>, probs: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(Arc::clone(support), probs.to_vec()).unwrap()
    }

    #[test]
    fn support_rejects_duplicates_and_singletons() {
        assert!(matches!(
            Support::new(["a", "a"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            Support::new(["a"]),
            Err(Error::SupportTooSmall(1))
        ));
    }

    #[test]
    fn probability_vector_enforces_simplex() {
        let s = support3();
        assert!(ProbabilityVector::new(Arc::clone(&s), vec![0.5, 0.4, 0.2]).is_err());
        assert!(ProbabilityVector::new(Arc::clone(&s), vec![0.5, 0.6, -0.1]).is_err());
        assert!(ProbabilityVector::new(Arc::clone(&s), vec![0.4, 0.25, 0.35]).is_ok());
    }

    #[test]
    fn empirical_pmf_counts_directly() {
        let s = support3();
        let batch = SampleBatch::from_labels(Arc::clone(&s), ["c1", "c1", "c2", "c3"]).unwrap();
        let (pmf, table) = empirical_pmf(&batch).unwrap();
        assert_eq!(pmf.probs(), &[0.5, 0.25, 0.25]);
        assert_eq!(table.counts(), &[2, 1, 1]);
        assert_eq!(table.total(), 4);
    }

    #[test]
    fn empirical_pmf_handles_degenerate_batch() {
        let s = Arc::new(Support::new(["c1", "c2"]).unwrap());
        let batch = SampleBatch::from_labels(Arc::clone(&s), ["c1"; 7]).unwrap();
        let (pmf, _) = empirical_pmf(&batch).unwrap();
        assert_eq!(pmf.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn empty_sample_and_unknown_label_are_rejected() {
        let s = support3();
        let empty = SampleBatch::from_labels(Arc::clone(&s), Vec::<&str>::new()).unwrap();
        assert!(matches!(empirical_pmf(&empty), Err(Error::EmptySample)));
        let err = SampleBatch::from_labels(Arc::clone(&s), ["c1", "zz"]).unwrap_err();
        match err {
            Error::UnknownLabel(l) => assert_eq!(l, "zz"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sup_deviation_examples() {
        let s = support3();
        let a = pv(&s, &[0.5, 0.25, 0.25]);
        let b = pv(&s, &[0.4, 0.25, 0.35]);
        assert!((sup_deviation(&a, &b).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(sup_deviation(&b, &b).unwrap(), 0.0);
        assert_eq!(
            sup_deviation(&a, &b).unwrap(),
            sup_deviation(&b, &a).unwrap()
        );

        let s2 = Arc::new(Support::new(["c1", "c2"]).unwrap());
        let one = pv(&s2, &[1.0, 0.0]);
        let half = pv(&s2, &[0.5, 0.5]);
        assert_eq!(sup_deviation(&one, &half).unwrap(), 0.5);
    }

    #[test]
    fn sup_deviation_rejects_support_mismatch() {
        let s = support3();
        let other = Arc::new(Support::new(["x", "y", "z"]).unwrap());
        let a = pv(&s, &[0.4, 0.25, 0.35]);
        let b = pv(&other, &[0.4, 0.25, 0.35]);
        assert!(matches!(sup_deviation(&a, &b), Err(Error::SupportMismatch)));
    }

    #[test]
    fn joint_deviation_is_max() {
        assert_eq!(joint_sup_deviation(0.1, 0.05), 0.1);
        assert_eq!(joint_sup_deviation(0.0, 0.0), 0.0);
        assert_eq!(joint_sup_deviation(0.02, 0.02), 0.02);
    }

    #[test]
    fn bd_validation() {
        let s = support3();
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        let q = pv(&s, &[0.27, 0.32, 0.41]);
        assert!(validate_bd(&p, &q).unwrap());

        let s2 = Arc::new(Support::new(["c1", "c2"]).unwrap());
        let degenerate = pv(&s2, &[1.0, 0.0]);
        let half = pv(&s2, &[0.5, 0.5]);
        assert!(!validate_bd(&degenerate, &half).unwrap());
        assert!(validate_bd(&half, &half).unwrap());
    }

    #[test]
    fn degenerate_sampling_yields_constant_batch() {
        let s2 = Arc::new(Support::new(["c1", "c2"]).unwrap());
        let p = pv(&s2, &[1.0, 0.0]);
        let batch = sample_categorical(&p, 5, 12345).unwrap();
        assert_eq!(batch.labels().collect::<Vec<_>>(), vec!["c1"; 5]);
    }

    #[test]
    fn sampling_is_deterministic_and_matches_count_path() {
        let s = support3();
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        let a = sample_categorical(&p, 1000, 99).unwrap();
        let b = sample_categorical(&p, 1000, 99).unwrap();
        assert_eq!(a, b);
        let (_, table) = empirical_pmf(&a).unwrap();
        assert_eq!(table, sample_counts(&p, 1000, 99).unwrap());
    }

    #[test]
    fn zero_draws_is_an_error() {
        let s = support3();
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        assert!(matches!(
            sample_categorical(&p, 0, 1),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn large_sample_frequency_is_close_to_truth() {
        // Binomial sd at n = 1e5 is ~0.0016, so 0.01 is beyond six sigma.
        let s2 = Arc::new(Support::new(["c1", "c2"]).unwrap());
        let p = pv(&s2, &[0.5, 0.5]);
        for seed in [1u64, 2, 3] {
            let table = sample_counts(&p, 100_000, seed).unwrap();
            let phat = table.counts()[0] as f64 / 100_000.0;
            assert!((phat - 0.5).abs() < 0.01, "seed {seed}: {phat}");
        }
    }

    #[test]
    fn sup_deviation_stays_small_at_n_30000() {
        // Hoeffding: P(|p̂_j − p_j| ≥ 0.02) ≤ 2 exp(−2·30000·0.02²) per cell,
        // a union bound below 1e-9 over three cells. With 200 seeded
        // replications the expected number of exceedances is ~0.
        let bound: f64 = 3.0 * 2.0 * (-2.0 * 30_000.0 * 0.02f64.powi(2)).exp();
        assert!(bound < 0.01);
        let s = support3();
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        let mut exceed = 0;
        for k in 0..200u64 {
            let table = sample_counts(&p, 30_000, derive_seed(11, &[k])).unwrap();
            let phat = table.to_pmf(SmoothingPolicy::Strict).unwrap();
            if sup_deviation(&phat, &p).unwrap() >= 0.02 {
                exceed += 1;
            }
        }
        assert!(exceed <= 2, "exceedances: {exceed}");
    }

    #[test]
    fn deviation_shrinks_with_sample_size() {
        let s = support3();
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        let median_dev = |n: usize| {
            let mut devs: Vec<f64> = (0..200u64)
                .map(|k| {
                    let table = sample_counts(&p, n, derive_seed(5, &[k, n as u64])).unwrap();
                    let phat = table.to_pmf(SmoothingPolicy::Strict).unwrap();
                    sup_deviation(&phat, &p).unwrap()
                })
                .collect();
            devs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            (devs[99] + devs[100]) / 2.0
        };
        assert!(median_dev(10_000) < median_dev(100));
    }

    #[test]
    fn histogram_passes_chi_square_goodness_of_fit() {
        // 0.999 quantile of chi-squared with 2 degrees of freedom is
        // -2 ln(0.001) = 13.8155...
        let quantile = -2.0 * 0.001f64.ln();
        let s = support3();
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        let n = 100_000usize;
        let mut fails = 0;
        for seed in 0..120u64 {
            let table = sample_counts(&p, n, derive_seed(21, &[seed])).unwrap();
            let chi2: f64 = table
                .counts()
                .iter()
                .zip(p.probs())
                .map(|(&c, &pj)| {
                    let expected = n as f64 * pj;
                    (c as f64 - expected).powi(2) / expected
                })
                .sum();
            if chi2 >= quantile {
                fails += 1;
            }
        }
        assert!(fails <= 1, "chi-square failures: {fails}/120");
    }

    #[test]
    fn smoothing_fills_zero_cells() {
        let s = support3();
        let table = CountTable::new(Arc::clone(&s), vec![8, 0, 2]).unwrap();
        let strict = table.to_pmf(SmoothingPolicy::Strict).unwrap();
        assert_eq!(strict.probs(), &[0.8, 0.0, 0.2]);
        let smooth = table.to_pmf(SmoothingPolicy::Smooth(0.5)).unwrap();
        assert!(smooth.is_strictly_positive());
        assert!((smooth.probs()[1] - 0.5 / 11.5).abs() < 1e-15);
        assert!(table.to_pmf(SmoothingPolicy::Smooth(0.0)).is_err());
    }

    #[test]
    fn types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Support>();
        assert_send_sync::<ProbabilityVector>();
        assert_send_sync::<CountTable>();
        assert_send_sync::<SampleBatch>();
        assert_send_sync::<SmoothingPolicy>();
    }

    #[test]
    fn reordered_aligns_by_label() {
        let s = support3();
        let shuffled = Arc::new(Support::new(["c3", "c1", "c2"]).unwrap());
        let p = pv(&s, &[0.4, 0.25, 0.35]);
        let r = p.reordered(&shuffled).unwrap();
        assert_eq!(r.probs(), &[0.35, 0.4, 0.25]);
        let table = CountTable::new(Arc::clone(&s), vec![4, 2, 3]).unwrap();
        assert_eq!(table.reordered(&shuffled).unwrap().counts(), &[3, 4, 2]);
        let disjoint = Arc::new(Support::new(["a", "b", "c"]).unwrap());
        assert!(p.reordered(&disjoint).is_err());
    }
}

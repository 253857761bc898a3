//! Plug-in estimation with asymptotic standard errors, confidence intervals,
//! Wald-type tests, and almost-sure rate certificates.
//!
//! Supported settings: one known distribution and one sample (either side),
//! or two independent samples with arbitrary, possibly unequal sizes. The
//! two-sample standard error is `sqrt(V̂_p/n + V̂_q/m)` with no truncation to
//! the smaller size.
//!
//! At `p = q` every measure here has a constant first-order gradient, the
//! delta-method variance vanishes, and the scaled error is *not*
//! asymptotically normal. Estimates whose plug-in variance falls below
//! [`VARIANCE_FLOOR`] are flagged `degenerate`: the interval collapses to a
//! point and no z statistic or p-value is fabricated.

use serde::{Deserialize, Serialize};

use crate::measures::{self, MeasureKind};
use crate::normal;
use crate::phi::DivergenceEstimate;
use crate::pmf::{check_same_support, CountTable, ProbabilityVector, SmoothingPolicy};
use crate::{Error, Result};

/// Plug-in variances below this are treated as degenerate.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Which arguments of the divergence are estimated from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleMode {
    #[serde(rename = "one-sample-p")]
    OneSampleP,
    #[serde(rename = "one-sample-q")]
    OneSampleQ,
    #[serde(rename = "two-sample")]
    TwoSample,
}

impl std::fmt::Display for SampleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleMode::OneSampleP => "one-sample-p",
            SampleMode::OneSampleQ => "one-sample-q",
            SampleMode::TwoSample => "two-sample",
        })
    }
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-sample-p" => Ok(SampleMode::OneSampleP),
            "one-sample-q" => Ok(SampleMode::OneSampleQ),
            "two-sample" => Ok(SampleMode::TwoSample),
            other => Err(Error::Parse(format!(
                "unknown mode \"{other}\" (expected one-sample-p, one-sample-q or two-sample)"
            ))),
        }
    }
}

/// A fully specified estimation problem.
#[derive(Debug, Clone)]
pub struct EstimateRequest {
    pub measure: MeasureKind,
    pub mode: SampleMode,
    pub p_counts: Option<CountTable>,
    pub q_counts: Option<CountTable>,
    pub p_known: Option<ProbabilityVector>,
    pub q_known: Option<ProbabilityVector>,
    pub smoothing: SmoothingPolicy,
}

impl EstimateRequest {
    /// Sample for the first argument, known second argument.
    pub fn one_sample_p(
        measure: MeasureKind,
        p_counts: CountTable,
        q_known: ProbabilityVector,
        smoothing: SmoothingPolicy,
    ) -> Self {
        EstimateRequest {
            measure,
            mode: SampleMode::OneSampleP,
            p_counts: Some(p_counts),
            q_counts: None,
            p_known: None,
            q_known: Some(q_known),
            smoothing,
        }
    }

    /// Known first argument, sample for the second.
    pub fn one_sample_q(
        measure: MeasureKind,
        p_known: ProbabilityVector,
        q_counts: CountTable,
        smoothing: SmoothingPolicy,
    ) -> Self {
        EstimateRequest {
            measure,
            mode: SampleMode::OneSampleQ,
            p_counts: None,
            q_counts: Some(q_counts),
            p_known: Some(p_known),
            q_known: None,
            smoothing,
        }
    }

    /// Two independent samples, arbitrary sizes.
    pub fn two_sample(
        measure: MeasureKind,
        p_counts: CountTable,
        q_counts: CountTable,
        smoothing: SmoothingPolicy,
    ) -> Self {
        EstimateRequest {
            measure,
            mode: SampleMode::TwoSample,
            p_counts: Some(p_counts),
            q_counts: Some(q_counts),
            p_known: None,
            q_known: None,
            smoothing,
        }
    }
}

fn missing(what: &str, mode: SampleMode) -> Error {
    Error::InvalidParameter(format!("mode {mode} requires {what}"))
}

/// Plug-in estimate of the divergence with its delta-method variance
/// components evaluated at the plug-in arguments.
pub fn estimate(req: &EstimateRequest) -> Result<DivergenceEstimate> {
    let (p_arg, q_arg, n, m) = match req.mode {
        SampleMode::OneSampleP => {
            let counts = req
                .p_counts
                .as_ref()
                .ok_or_else(|| missing("counts for p", req.mode))?;
            let known = req
                .q_known
                .as_ref()
                .ok_or_else(|| missing("a known distribution for q", req.mode))?;
            (
                counts.to_pmf(req.smoothing)?,
                known.clone(),
                Some(counts.total()),
                None,
            )
        }
        SampleMode::OneSampleQ => {
            let known = req
                .p_known
                .as_ref()
                .ok_or_else(|| missing("a known distribution for p", req.mode))?;
            let counts = req
                .q_counts
                .as_ref()
                .ok_or_else(|| missing("counts for q", req.mode))?;
            (
                known.clone(),
                counts.to_pmf(req.smoothing)?,
                None,
                Some(counts.total()),
            )
        }
        SampleMode::TwoSample => {
            let pc = req
                .p_counts
                .as_ref()
                .ok_or_else(|| missing("counts for p", req.mode))?;
            let qc = req
                .q_counts
                .as_ref()
                .ok_or_else(|| missing("counts for q", req.mode))?;
            (
                pc.to_pmf(req.smoothing)?,
                qc.to_pmf(req.smoothing)?,
                Some(pc.total()),
                Some(qc.total()),
            )
        }
    };
    check_same_support(p_arg.support(), q_arg.support())?;

    let value = measures::divergence(req.measure, &p_arg, &q_arg)?;
    let (vp, vq) = measures::variance_components(req.measure, &p_arg, &q_arg)?;
    Ok(DivergenceEstimate {
        value,
        variance_p: if n.is_some() { vp } else { 0.0 },
        variance_q: if m.is_some() { vq } else { 0.0 },
        n,
        m,
        measure_id: req.measure.id(),
    })
}

fn is_degenerate(est: &DivergenceEstimate) -> bool {
    est.sampling_variance() < VARIANCE_FLOOR
}

/// Central confidence interval `value ± z_{(1+level)/2} · stderr`.
///
/// A degenerate variance collapses the interval to a point.
pub fn confidence_interval(est: &DivergenceEstimate, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    if est.n.is_none() && est.m.is_none() {
        return Err(Error::InvalidParameter(
            "estimate carries no sample size".to_string(),
        ));
    }
    if is_degenerate(est) {
        return Ok((est.value, est.value));
    }
    let z = normal::quantile((1.0 + level) / 2.0);
    let half = z * est.stderr();
    Ok((est.value - half, est.value + half))
}

/// Direction of the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Alternative {
    #[serde(rename = "two-sided")]
    TwoSided,
    #[serde(rename = "greater")]
    Greater,
    #[serde(rename = "less")]
    Less,
}

impl std::str::FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            other => Err(Error::Parse(format!(
                "unknown alternative \"{other}\" (expected two-sided, greater or less)"
            ))),
        }
    }
}

/// Result of a Wald-type test; `z` and `p_value` are absent when the
/// plug-in variance is degenerate.
#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    pub estimate: DivergenceEstimate,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub degenerate: bool,
}

/// Wald test of `H₀: D = null_value` based on the asymptotic normality of
/// the plug-in estimator.
pub fn wald_test(
    est: &DivergenceEstimate,
    null_value: f64,
    alternative: Alternative,
    level: f64,
) -> Result<TestResult> {
    let (ci_low, ci_high) = confidence_interval(est, level)?;
    if is_degenerate(est) {
        return Ok(TestResult {
            estimate: est.clone(),
            z: None,
            p_value: None,
            ci_low,
            ci_high,
            level,
            degenerate: true,
        });
    }
    let z = (est.value - null_value) / est.stderr();
    let p_value = match alternative {
        Alternative::TwoSided => normal::p_value_two_sided(z),
        Alternative::Greater => normal::p_value_greater(z),
        Alternative::Less => normal::p_value_less(z),
    };
    Ok(TestResult {
        estimate: est.clone(),
        z: Some(z),
        p_value: Some(p_value),
        ci_low,
        ci_high,
        level,
        degenerate: false,
    })
}

/// Constants certifying the almost-sure deviation rate of a plug-in
/// estimator: asymptotically, |Ĵ − J| divided by the sup-norm deviation of
/// the empirical pmf(s) stays below `bound`.
#[derive(Debug, Clone, Serialize)]
pub struct RateCertificate {
    pub measure: String,
    pub mode: SampleMode,
    /// Contribution of estimating the first argument.
    pub a_p: f64,
    /// Contribution of estimating the second argument.
    pub a_q: f64,
    /// The bound applying to the requested mode.
    pub bound: f64,
}

/// Deviation-rate bound constants for the measure in the given mode, with
/// the measure's transform scaling applied (symmetrized kinds use the halved
/// sums of forward and reversed constants).
pub fn as_rate_certificate(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    kind: MeasureKind,
    mode: SampleMode,
) -> Result<RateCertificate> {
    let constants = measures::named_constants(kind, p, q)?;
    let (a_p, a_q) = if kind.symmetrized {
        (constants.a_sym_p, constants.a_sym_q)
    } else {
        (constants.a[0], constants.a[1])
    };
    let bound = match mode {
        SampleMode::OneSampleP => a_p,
        SampleMode::OneSampleQ => a_q,
        SampleMode::TwoSample => a_p + a_q,
    };
    Ok(RateCertificate {
        measure: kind.id(),
        mode,
        a_p,
        a_q,
        bound,
    })
}

/// The stable JSON document for a test result (snake_case keys, `ci` as a
/// two-element array).
#[derive(Debug, Clone, Serialize)]
pub struct TestResultDoc {
    pub measure: String,
    pub mode: SampleMode,
    pub value: f64,
    pub stderr: f64,
    pub variance_p: f64,
    pub variance_q: f64,
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub ci: [f64; 2],
    pub level: f64,
    pub degenerate: bool,
}

impl TestResultDoc {
    pub fn new(mode: SampleMode, result: &TestResult) -> Self {
        TestResultDoc {
            measure: result.estimate.measure_id.clone(),
            mode,
            value: result.estimate.value,
            stderr: result.estimate.stderr(),
            variance_p: result.estimate.variance_p,
            variance_q: result.estimate.variance_q,
            n: result.estimate.n,
            m: result.estimate.m,
            z: result.z,
            p_value: result.p_value,
            ci: [result.ci_low, result.ci_high],
            level: result.level,
            degenerate: result.degenerate,
        }
    }
}

/// The stable JSON document for a bare estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateDoc {
    pub measure: String,
    pub mode: SampleMode,
    pub value: f64,
    pub stderr: f64,
    pub variance_p: f64,
    pub variance_q: f64,
    pub n: Option<u64>,
    pub m: Option<u64>,
}

impl EstimateDoc {
    pub fn new(mode: SampleMode, est: &DivergenceEstimate) -> Self {
        EstimateDoc {
            measure: est.measure_id.clone(),
            mode,
            value: est.value,
            stderr: est.stderr(),
            variance_p: est.variance_p,
            variance_q: est.variance_q,
            n: est.n,
            m: est.m,
        }
    }
}

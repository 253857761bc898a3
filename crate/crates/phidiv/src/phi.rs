//! The generic divergence functional `J(p, q) = transform(Σ_j φ(p_j, q_j))`,
//! its delta-method gradients and asymptotic variances, almost-sure bound
//! constants, symmetrization, and the multinomial covariance that underlies
//! all of them.
//!
//! One variance engine serves every measure: the asymptotic variance of the
//! scaled plug-in error is the quadratic form
//!
//! ```text
//! V = Σ_j p_j g_j² − (Σ_j p_j g_j)²
//! ```
//!
//! applied to the gradient weights `g_j` of the functional. This is the
//! variance of `g` under `p`, the unique value consistent with the Gaussian
//! limit of the multinomial law; it is invariant under adding a constant to
//! every `g_j` because empirical deviations sum to zero.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::pmf::{check_same_support, ProbabilityVector};
use crate::{Error, Result};

type BivariateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A divergence kernel: `φ(s, t)` with its two first partial derivatives and
/// an optional scalar post-transform with derivative (identity by default).
///
/// Callables must be reentrant; `PhiSpec` is cheaply cloneable and safe to
/// share across threads.
#[derive(Clone)]
pub struct PhiSpec {
    phi: BivariateFn,
    d1: BivariateFn,
    d2: BivariateFn,
    transform: ScalarFn,
    transform_deriv: ScalarFn,
    requires_positive: bool,
}

impl std::fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhiSpec")
            .field("requires_positive", &self.requires_positive)
            .finish_non_exhaustive()
    }
}

impl PhiSpec {
    /// Kernel with identity transform. The kernel is assumed to need
    /// strictly positive arguments; see [`PhiSpec::tolerating_zeros`].
    pub fn new<F, G, H>(phi: F, d1: G, d2: H) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        PhiSpec {
            phi: Arc::new(phi),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            transform: Arc::new(|s| s),
            transform_deriv: Arc::new(|_| 1.0),
            requires_positive: true,
        }
    }

    /// Attaches a scalar post-transform and its derivative.
    pub fn with_transform<T, D>(mut self, transform: T, deriv: D) -> Self
    where
        T: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.transform = Arc::new(transform);
        self.transform_deriv = Arc::new(deriv);
        self
    }

    /// Marks the kernel as well-defined at zero arguments, disabling the
    /// positivity check (the squared-distance kernel qualifies).
    pub fn tolerating_zeros(mut self) -> Self {
        self.requires_positive = false;
        self
    }

    pub fn requires_positive(&self) -> bool {
        self.requires_positive
    }

    pub fn phi(&self, s: f64, t: f64) -> f64 {
        (self.phi)(s, t)
    }

    pub fn d1(&self, s: f64, t: f64) -> f64 {
        (self.d1)(s, t)
    }

    pub fn d2(&self, s: f64, t: f64) -> f64 {
        (self.d2)(s, t)
    }

    pub fn transform(&self, s: f64) -> f64 {
        (self.transform)(s)
    }

    pub fn transform_deriv(&self, s: f64) -> f64 {
        (self.transform_deriv)(s)
    }

    /// Checks the stated derivatives against central finite differences at
    /// the given interior points (step 1e-6, mixed absolute/relative
    /// tolerance 1e-5). `transform_points` validates the scalar transform.
    pub fn check_derivatives(&self, points: &[(f64, f64)], transform_points: &[f64]) -> Result<()> {
        const H: f64 = 1e-6;
        const TOL: f64 = 1e-5;
        let close = |got: f64, want: f64| (got - want).abs() <= TOL * want.abs().max(1.0);
        for &(s, t) in points {
            let fd1 = (self.phi(s + H, t) - self.phi(s - H, t)) / (2.0 * H);
            if !close(self.d1(s, t), fd1) {
                return Err(Error::InvalidParameter(format!(
                    "first partial at ({s}, {t}) is {} but finite differences give {fd1}",
                    self.d1(s, t)
                )));
            }
            let fd2 = (self.phi(s, t + H) - self.phi(s, t - H)) / (2.0 * H);
            if !close(self.d2(s, t), fd2) {
                return Err(Error::InvalidParameter(format!(
                    "second partial at ({s}, {t}) is {} but finite differences give {fd2}",
                    self.d2(s, t)
                )));
            }
        }
        for &s in transform_points {
            let fd = (self.transform(s + H) - self.transform(s - H)) / (2.0 * H);
            if !close(self.transform_deriv(s), fd) {
                return Err(Error::InvalidParameter(format!(
                    "transform derivative at {s} is {} but finite differences give {fd}",
                    self.transform_deriv(s)
                )));
            }
        }
        Ok(())
    }
}

/// Which argument of the functional a gradient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalArgument {
    First,
    Second,
}

/// A point estimate with its delta-method variance components.
///
/// `variance_p` scales with the first-argument sample (present when `n` is),
/// `variance_q` with the second (present when `m` is). The standard error is
/// `sqrt(variance_p/n + variance_q/m)` over the sides that carry a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub variance_p: f64,
    pub variance_q: f64,
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub measure_id: String,
}

impl DivergenceEstimate {
    /// Sum of the variance components that have a sample attached; this is
    /// what the degeneracy floor is compared against.
    pub fn sampling_variance(&self) -> f64 {
        let mut v = 0.0;
        if self.n.is_some() {
            v += self.variance_p;
        }
        if self.m.is_some() {
            v += self.variance_q;
        }
        v
    }

    pub fn stderr(&self) -> f64 {
        let mut v = 0.0;
        if let Some(n) = self.n {
            v += self.variance_p / n as f64;
        }
        if let Some(m) = self.m {
            v += self.variance_q / m as f64;
        }
        v.sqrt()
    }
}

fn check_positive(label: &'static str, v: &ProbabilityVector) -> Result<()> {
    if let Some(index) = v.first_zero() {
        return Err(Error::PositivityViolation {
            side: label,
            index,
            label: v.support().label(index).to_string(),
        });
    }
    Ok(())
}

fn check_inputs(p: &ProbabilityVector, q: &ProbabilityVector, phi: &PhiSpec) -> Result<()> {
    check_same_support(p.support(), q.support())?;
    if phi.requires_positive() {
        check_positive("p", p)?;
        check_positive("q", q)?;
    }
    Ok(())
}

fn kernel_sum(p: &ProbabilityVector, q: &ProbabilityVector, phi: &PhiSpec) -> f64 {
    p.probs()
        .iter()
        .zip(q.probs())
        .map(|(&s, &t)| phi.phi(s, t))
        .sum()
}

/// The divergence functional `transform(Σ_j φ(p_j, q_j))`.
pub fn j_functional(p: &ProbabilityVector, q: &ProbabilityVector, phi: &PhiSpec) -> Result<f64> {
    check_inputs(p, q, phi)?;
    Ok(phi.transform(kernel_sum(p, q, phi)))
}

/// Delta-method gradient weights of the functional with respect to the
/// chosen argument: `g_j = transform′(S) · ∂φ/∂arg (p_j, q_j)`.
pub fn gradient_weights(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    phi: &PhiSpec,
    argument: FunctionalArgument,
) -> Result<Vec<f64>> {
    check_inputs(p, q, phi)?;
    let scale = phi.transform_deriv(kernel_sum(p, q, phi));
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(&s, &t)| {
            scale
                * match argument {
                    FunctionalArgument::First => phi.d1(s, t),
                    FunctionalArgument::Second => phi.d2(s, t),
                }
        })
        .collect())
}

/// Variance of the gradient weights under the sampled distribution:
/// `V = Σ_j p_j g_j² − (Σ_j p_j g_j)²`, computed mean-centered so it is
/// nonnegative in floating point as well as algebraically.
pub fn asymptotic_variance(p: &ProbabilityVector, g: &[f64]) -> Result<f64> {
    if g.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: g.len(),
        });
    }
    let mean: f64 = p.probs().iter().zip(g).map(|(&w, &x)| w * x).sum();
    Ok(p.probs()
        .iter()
        .zip(g)
        .map(|(&w, &x)| w * (x - mean) * (x - mean))
        .sum())
}

/// Sums of absolute first partial derivatives, the constants bounding the
/// almost-sure normalized deviation of the plug-in estimators. Raw kernel
/// derivatives; measure-specific transform scaling is applied by callers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsBoundConstants {
    /// `Σ_j |∂₁φ(p_j, q_j)|` — first argument estimated, forward direction.
    pub a1: f64,
    /// `Σ_j |∂₂φ(p_j, q_j)|` — second argument estimated, forward direction.
    pub a2: f64,
    /// `Σ_j |∂₁φ(q_j, p_j)|` — first argument of the reversed functional.
    pub a3: f64,
    /// `Σ_j |∂₂φ(q_j, p_j)|` — second argument of the reversed functional.
    pub a4: f64,
}

pub fn as_bound_constants(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    phi: &PhiSpec,
) -> Result<AsBoundConstants> {
    check_inputs(p, q, phi)?;
    let mut c = AsBoundConstants {
        a1: 0.0,
        a2: 0.0,
        a3: 0.0,
        a4: 0.0,
    };
    for (&pj, &qj) in p.probs().iter().zip(q.probs()) {
        c.a1 += phi.d1(pj, qj).abs();
        c.a2 += phi.d2(pj, qj).abs();
        c.a3 += phi.d1(qj, pj).abs();
        c.a4 += phi.d2(qj, pj).abs();
    }
    Ok(c)
}

/// Symmetrized functional `(J(p, q) + J(q, p)) / 2`.
pub fn symmetrized_value(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    phi: &PhiSpec,
) -> Result<f64> {
    Ok((j_functional(p, q, phi)? + j_functional(q, p, phi)?) / 2.0)
}

/// How to combine the four gradient families into symmetrized variances.
///
/// `Exact` forms the gradient of the averaged functional first — including
/// the cross-terms between the forward and reversed parts, which share the
/// same empirical pmf — and is what Monte Carlo confirms. `Halved` treats
/// the two parts as independent, returning `(V₁+V₄)/4` and `(V₂+V₃)/4`;
/// retained for reproduction and comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetrizedVarianceMode {
    Exact,
    Halved,
}

/// Variance components `(V_p, V_q)` of the symmetrized plug-in estimator.
///
/// The transform derivative is evaluated per direction (`transform′` at
/// `Σφ(p,q)` for the forward part, at `Σφ(q,p)` for the reversed part),
/// which matters for nonlinear transforms.
pub fn symmetrized_variance(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    phi: &PhiSpec,
    mode: SymmetrizedVarianceMode,
) -> Result<(f64, f64)> {
    check_inputs(p, q, phi)?;
    check_inputs(q, p, phi)?;
    let scale_fwd = phi.transform_deriv(kernel_sum(p, q, phi));
    let scale_rev = phi.transform_deriv(kernel_sum(q, p, phi));
    let r = p.len();
    let mut g1 = Vec::with_capacity(r);
    let mut g2 = Vec::with_capacity(r);
    let mut g3 = Vec::with_capacity(r);
    let mut g4 = Vec::with_capacity(r);
    for (&pj, &qj) in p.probs().iter().zip(q.probs()) {
        g1.push(scale_fwd * phi.d1(pj, qj));
        g2.push(scale_fwd * phi.d2(pj, qj));
        g3.push(scale_rev * phi.d1(qj, pj));
        g4.push(scale_rev * phi.d2(qj, pj));
    }
    match mode {
        SymmetrizedVarianceMode::Exact => {
            let gp: Vec<f64> = g1.iter().zip(&g4).map(|(a, b)| (a + b) / 2.0).collect();
            let gq: Vec<f64> = g2.iter().zip(&g3).map(|(a, b)| (a + b) / 2.0).collect();
            Ok((asymptotic_variance(p, &gp)?, asymptotic_variance(q, &gq)?))
        }
        SymmetrizedVarianceMode::Halved => {
            let vp = (asymptotic_variance(p, &g1)? + asymptotic_variance(p, &g4)?) / 4.0;
            let vq = (asymptotic_variance(q, &g2)? + asymptotic_variance(q, &g3)?) / 4.0;
            Ok((vp, vq))
        }
    }
}

/// Covariance matrix of the normalized multinomial deviations:
/// diagonal `1 − p_j`, off-diagonal `−√(p_i p_j)`. Positive semidefinite
/// with null vector `(√p_1, …, √p_r)`.
pub fn multinomial_covariance(p: &ProbabilityVector) -> Result<Vec<Vec<f64>>> {
    check_positive("p", p)?;
    let r = p.len();
    let probs = p.probs();
    let mut matrix = vec![vec![0.0; r]; r];
    for i in 0..r {
        for j in 0..r {
            matrix[i][j] = if i == j {
                1.0 - probs[j]
            } else {
                -(probs[i] * probs[j]).sqrt()
            };
        }
    }
    Ok(matrix)
}

//! # phidiv
//!
//! Estimation and asymptotic inference for φ-divergences between discrete
//! probability distributions on a common finite support.
//!
//! A φ-divergence is the functional
//!
//! ```text
//! J(p, q) = Σ_j φ(p_j, q_j)
//! ```
//!
//! optionally composed with a scalar transform. The classical measures are
//! special cases: Kullback-Leibler (`φ = x log(x/y)`), the squared-L2
//! distance (`φ = (x − y)²`), and the Tsallis-α and Rényi-α families, both
//! built on the summation `S_α = Σ p_j^α q_j^(1−α)`.
//!
//! The crate estimates these measures by plugging empirical probability mass
//! functions into the formulas, and quantifies the estimation error with the
//! delta method: the scaled error `√n (Ĵ − J)` is asymptotically normal with
//! a variance that is an explicit quadratic form in the kernel derivatives.
//!
//! ## Modules
//!
//! | Module | Provides |
//! |--------|----------|
//! | [`pmf`] | Finite supports, probability vectors, count tables, seeded categorical sampling |
//! | [`phi`] | Generic kernels, the divergence functional, gradients, asymptotic variances, deviation bounds |
//! | [`measures`] | Closed forms for L2 / Tsallis / Rényi / KL and their named constants |
//! | [`inference`] | Plug-in estimates, confidence intervals, Wald tests, almost-sure rate certificates |
//! | [`montecarlo`] | Seeded simulation harness validating consistency, normality, coverage, and rate bounds |
//! | [`normal`] | Standard normal pdf/cdf/quantile and the error function, implemented in-repo |
//! | [`io`] | Count-table CSV, sample files, and distribution JSON |
//!
//! ## Quick start
//!
//! ```
//! use phidiv::measures::{divergence, MeasureKind};
//! use phidiv::pmf::{ProbabilityVector, Support};
//! use std::sync::Arc;
//!
//! let support = Arc::new(Support::new(["a", "b", "c"]).unwrap());
//! let p = ProbabilityVector::new(support.clone(), vec![0.4, 0.25, 0.35]).unwrap();
//! let q = ProbabilityVector::new(support, vec![0.27, 0.32, 0.41]).unwrap();
//! let kind: MeasureKind = "kl".parse().unwrap();
//! let d = divergence(kind, &p, &q).unwrap();
//! assert!((d - 0.04012).abs() < 5e-5);
//! ```

pub mod inference;
pub mod io;
pub mod measures;
pub mod montecarlo;
pub mod normal;
pub mod phi;
pub mod pmf;
pub mod rng;

use thiserror::Error;

/// Errors produced by library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("unknown label \"{0}\" not in the declared support")]
    UnknownLabel(String),

    #[error("duplicate label \"{0}\" in support")]
    DuplicateLabel(String),

    #[error("support must contain at least two labels, got {0}")]
    SupportTooSmall(usize),

    #[error("supports differ: operands must share one support with identical ordering")]
    SupportMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("strict positivity violated: {side}[{index}] = 0 (label \"{label}\")")]
    PositivityViolation {
        side: &'static str,
        index: usize,
        label: String,
    },

    #[error("alpha must be positive and differ from 1 (use kl for the limit case), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} finite values, got {got}")]
    TooFewValues { needed: usize, got: usize },

    #[error("unrecognized measure \"{0}\" (expected l2, kl, tsallis:<alpha> or renyi:<alpha>, optionally :sym)")]
    UnknownMeasure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

//! Seeded simulation harness: consistency traces, normality of standardized
//! plug-in statistics, confidence-interval coverage, and almost-sure
//! deviation-ratio checks, with figure-ready CSV/JSON output.
//!
//! Replication k of a cell draws its samples from generators seeded by
//! `derive_seed(master_seed, [measure, size, k, stream])`, so replications
//! are independent, reproducible, and could run concurrently; aggregation
//! always happens in replication-index order, which makes reports
//! byte-identical for a fixed configuration.
//!
//! Standardized statistics are scaled by the asymptotic variance at the
//! *true* pair — available in simulation — so the normality checks validate
//! the limit theorems themselves rather than the plug-in variance.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::inference::{self, EstimateRequest, SampleMode, VARIANCE_FLOOR};
use crate::measures::{self, MeasureKind};
use crate::normal::kolmogorov_sf;
use crate::pmf::{sample_counts, sup_deviation, ProbabilityVector, SmoothingPolicy, Support};
use crate::rng::{derive_seed, label_tag};
use crate::{Error, Result};

/// Relative slack applied to the almost-sure bounds: the theory makes a
/// limsup statement, so finite-sample ratios may exceed the constant;
/// 5% of headroom turns it into a falsifiable check without being vacuous.
pub const RATIO_SLACK: f64 = 0.05;

/// A full simulation plan.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub p: ProbabilityVector,
    pub q: ProbabilityVector,
    pub measures: Vec<MeasureKind>,
    pub mode: SampleMode,
    /// Strictly increasing grid of sample sizes.
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub ci_level: f64,
    pub smoothing: SmoothingPolicy,
}

impl SimulationConfig {
    /// The reference study setup: `p = (0.4, 0.25, 0.35)`,
    /// `q = (0.27, 0.32, 0.41)` over three points, the KL, Tsallis-0.99 and
    /// Rényi-{0.99, 0.5} measures with their symmetrized forms, two-sample
    /// mode, and a size grid spanning 100 to 30000.
    pub fn reference_defaults(master_seed: u64) -> Self {
        let support =
            std::sync::Arc::new(Support::new(["c1", "c2", "c3"]).expect("static support"));
        let p = ProbabilityVector::new(std::sync::Arc::clone(&support), vec![0.4, 0.25, 0.35])
            .expect("static pmf");
        let q = ProbabilityVector::new(support, vec![0.27, 0.32, 0.41]).expect("static pmf");
        let measures = [
            "tsallis:0.99",
            "renyi:0.99",
            "kl",
            "renyi:0.5",
            "tsallis:0.99:sym",
            "renyi:0.99:sym",
            "kl:sym",
            "renyi:0.5:sym",
        ]
        .iter()
        .map(|s| s.parse().expect("static measure id"))
        .collect();
        SimulationConfig {
            p,
            q,
            measures,
            mode: SampleMode::TwoSample,
            sizes: vec![100, 500, 2000, 10_000, 30_000],
            replications: 2000,
            master_seed,
            ci_level: 0.95,
            smoothing: SmoothingPolicy::Strict,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.measures.is_empty() {
            return Err(Error::InvalidParameter(
                "simulation needs at least one measure".to_string(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".to_string(),
            ));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sizes must be a nonempty strictly increasing grid".to_string(),
            ));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ci level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if !self.p.is_strictly_positive() || !self.q.is_strictly_positive() {
            return Err(Error::InvalidParameter(
                "simulation distributions must be strictly positive".to_string(),
            ));
        }
        crate::pmf::check_same_support(self.p.support(), self.q.support())?;
        Ok(())
    }
}

/// Moments and normality diagnostics of the standardized draws; the KS
/// fields need at least eight replications.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StandardizedSummary {
    pub mean: f64,
    pub sd: f64,
    pub ks_statistic: Option<f64>,
    pub ks_p_value: Option<f64>,
}

/// Deviation-ratio diagnostics of one cell: per replication the estimation
/// error is divided by the sup-norm deviation of the empirical pmf(s) and
/// compared against the rate-certificate bound with [`RATIO_SLACK`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AsRatioSummary {
    pub bound: f64,
    pub slack: f64,
    pub median: f64,
    pub max: f64,
    pub exceed_fraction: f64,
    /// Replications with zero deviation but nonzero error, excluded from the
    /// ratio statistics and counted as exceedances.
    pub excluded: usize,
}

/// Aggregated results of one (measure, size) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellStats {
    pub measure: String,
    pub size: usize,
    pub true_value: f64,
    /// Asymptotic variance components at the true pair.
    pub variance_p: f64,
    pub variance_q: f64,
    pub mean_estimate: f64,
    pub sd_estimate: f64,
    pub bias: f64,
    /// Absent when the true variance is degenerate.
    pub standardized: Option<StandardizedSummary>,
    pub ci_coverage: f64,
    pub as_ratio: AsRatioSummary,
    /// Raw standardized draws for external Q-Q plotting; not serialized.
    #[serde(skip)]
    pub standardized_draws: Vec<f64>,
}

/// Deterministic summary of a whole simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: SampleMode,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub ci_level: f64,
    pub cells: Vec<CellStats>,
}

/// One-sample Kolmogorov–Smirnov test of the values against the standard
/// normal distribution. Returns the statistic and the asymptotic p-value.
pub fn ks_normality(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 8 || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::TooFewValues {
            needed: 8,
            got: values.iter().filter(|v| v.is_finite()).count(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len() as f64;
    let mut statistic: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = crate::normal::cdf(x);
        let lower = i as f64 / n;
        let upper = (i + 1) as f64 / n;
        statistic = statistic.max((cdf - lower).abs()).max((upper - cdf).abs());
    }
    let p_value = kolmogorov_sf(n.sqrt() * statistic);
    Ok((statistic, p_value))
}

struct CellAccumulator {
    estimates: Vec<f64>,
    standardized: Vec<f64>,
    covered: usize,
    ratios: Vec<f64>,
    excluded: usize,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn simulate_cell(config: &SimulationConfig, kind: MeasureKind, size: usize) -> Result<CellStats> {
    let true_value = measures::divergence(kind, &config.p, &config.q)?;
    let (vp, vq) = measures::variance_components(kind, &config.p, &config.q)?;
    let nf = size as f64;
    // Two-sample cells draw both samples at n = m = size, so the scaling
    // sqrt(nm/(m·Vp + n·Vq)) reduces to sqrt(n/(Vp + Vq)).
    let (std_scale, relevant_variance) = match config.mode {
        SampleMode::OneSampleP => ((nf / vp).sqrt(), vp),
        SampleMode::OneSampleQ => ((nf / vq).sqrt(), vq),
        SampleMode::TwoSample => ((nf / (vp + vq)).sqrt(), vp + vq),
    };
    let degenerate = relevant_variance < VARIANCE_FLOOR;
    let certificate = inference::as_rate_certificate(&config.p, &config.q, kind, config.mode)?;
    let threshold = (1.0 + RATIO_SLACK) * certificate.bound;
    let tag = label_tag(&kind.id());

    let r = config.replications;
    let mut acc = CellAccumulator {
        estimates: Vec::with_capacity(r),
        standardized: Vec::with_capacity(r),
        covered: 0,
        ratios: Vec::with_capacity(r),
        excluded: 0,
    };

    for k in 0..r as u64 {
        let p_seed = derive_seed(config.master_seed, &[tag, size as u64, k, 0]);
        let q_seed = derive_seed(config.master_seed, &[tag, size as u64, k, 1]);
        let (request, deviation) = match config.mode {
            SampleMode::OneSampleP => {
                let counts = sample_counts(&config.p, size, p_seed)?;
                let raw = counts.to_pmf(SmoothingPolicy::Strict)?;
                let deviation = sup_deviation(&raw, &config.p)?;
                (
                    EstimateRequest::one_sample_p(kind, counts, config.q.clone(), config.smoothing),
                    deviation,
                )
            }
            SampleMode::OneSampleQ => {
                let counts = sample_counts(&config.q, size, q_seed)?;
                let raw = counts.to_pmf(SmoothingPolicy::Strict)?;
                let deviation = sup_deviation(&raw, &config.q)?;
                (
                    EstimateRequest::one_sample_q(kind, config.p.clone(), counts, config.smoothing),
                    deviation,
                )
            }
            SampleMode::TwoSample => {
                let p_counts = sample_counts(&config.p, size, p_seed)?;
                let q_counts = sample_counts(&config.q, size, q_seed)?;
                let dev_p = sup_deviation(&p_counts.to_pmf(SmoothingPolicy::Strict)?, &config.p)?;
                let dev_q = sup_deviation(&q_counts.to_pmf(SmoothingPolicy::Strict)?, &config.q)?;
                (
                    EstimateRequest::two_sample(kind, p_counts, q_counts, config.smoothing),
                    crate::pmf::joint_sup_deviation(dev_p, dev_q),
                )
            }
        };

        let est = inference::estimate(&request)?;
        let error = est.value - true_value;
        acc.estimates.push(est.value);
        if !degenerate {
            acc.standardized.push(std_scale * error);
        }
        let (lo, hi) = inference::confidence_interval(&est, config.ci_level)?;
        if lo <= true_value && true_value <= hi {
            acc.covered += 1;
        }
        if deviation == 0.0 {
            if error == 0.0 {
                acc.ratios.push(0.0);
            } else {
                acc.excluded += 1;
            }
        } else {
            acc.ratios.push(error.abs() / deviation);
        }
    }

    let (mean_estimate, sd_estimate) = mean_sd(&acc.estimates);
    let standardized = if degenerate {
        None
    } else {
        let (mean, sd) = mean_sd(&acc.standardized);
        let ks = if acc.standardized.len() >= 8 {
            Some(ks_normality(&acc.standardized)?)
        } else {
            None
        };
        Some(StandardizedSummary {
            mean,
            sd,
            ks_statistic: ks.map(|k| k.0),
            ks_p_value: ks.map(|k| k.1),
        })
    };

    let mut sorted = acc.ratios.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let median = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    let max = sorted.last().copied().unwrap_or(0.0);
    let exceed = acc.ratios.iter().filter(|&&x| x > threshold).count() + acc.excluded;

    Ok(CellStats {
        measure: kind.id(),
        size,
        true_value,
        variance_p: vp,
        variance_q: vq,
        mean_estimate,
        sd_estimate,
        bias: mean_estimate - true_value,
        standardized,
        ci_coverage: acc.covered as f64 / r as f64,
        as_ratio: AsRatioSummary {
            bound: certificate.bound,
            slack: RATIO_SLACK,
            median,
            max,
            exceed_fraction: exceed as f64 / r as f64,
            excluded: acc.excluded,
        },
        standardized_draws: acc.standardized,
    })
}

/// Runs the full plan. Identical configurations produce identical reports.
pub fn run(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let mut cells = Vec::with_capacity(config.measures.len() * config.sizes.len());
    for &kind in &config.measures {
        for &size in &config.sizes {
            cells.push(simulate_cell(config, kind, size)?);
        }
    }
    Ok(SimulationReport {
        mode: config.mode,
        sizes: config.sizes.clone(),
        replications: config.replications,
        master_seed: config.master_seed,
        ci_level: config.ci_level,
        cells,
    })
}

/// Deviation-ratio exceedance check for one measure at the largest grid
/// size; shares the seed derivation with [`run`], so the numbers coincide
/// with the corresponding report cell.
pub fn as_ratio_check(config: &SimulationConfig, kind: MeasureKind) -> Result<CellStats> {
    config.validate()?;
    let size = *config.sizes.last().expect("validated nonempty");
    simulate_cell(config, kind, size)
}

/// Output encodings for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Parse(format!(
                "unknown report format \"{other}\" (expected csv or json)"
            ))),
        }
    }
}

/// Statistic names emitted per cell, in CSV row order.
pub const CSV_STATISTICS: [&str; 16] = [
    "true_value",
    "variance_p",
    "variance_q",
    "mean_estimate",
    "sd_estimate",
    "bias",
    "std_mean",
    "std_sd",
    "ks_statistic",
    "ks_p_value",
    "ci_coverage",
    "as_bound",
    "as_ratio_median",
    "as_ratio_max",
    "as_exceed_fraction",
    "as_excluded",
];

fn cell_statistic_values(cell: &CellStats) -> [Option<f64>; 16] {
    let std = cell.standardized.as_ref();
    [
        Some(cell.true_value),
        Some(cell.variance_p),
        Some(cell.variance_q),
        Some(cell.mean_estimate),
        Some(cell.sd_estimate),
        Some(cell.bias),
        std.map(|s| s.mean),
        std.map(|s| s.sd),
        std.and_then(|s| s.ks_statistic),
        std.and_then(|s| s.ks_p_value),
        Some(cell.ci_coverage),
        Some(cell.as_ratio.bound),
        Some(cell.as_ratio.median),
        Some(cell.as_ratio.max),
        Some(cell.as_ratio.exceed_fraction),
        Some(cell.as_ratio.excluded as f64),
    ]
}

/// Writes the report as CSV (one row per measure, size and statistic, with
/// `NA` for unavailable values) or as JSON mirroring [`SimulationReport`].
pub fn emit<W: Write>(report: &SimulationReport, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            writer.write_record(["measure", "size", "statistic", "value"])?;
            for cell in &report.cells {
                for (name, value) in CSV_STATISTICS.iter().zip(cell_statistic_values(cell)) {
                    writer.write_record([
                        cell.measure.as_str(),
                        &cell.size.to_string(),
                        name,
                        &value.map_or_else(|| "NA".to_string(), |v| v.to_string()),
                    ])?;
                }
            }
            writer.flush()?;
        }
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// [`emit`] to a filesystem path.
pub fn emit_to_path(report: &SimulationReport, format: ReportFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    emit(report, format, std::io::BufWriter::new(file))
}

/// Dumps the standardized draws of every cell, one float per line, as
/// `<measure>_<size>.txt` under `dir` (colons in measure ids become
/// underscores). Returns the written paths.
pub fn dump_standardized_draws(report: &SimulationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for cell in &report.cells {
        if cell.standardized_draws.is_empty() {
            continue;
        }
        let name = format!("{}_{}.txt", cell.measure.replace(':', "_"), cell.size);
        let path = dir.join(name);
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        for v in &cell.standardized_draws {
            writeln!(file, "{v}")?;
        }
        file.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

//! `phidiv` — estimate φ-divergences from files, run Wald tests, print the
//! measure constants, and drive the seeded simulation harness.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 strict-positivity
//! violation, 4 degenerate variance when a p-value was demanded. Every error
//! path writes one `error:` line to stderr; stdout carries only the
//! requested document.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use phidiv::inference::{
    as_rate_certificate, confidence_interval, estimate, wald_test, Alternative, EstimateDoc,
    EstimateRequest, SampleMode, TestResultDoc,
};
use phidiv::measures::{named_constants, MeasureFamily, MeasureKind, NamedConstants};
use phidiv::montecarlo::{dump_standardized_draws, emit, run, ReportFormat, SimulationConfig};
use phidiv::pmf::{
    empirical_pmf, CountTable, ProbabilityVector, SampleBatch, SmoothingPolicy, Support,
};
use phidiv::{io as pio, Error};

const EXIT_INPUT: i32 = 2;
const EXIT_POSITIVITY: i32 = 3;
const EXIT_DEGENERATE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "phidiv",
    version,
    about = "Estimation and asymptotic inference for phi-divergences on finite supports",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a divergence from counts, samples, or known distributions
    Estimate(EstimateArgs),
    /// Wald test of an estimated divergence against a null value
    Test(TestArgs),
    /// Run the seeded Monte Carlo harness and emit a report
    Simulate(SimulateArgs),
    /// Print deviation-bound and variance constants of a measure
    Constants(ConstantsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Measure: l2 | kl | tsallis:ALPHA | renyi:ALPHA, optional :sym suffix
    #[arg(long)]
    measure: String,

    /// one-sample-p | one-sample-q | two-sample (inferred from inputs when omitted)
    #[arg(long)]
    mode: Option<String>,

    /// Count-table CSV (`label,count`) for the first argument
    #[arg(long, value_name = "FILE")]
    p_counts: Option<PathBuf>,

    /// Sample file (one label per line) for the first argument
    #[arg(long, value_name = "FILE")]
    p_samples: Option<PathBuf>,

    /// Distribution JSON for the first argument (treated as known)
    #[arg(long, value_name = "FILE")]
    p_dist: Option<PathBuf>,

    /// Count-table CSV for the second argument
    #[arg(long, value_name = "FILE")]
    q_counts: Option<PathBuf>,

    /// Sample file for the second argument
    #[arg(long, value_name = "FILE")]
    q_samples: Option<PathBuf>,

    /// Distribution JSON for the second argument (treated as known)
    #[arg(long, value_name = "FILE")]
    q_dist: Option<PathBuf>,

    /// Additive smoothing constant for empirical cells (0.5 when given bare)
    #[arg(long, value_name = "LAMBDA", num_args = 0..=1, default_missing_value = "0.5")]
    smooth: Option<f64>,

    /// Write the document here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Null value of the divergence under the null hypothesis
    #[arg(long, default_value_t = 0.0)]
    null: f64,

    /// two-sided | greater | less
    #[arg(long, default_value = "two-sided")]
    alt: String,

    /// Confidence level for the reported interval
    #[arg(long, default_value_t = 0.95)]
    level: f64,

    /// Fail (exit 4) instead of reporting a degenerate result without p-value
    #[arg(long)]
    require_p_value: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Use the built-in reference setup: p=(0.4,0.25,0.35), q=(0.27,0.32,0.41),
    /// KL / Tsallis-0.99 / Renyi-0.99 / Renyi-0.5 and their symmetrized forms
    #[arg(long)]
    paper_defaults: bool,

    /// Distribution JSON for the first argument
    #[arg(long, value_name = "FILE")]
    p_dist: Option<PathBuf>,

    /// Distribution JSON for the second argument
    #[arg(long, value_name = "FILE")]
    q_dist: Option<PathBuf>,

    /// Measure id; repeat or comma-separate for several
    #[arg(long, value_name = "MEASURE")]
    measure: Vec<String>,

    /// one-sample-p | one-sample-q | two-sample
    #[arg(long, default_value = "two-sample")]
    mode: String,

    /// Comma-separated strictly increasing sample sizes
    #[arg(
        long,
        value_name = "N,N,...",
        default_value = "100,500,2000,10000,30000"
    )]
    sizes: String,

    /// Monte Carlo replications per cell
    #[arg(long, default_value_t = 2000)]
    replications: usize,

    /// Master seed; omitting it warns and uses 0
    #[arg(long)]
    seed: Option<u64>,

    /// Confidence level used for the coverage statistic
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,

    /// Additive smoothing constant for empirical cells (0.5 when given bare)
    #[arg(long, value_name = "LAMBDA", num_args = 0..=1, default_missing_value = "0.5")]
    smooth: Option<f64>,

    /// Report encoding: json | csv
    #[arg(long, default_value = "json")]
    format: String,

    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Dump standardized draws (one float per line, one file per cell) here
    #[arg(long, value_name = "DIR")]
    dump_draws: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Measure id
    #[arg(long)]
    measure: String,

    /// Distribution JSON for the first argument
    #[arg(long, value_name = "FILE")]
    p_dist: PathBuf,

    /// Distribution JSON for the second argument
    #[arg(long, value_name = "FILE")]
    q_dist: PathBuf,

    /// Write the document here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::PositivityViolation { .. } => EXIT_POSITIVITY,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Constants(args) => cmd_constants(args),
    };
    if let Err(failure) = outcome {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}

fn in_context(path: &Path, err: Error) -> Failure {
    let mut failure = Failure::from(err);
    failure.message = format!("{}: {}", path.display(), failure.message);
    failure
}

/// One side of an estimation problem as read from disk, before supports are
/// aligned.
enum RawSide {
    Counts(CountTable),
    Samples(Vec<String>),
    Known(ProbabilityVector),
}

/// The same side materialized over the canonical support.
enum Side {
    Empirical(CountTable),
    Known(ProbabilityVector),
}

fn load_side(
    name: &str,
    counts: &Option<PathBuf>,
    samples: &Option<PathBuf>,
    dist: &Option<PathBuf>,
) -> Result<RawSide, Failure> {
    let given = [counts.is_some(), samples.is_some(), dist.is_some()]
        .iter()
        .filter(|x| **x)
        .count();
    if given != 1 {
        return Err(Failure::input(format!(
            "exactly one of --{name}-counts, --{name}-samples, --{name}-dist is required"
        )));
    }
    if let Some(path) = counts {
        return Ok(RawSide::Counts(
            pio::read_count_csv_path(path).map_err(|e| in_context(path, e))?,
        ));
    }
    if let Some(path) = samples {
        let labels = pio::read_sample_lines_path(path).map_err(|e| in_context(path, e))?;
        if labels.is_empty() {
            return Err(in_context(path, Error::EmptySample));
        }
        return Ok(RawSide::Samples(labels));
    }
    let path = dist.as_ref().expect("one input is present");
    Ok(RawSide::Known(
        pio::read_distribution_json_path(path).map_err(|e| in_context(path, e))?,
    ))
}

/// Picks the support every input is aligned to: a known distribution wins,
/// then a count table, then the sorted union of sample labels.
fn canonical_support(p: &RawSide, q: &RawSide) -> Result<Arc<Support>, Failure> {
    for side in [p, q] {
        if let RawSide::Known(v) = side {
            return Ok(Arc::clone(v.support()));
        }
    }
    for side in [p, q] {
        if let RawSide::Counts(t) = side {
            return Ok(Arc::clone(t.support()));
        }
    }
    let mut labels: Vec<String> = Vec::new();
    for side in [p, q] {
        if let RawSide::Samples(s) = side {
            labels.extend(s.iter().cloned());
        }
    }
    labels.sort();
    labels.dedup();
    Ok(Arc::new(Support::new(labels).map_err(Failure::from)?))
}

fn materialize(side: RawSide, support: &Arc<Support>) -> Result<Side, Failure> {
    match side {
        RawSide::Counts(table) => Ok(Side::Empirical(table.reordered(support)?)),
        RawSide::Samples(labels) => {
            let batch = SampleBatch::from_labels(Arc::clone(support), labels)?;
            let (_, table) = empirical_pmf(&batch)?;
            Ok(Side::Empirical(table))
        }
        RawSide::Known(v) => Ok(Side::Known(v.reordered(support)?)),
    }
}

fn smoothing_policy(smooth: Option<f64>) -> SmoothingPolicy {
    match smooth {
        Some(lambda) => SmoothingPolicy::Smooth(lambda),
        None => SmoothingPolicy::Strict,
    }
}

fn parse_measure(s: &str) -> Result<MeasureKind, Failure> {
    s.parse().map_err(Failure::from)
}

fn build_request(input: &InputArgs) -> Result<(EstimateRequest, SampleMode), Failure> {
    let measure = parse_measure(&input.measure)?;
    let p_raw = load_side("p", &input.p_counts, &input.p_samples, &input.p_dist)?;
    let q_raw = load_side("q", &input.q_counts, &input.q_samples, &input.q_dist)?;
    let support = canonical_support(&p_raw, &q_raw)?;
    let p = materialize(p_raw, &support)?;
    let q = materialize(q_raw, &support)?;
    let smoothing = smoothing_policy(input.smooth);

    let (request, mode) = match (p, q) {
        (Side::Empirical(pc), Side::Known(qv)) => (
            EstimateRequest::one_sample_p(measure, pc, qv, smoothing),
            SampleMode::OneSampleP,
        ),
        (Side::Known(pv), Side::Empirical(qc)) => (
            EstimateRequest::one_sample_q(measure, pv, qc, smoothing),
            SampleMode::OneSampleQ,
        ),
        (Side::Empirical(pc), Side::Empirical(qc)) => (
            EstimateRequest::two_sample(measure, pc, qc, smoothing),
            SampleMode::TwoSample,
        ),
        (Side::Known(_), Side::Known(_)) => {
            return Err(Failure::input(
                "both sides are known distributions; nothing to estimate (use `constants`)",
            ))
        }
    };
    if let Some(requested) = &input.mode {
        let requested: SampleMode = requested.parse().map_err(Failure::from)?;
        if requested != mode {
            return Err(Failure::input(format!(
                "requested mode {requested} but the inputs imply {mode}"
            )));
        }
    }
    Ok((request, mode))
}

fn write_document<T: serde::Serialize>(out: &Option<PathBuf>, doc: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).map_err(Error::from)?;
    text.push('\n');
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| in_context(path, Error::Io(e)))?;
        }
        None => {
            print!("{text}");
        }
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let (request, mode) = build_request(&args.input)?;
    let est = estimate(&request)?;
    write_document(&args.input.out, &EstimateDoc::new(mode, &est))
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    let (request, mode) = build_request(&args.input)?;
    let alternative: Alternative = args.alt.parse().map_err(Failure::from)?;
    let est = estimate(&request)?;
    // Validates the level eagerly so a bad level fails even pre-degeneracy.
    confidence_interval(&est, args.level)?;
    let result = wald_test(&est, args.null, alternative, args.level)?;
    if result.degenerate && args.require_p_value {
        return Err(Failure {
            code: EXIT_DEGENERATE,
            message: format!(
                "degenerate variance ({} below floor): no p-value available",
                est.sampling_variance()
            ),
        });
    }
    write_document(&args.input.out, &TestResultDoc::new(mode, &result))
}

fn parse_sizes(list: &str) -> Result<Vec<usize>, Failure> {
    list.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Failure::input(format!("invalid size \"{part}\" in --sizes")))
        })
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let seed = match args.seed {
        Some(seed) => seed,
        None => {
            eprintln!("warning: no --seed given; defaulting to 0 for reproducibility");
            0
        }
    };

    let mut config = if args.paper_defaults {
        SimulationConfig::reference_defaults(seed)
    } else {
        let p_path = args
            .p_dist
            .as_ref()
            .ok_or_else(|| Failure::input("--p-dist is required without --paper-defaults"))?;
        let q_path = args
            .q_dist
            .as_ref()
            .ok_or_else(|| Failure::input("--q-dist is required without --paper-defaults"))?;
        let p = pio::read_distribution_json_path(p_path).map_err(|e| in_context(p_path, e))?;
        let q = pio::read_distribution_json_path(q_path).map_err(|e| in_context(q_path, e))?;
        let q = q.reordered(p.support())?;
        if args.measure.is_empty() {
            return Err(Failure::input(
                "at least one --measure is required without --paper-defaults",
            ));
        }
        let mut defaults = SimulationConfig::reference_defaults(seed);
        defaults.p = p;
        defaults.q = q;
        defaults.measures = Vec::new();
        defaults
    };
    config.master_seed = seed;

    if !args.measure.is_empty() {
        let mut measures = Vec::new();
        for group in &args.measure {
            for part in group.split(',') {
                measures.push(parse_measure(part.trim())?);
            }
        }
        config.measures = measures;
    }
    config.mode = args.mode.parse().map_err(Failure::from)?;
    config.sizes = parse_sizes(&args.sizes)?;
    config.replications = args.replications;
    config.ci_level = args.ci_level;
    config.smoothing = smoothing_policy(args.smooth);

    let format: ReportFormat = args.format.parse().map_err(Failure::from)?;
    let report = run(&config)?;

    if let Some(dir) = &args.dump_draws {
        dump_standardized_draws(&report, dir).map_err(|e| in_context(dir, e))?;
    }

    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| in_context(path, Error::Io(e)))?;
            emit(&report, format, std::io::BufWriter::new(file))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&report, format, &mut lock)?;
            lock.flush().map_err(Error::from)?;
        }
    }
    Ok(())
}

fn family_key(kind: MeasureKind) -> &'static str {
    match kind.family {
        MeasureFamily::Kl => "KL",
        MeasureFamily::L2 => "L2",
        MeasureFamily::Tsallis(_) => "T_alpha",
        MeasureFamily::Renyi(_) => "R_alpha",
    }
}

fn constants_document(
    kind: MeasureKind,
    constants: &NamedConstants,
    bounds: [f64; 3],
) -> serde_json::Value {
    let mut doc = serde_json::Map::new();
    let num = serde_json::Value::from;
    doc.insert("measure".into(), constants.measure.clone().into());
    if let Some(alpha) = constants.alpha {
        doc.insert("alpha".into(), num(alpha));
    }
    if let Some(s) = constants.s_alpha {
        doc.insert("S_alpha".into(), num(s));
    }
    let prefix = family_key(kind);
    for k in 0..4 {
        doc.insert(format!("A_{prefix}_{}", k + 1), num(constants.a[k]));
        doc.insert(format!("V_{prefix}_{}", k + 1), num(constants.v[k]));
    }
    doc.insert(format!("A_{prefix}_1_sym"), num(constants.a_sym_p));
    doc.insert(format!("A_{prefix}_2_sym"), num(constants.a_sym_q));
    doc.insert(format!("V_{prefix}_1_4"), num(constants.v_sym_14));
    doc.insert(format!("V_{prefix}_2_3"), num(constants.v_sym_23));
    if let (Some(ta), Some(tv), Some(s)) =
        (constants.tsallis_a, constants.tsallis_v, constants.s_alpha)
    {
        let mut check: f64 = 0.0;
        for k in 0..4 {
            doc.insert(format!("A_T_alpha_{}", k + 1), num(ta[k]));
            doc.insert(format!("V_T_alpha_{}", k + 1), num(tv[k]));
            check = check.max((constants.v[k] * s * s - tv[k]).abs());
        }
        doc.insert("renyi_scaling_check_max_abs_error".into(), num(check));
    }
    doc.insert("as_bound_one_sample_p".into(), num(bounds[0]));
    doc.insert("as_bound_one_sample_q".into(), num(bounds[1]));
    doc.insert("as_bound_two_sample".into(), num(bounds[2]));
    serde_json::Value::Object(doc)
}

fn cmd_constants(args: ConstantsArgs) -> Result<(), Failure> {
    let kind = parse_measure(&args.measure)?;
    let p =
        pio::read_distribution_json_path(&args.p_dist).map_err(|e| in_context(&args.p_dist, e))?;
    let q =
        pio::read_distribution_json_path(&args.q_dist).map_err(|e| in_context(&args.q_dist, e))?;
    let q = q.reordered(p.support())?;
    let constants = named_constants(kind, &p, &q)?;
    let bounds = [
        as_rate_certificate(&p, &q, kind, SampleMode::OneSampleP)?.bound,
        as_rate_certificate(&p, &q, kind, SampleMode::OneSampleQ)?.bound,
        as_rate_certificate(&p, &q, kind, SampleMode::TwoSample)?.bound,
    ];
    let doc = constants_document(kind, &constants, bounds);
    write_document(&args.out, &doc)
}

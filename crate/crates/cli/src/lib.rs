//! The `nerf` command line: construct frames, certify and attack them,
//! evaluate closed-form bounds and simulate the erasure channel.
//!
//! Exit codes: 0 for success (certified or not refuted), 2 when a frame is
//! refuted, 1 for usage and runtime errors.

pub mod frame_file;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nerf_core::certificates::{
    asymp_etf_nerf_max_p, asymptotic_erasure_threshold, etf_nerf_max_p, gaussian_failure_probability,
    gaussian_nerf_condition, group_erasure_budget, group_nerf_max_p, max_gaussian_erasure_rate, mub_erasure_budget,
    mub_nerf_max_p, q_function, welch_bound, FormulaId, NerfQuery,
};
use nerf_core::constructions::{
    gaussian_frame, harmonic_frame, mub_frame, real_simplex, sign_frame, simplex, simplex_group_frame, singer_etf,
};
use nerf_core::erasure::{
    bicap_attack, certify_nerf, exhaustive_worst_cond, greedy_attack, sampled_worst_cond, sign_attack,
    simulate_trials, AttackReport, CertificateReport, CertifyMode, CertifyOptions, SearchOptions, Verdict,
    CONDITION_SLACK, DEFAULT_WORK_CAP,
};
use nerf_core::spectral::{coherence, extended_real, extended_real_opt, Provenance};
use nerf_core::{Frame, ScalarField, Tolerances};
use serde::Serialize;

use report::{fmt_f64, ReportFile, Table};

/// Environment variable overriding the exhaustive-search work cap.
pub const WORK_CAP_ENV: &str = "NERF_WORK_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REFUTED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nerf", version, about = "Numerically erasure-robust frames")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a frame and write it to a frame file.
    Construct(ConstructArgs),
    /// Decide or probe whether a frame is (p, C)-robust.
    Certify(CertifyArgs),
    /// Search for a badly conditioned K-column submatrix.
    Attack(AttackArgs),
    /// Evaluate closed-form bounds.
    Bounds(BoundsArgs),
    /// Run the noisy erasure channel.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Gaussian,
    SingerEtf,
    Mub,
    Simplex,
    GroupSimplex,
    Sign,
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Prime power for singer-etf.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    /// Real (Hadamard) simplex instead of the DFT one.
    #[arg(long)]
    pub real: bool,
    /// DFT rows for harmonic frames, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<usize>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
    Attacks,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Worker threads for enumeration and sampling.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random patterns for sampled searches.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub frame: PathBuf,
    /// Erasure rate; K = N - floor(pN) columns survive.
    #[arg(long)]
    pub p: f64,
    /// Condition number target.
    #[arg(long)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    /// eps of the Gaussian guarantee.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exhaustive,
    Sampled,
    Greedy,
    Bicap,
    Sign,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    pub frame: PathBuf,
    /// Surviving columns.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Condition target; required for bicap, optional verdict otherwise.
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub formula: BoundsFormula,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum BoundsFormula {
    /// Largest erasure rate for the Singer ETF.
    Etf {
        #[arg(long)]
        c: f64,
    },
    /// Largest erasure rate for ETFs with (N-1)/(M(M-1)) >= alpha.
    AsympEtf {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        c: f64,
    },
    /// Largest erasure rate for mutually unbiased bases.
    Mub {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        c: f64,
    },
    /// Largest erasure rate for the two-level simplex group frame.
    Group {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        c: f64,
    },
    /// Erasable column counts p * N for the MUB and group families.
    Budget {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        c: f64,
    },
    /// Sufficient condition for a Gaussian frame.
    Gaussian {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Supremum of rates the Gaussian guarantee can reach.
    GaussianMaxP,
    /// 2 exp(-N eps / 2).
    FailureProb {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Rates beyond 1 - 2Q(C) are out of reach asymptotically.
    Threshold {
        #[arg(long)]
        c: f64,
    },
    /// Standard normal upper tail Q(t).
    Q {
        #[arg(long)]
        t: f64,
    },
    /// Welch bound on coherence.
    Welch {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Rate curves against C, as CSV.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        c_min: f64,
        #[arg(long, default_value_t = 20.0)]
        c_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Dimension for the MUB and group curves.
        #[arg(long, default_value_t = 7)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub frame: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Standard deviation of the measurement noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-trial CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameSummary {
    pub m: usize,
    pub n: usize,
    pub scalar_field: ScalarField,
    pub provenance: Provenance,
}

impl FrameSummary {
    fn of(frame: &Frame) -> Self {
        Self {
            m: frame.dim(),
            n: frame.len(),
            scalar_field: frame.scalar_field(),
            provenance: frame.provenance().clone(),
        }
    }
}

fn work_cap() -> Result<u64> {
    match std::env::var(WORK_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{WORK_CAP_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_WORK_CAP),
    }
}

fn search_options(workers: Option<usize>) -> Result<SearchOptions> {
    Ok(SearchOptions {
        work_cap: work_cap()?,
        workers,
        ..Default::default()
    })
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    output: &OutputArgs,
    command: &str,
    report: T,
    started: Instant,
    summary: &[String],
) -> Result<()> {
    let file = ReportFile::new(command, report, started.elapsed().as_secs_f64());
    if let Some(path) = &output.report {
        file.write(path)?;
    }
    if output.json {
        writeln!(out, "{}", file.to_json()?)?;
    } else {
        for line in summary {
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command, returning the
/// exit code. Usage errors print to `err` and return 1.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Construct(a) => construct(a, out),
        Command::Certify(a) => certify(a, out),
        Command::Attack(a) => attack(a, out),
        Command::Bounds(a) => bounds(a, out),
        Command::Simulate(a) => simulate(a, out),
    }
}

fn need<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.with_context(|| format!("{family} needs --{flag}"))
}

pub fn build_frame(a: &ConstructArgs) -> Result<Frame> {
    let name = a.family.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    let field = match a.field {
        FieldArg::Real => ScalarField::Real,
        FieldArg::Complex => ScalarField::Complex,
    };
    let frame = match a.family {
        Family::Gaussian => gaussian_frame(need(a.m, "m", &name)?, need(a.n, "n", &name)?, a.seed, field)?,
        Family::SingerEtf => singer_etf(need(a.q, "q", &name)?)?,
        Family::Mub => mub_frame(need(a.m, "m", &name)?)?,
        Family::Simplex if a.real => real_simplex(need(a.m, "m", &name)?)?,
        Family::Simplex => simplex(need(a.m, "m", &name)?)?,
        Family::GroupSimplex => simplex_group_frame(need(a.m, "m", &name)?)?,
        Family::Sign => sign_frame(need(a.m, "m", &name)?, need(a.n, "n", &name)?, a.seed)?,
        Family::Harmonic => {
            if a.rows.is_empty() {
                bail!("harmonic needs --rows");
            }
            harmonic_frame(need(a.n, "n", &name)?, &a.rows)?
        }
    };
    Ok(frame)
}

fn construct(a: ConstructArgs, out: &mut dyn Write) -> Result<i32> {
    let frame = build_frame(&a)?;
    frame_file::save(&frame, &a.out)?;
    let mu = match coherence(&frame) {
        Ok(mu) => format!("{mu:.6}"),
        Err(_) => "n/a (columns not unit norm)".into(),
    };
    let mut line = format!(
        "{} {}x{}: tightness residual {:.3e}, coherence {mu} -> {}",
        frame.provenance().construction.family_name(),
        frame.dim(),
        frame.len(),
        frame.tightness_residual(),
        a.out.display()
    );
    if !frame.provenance().certified_range {
        line.push_str(" (outside the certified parameter range)");
    }
    writeln!(out, "{line}")?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CertifyReport {
    frame: FrameSummary,
    certificate: CertificateReport,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Refuted => "refuted",
        Verdict::NotRefuted => "not refuted",
    }
}

fn formula_name(id: FormulaId) -> String {
    serde_json::to_value(id)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn describe_attack(r: &AttackReport) -> String {
    let mut s = format!(
        "{}: cond {} with K = {}, erased {:?} (work {})",
        r.method.name(),
        fmt_cond(r.cond),
        r.pattern.len(),
        r.pattern.erased(),
        r.work
    );
    if let Some(lower) = r.certificate_cond_lower {
        s.push_str(&format!(", lemma lower bound {}", fmt_cond(lower)));
    }
    if let Some(c) = &r.candidate {
        s.push_str(&format!(", direction {c}"));
    }
    s
}

fn fmt_cond(c: f64) -> String {
    if c.is_infinite() {
        "inf (rank deficient)".into()
    } else {
        format!("{c:.6}")
    }
}

fn certify(a: CertifyArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let frame = frame_file::load(&a.frame)?;
    let opts = CertifyOptions {
        search: search_options(a.search.workers)?,
        trials: a.search.trials,
        seed: a.search.seed,
        eps: a.eps,
    };
    let mode = match a.mode {
        ModeArg::Exhaustive => CertifyMode::Exhaustive,
        ModeArg::Sampled => CertifyMode::Sampled,
        ModeArg::Attacks => CertifyMode::Attacks,
    };
    let cert = certify_nerf(&frame, a.p, a.c, mode, &opts)?;
    let mut summary = Vec::new();
    if cert.rank_deficient_by_counting {
        summary.push(format!(
            "refuted: rank-deficient by counting (K = {} < M = {})",
            cert.k, cert.m
        ));
    } else {
        let worst = cert.worst.as_ref().expect("searched");
        summary.push(format!(
            "{}: K = {} of N = {}, C = {}; worst {}",
            verdict_name(cert.verdict),
            cert.k,
            cert.n,
            a.c,
            describe_attack(worst)
        ));
    }
    for an in &cert.analytic {
        let mut line = format!(
            "analytic {}: p_eff = {:.6}, bound {:.6}, {}",
            formula_name(an.bound.formula_id),
            cert.erased as f64 / cert.n as f64,
            an.bound.bound_value,
            if an.bound.holds { "holds" } else { "does not hold" }
        );
        if let Some(cb) = an.cond_bound {
            line.push_str(&format!("; cond <= {} by {}", fmt_cond(cb), formula_name(an.cond_bound_formula.unwrap())));
        }
        if let Some(fp) = an.failure_probability {
            line.push_str(&format!("; failure probability <= {fp:.3e}"));
        }
        summary.push(line);
    }
    let code = if cert.verdict == Verdict::Refuted { EXIT_REFUTED } else { EXIT_OK };
    let report = CertifyReport {
        frame: FrameSummary::of(&frame),
        certificate: cert,
    };
    emit(out, &a.output, "certify", report, started, &summary)?;
    Ok(code)
}

#[derive(Serialize)]
struct AttackFileReport {
    frame: FrameSummary,
    k: usize,
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exceeds_c: Option<bool>,
    attack: AttackReport,
}

fn attack(a: AttackArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let frame = frame_file::load(&a.frame)?;
    let opts = search_options(a.search.workers)?;
    let tol = Tolerances::default();
    let report = match a.method {
        MethodArg::Exhaustive => exhaustive_worst_cond(&frame, a.k, &opts)?,
        MethodArg::Sampled => sampled_worst_cond(&frame, a.k, a.search.trials, a.search.seed, &opts)?,
        MethodArg::Greedy => greedy_attack(&frame, a.k, &tol)?,
        MethodArg::Bicap => {
            let c = a.c.context("bicap needs --c")?;
            bicap_attack(&frame, a.k, c, a.search.seed, &tol)?
        }
        MethodArg::Sign => sign_attack(&frame, a.k, &tol)?,
    };
    let exceeds = a.c.map(|c| report.cond > c + CONDITION_SLACK);
    let mut summary = vec![describe_attack(&report)];
    if let (Some(c), Some(x)) = (a.c, exceeds) {
        summary.push(if x {
            format!("refuted: cond exceeds C = {c}")
        } else {
            format!("not refuted at C = {c}")
        });
    }
    let file = AttackFileReport {
        frame: FrameSummary::of(&frame),
        k: a.k,
        c: a.c,
        exceeds_c: exceeds,
        attack: report,
    };
    emit(out, &a.output, "attack", file, started, &summary)?;
    Ok(if exceeds == Some(true) { EXIT_REFUTED } else { EXIT_OK })
}

#[derive(Serialize)]
struct BoundValue {
    formula_id: String,
    inputs: serde_json::Map<String, serde_json::Value>,
    #[serde(with = "extended_real")]
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", with = "extended_real_opt")]
    margin: Option<f64>,
}

fn inputs(pairs: &[(&str, f64)]) -> serde_json::Map<String, serde_json::Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect()
}

fn value(formula: &str, pairs: &[(&str, f64)], value: f64) -> BoundValue {
    BoundValue {
        formula_id: formula.into(),
        inputs: inputs(pairs),
        value,
        holds: None,
        margin: None,
    }
}

fn id(f: FormulaId) -> String {
    formula_name(f)
}

/// `steps + 1` points from `lo` to `hi`.
fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

pub fn sweep_table(c_min: f64, c_max: f64, steps: usize, m: usize, alpha: f64) -> Result<Table> {
    if !(c_min >= 1.0 && c_max >= c_min && c_max.is_finite()) {
        bail!("sweep needs 1 <= c-min <= c-max < inf");
    }
    let mut table = Table::new(&["c", "singer_etf", "asymptotic_etf", "mutually_unbiased", "group_simplex", "bicap_threshold"]);
    for c in grid(c_min, c_max, steps) {
        let opt = |r: nerf_core::Result<f64>| r.map(fmt_f64).unwrap_or_default();
        table.push(vec![
            fmt_f64(c),
            fmt_f64(etf_nerf_max_p(c)?),
            fmt_f64(asymp_etf_nerf_max_p(alpha, c)?),
            opt(mub_nerf_max_p(m, c)),
            opt(group_nerf_max_p(m, c)),
            fmt_f64(asymptotic_erasure_threshold(c)?),
        ]);
    }
    Ok(table)
}

fn bounds(a: BoundsArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let values: Vec<BoundValue> = match a.formula {
        BoundsFormula::Etf { c } => vec![value(&id(FormulaId::SingerEtf), &[("c", c)], etf_nerf_max_p(c)?)],
        BoundsFormula::AsympEtf { alpha, c } => vec![value(
            &id(FormulaId::AsymptoticEtf),
            &[("alpha", alpha), ("c", c)],
            asymp_etf_nerf_max_p(alpha, c)?,
        )],
        BoundsFormula::Mub { m, c } => vec![value(
            &id(FormulaId::MutuallyUnbiased),
            &[("m", m as f64), ("c", c)],
            mub_nerf_max_p(m, c)?,
        )],
        BoundsFormula::Group { m, c } => vec![value(
            &id(FormulaId::GroupSimplex),
            &[("m", m as f64), ("c", c)],
            group_nerf_max_p(m, c)?,
        )],
        BoundsFormula::Budget { m, c } => {
            let mut v = vec![value(
                &format!("{}-budget", id(FormulaId::MutuallyUnbiased)),
                &[("m", m as f64), ("c", c)],
                mub_erasure_budget(m, c)?,
            )];
            if m >= 7 {
                v.push(value(
                    &format!("{}-budget", id(FormulaId::GroupSimplex)),
                    &[("m", m as f64), ("c", c)],
                    group_erasure_budget(m, c)?,
                ));
            }
            v
        }
        BoundsFormula::Gaussian { m, n, p, c, eps } => {
            let r = gaussian_nerf_condition(m, n, p, c, eps)?;
            vec![BoundValue {
                formula_id: id(r.formula_id),
                inputs: inputs(&[("m", m as f64), ("n", n as f64), ("p", p), ("c", c), ("eps", eps)]),
                value: r.bound_value,
                holds: Some(r.holds),
                margin: Some(r.margin),
            }]
        }
        BoundsFormula::GaussianMaxP => {
            vec![value(&id(FormulaId::GaussianMaxErasureRate), &[], max_gaussian_erasure_rate())]
        }
        BoundsFormula::FailureProb { n, eps } => vec![value(
            &id(FormulaId::GaussianFailureProbability),
            &[("n", n as f64), ("eps", eps)],
            gaussian_failure_probability(n, eps),
        )],
        BoundsFormula::Threshold { c } => vec![value(
            &id(FormulaId::BicapThreshold),
            &[("c", c)],
            asymptotic_erasure_threshold(c)?,
        )],
        BoundsFormula::Q { t } => vec![value("normal-tail", &[("t", t)], q_function(t))],
        BoundsFormula::Welch { m, n } => vec![value(
            &id(FormulaId::Welch),
            &[("m", m as f64), ("n", n as f64)],
            welch_bound(m, n)?,
        )],
        BoundsFormula::Sweep {
            c_min,
            c_max,
            steps,
            m,
            alpha,
            csv,
        } => {
            let table = sweep_table(c_min, c_max, steps, m, alpha)?;
            match csv {
                Some(path) => {
                    table.write(&path)?;
                    writeln!(out, "wrote {} rows to {}", table.rows.len(), path.display())?;
                }
                None => table.write_to(&mut *out)?,
            }
            return Ok(EXIT_OK);
        }
    };
    let summary: Vec<String> = values
        .iter()
        .map(|v| {
            let mut s = format!("{}: {:.5} (exact {})", v.formula_id, v.value, fmt_f64(v.value));
            if let (Some(h), Some(m)) = (v.holds, v.margin) {
                s.push_str(&format!(", {} with margin {:+.6}", if h { "holds" } else { "fails" }, m));
            }
            s
        })
        .collect();
    emit(out, &a.output, "bounds", values, started, &summary)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    erased: Vec<usize>,
    #[serde(with = "extended_real_opt")]
    cond: Option<f64>,
    #[serde(with = "extended_real_opt")]
    snr: Option<f64>,
    error_ratio: Option<f64>,
    cond_bound_ratio: Option<f64>,
}

#[derive(Serialize)]
struct SimulateReport {
    frame: FrameSummary,
    p: f64,
    k: usize,
    noise_scale: f64,
    seed: u64,
    rank_deficient_draws: usize,
    max_error_ratio: f64,
    mean_error_ratio: f64,
    /// Largest error_ratio - cond/R; the bound holds when this is <= 0
    /// (up to 1e-9).
    max_excess: f64,
    trials: Vec<TrialRow>,
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let frame = frame_file::load(&a.frame)?;
    let summary = simulate_trials(&frame, a.p, a.trials, a.noise, a.seed)?;
    let k = NerfQuery::new(a.p, 1.0, frame.len())?.survivors();
    let rows: Vec<TrialRow> = summary
        .trials
        .iter()
        .map(|t| {
            let pattern = nerf_core::erasure::ErasurePattern::from_sorted_unchecked(t.survivors.clone(), frame.len());
            let o = t.outcome.as_ref();
            TrialRow {
                trial: t.trial,
                erased: pattern.erased(),
                cond: Some(o.map_or(f64::INFINITY, |r| r.cond)),
                snr: o.map(|r| r.snr),
                error_ratio: o.map(|r| r.error_ratio),
                cond_bound_ratio: o.map(|r| r.cond_bound_ratio),
            }
        })
        .collect();
    if let Some(path) = &a.csv {
        let mut table = Table::new(&["trial", "erased", "cond", "snr", "error_ratio", "cond_bound_ratio"]);
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for r in &rows {
            let erased: Vec<String> = r.erased.iter().map(|e| e.to_string()).collect();
            table.push(vec![
                r.trial.to_string(),
                erased.join(" "),
                opt(r.cond),
                opt(r.snr),
                opt(r.error_ratio),
                opt(r.cond_bound_ratio),
            ]);
        }
        table.write(path)?;
    }
    let text = vec![format!(
        "{} trials, K = {k}: max error ratio {:.3e}, mean {:.3e}, rank-deficient draws {}, max(error - cond/R) {:.3e}",
        a.trials, summary.max_error_ratio, summary.mean_error_ratio, summary.rank_deficient_draws, summary.max_excess
    )];
    let report = SimulateReport {
        frame: FrameSummary::of(&frame),
        p: a.p,
        k,
        noise_scale: a.noise,
        seed: a.seed,
        rank_deficient_draws: summary.rank_deficient_draws,
        max_error_ratio: summary.max_error_ratio,
        mean_error_ratio: summary.mean_error_ratio,
        max_excess: summary.max_excess,
        trials: rows,
    };
    emit(out, &a.output, "simulate", report, started, &text)?;
    Ok(EXIT_OK)
}

//! Command-line front end. `run` parses arguments, executes one command and
//! returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::amalgam::{amalgam_grand_norm, amalgam_small_norm, AmalgamParams, StepFunction};
use crate::error::Error;
use crate::grandnorm::{grand_norm, grand_norm_truncated, powerlog_membership, GrandParams, OptimizerConfig};
use crate::seqcore::{GrandSequence, NormBracket};
use crate::smallnorm::{small_norm_upper, SearchBudget};
use crate::specfun::Epsilon;
use crate::verifier::{self, divergence_demo, DemoFamily, SuiteConfig};

/// Environment variable naming a JSON file of default settings.
pub const CONFIG_ENV: &str = "GRAND_LEBESGUE_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "grand-lebesgue",
    version,
    about = "Certified brackets for grand and small Lebesgue norms, and inequality verification suites",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 usage error, 3 infinite norm.\n\
                  Defaults may be overridden by a JSON file named in GRAND_LEBESGUE_CONFIG."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grand norm of a sequence read from --input.
    NormSeq(NormSeqArgs),
    /// Grand amalgam norm of a step function read from --input.
    NormAmalgam(NormAmalgamArgs),
    /// Small norm bracket of a finite sequence, or of the local norms of a step function.
    NormSmall(NormSmallArgs),
    /// Membership of n^(-1/q) (ln(n+1))^(-a) in the grand sequence space.
    Membership(MembershipArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Print a ladder of values for a family with infinite norm.
    Demo(DemoArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
enum Format {
    #[default]
    Human,
    Records,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write results here instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NormSeqArgs {
    /// Exponent q >= 1.
    #[arg(long)]
    q: f64,
    /// Weight exponent theta > 0 [default: 1].
    #[arg(long)]
    theta: Option<f64>,
    /// Restrict the supremum to eps in (0, eps0].
    #[arg(long)]
    eps0: Option<f64>,
    /// Sequence file (JSON).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct NormAmalgamArgs {
    /// Local exponent p >= 1.
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    /// [default: 1]
    #[arg(long)]
    theta: Option<f64>,
    /// Restrict the supremum to eps in (0, eps0].
    #[arg(long)]
    eps0: Option<f64>,
    /// Step function file (JSON).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct NormSmallArgs {
    #[arg(long)]
    q: f64,
    /// [default: 1]
    #[arg(long)]
    theta: Option<f64>,
    /// Treat the input as a step function and take local L^p norms first.
    #[arg(long)]
    p: Option<f64>,
    /// Decomposition evaluations [default: 200].
    #[arg(long)]
    budget: Option<usize>,
    /// Seed of the decomposition search [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Sequence file, or step function file with --p.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MembershipFamily {
    /// n^(-1/q) (ln(n+1))^(-a)
    Powerlog,
    /// n^(-1/q)
    PurePower,
}

#[derive(Args, Debug)]
struct MembershipArgs {
    #[arg(long, value_enum, default_value_t = MembershipFamily::Powerlog)]
    family: MembershipFamily,
    #[arg(long)]
    q: f64,
    /// [default: 1]
    #[arg(long)]
    theta: Option<f64>,
    /// Logarithmic exponent; required for powerlog.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite to run; repeat for several. All suites when omitted.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
    /// List the registered suites and exit.
    #[arg(long)]
    list: bool,
    /// [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Random cases per suite [default: 100].
    #[arg(long)]
    cases: Option<usize>,
    /// Relative slack of inequality checks [default: 1e-9].
    #[arg(long)]
    tolerance: Option<f64>,
    /// Decomposition evaluations per small-norm search [default: 24].
    #[arg(long)]
    budget: Option<usize>,
    /// Coarser optimizer grid for large runs.
    #[arg(long)]
    fast: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DemoKind {
    /// (1/n)^(alpha/q) under the sup over eps of eps^(theta/(q-eps)) ||x||_{q-eps}.
    OldGrandNorm,
    /// Indicator of the union of [n, n + n^(-alpha)) in the grand amalgam norm.
    SparseIndicator,
    /// n^(-1/q) (ln(n+1))^(-a) in the grand sequence norm.
    Powerlog,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, value_enum)]
    family: DemoKind,
    /// [default: 2 for old-grand-norm and powerlog, 1 for sparse-indicator]
    #[arg(long)]
    q: Option<f64>,
    /// [default: 1, or 0.5 for sparse-indicator]
    #[arg(long)]
    theta: Option<f64>,
    /// Local exponent for sparse-indicator [default: 2].
    #[arg(long)]
    p: Option<f64>,
    /// Decay exponent [default: 1.5 for old-grand-norm, 2 for sparse-indicator].
    #[arg(long)]
    alpha: Option<f64>,
    /// Logarithmic exponent for powerlog [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Value the ladder is expected to exceed.
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    common: Common,
}

/// Settings read from the file named by [`CONFIG_ENV`]. Every field is optional;
/// command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Defaults {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
}

impl Defaults {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Outcome {
    text: String,
    code: i32,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let defaults = match std::env::var_os(CONFIG_ENV) {
        Some(p) if !p.is_empty() => match Defaults::load(Path::new(&p)) {
            Ok(d) => d,
            Err(m) => {
                let _ = writeln!(err, "error: config: {m}");
                return EXIT_USAGE;
            }
        },
        _ => Defaults::default(),
    };
    let (result, target) = match &cli.command {
        Command::NormSeq(a) => (norm_seq(a, &defaults), &a.common.output),
        Command::NormAmalgam(a) => (norm_amalgam(a, &defaults), &a.common.output),
        Command::NormSmall(a) => (norm_small(a, &defaults), &a.common.output),
        Command::Membership(a) => (membership(a, &defaults), &a.common.output),
        Command::Verify(a) => (verify(a, &defaults, err), &a.common.output),
        Command::Demo(a) => (demo(a, &defaults), &a.common.output),
    };
    match result {
        Ok(o) => match emit(&o.text, target, out) {
            Ok(()) => o.code,
            Err(m) => {
                let _ = writeln!(err, "error: {m}");
                EXIT_USAGE
            }
        },
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DIVERGENT
        }
    }
}

fn emit(text: &str, target: &Option<PathBuf>, out: &mut dyn Write) -> Result<(), String> {
    match target {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn optimizer(d: &Defaults) -> Result<OptimizerConfig, Failure> {
    let cfg = d.optimizer.clone().unwrap_or_default();
    cfg.validate()?;
    Ok(cfg)
}

fn eps0(v: Option<f64>) -> Result<Option<Epsilon>, Failure> {
    Ok(v.map(Epsilon::new).transpose()?)
}

fn bracket_text(b: &NormBracket) -> String {
    format!("[{}, {}]", b.lower(), b.upper())
}

/// Result of a norm command: finite brackets succeed, infinite ones exit with 3
/// after printing the bracket.
fn norm_outcome(label: &str, b: NormBracket, fields: serde_json::Value, format: Format) -> Outcome {
    let text = match format {
        Format::Human => format!("{label} {}\n", bracket_text(&b)),
        Format::Records => {
            let mut v = fields;
            v["norm"] = json!(label);
            v["bracket"] = serde_json::to_value(b).expect("bracket serializes");
            format!("{v}\n")
        }
    };
    Outcome { text, code: if b.is_finite() { EXIT_OK } else { EXIT_DIVERGENT } }
}

fn norm_seq(a: &NormSeqArgs, d: &Defaults) -> Result<Outcome, Failure> {
    let theta = a.theta.or(d.theta).unwrap_or(1.0);
    let params = GrandParams::new(a.q, theta)?;
    let cfg = optimizer(d)?;
    let x = GrandSequence::from_json(&read(&a.input)?)?;
    let b = match eps0(a.eps0)? {
        Some(e) => grand_norm_truncated(&x, &params, e, &cfg)?,
        None => grand_norm(&x, &params, &cfg)?,
    };
    Ok(norm_outcome("grand", b, json!({"q": a.q, "theta": theta, "eps0": a.eps0}), a.common.format))
}

fn norm_amalgam(a: &NormAmalgamArgs, d: &Defaults) -> Result<Outcome, Failure> {
    let theta = a.theta.or(d.theta).unwrap_or(1.0);
    let params = AmalgamParams::new(a.p, a.q, theta)?;
    let cfg = optimizer(d)?;
    let g = StepFunction::from_json(&read(&a.input)?)?;
    let b = match eps0(a.eps0)? {
        Some(e) => grand_norm_truncated(&crate::amalgam::local_lp(&g, a.p)?, &params.grand(), e, &cfg)?,
        None => amalgam_grand_norm(&g, &params, &cfg)?,
    };
    Ok(norm_outcome("grand_amalgam", b, json!({"p": a.p, "q": a.q, "theta": theta, "eps0": a.eps0}), a.common.format))
}

fn norm_small(a: &NormSmallArgs, d: &Defaults) -> Result<Outcome, Failure> {
    let theta = a.theta.or(d.theta).unwrap_or(1.0);
    let params = GrandParams::new(a.q, theta)?;
    let cfg = optimizer(d)?;
    let budget = SearchBudget {
        evaluations: a.budget.or(d.budget).unwrap_or(SearchBudget::default().evaluations),
        seed: a.seed.or(d.seed).unwrap_or(0),
    };
    let text = read(&a.input)?;
    let est = match a.p {
        Some(p) => amalgam_small_norm(&StepFunction::from_json(&text)?, &AmalgamParams::new(p, a.q, theta)?, &budget, &cfg)?,
        None => small_norm_upper(&GrandSequence::from_json(&text)?, &params, &budget, &cfg)?,
    };
    let out = match a.common.format {
        Format::Human => format!(
            "small {}\nparts {}  evaluations {}\n",
            bracket_text(&est.bracket()),
            est.witness_decomposition.parts().len(),
            est.evaluations
        ),
        Format::Records => {
            let v = json!({
                "norm": "small",
                "q": a.q,
                "theta": theta,
                "p": a.p,
                "budget": budget,
                "bracket": est.bracket(),
                "estimate": est,
            });
            format!("{v}\n")
        }
    };
    Ok(Outcome { text: out, code: EXIT_OK })
}

fn membership(a: &MembershipArgs, d: &Defaults) -> Result<Outcome, Failure> {
    let theta = a.theta.or(d.theta).unwrap_or(1.0);
    let params = GrandParams::new(a.q, theta)?;
    let cfg = optimizer(d)?;
    let pure = a.family == MembershipFamily::PurePower;
    let la = match (pure, a.a) {
        (true, _) => 0.0,
        (false, Some(v)) => v,
        (false, None) => return Err(Failure::Usage("--a is required for the powerlog family".into())),
    };
    let rep = powerlog_membership(&params, la, pure, &cfg)?;
    let verdict = serde_json::to_value(rep.verdict).expect("verdict serializes");
    let verdict = verdict.as_str().expect("verdict is a string").to_string();
    let text = match a.common.format {
        Format::Human => {
            let mut s = format!("{verdict}\n");
            if pure {
                s.push_str(&format!("criterion theta >= 1, theta = {theta}\n"));
            } else {
                s.push_str(&format!("window [{}, {}], a = {la}\n", rep.window.0, rep.window.1));
            }
            if let Some(ev) = &rep.evidence {
                s.push_str(&format!(
                    "numeric norm {}  growth exponent {:.4}  agrees {}\n",
                    bracket_text(&ev.bracket),
                    ev.growth_exponent,
                    rep.evidence_agrees.unwrap_or(false)
                ));
                if !pure && la > rep.window.1 {
                    s.push_str("a > 1/q: the sequence lies in l^q, so the numeric norm is finite\n");
                }
            }
            s
        }
        Format::Records => format!("{}\n", serde_json::to_string(&rep).expect("report serializes")),
    };
    Ok(Outcome { text, code: EXIT_OK })
}

fn verify(a: &VerifyArgs, d: &Defaults, err: &mut dyn Write) -> Result<Outcome, Failure> {
    if a.list {
        let mut s = String::new();
        for spec in verifier::registry() {
            s.push_str(&format!("{:<34} {}\n", spec.name, spec.description));
        }
        return Ok(Outcome { text: s, code: EXIT_OK });
    }
    let mut cfg = SuiteConfig::default();
    if let Some(v) = a.seed.or(d.seed) {
        cfg.seed = v;
    }
    if let Some(v) = a.cases.or(d.cases) {
        cfg.cases = v;
    }
    if let Some(v) = a.tolerance.or(d.tolerance) {
        cfg.tolerance = v;
    }
    if let Some(v) = a.budget.or(d.budget) {
        cfg.budget.evaluations = v;
    }
    cfg.optimizer = if a.fast { OptimizerConfig::fast() } else { optimizer(d)? };
    cfg.validate()?;
    let names: Vec<String> = if a.suites.is_empty() {
        verifier::suite_names().into_iter().map(String::from).collect()
    } else {
        a.suites.clone()
    };
    let mut text = String::new();
    let mut failed = false;
    for name in &names {
        let rep = verifier::run_suite(name, &cfg)?;
        let s = rep.summary();
        match a.common.format {
            Format::Records => text.push_str(&rep.to_json_lines()),
            Format::Human => text.push_str(&format!(
                "{:<34} {:>6} pass {:>4} fail {:>4} inconclusive\n",
                rep.suite, s.pass, s.fail, s.inconclusive
            )),
        }
        if rep.has_failures() {
            failed = true;
            for r in verifier::replay_failures(&rep, &cfg)? {
                let _ = writeln!(
                    err,
                    "{name} case {} check {}: reproduced {} certified {}",
                    r.case, r.check, r.reproduced, r.certified_violation
                );
            }
        }
    }
    Ok(Outcome { text, code: if failed { EXIT_FAIL } else { EXIT_OK } })
}

fn demo(a: &DemoArgs, d: &Defaults) -> Result<Outcome, Failure> {
    let family = match a.family {
        DemoKind::OldGrandNorm => DemoFamily::OldGrandNorm {
            q: a.q.unwrap_or(2.0),
            alpha: a.alpha.unwrap_or(1.5),
            theta: a.theta.or(d.theta).unwrap_or(1.0),
        },
        DemoKind::SparseIndicator => DemoFamily::SparseIndicator {
            p: a.p.unwrap_or(2.0),
            q: a.q.unwrap_or(1.0),
            alpha: a.alpha.unwrap_or(2.0),
            theta: a.theta.or(d.theta).unwrap_or(0.5),
        },
        DemoKind::Powerlog => DemoFamily::PowerLog {
            q: a.q.unwrap_or(2.0),
            theta: a.theta.or(d.theta).unwrap_or(1.0),
            a: a.a.unwrap_or(0.0),
        },
    };
    let cfg = optimizer(d)?;
    let o = divergence_demo(family, a.threshold, &cfg)?;
    let text = match a.common.format {
        Format::Human => {
            let x_label = if matches!(family, DemoFamily::OldGrandNorm { .. }) { "N" } else { "eps" };
            let mut s = format!(
                "# {}  threshold {}  crossed {}  monotone {}  growth exponent {:.4}  reference {}\n# {x_label}\tvalue\n",
                family.label(),
                o.threshold,
                o.crossed,
                o.monotone,
                o.growth_exponent,
                bracket_text(&o.reference)
            );
            for p in &o.points {
                s.push_str(&format!("{:e}\t{:e}\n", p.x, p.value));
            }
            s
        }
        Format::Records => format!("{}\n", serde_json::to_string(&o).expect("outcome serializes")),
    };
    if o.points.iter().any(|p| !p.value.is_finite()) {
        return Err(Failure::Numeric("ladder produced a non-finite value".into()));
    }
    Ok(Outcome { text, code: EXIT_OK })
}

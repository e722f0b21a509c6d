//! Property suites over deterministic pseudo-random instances, with a replayer
//! for failing cases and demonstrations of divergent families.

mod demo;
mod gen;
mod suites;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grandnorm::OptimizerConfig;
use crate::report::{CaseRecord, Status, VerificationReport};
use crate::smallnorm::SearchBudget;

pub use demo::{divergence_demo, DemoFamily, DemoOutcome, DemoPoint};
pub use gen::Gen;

/// Sampling ranges for random parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub q: (f64, f64),
    pub theta: (f64, f64),
    pub p: (f64, f64),
    pub eps0: (f64, f64),
    pub delta: (f64, f64),
    /// `sigma` is drawn as this fraction of `1/q'`.
    pub sigma_fraction: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self { q: (1.0, 4.0), theta: (0.25, 4.0), p: (1.0, 6.0), eps0: (0.05, 5.0), delta: (0.05, 2.0), sigma_fraction: (0.05, 0.95) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    pub tolerance: f64,
    pub ranges: ParamRanges,
    /// Decomposition evaluations per small-norm search.
    pub budget: SearchBudget,
    pub optimizer: OptimizerConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            cases: 100,
            tolerance: 1e-9,
            ranges: ParamRanges::default(),
            budget: SearchBudget { evaluations: 24, seed: 0 },
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl SuiteConfig {
    pub fn with_cases(mut self, cases: usize) -> Self {
        self.cases = cases;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.ranges;
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        let checks = [
            (self.cases >= 1, "cases must be >= 1"),
            (self.tolerance.is_finite() && self.tolerance >= 0.0, "tolerance must be finite and >= 0"),
            (ordered(r.q) && r.q.0 >= 1.0, "q range must lie in [1, inf)"),
            (ordered(r.theta) && r.theta.0 > 0.0, "theta range must lie in (0, inf)"),
            (ordered(r.p) && r.p.0 >= 1.0, "p range must lie in [1, inf)"),
            (ordered(r.eps0) && r.eps0.0 > 0.0, "eps0 range must lie in (0, inf)"),
            (ordered(r.delta) && r.delta.0 > 0.0, "delta range must lie in (0, inf)"),
            (
                ordered(r.sigma_fraction) && r.sigma_fraction.0 > 0.0 && r.sigma_fraction.1 < 1.0,
                "sigma fraction must lie in (0, 1)",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        self.optimizer.validate()
    }
}

type CaseFn = fn(&mut Gen, &SuiteConfig, usize) -> Result<Vec<CaseRecord>>;
type FixedFn = fn(&SuiteConfig) -> Result<Vec<CaseRecord>>;

#[derive(Clone, Copy)]
enum Body {
    /// One generator stream per case; `cases` controls the count.
    Cases(CaseFn),
    /// Deterministic list of checks; `cases` is ignored.
    Fixed(FixedFn),
}

#[derive(Clone, Copy)]
pub struct SuiteSpec {
    pub name: &'static str,
    pub description: &'static str,
    /// Topics from [`TOPICS`] exercised by the suite.
    pub covers: &'static [&'static str],
    body: Body,
}

impl SuiteSpec {
    pub fn is_fixed(&self) -> bool {
        matches!(self.body, Body::Fixed(_))
    }
}

/// Every result the suites are expected to exercise.
pub const TOPICS: &[&str] = &[
    "grand_function_norm_sequence_analog",
    "classical_amalgam_norm",
    "grand_sequence_norm",
    "truncated_grand_norm",
    "lp_embedding_chain",
    "alternative_grand_norm_divergence",
    "grand_amalgam_norm_definition",
    "powerlog_membership_window",
    "norm_axioms",
    "scaling_constants",
    "truncation_equivalence",
    "amalgam_embeddings",
    "embedding_strictness",
    "vanishing_functional",
    "product_composition",
    "small_sequence_norm",
    "decomposition_examples",
    "indicator_small_norm_bound",
    "decomposition_transfer",
    "lattice_property",
    "small_norm_subadditivity",
    "sequence_holder",
    "amalgam_small_norm",
    "integral_holder",
    "indicator_grand_norm_bound",
    "indicator_small_norm_interval_bound",
    "set_integral_bound",
    "unbounded_indicator_divergence",
    "unbounded_set_integral_divergence",
    "multiplier_norm_identity",
    "multiplier_l1_bound",
    "multiplier_isometry",
];

/// The registered suites, in run order.
pub fn registry() -> &'static [SuiteSpec] {
    suites::REGISTRY
}

pub fn suite_names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name).collect()
}

fn find(name: &str) -> Result<&'static SuiteSpec> {
    registry().iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownSuite(name.to_string()))
}

/// Topics not covered by any registered suite.
pub fn uncovered_topics() -> Vec<&'static str> {
    TOPICS.iter().copied().filter(|t| !registry().iter().any(|s| s.covers.contains(t))).collect()
}

fn run_case(spec: &SuiteSpec, f: CaseFn, cfg: &SuiteConfig, case: usize) -> Result<Vec<CaseRecord>> {
    let mut g = Gen::new(cfg.seed, spec.name, case, cfg.ranges);
    f(&mut g, cfg, case)
}

/// Runs one suite. Cases run concurrently; records are assembled in case order.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let spec = find(name)?;
    let mut rep = VerificationReport::new(spec.name);
    match spec.body {
        Body::Fixed(f) => {
            for r in f(cfg)? {
                rep.push(r);
            }
        }
        Body::Cases(f) => {
            let results: Vec<Result<Vec<CaseRecord>>> =
                (0..cfg.cases).into_par_iter().map(|case| run_case(spec, f, cfg, case)).collect();
            for (case, records) in results.into_iter().enumerate() {
                for r in records? {
                    rep.push_case(case, r);
                }
            }
        }
    }
    Ok(rep)
}

/// Runs every registered suite in registry order.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    registry().iter().map(|s| run_suite(s.name, cfg)).collect()
}

/// Re-runs a single case of a suite; for fixed suites the whole list is returned.
pub fn replay(name: &str, cfg: &SuiteConfig, case: usize) -> Result<Vec<CaseRecord>> {
    cfg.validate()?;
    let spec = find(name)?;
    match spec.body {
        Body::Fixed(f) => f(cfg),
        Body::Cases(f) => {
            let mut records = run_case(spec, f, cfg, case)?;
            for r in records.iter_mut() {
                r.case = case;
            }
            Ok(records)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub case: usize,
    pub check: String,
    /// The replayed record matches the original byte for byte.
    pub reproduced: bool,
    /// `lhs.lower > rhs.upper + tolerance` holds for the replayed brackets.
    pub certified_violation: bool,
}

/// Replays every failing record of `report` and confirms it is a certified violation.
/// Boolean flag records carry no brackets and are confirmed by reproduction alone;
/// equality records on point values are confirmed by a nonzero gap.
pub fn replay_failures(report: &VerificationReport, cfg: &SuiteConfig) -> Result<Vec<ReplayOutcome>> {
    let spec = find(&report.suite)?;
    let mut out = Vec::new();
    for rec in report.records.iter().filter(|r| r.status == Status::Fail) {
        let replayed = if spec.is_fixed() { replay(&report.suite, cfg, 0)? } else { replay(&report.suite, cfg, rec.case)? };
        let twin = replayed.iter().find(|r| {
            r.check == rec.check && r.inputs_digest == rec.inputs_digest && (spec.is_fixed() || r.case == rec.case)
        });
        let reproduced = twin.is_some_and(|r| {
            r.status == rec.status && r.lhs == rec.lhs && r.rhs == rec.rhs && r.detail == rec.detail
        });
        let flag = rec.lhs == rec.rhs && rec.detail.is_some();
        let certified_violation = twin.is_some_and(|r| {
            let point = r.lhs.width() == 0.0 && r.rhs.width() == 0.0;
            let tol_abs = cfg.tolerance * r.rhs.lower().max(1.0);
            r.status == Status::Fail
                && (flag || (point && r.lhs.lower() != r.rhs.lower()) || r.lhs.lower() > r.rhs.upper() + tol_abs)
        });
        out.push(ReplayOutcome { case: rec.case, check: rec.check.clone(), reproduced, certified_violation });
    }
    Ok(out)
}

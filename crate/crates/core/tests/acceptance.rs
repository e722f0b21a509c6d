//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use grand_lebesgue::amalgam::{amalgam_grand_norm, char_fn_norm_bound, AmalgamParams, StepFunction};
use grand_lebesgue::smallnorm::{small_norm_upper, SearchBudget};
use grand_lebesgue::verifier::{divergence_demo, run_all, run_suite, DemoFamily, SuiteConfig};
use grand_lebesgue::{
    grand_norm, lambert_w0, psi_max, GrandParams, GrandSequence, IndexSet, OptimizerConfig, Status, VerificationReport,
};

// 50-digit values of W(1/e), 1/W(1/e), 1/(e W(1/e)) and e W(1/e)
const W_INV_E: f64 = 0.278_464_542_761_073_795_109_358_739_022_980_155_439_477;
const PSI_ARGMAX: f64 = 3.591_121_476_668_622_136_649_222_925_741_634_842_103_075;
const PSI_MAX: f64 = 1.321_099_762_015_617_456_962_355_870_878_829_561_623_557;
const PSI_MAX_RECIP: f64 = 0.756_945_106_457_583_664_584_017_088_120_241_500_061_127;

const SUITE_TOL: f64 = 1e-9;

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn suite(name: &str, cfg: &SuiteConfig) -> Result<VerificationReport, String> {
    run_suite(name, cfg).map_err(|e| format!("{name}: {e}"))
}

/// No fail records; inconclusive records are counted in the returned text.
fn no_failures(rep: &VerificationReport) -> Result<String, String> {
    let s = rep.summary();
    if s.fail > 0 {
        let first = rep.records.iter().find(|r| r.status == Status::Fail).expect("a failing record");
        return Err(format!("{}: {} failures, first case {} check {}", rep.suite, s.fail, first.case, first.check));
    }
    Ok(format!("{} {}/{} pass, {} inconclusive", rep.suite, s.pass, rep.records.len(), s.inconclusive))
}

fn record<'a>(rep: &'a VerificationReport, check: &str) -> Result<&'a grand_lebesgue::report::CaseRecord, String> {
    rep.records.iter().find(|r| r.check == check).ok_or_else(|| format!("{}: no `{check}` record", rep.suite))
}

fn lambert_constants() -> Verdict {
    let w = lambert_w0((-1.0f64).exp()).map_err(|e| e.to_string())?;
    let argmax = 1.0 / w;
    let max = 1.0 / (std::f64::consts::E * w);
    check((3.58..=3.60).contains(&argmax), format!("1/W(1/e) = {argmax}"))?;
    check((1.31..=1.33).contains(&max), format!("1/(eW(1/e)) = {max}"))?;
    for (name, got, want) in
        [("W(1/e)", w, W_INV_E), ("1/W(1/e)", argmax, PSI_ARGMAX), ("1/(eW(1/e))", max, PSI_MAX), ("psi_max", psi_max(), PSI_MAX)]
    {
        check((got - want).abs() <= 1e-12 * want, format!("{name}: {got} vs {want}"))?;
    }
    Ok(format!("1/W(1/e) = {argmax:.15}, 1/(eW(1/e)) = {max:.15}"))
}

fn spike_norms() -> Verdict {
    let params = GrandParams::new(1.0, 1.0).map_err(|e| e.to_string())?;
    let cfg = OptimizerConfig::default();
    let x = GrandSequence::spike(IndexSet::Naturals, 1, 1.0).map_err(|e| e.to_string())?;
    let g = grand_norm(&x, &params, &cfg).map_err(|e| e.to_string())?;
    check(g.lower() <= PSI_MAX * (1.0 + 1e-15) && g.upper() >= PSI_MAX * (1.0 - 1e-15), format!("grand {g:?}"))?;
    check(g.width() <= 1e-8, format!("grand width {}", g.width()))?;
    let s = small_norm_upper(&x, &params, &SearchBudget::default(), &cfg).map_err(|e| e.to_string())?;
    let sb = s.bracket();
    check(sb.width() <= 1e-6, format!("small width {}", sb.width()))?;
    check(sb.lower() - 1e-6 <= PSI_MAX_RECIP && PSI_MAX_RECIP <= sb.upper() + 1e-6, format!("small {sb:?}"))?;
    let product = g.upper() * s.upper;
    check((product - 1.0).abs() <= 1e-6, format!("product {product}"))?;
    Ok(format!("grand {:?}, small {:?}, product - 1 = {:.1e}", g, sb, product - 1.0))
}

fn equivalence_sandwich() -> Verdict {
    let cfg = SuiteConfig::default().with_cases(1000);
    no_failures(&suite("equivalence", &cfg)?)
}

fn embeddings() -> Verdict {
    let cfg = SuiteConfig::default().with_cases(500);
    let mut out = Vec::new();
    for name in ["embeddings", "strictness_witnesses", "powerlog_membership"] {
        let rep = suite(name, &cfg)?;
        let text = no_failures(&rep)?;
        if name == "powerlog_membership" {
            let verdicts = rep.records.iter().filter(|r| r.check == "verdict_matches_window").count();
            check(verdicts > 0 && rep.summary().inconclusive == 0, "window classification incomplete")?;
        }
        out.push(text);
    }
    Ok(out.join("; "))
}

fn transfer_and_lattice() -> Verdict {
    let mut cfg = SuiteConfig::default().with_cases(10_000);
    cfg.optimizer = OptimizerConfig::fast();
    cfg.budget.evaluations = 16;
    let t = suite("transfer", &cfg)?;
    for name in ["excess_within_part", "kept_parts_sum_to_target"] {
        let n = t.records.iter().filter(|r| r.check == name && r.status == Status::Pass).count();
        check(n == cfg.cases, format!("{name}: {n} of {} pass", cfg.cases))?;
    }
    let l = suite("lattice", &cfg)?;
    check(l.passed(), format!("lattice: {:?}", l.summary()))?;
    Ok(format!("{}; {}", no_failures(&t)?, no_failures(&l)?))
}

fn holder_suites() -> Verdict {
    let cfg = SuiteConfig::default().with_cases(1000);
    let seq = suite("holder_seq", &cfg)?;
    let int = suite("holder_integral", &cfg)?;
    for (rep, tight) in [(&seq, "spike_product_equals_pairing"), (&int, "plateau_product_equals_integral")] {
        let r = record(rep, tight)?;
        check(r.status == Status::Pass && (r.lhs.lower() - 1.0).abs() <= 1e-6, format!("{tight}: {:?}", r.lhs))?;
    }
    Ok(format!("{}; {}", no_failures(&seq)?, no_failures(&int)?))
}

fn indicator_bounds() -> Verdict {
    let cfg = OptimizerConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in [1u64, 2, 3, 5, 8] {
        let mf = m as f64;
        let sets = [
            StepFunction::interval_indicator(m),
            StepFunction::indicator(IndexSet::Integers, &[(-mf, -mf + 0.5), (0.25, mf)]).map_err(|e| e.to_string())?,
            StepFunction::indicator(IndexSet::Integers, &[(-0.3, 0.7)]).map_err(|e| e.to_string())?,
        ];
        for p in [1.0, 2.0, 4.0] {
            for q in [1.0, 1.5, 2.0, 3.0] {
                for theta in [0.5, 1.0, 2.0] {
                    let params = AmalgamParams::new(p, q, theta).map_err(|e| e.to_string())?;
                    let bound = char_fn_norm_bound(m, &params);
                    for e in &sets {
                        let n = amalgam_grand_norm(e, &params, &cfg).map_err(|e| e.to_string())?;
                        check(
                            n.upper() <= bound * (1.0 + SUITE_TOL),
                            format!("M={m} p={p} q={q} theta={theta}: {} > {bound}", n.upper()),
                        )?;
                        worst = worst.max(n.upper() / bound);
                        count += 1;
                    }
                }
            }
        }
    }
    let rep = suite("char_fn", &SuiteConfig::default().with_cases(300))?;
    let char_fn = no_failures(&rep)?;
    let family = DemoFamily::SparseIndicator { p: 2.0, q: 1.0, alpha: 2.0, theta: 0.5 };
    let demo = divergence_demo(family, None, &cfg).map_err(|e| e.to_string())?;
    check(demo.certified_divergent, "sparse indicator norm not flagged divergent")?;
    let rel = (demo.growth_exponent + 0.5).abs() / 0.5;
    check(rel <= 0.2, format!("growth exponent {} off by {:.1}%", demo.growth_exponent, 100.0 * rel))?;
    Ok(format!(
        "{count} grid sets, max norm/bound {worst:.6}; {char_fn}; unbounded set divergent, growth {:.4}",
        demo.growth_exponent
    ))
}

fn operators() -> Verdict {
    let op = suite("mult_op_norm", &SuiteConfig::default().with_cases(200))?;
    for r in op.records.iter().filter(|r| r.check == "upper_equals_ess_sup") {
        check(r.lhs.lower() == r.rhs.lower(), format!("case {}: upper {:?} vs {:?}", r.case, r.lhs, r.rhs))?;
    }
    for r in op.records.iter().filter(|r| r.check == "sup_minus_lower_le_ladder_gap") {
        check(r.lhs.upper() <= 1e-3, format!("case {}: gap {}", r.case, r.lhs.upper()))?;
    }
    let iso = suite("mult_isometry", &SuiteConfig::default().with_cases(500))?;
    let agree = iso.records.iter().filter(|r| r.check == "criterion_agrees" && r.status == Status::Pass).count();
    check(agree == 500, format!("criterion agrees on {agree} of 500"))?;
    let l1 = suite("mult_l1", &SuiteConfig::default().with_cases(1000))?;
    Ok(format!("{}; {}; {}", no_failures(&op)?, no_failures(&iso)?, no_failures(&l1)?))
}

fn old_grand_norm_demo() -> Verdict {
    let family = DemoFamily::OldGrandNorm { q: 2.0, alpha: 1.5, theta: 1.0 };
    let o = divergence_demo(family, None, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    check(o.reference.is_finite(), format!("||x||_q bracket {:?}", o.reference))?;
    check(o.monotone && o.crossed, format!("partial norms {:?}", o.points))?;
    check(o.certified_divergent, "series at eps0 not certified divergent")?;
    let rep = suite("divergence_demo_old_grand_norm", &SuiteConfig::default())?;
    check(rep.passed(), format!("{:?}", rep.summary()))?;
    let last = o.points.last().expect("points");
    Ok(format!(
        "||x||_2 = {:.10}, partial norm at N = {:e} is {:.4} > threshold {:.4}",
        o.reference.upper(),
        last.x,
        last.value,
        o.threshold
    ))
}

fn determinism() -> Verdict {
    let cfg = SuiteConfig::default().with_cases(12);
    let text = |reps: Vec<VerificationReport>| reps.iter().map(|r| r.to_json_lines()).collect::<String>();
    let a = text(run_all(&cfg).map_err(|e| e.to_string())?);
    let b = text(run_all(&cfg).map_err(|e| e.to_string())?);
    check(a == b, "reports differ between runs")?;
    Ok(format!("{} bytes identical across two runs of every suite", a.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("lambert constants", Duration::from_millis(1), lambert_constants),
        ("spike norms", Duration::from_secs(1), spike_norms),
        ("equivalence sandwich", Duration::from_secs(60), equivalence_sandwich),
        ("amalgam embeddings and witnesses", Duration::from_secs(120), embeddings),
        ("decomposition transfer and lattice", Duration::from_secs(30), transfer_and_lattice),
        ("holder inequalities", Duration::MAX, holder_suites),
        ("indicator norm bounds", Duration::MAX, indicator_bounds),
        ("multiplication operators", Duration::MAX, operators),
        ("alternative grand norm divergence", Duration::MAX, old_grand_norm_demo),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *limit => Err(format!("took {took:?}, limit {limit:?}; {msg}")),
            other => other,
        };
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {:>2} {tag} {name} ({:.3?}): {msg}", i + 1, took);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

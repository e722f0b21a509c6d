//! Inequality checks on step functions: integral Hölder bounds, indicator
//! bounds, the product bound, embeddings between amalgam spaces and the
//! families showing that those embeddings are strict.

use serde::{Deserialize, Serialize};

use super::{
    amalgam_grand_norm, cell_norm, classical_amalgam_norm, integral_abs_product, local_lp, powerlog_plateau,
    refine, small_norm_of_local, AmalgamParams, StepFunction,
};
use crate::error::{domain, Error, Result};
use crate::grandnorm::{grand_norm, GrandParams, OptimizerConfig};
use crate::report::{digest, CaseRecord, Status, VerificationReport};
use crate::seqcore::NormBracket;
use crate::smallnorm::SearchBudget;
use crate::specfun::{holder_conjugate, psi_max, psi_max_recip};

fn require_finite(g: &StepFunction, what: &str) -> Result<()> {
    if g.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} must have finitely many pieces")))
    }
}

/// Runs `check`, and once more on a tightened configuration if the first run is inconclusive.
fn with_retry(
    cfg: &OptimizerConfig,
    check: impl Fn(&OptimizerConfig) -> Result<VerificationReport>,
) -> Result<VerificationReport> {
    let rep = check(cfg)?;
    if rep.status() == Status::Inconclusive {
        return check(&cfg.tightened());
    }
    Ok(rep)
}

/// `int |g f| <= ||g||_{p,q),theta} ||f||_{p',q)',theta}` with both factors taken at their upper bounds.
pub fn holder_integral_check(
    g: &StepFunction,
    f: &StepFunction,
    params: &AmalgamParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    require_finite(g, "g")?;
    require_finite(f, "f")?;
    let lhs = integral_abs_product(g, f)?;
    let grand = amalgam_grand_norm(g, params, cfg)?;
    let small = small_norm_of_local(f, holder_conjugate(params.p())?, &params.grand(), budget, cfg)?;
    let rhs = product_upper(grand.upper(), small.upper);
    let mut rep = VerificationReport::new("holder_integral");
    rep.push(CaseRecord::le(
        "integral_le_norm_product",
        &digest(&(g, f, params)),
        NormBracket::exact(lhs),
        NormBracket::exact(rhs),
        tolerance,
    ));
    Ok(rep)
}

fn product_upper(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn require_indicator(e: &StepFunction) -> Result<()> {
    require_finite(e, "the set")?;
    if e.pieces().values().flatten().any(|c| c.value != 0.0 && c.value != 1.0) {
        return Err(Error::Precondition("the set must be given as a 0/1 indicator".into()));
    }
    Ok(())
}

/// `int_E |g| <= ||chi_E||_{p',q)',theta} ||g||_{p,q),theta}` for a bounded set `E`.
pub fn integral_over_set_bound(
    g: &StepFunction,
    e: &StepFunction,
    params: &AmalgamParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    require_indicator(e)?;
    let lhs = integral_abs_product(g, e)?;
    let c_e = small_norm_of_local(e, holder_conjugate(params.p())?, &params.grand(), budget, cfg)?;
    let grand = amalgam_grand_norm(g, params, cfg)?;
    let mut rep = VerificationReport::new("integral_over_set");
    rep.push(CaseRecord::le(
        "set_integral_le_bound",
        &digest(&(g, e, params)),
        NormBracket::exact(lhs),
        NormBracket::exact(product_upper(c_e.upper, grand.upper())),
        tolerance,
    ));
    Ok(rep)
}

/// Closed-form bounds for the indicator of a bounded set `E`: the grand norm is at
/// most `(2M)^(1/q) psi_max^(theta/q)` for `E` inside `[-M, M]`, and the small norm
/// is at most `N psi_max^(theta/q)` when `E` meets `N` unit intervals.
pub fn char_fn_check(
    e: &StepFunction,
    params: &AmalgamParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    require_indicator(e)?;
    let m = e.support_radius()?;
    let d = digest(&(e, params));
    let weight = params.theta() / params.q();
    with_retry(cfg, |cfg| {
        let mut rep = VerificationReport::new("char_fn");
        let grand = amalgam_grand_norm(e, params, cfg)?;
        let bound = super::char_fn_norm_bound(m, params);
        rep.push(
            CaseRecord::le("grand_norm_le_closed_form", &d, grand, NormBracket::exact(bound), tolerance)
                .with_detail(format!("M={m}")),
        );
        let small = super::amalgam_small_norm(e, params, budget, cfg)?;
        let count = e.support().len() as f64;
        rep.push(CaseRecord::le(
            "small_norm_le_interval_count",
            &d,
            NormBracket::exact(small.upper),
            NormBracket::exact(count * psi_max().powf(weight)),
            tolerance,
        ));
        Ok(rep)
    })
}

/// Exponents for `||fg||_{p3,q3)} <= c C ||f||_{p1,q1)} ||g||_{p2,q2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductExponents {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub p3: f64,
    pub q3: f64,
}

impl ProductExponents {
    /// Local Hölder exponents `1/p3 = 1/p1 + 1/p2` with a common `q`.
    pub fn holder(p1: f64, p2: f64, q: f64) -> Self {
        Self { p1, q1: q, p2, q2: q, p3: 1.0 / (1.0 / p1 + 1.0 / p2), q3: q }
    }
}

/// Product bound: the local bound `||fg chi_I||_{p3} <= C ||f chi_I||_{p1} ||g chi_I||_{p2}`
/// and the sequence bound `||xy||_{q3)} <= c ||x||_{q1)} ||y||_{q2)}` on the local
/// norms combine into the amalgam bound with constant `cC`.
///
/// With `c = None` the exponents `q_i` must agree and `c = (e W(1/e))^(theta/q)` is used,
/// which follows from `||xy||_r <= ||x||_inf ||y||_r` and `||x||_inf <= psi_max^(-theta/q) ||x||`.
/// The measured sequence ratio is recorded in the detail.
#[allow(clippy::too_many_arguments)]
pub fn product_composition_check(
    f: &StepFunction,
    g: &StepFunction,
    exps: &ProductExponents,
    theta: f64,
    c: Option<f64>,
    big_c: f64,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    require_finite(f, "f")?;
    require_finite(g, "g")?;
    if f.index_set() != g.index_set() {
        return Err(Error::Precondition("step functions use different index sets".into()));
    }
    let c = match c {
        Some(c) => c,
        None => {
            if exps.q1 != exps.q2 || exps.q2 != exps.q3 {
                return Err(Error::Precondition("a default sequence constant needs q1 = q2 = q3".into()));
            }
            psi_max_recip().powf(theta / exps.q1)
        }
    };
    let (pa, pb, pc) = (GrandParams::new(exps.q1, theta)?, GrandParams::new(exps.q2, theta)?, GrandParams::new(exps.q3, theta)?);
    let x = local_lp(f, exps.p1)?;
    let y = local_lp(g, exps.p2)?;
    let z = local_lp(&f.mul(g)?, exps.p3)?;
    let xy = x.mul(&y)?;

    let mut worst = 0.0f64;
    for k in f.pieces().keys().chain(g.pieces().keys()) {
        let (fc, gc) = (f.cells_at(*k), g.cells_at(*k));
        let prod: Vec<super::Cell> = refine(&fc, &gc).into_iter().map(|(w, a, b)| super::Cell::new(w, a * b)).collect();
        let lhs = cell_norm(&prod, exps.p3);
        let rhs = big_c * cell_norm(&fc, exps.p1) * cell_norm(&gc, exps.p2);
        let ratio = if lhs == 0.0 { 0.0 } else if rhs == 0.0 { f64::INFINITY } else { lhs / rhs };
        worst = worst.max(ratio);
    }

    let d = digest(&(f, g, exps, theta, c, big_c));
    with_retry(cfg, |cfg| {
        let mut rep = VerificationReport::new("product_bound");
        rep.push(CaseRecord::le("local_product_bound", &d, NormBracket::exact(worst), NormBracket::exact(1.0), tolerance));
        let nx = grand_norm(&x, &pa, cfg)?;
        let ny = grand_norm(&y, &pb, cfg)?;
        let nxy = grand_norm(&xy, &pc, cfg)?;
        let denom = nx.lower() * ny.lower();
        let measured = if denom > 0.0 { nxy.upper() / denom } else { 0.0 };
        rep.push(
            CaseRecord::le("sequence_product_bound", &d, nxy, nx.mul(&ny).scale(c), tolerance)
                .with_detail(format!("measured_ratio={measured:.12e}")),
        );
        let hypotheses_hold = rep.status() == Status::Pass;
        let nz = grand_norm(&z, &pc, cfg)?;
        let mut rec = CaseRecord::le("composed_product_bound", &d, nz, nx.mul(&ny).scale(c * big_c), tolerance);
        if !hypotheses_hold {
            rec = rec.with_detail("hypothesis_failed");
        }
        rep.push(rec);
        Ok(rep)
    })
}

/// One embedding between amalgam spaces, with its explicit constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingCase {
    /// `||g||_{p,q2),theta} <= ||g||_{p,q1),(q1/q2) theta}` for `q1 < q2`.
    QShift { p: f64, q1: f64, q2: f64, theta: f64 },
    /// `||g||_{p,q),theta2} <= psi_max^((theta2-theta1)/q) ||g||_{p,q),theta1}` for `theta1 <= theta2`.
    Theta { p: f64, q: f64, theta1: f64, theta2: f64 },
    /// Local nesting `||g chi_I||_{p2} <= ||g chi_I||_{p1}` for `p2 < p1`, and
    /// `||g||_{p2,q),theta2} <= psi_max^((theta2-theta1)/q) ||g||_{p1,q),theta1}`.
    MixedP { p1: f64, p2: f64, q: f64, theta1: f64, theta2: f64 },
    /// `||g||_{p,q),theta} <= psi_max^(theta/q) ||g||_{l^q(L^p)}`.
    Classical { p: f64, q: f64, theta: f64 },
    /// `||g||_{l^{q(1+delta)}(L^p)} <= delta^(-theta/(q(1+delta))) ||g||_{p,q),theta}` and
    /// `||g||_{p,q),theta} <= psi_max^(theta/q) ||g||_{l^{q(1-sigma)}(L^p)}` for `0 < sigma < 1/q'`.
    Sandwich { p: f64, q: f64, theta: f64, delta: f64, sigma: f64 },
}

impl EmbeddingCase {
    pub fn label(&self) -> &'static str {
        match self {
            Self::QShift { .. } => "q_shift",
            Self::Theta { .. } => "theta",
            Self::MixedP { .. } => "mixed_p",
            Self::Classical { .. } => "classical",
            Self::Sandwich { .. } => "sandwich",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::QShift { p, q1, q2, theta } => {
                AmalgamParams::new(p, q2, theta)?;
                AmalgamParams::new(p, q1, theta)?;
                if q1 >= q2 {
                    return Err(domain("q shift needs q1 < q2"));
                }
            }
            Self::Theta { p, q, theta1, theta2 } => {
                AmalgamParams::new(p, q, theta1)?;
                AmalgamParams::new(p, q, theta2)?;
                if theta1 > theta2 {
                    return Err(domain("theta embedding needs theta1 <= theta2"));
                }
            }
            Self::MixedP { p1, p2, q, theta1, theta2 } => {
                AmalgamParams::new(p1, q, theta1)?;
                AmalgamParams::new(p2, q, theta2)?;
                if p2 >= p1 || theta1 > theta2 {
                    return Err(domain("mixed embedding needs p2 < p1 and theta1 <= theta2"));
                }
            }
            Self::Classical { p, q, theta } => {
                AmalgamParams::new(p, q, theta)?;
            }
            Self::Sandwich { p, q, theta, delta, sigma } => {
                AmalgamParams::new(p, q, theta)?;
                let limit = 1.0 - 1.0 / q;
                if !(delta.is_finite() && delta > 0.0) {
                    return Err(domain("sandwich needs delta > 0"));
                }
                if !(sigma > 0.0 && sigma < limit) {
                    return Err(domain(format!("sandwich needs 0 < sigma < 1/q' = {limit}")));
                }
            }
        }
        Ok(())
    }
}

/// Checks one embedding on `g` with its explicit constant.
pub fn embedding_check(
    g: &StepFunction,
    case: &EmbeddingCase,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    case.validate()?;
    let d = digest(&(g, case));
    let grand = |p: f64, q: f64, theta: f64, cfg: &OptimizerConfig| -> Result<NormBracket> {
        amalgam_grand_norm(g, &AmalgamParams::new(p, q, theta)?, cfg)
    };
    with_retry(cfg, |cfg| {
        let mut rep = VerificationReport::new("embeddings");
        let label = case.label();
        match *case {
            EmbeddingCase::QShift { p, q1, q2, theta } => {
                let lhs = grand(p, q2, theta, cfg)?;
                let rhs = grand(p, q1, q1 / q2 * theta, cfg)?;
                rep.push(CaseRecord::le(label, &d, lhs, rhs, tolerance));
            }
            EmbeddingCase::Theta { p, q, theta1, theta2 } => {
                let lhs = grand(p, q, theta2, cfg)?;
                let rhs = grand(p, q, theta1, cfg)?.scale(psi_max().powf((theta2 - theta1) / q));
                rep.push(CaseRecord::le(label, &d, lhs, rhs, tolerance));
            }
            EmbeddingCase::MixedP { p1, p2, q, theta1, theta2 } => {
                let mut worst = 0.0f64;
                for cells in g.pieces().values() {
                    let (a, b) = (cell_norm(cells, p2), cell_norm(cells, p1));
                    if a > 0.0 {
                        worst = worst.max(a / b);
                    }
                }
                rep.push(CaseRecord::le(
                    "mixed_p_local_nesting",
                    &d,
                    NormBracket::exact(worst),
                    NormBracket::exact(1.0),
                    tolerance,
                ));
                let lhs = grand(p2, q, theta2, cfg)?;
                let rhs = grand(p1, q, theta1, cfg)?.scale(psi_max().powf((theta2 - theta1) / q));
                rep.push(CaseRecord::le(label, &d, lhs, rhs, tolerance));
            }
            EmbeddingCase::Classical { p, q, theta } => {
                let lhs = grand(p, q, theta, cfg)?;
                let rhs = classical_amalgam_norm(g, p, q)?.scale(psi_max().powf(theta / q));
                rep.push(CaseRecord::le(label, &d, lhs, rhs, tolerance));
            }
            EmbeddingCase::Sandwich { p, q, theta, delta, sigma } => {
                let norm = grand(p, q, theta, cfg)?;
                let big = classical_amalgam_norm(g, p, q * (1.0 + delta))?;
                let c = delta.powf(-theta / (q * (1.0 + delta)));
                rep.push(CaseRecord::le("sandwich_lower", &d, big, norm.scale(c), tolerance));
                let small = classical_amalgam_norm(g, p, q * (1.0 - sigma))?;
                rep.push(CaseRecord::le("sandwich_upper", &d, norm, small.scale(psi_max().powf(theta / q)), tolerance));
            }
        }
        Ok(rep)
    })
}

/// Parameters for the strictness witnesses; requires `q1 < q2`, `p2 < p1` and `theta >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
    pub theta: f64,
}

/// Each embedding is strict: `g = sum n^(-1/q) chi_{I_n}` lies in the larger space and
/// not in the smaller one. Membership is read off the certified bracket: finite upper
/// bound for members, infinite for nonmembers.
pub fn strictness_witnesses(w: &WitnessParams, cfg: &OptimizerConfig) -> Result<VerificationReport> {
    if !(w.q1 >= 1.0 && w.q1 < w.q2 && w.p2 >= 1.0 && w.p2 < w.p1 && w.theta >= 1.0) {
        return Err(domain("witnesses need 1 <= q1 < q2, 1 <= p2 < p1 and theta >= 1"));
    }
    let d = digest(w);
    let mut rep = VerificationReport::new("strictness_witnesses");
    let mut expect = |check: &str, g: &StepFunction, params: AmalgamParams, member: bool| -> Result<()> {
        let b = amalgam_grand_norm(g, &params, cfg)?;
        let detail = format!(
            "p={} q={} theta={} bracket=[{:.12e}, {:.12e}]",
            params.p(),
            params.q(),
            params.theta(),
            b.lower(),
            b.upper()
        );
        rep.push(CaseRecord::flag(check, &d, b.is_finite() == member, detail));
        Ok(())
    };
    let g2 = powerlog_plateau(w.q2, 0.0)?;
    expect("q_shift_member", &g2, AmalgamParams::new(w.p1, w.q2, w.theta)?, true)?;
    expect("q_shift_nonmember", &g2, AmalgamParams::new(w.p1, w.q1, w.q1 / w.q2 * w.theta)?, false)?;
    expect("theta_member", &g2, AmalgamParams::new(w.p1, w.q2, 2.0)?, true)?;
    expect("theta_nonmember", &g2, AmalgamParams::new(w.p1, w.q2, 0.5)?, false)?;
    let q = w.q2;
    let theta2 = 1.0 + (w.p1 - w.p2) * q / w.p2;
    let theta1 = w.p2 / w.p1;
    expect("mixed_p_member", &g2, AmalgamParams::new(w.p2, q, theta2)?, true)?;
    expect("mixed_p_nonmember", &g2, AmalgamParams::new(w.p1, q, theta1)?, false)?;
    expect("classical_member", &g2, AmalgamParams::new(w.p1, q, w.theta)?, true)?;
    let lq = classical_amalgam_norm(&g2, w.p1, q)?;
    rep.push(CaseRecord::flag(
        "classical_nonmember",
        &d,
        !lq.is_finite(),
        format!("l^q(L^p) bracket lower={:.12e}", lq.lower()),
    ));
    Ok(rep)
}

//! The grand Lebesgue sequence norm `sup_{eps>0} eps^(theta/(q(1+eps))) ||x||_{q(1+eps)}`,
//! its truncation to `(0, eps0]`, and the membership and vanishing diagnostics built on it.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::report::{digest, CaseRecord, Status, VerificationReport};
use crate::search::{maximize, Objective};
use crate::seqcore::{excess, exp_power_integral_upper, GrandSequence, LpEvaluator, NormBracket};
use crate::specfun::{c_eps0, ln_psi, max_ln_psi_on, shifted_ln_psi_argmax, Epsilon};

pub use crate::search::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct GrandParams {
    q: f64,
    theta: f64,
}

#[derive(Deserialize)]
struct RawParams {
    q: f64,
    theta: f64,
}

impl TryFrom<RawParams> for GrandParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        GrandParams::new(r.q, r.theta)
    }
}

impl GrandParams {
    pub fn new(q: f64, theta: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(domain(format!("q must be finite and >= 1, got {q}")));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(domain(format!("theta must be finite and > 0, got {theta}")));
        }
        Ok(Self { q, theta })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `theta / q`, the exponent applied to `psi`.
    pub fn weight(&self) -> f64 {
        self.theta / self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrandNormOutcome {
    pub bracket: NormBracket,
    /// Best evaluated `eps`; absent for the zero sequence.
    pub argmax: Option<f64>,
    pub evaluations: usize,
}

impl GrandNormOutcome {
    pub fn diverges(&self) -> bool {
        !self.bracket.is_finite()
    }
}

pub fn grand_norm(x: &GrandSequence, params: &GrandParams, cfg: &OptimizerConfig) -> Result<NormBracket> {
    Ok(grand_norm_search(x, params, None, cfg)?.bracket)
}

pub fn grand_norm_truncated(
    x: &GrandSequence,
    params: &GrandParams,
    eps0: Epsilon,
    cfg: &OptimizerConfig,
) -> Result<NormBracket> {
    Ok(grand_norm_search(x, params, Some(eps0), cfg)?.bracket)
}

/// Full search result; `eps0 = None` searches all of `eps > 0`.
pub fn grand_norm_search(
    x: &GrandSequence,
    params: &GrandParams,
    eps0: Option<Epsilon>,
    cfg: &OptimizerConfig,
) -> Result<GrandNormOutcome> {
    cfg.validate()?;
    if x.is_zero() {
        return Ok(GrandNormOutcome { bracket: NormBracket::exact(0.0), argmax: None, evaluations: 0 });
    }
    let cap = eps0.map_or(f64::INFINITY, Epsilon::get);
    let hi = cfg.eps_max.min(cap);
    let lo = cfg.eps_min.min(hi * 1e-3);
    let mut obj = GrandObjective::new(x, params, cfg);
    let out = maximize(&mut obj, lo, hi, cap, cfg, None);
    let upper = out.bound.exp();
    Ok(GrandNormOutcome {
        bracket: NormBracket::new_clamped(out.best.exp(), upper),
        argmax: Some(out.best_eps),
        evaluations: out.evaluations,
    })
}

/// `psi(eps)^(theta/q) ||x||_{q(1+eps)}` at a single `eps`.
pub fn grand_objective(x: &GrandSequence, params: &GrandParams, eps: Epsilon) -> Result<NormBracket> {
    let cfg = OptimizerConfig::default();
    let mut ev = LpEvaluator::new(x, cfg.tail_options());
    let b = ev.eval_grand(params.q, eps.get());
    Ok(b.scale((params.weight() * ln_psi(eps.get())).exp()))
}

struct GrandObjective<'a> {
    ev: LpEvaluator<'a>,
    q: f64,
    theta: f64,
    k: f64,
    ln_q_norm_hi: Option<f64>,
}

impl<'a> GrandObjective<'a> {
    fn new(x: &'a GrandSequence, params: &GrandParams, cfg: &OptimizerConfig) -> Self {
        Self {
            ev: LpEvaluator::new(x, cfg.tail_options()),
            q: params.q,
            theta: params.theta,
            k: params.weight(),
            ln_q_norm_hi: None,
        }
    }
}

impl Objective for GrandObjective<'_> {
    /// Logs of the `l^p` bracket at `p = q(1+eps)`.
    type Node = (f64, f64);

    fn eval(&mut self, eps: f64) -> (f64, f64) {
        let b = self.ev.eval_grand(self.q, eps);
        (b.lower().ln(), b.upper().ln())
    }

    fn achieved(&self, eps: f64, n: &(f64, f64)) -> f64 {
        self.k * ln_psi(eps) + n.0
    }

    fn cell_bound(&self, l: f64, nl: &(f64, f64), r: f64, nr: &(f64, f64)) -> (f64, f64) {
        let bl = nl.1;
        if bl == f64::INFINITY {
            return (f64::INFINITY, f64::NAN);
        }
        // ||x||_p is nonincreasing in p.
        let monotone = self.k * max_ln_psi_on(l, r) + bl;
        // ln ||x||_p is convex in 1/p: chord through the upper values at both ends.
        let br = nr.1.min(bl);
        let ul = 1.0 / (self.q * (1.0 + l));
        let ur = 1.0 / (self.q * (1.0 + r));
        let sigma = ((br - bl) / (ur - ul)).max(0.0);
        let kappa = sigma / self.theta;
        let e = shifted_ln_psi_argmax(kappa).clamp(l, r);
        let chord = bl - sigma * ul + self.k * (e.ln() + kappa) / (1.0 + e);
        (monotone.min(chord), e)
    }

    fn below_bound(&mut self, eps: f64, _n: &(f64, f64)) -> f64 {
        let ln_q = *self.ln_q_norm_hi.get_or_insert_with(|| self.ev.eval(self.q).upper().ln());
        let by_norm = self.k * max_ln_psi_on(0.0, eps) + ln_q;
        match self.ev.sequence().tail() {
            Some(_) if !ln_q.is_finite() => tail_region_bound(self.ev.sequence(), self.q, self.theta, eps),
            _ => by_norm,
        }
    }

    fn above_bound(&self, eps: f64, n: &(f64, f64), cap: f64) -> f64 {
        self.k * max_ln_psi_on(eps, cap) + n.1
    }
}

/// Log of an upper bound for the objective on `(0, e]` for a tailed sequence,
/// from `F(eps)^r = eps^theta sum |x_n|^r` with `r = q(1+eps)`.
fn tail_region_bound(x: &GrandSequence, q: f64, theta: f64, e: f64) -> f64 {
    let tail = *x.tail().expect("tailed sequence");
    let r_hi = q * (1.0 + e);
    let both = |v: f64| {
        let l = v.abs().ln();
        (q * l).exp().max((r_hi * l).exp())
    };
    let n_end = tail.n0 + 1024;
    let explicit: f64 = x.entries().map(|(_, v)| both(v)).sum::<f64>()
        + (tail.n0..=n_end).map(|n| both(tail.term(n))).sum::<f64>();
    let ln_e = e.ln();
    let nf = n_end as f64;
    let l = (nf + 1.0).ln();
    let c0 = excess(q, tail.a);
    let t0 = q * tail.b;
    let ln_scaled_integral = if c0 < 0.0 {
        f64::INFINITY
    } else if c0 > 0.0 {
        theta * ln_e + exp_power_integral_upper(c0, l, t0).ln()
    } else if t0 > 1.0 {
        theta * ln_e + (1.0 - t0) * l.ln() - (t0 - 1.0).ln()
    } else if t0 == 1.0 {
        let kappa = (0.5 * theta).min(1.0);
        (theta - kappa) * ln_e - kappa * l.ln() - kappa.ln()
    } else {
        let mut expo = theta + t0 - 1.0;
        if expo.abs() < 1e-12 {
            expo = 0.0;
        }
        if expo < 0.0 {
            f64::INFINITY
        } else {
            expo * ln_e + statrs::function::gamma::ln_gamma(1.0 - t0)
        }
    };
    let ln_factor = r_hi * tail.a * (1.0 / nf).ln_1p();
    let w = (theta * ln_e).exp() * explicit + (ln_factor + ln_scaled_integral).exp();
    let ln_w = w.ln();
    (ln_w / q).max(ln_w / r_hi)
}

/// Checks `truncated <= full <= c(eps0)^(theta/q) truncated`, retrying once on a
/// finer grid before recording an inconclusive outcome.
pub fn check_equivalence(
    x: &GrandSequence,
    params: &GrandParams,
    eps0: Epsilon,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let run = |cfg: &OptimizerConfig| -> Result<VerificationReport> {
        let full = grand_norm(x, params, cfg)?;
        let trunc = grand_norm_truncated(x, params, eps0, cfg)?;
        let c = c_eps0(eps0).powf(params.weight());
        let d = digest(&(x, params, eps0.get()));
        let mut rep = VerificationReport::new("equivalence");
        rep.push(CaseRecord::le("truncated_le_full", &d, trunc, full, tolerance));
        rep.push(CaseRecord::le("full_le_scaled_truncated", &d, full, trunc.scale(c), tolerance));
        Ok(rep)
    };
    let rep = run(cfg)?;
    if rep.status() == Status::Inconclusive {
        return run(&cfg.tightened());
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Member,
    Nonmember,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub eps: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipEvidence {
    pub bracket: NormBracket,
    pub ladder: Vec<LadderPoint>,
    /// Least-squares slope of `ln value` against `ln eps` on the smaller half of the ladder.
    pub growth_exponent: f64,
    pub monotone_growth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub q: f64,
    pub theta: f64,
    pub a: f64,
    pub pure_power: bool,
    pub window: (f64, f64),
    pub verdict: Membership,
    pub evidence: Option<MembershipEvidence>,
    pub evidence_agrees: Option<bool>,
}

/// Membership of `x_n = n^(-1/q) (ln(n+1))^(-a)` in the grand sequence space.
///
/// The verdict is the closed-form window `(1-theta)/q <= a <= 1/q`; with
/// `pure_power` the family is `n^(-1/q)` and the verdict is `theta >= 1`.
/// The numeric evidence is computed independently and `evidence_agrees`
/// records whether it matches. For `a > 1/q` the sequence already lies in
/// `l^q`, so the evidence reports a finite norm while the window verdict says
/// nonmember. Evidence is only available for `a >= 0`.
pub fn powerlog_membership(
    params: &GrandParams,
    a: f64,
    pure_power: bool,
    cfg: &OptimizerConfig,
) -> Result<MembershipReport> {
    if !a.is_finite() {
        return Err(domain("log exponent must be finite"));
    }
    let (q, theta) = (params.q, params.theta);
    let a_eff = if pure_power { 0.0 } else { a };
    let window = ((1.0 - theta) / q, 1.0 / q);
    const EDGE: f64 = 1e-12;
    let verdict = if pure_power {
        theta >= 1.0 - EDGE
    } else {
        a >= window.0 - EDGE && a <= window.1 + EDGE
    };
    let verdict = if verdict { Membership::Member } else { Membership::Nonmember };

    let evidence = if a_eff >= 0.0 {
        let x = GrandSequence::power_log(1, 1.0 / q, a_eff)?;
        Some(membership_evidence(&x, params, cfg)?)
    } else {
        None
    };
    let evidence_agrees = evidence.as_ref().map(|ev| match verdict {
        Membership::Member => ev.bracket.is_finite(),
        Membership::Nonmember => !ev.bracket.is_finite() && ev.monotone_growth && ev.growth_exponent < 0.0,
    });
    Ok(MembershipReport { q, theta, a, pure_power, window, verdict, evidence, evidence_agrees })
}

fn membership_evidence(x: &GrandSequence, params: &GrandParams, cfg: &OptimizerConfig) -> Result<MembershipEvidence> {
    let bracket = grand_norm(x, params, cfg)?;
    let mut ladder = Vec::new();
    for i in 1..=12 {
        let eps = Epsilon::new(10f64.powi(-i))?;
        let v = grand_objective(x, params, eps)?;
        ladder.push(LadderPoint { eps: eps.get(), value: v.lower() });
    }
    let monotone_growth = ladder.windows(2).all(|w| w[1].value > w[0].value);
    let growth_exponent = log_log_slope(&ladder[ladder.len() / 2..]);
    Ok(MembershipEvidence { bracket, ladder, growth_exponent, monotone_growth })
}

/// Least-squares slope of `ln value` on `ln eps`.
pub(crate) fn log_log_slope(points: &[LadderPoint]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.eps.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VanishingVerdict {
    Vanishing,
    NotVanishing,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanishingSample {
    pub eps: f64,
    pub value: NormBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub samples: Vec<VanishingSample>,
    pub verdict: VanishingVerdict,
    pub final_value: NormBracket,
}

/// Evaluates `L(eps) = eps^theta sum_n s_n^(q(1+eps))` along a decreasing `eps` sequence.
///
/// The verdict is vanishing when the last upper bound is below `tolerance` and the
/// last five upper bounds decrease.
pub fn vanishing_limit(
    s: &GrandSequence,
    params: &GrandParams,
    eps_sequence: &[Epsilon],
    tolerance: f64,
) -> Result<VanishingReport> {
    if eps_sequence.is_empty() {
        return Err(Error::Precondition("empty eps sequence".into()));
    }
    if eps_sequence.windows(2).any(|w| w[1].get() >= w[0].get()) {
        return Err(Error::Precondition("eps sequence must be strictly decreasing".into()));
    }
    let mut ev = LpEvaluator::new(s, OptimizerConfig::default().tail_options());
    let samples: Vec<VanishingSample> = eps_sequence
        .iter()
        .map(|e| {
            let eps = e.get();
            let r = params.q * (1.0 + eps);
            let b = ev.eval_grand(params.q, eps);
            let w = params.theta * eps.ln();
            let lo = (w + r * b.lower().ln()).exp();
            let hi = (w + r * b.upper().ln()).exp();
            VanishingSample { eps, value: NormBracket::new_clamped(lo, hi) }
        })
        .collect();
    let final_value = samples.last().expect("nonempty").value;
    let verdict = if samples.iter().any(|s| !s.value.is_finite()) {
        VanishingVerdict::Divergent
    } else {
        let tail = &samples[samples.len().saturating_sub(5)..];
        let decreasing = tail.windows(2).all(|w| w[1].value.upper() <= w[0].value.upper());
        if final_value.upper() < tolerance && decreasing {
            VanishingVerdict::Vanishing
        } else {
            VanishingVerdict::NotVanishing
        }
    };
    Ok(VanishingReport { samples, verdict, final_value })
}

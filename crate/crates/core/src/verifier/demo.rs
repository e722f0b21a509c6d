//! Ladders of partial values for families whose norm is infinite, next to a
//! finite reference quantity.

use serde::{Deserialize, Serialize};

use crate::amalgam::{local_lp, sparse_indicator};
use crate::error::{domain, Result};
use crate::grandnorm::{grand_norm, grand_objective, log_log_slope, GrandParams, LadderPoint, OptimizerConfig};
use crate::seqcore::{lp_norm, GrandSequence, NormBracket};
use crate::specfun::Epsilon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemoFamily {
    /// `x_n = n^(-alpha/q)` with `alpha > 1`: in `l^q`, but the alternative norm
    /// `sup_eps eps^(theta/(q-eps)) ||x||_{q-eps}` is infinite because the series at
    /// `eps0 = q - q/alpha` is harmonic. Points are partial sums up to `N`.
    OldGrandNorm { q: f64, alpha: f64, theta: f64 },
    /// Indicator of `U [n, n + n^(-alpha))` in the grand amalgam norm. Points are
    /// the objective along a decreasing `eps` ladder.
    SparseIndicator { p: f64, q: f64, alpha: f64, theta: f64 },
    /// `n^(-1/q) (ln(n+1))^(-a)` in the grand sequence norm, a control for the ladders.
    PowerLog { q: f64, theta: f64, a: f64 },
}

impl DemoFamily {
    pub fn label(&self) -> &'static str {
        match self {
            Self::OldGrandNorm { .. } => "old_grand_norm",
            Self::SparseIndicator { .. } => "sparse_indicator",
            Self::PowerLog { .. } => "power_log",
        }
    }

    /// Threshold used when the caller does not give one.
    fn default_threshold(&self, reference: Option<NormBracket>) -> f64 {
        match (self, reference) {
            (Self::OldGrandNorm { .. }, Some(r)) => 2.0 * r.upper(),
            _ => 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoPoint {
    /// `N` for partial sums, `eps` for objective ladders.
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoOutcome {
    pub family: DemoFamily,
    pub points: Vec<DemoPoint>,
    pub threshold: f64,
    pub crossed: bool,
    pub monotone: bool,
    /// Slope of `ln value` against `ln ln N` for partial sums, against `ln eps`
    /// for ladders, fitted on the second half of the points.
    pub growth_exponent: f64,
    /// The full norm has a certified infinite upper bound.
    pub certified_divergent: bool,
    /// `||x||_q` for the alternative-norm family; the grand norm bracket otherwise.
    pub reference: NormBracket,
}

const EPS_LADDER_DEPTH: i32 = 14;
const SUM_DECADES: u32 = 7;

pub fn divergence_demo(family: DemoFamily, threshold: Option<f64>, cfg: &OptimizerConfig) -> Result<DemoOutcome> {
    let (points, fit, certified_divergent, reference) = match family {
        DemoFamily::OldGrandNorm { q, alpha, theta } => {
            if !(q >= 1.0 && alpha > 1.0 && theta > 0.0) {
                return Err(domain("needs q >= 1, alpha > 1 and theta > 0"));
            }
            let eps0 = q - q / alpha;
            let r0 = q - eps0;
            let x = GrandSequence::power_log(1, alpha / q, 0.0)?;
            let weight = eps0.powf(theta / r0);
            let mut points = Vec::new();
            let mut sum = 0.0;
            let mut n = 1u64;
            for d in 1..=SUM_DECADES {
                let end = 10u64.pow(d);
                while n <= end {
                    sum += (n as f64).powf(-alpha / q * r0);
                    n += 1;
                }
                points.push(DemoPoint { x: end as f64, value: weight * sum.powf(1.0 / r0) });
            }
            let fit: Vec<LadderPoint> =
                points.iter().map(|p| LadderPoint { eps: p.x.ln(), value: p.value }).collect();
            let divergent = !lp_norm(&x, r0)?.is_finite();
            (points, fit, divergent, lp_norm(&x, q)?)
        }
        DemoFamily::SparseIndicator { p, q, alpha, theta } => {
            let x = local_lp(&sparse_indicator(alpha)?, p)?;
            ladder(&x, &GrandParams::new(q, theta)?, cfg)?
        }
        DemoFamily::PowerLog { q, theta, a } => {
            let x = GrandSequence::power_log(1, 1.0 / q, a)?;
            ladder(&x, &GrandParams::new(q, theta)?, cfg)?
        }
    };
    let threshold = threshold.unwrap_or_else(|| family.default_threshold(Some(reference)));
    let crossed = points.iter().any(|p| p.value > threshold);
    let monotone = points.windows(2).all(|w| w[1].value > w[0].value);
    let growth_exponent = log_log_slope(&fit[fit.len() / 2..]);
    Ok(DemoOutcome { family, points, threshold, crossed, monotone, growth_exponent, certified_divergent, reference })
}

type Ladder = (Vec<DemoPoint>, Vec<LadderPoint>, bool, NormBracket);

fn ladder(x: &GrandSequence, params: &GrandParams, cfg: &OptimizerConfig) -> Result<Ladder> {
    let mut points = Vec::new();
    for i in 1..=EPS_LADDER_DEPTH {
        let eps = Epsilon::new(10f64.powi(-i))?;
        points.push(DemoPoint { x: eps.get(), value: grand_objective(x, params, eps)?.lower() });
    }
    let fit = points.iter().map(|p| LadderPoint { eps: p.x, value: p.value }).collect();
    let norm = grand_norm(x, params, cfg)?;
    Ok((points, fit, !norm.is_finite(), norm))
}

//! Multiplication operators `f -> f g` for compactly supported step functions `g`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{amalgam_grand_norm, small_norm_of_local, AmalgamParams, Cell, StepFunction};
use crate::error::{Error, Result};
use crate::grandnorm::OptimizerConfig;
use crate::report::{compare_eq, digest, CaseRecord, VerificationReport};
use crate::seqcore::NormBracket;
use crate::smallnorm::SearchBudget;
use crate::specfun::holder_conjugate;

/// Gaps below `ess_sup` used for the level-set trial functions.
pub const DELTA_LADDER: [f64; 4] = [0.5, 0.1, 0.01, 0.001];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    g: StepFunction,
}

impl Multiplier {
    /// `g` must have finitely many pieces.
    pub fn new(g: StepFunction) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::Precondition("multipliers need compact support".into()));
        }
        Ok(Self { g })
    }

    pub fn symbol(&self) -> &StepFunction {
        &self.g
    }

    /// `max |g|` over cells of positive width.
    pub fn ess_sup(&self) -> f64 {
        self.g.ess_sup()
    }

    pub fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        f.mul(&self.g)
    }

    /// `|g| = 1` on every cell of the explicit pieces.
    pub fn is_unimodular(&self) -> bool {
        !self.g.pieces().is_empty() && self.g.pieces().values().flatten().all(|c| c.value.abs() == 1.0)
    }

    /// Indicator of `{|g| > level}` on the cell partition of `g`.
    pub fn level_set(&self, level: f64) -> Result<StepFunction> {
        let pieces = self.g.pieces().iter().filter_map(|(&k, cells)| {
            if cells.iter().all(|c| c.value.abs() <= level) {
                return None;
            }
            let cells = cells.iter().map(|c| Cell::new(c.width, if c.value.abs() > level { 1.0 } else { 0.0 })).collect();
            Some((k, cells))
        });
        StepFunction::new(self.g.index_set(), pieces)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderStep {
    pub delta: f64,
    /// Certified lower bound for `||f g|| / ||f||` with `f` the level-set indicator.
    pub ratio: f64,
    /// Running maximum over trials and earlier ladder steps.
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub ladder: Vec<LadderStep>,
}

impl OpNormEstimate {
    pub fn bracket(&self) -> NormBracket {
        NormBracket::new_clamped(self.lower, self.upper)
    }
}

/// `||f g|| / ||f||` bracket from the two certified norm brackets.
fn ratio(m: &Multiplier, f: &StepFunction, params: &AmalgamParams, cfg: &OptimizerConfig) -> Result<(f64, f64)> {
    let den = amalgam_grand_norm(f, params, cfg)?;
    if den.upper() == 0.0 {
        return Ok((0.0, 0.0));
    }
    let num = amalgam_grand_norm(&m.apply(f)?, params, cfg)?;
    let lo = if den.upper().is_finite() { num.lower() / den.upper() } else { 0.0 };
    let hi = if den.lower() > 0.0 { num.upper() / den.lower() } else { f64::INFINITY };
    Ok((lo, hi))
}

/// Operator norm bracket: the upper bound is `ess_sup g`, the lower bound the best
/// certified ratio over the trials and the level sets `{|g| > ess_sup - delta}`.
pub fn op_norm_estimate(
    m: &Multiplier,
    params: &AmalgamParams,
    trials: &[StepFunction],
    cfg: &OptimizerConfig,
) -> Result<OpNormEstimate> {
    let upper = m.ess_sup();
    if upper == 0.0 {
        return Ok(OpNormEstimate { lower: 0.0, upper, ladder: Vec::new() });
    }
    let ratios: Vec<Result<(f64, f64)>> = trials.par_iter().map(|f| ratio(m, f, params, cfg)).collect();
    let mut lower = 0.0f64;
    for r in ratios {
        lower = lower.max(r?.0);
    }
    let mut ladder = Vec::with_capacity(DELTA_LADDER.len());
    for delta in DELTA_LADDER {
        let f = m.level_set((upper - delta).max(0.0))?;
        let (r, _) = ratio(m, &f, params, cfg)?;
        lower = lower.max(r);
        ladder.push(LadderStep { delta, ratio: r, lower });
    }
    Ok(OpNormEstimate { lower: lower.min(upper), upper, ladder })
}

/// `||f g|| <= ess_sup(g) ||f||` for every trial, and the level-set ladder
/// closing the gap to within `min(DELTA_LADDER)` plus bracket widths.
pub fn op_norm_check(
    m: &Multiplier,
    params: &AmalgamParams,
    trials: &[StepFunction],
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let s = m.ess_sup();
    let d = digest(&(m, params));
    let mut rep = VerificationReport::new("mult_op_norm");
    let records: Vec<Result<CaseRecord>> = trials
        .par_iter()
        .map(|f| {
            let lhs = amalgam_grand_norm(&m.apply(f)?, params, cfg)?;
            let rhs = amalgam_grand_norm(f, params, cfg)?.scale(s);
            Ok(CaseRecord::le("image_le_sup_times_norm", &digest(&(m, f, params)), lhs, rhs, tolerance))
        })
        .collect();
    for r in records {
        rep.push(r?);
    }
    let est = op_norm_estimate(m, params, &[], cfg)?;
    let monotone = est.ladder.windows(2).all(|w| w[1].lower >= w[0].lower);
    rep.push(CaseRecord::flag("ladder_monotone", &d, monotone, format!("{:?}", est.ladder.iter().map(|l| l.lower).collect::<Vec<_>>())));
    rep.push(CaseRecord::eq("upper_equals_ess_sup", &d, est.upper, s, 0.0));
    let gap_allowed = DELTA_LADDER[DELTA_LADDER.len() - 1];
    rep.push(CaseRecord::le(
        "sup_minus_lower_le_ladder_gap",
        &d,
        NormBracket::exact(est.upper - est.lower),
        NormBracket::exact(gap_allowed),
        tolerance,
    ));
    Ok(rep)
}

/// Isometry holds exactly when `|g| = 1` on the support of `g`.
///
/// Trials must live on the intervals of `g`. For unimodular `g` every trial keeps
/// its norm; otherwise the indicator of a cell with `|g| != 1` changes the norm by
/// the factor `|g|` there.
pub fn isometry_check(
    m: &Multiplier,
    params: &AmalgamParams,
    trials: &[StepFunction],
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let pieces = m.symbol().pieces();
    for f in trials {
        if !f.is_finite() || f.support().iter().any(|k| !pieces.contains_key(k)) {
            return Err(Error::Precondition("isometry trials must be supported on the intervals of g".into()));
        }
    }
    let mut rep = VerificationReport::new("mult_isometry");
    let d = digest(&(m, params));
    if m.is_unimodular() {
        let records: Vec<Result<CaseRecord>> = trials
            .par_iter()
            .map(|f| {
                let image = amalgam_grand_norm(&m.apply(f)?, params, cfg)?;
                let norm = amalgam_grand_norm(f, params, cfg)?;
                let (status, slack) = compare_eq(image.mid(), norm.mid(), tolerance.max(norm.width() + image.width()));
                let mut rec = CaseRecord::le("norm_preserved", &digest(&(m, f, params)), image, norm, tolerance);
                rec.status = status;
                rec.slack = slack;
                Ok(rec)
            })
            .collect();
        for r in records {
            rep.push(r?);
        }
        rep.push(CaseRecord::flag("unimodular", &d, true, "isometry expected"));
        return Ok(rep);
    }
    let (k, cells) = pieces
        .iter()
        .flat_map(|(&k, cells)| cells.iter().enumerate().map(move |(i, c)| (k, i, c, cells)))
        .find(|(_, _, c, _)| c.value.abs() != 1.0)
        .map(|(k, i, _, cells)| {
            let ind: Vec<Cell> = cells.iter().enumerate().map(|(j, c)| Cell::new(c.width, if i == j { 1.0 } else { 0.0 })).collect();
            (k, ind)
        })
        .ok_or_else(|| Error::Precondition("multiplier has no pieces".into()))?;
    let witness = StepFunction::new(m.symbol().index_set(), [(k, cells)])?;
    let (lo, hi) = ratio(m, &witness, params, cfg)?;
    let off = (lo - 1.0).max(1.0 - hi);
    rep.push(CaseRecord::flag(
        "isometry_violation_witnessed",
        &digest(&(m, &witness, params)),
        off > tolerance,
        format!("interval={k} ratio=[{lo:.12e}, {hi:.12e}]"),
    ));
    Ok(rep)
}

/// `int |f g| <= ||g||_{p',q)',theta} ||f||_{p,q),theta}` for every trial.
pub fn l1_bound_check(
    m: &Multiplier,
    params: &AmalgamParams,
    trials: &[StepFunction],
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let small = small_norm_of_local(m.symbol(), holder_conjugate(params.p())?, &params.grand(), budget, cfg)?;
    let records: Vec<Result<CaseRecord>> = trials
        .par_iter()
        .map(|f| {
            let lhs = m.apply(f)?.partial_integral_abs(i64::MAX);
            let grand = amalgam_grand_norm(f, params, cfg)?;
            let rhs = if small.upper == 0.0 || grand.upper() == 0.0 { 0.0 } else { small.upper * grand.upper() };
            Ok(CaseRecord::le(
                "l1_le_small_times_grand",
                &digest(&(m, f, params)),
                NormBracket::exact(lhs),
                NormBracket::exact(rhs),
                tolerance,
            ))
        })
        .collect();
    let mut rep = VerificationReport::new("mult_l1");
    for r in records {
        rep.push(r?);
    }
    Ok(rep)
}

/// Truncations `g_m = sum_{j=1..m} j chi_{[j-1, j)}` of an unbounded symbol: the
/// level-set indicator of `{|g_m| > m - 1/2}` has ratio at least `m`, so no bound
/// on `||M_g||` survives as `m` grows.
pub fn unboundedness_ladder(
    levels: &[u32],
    params: &AmalgamParams,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("mult_unbounded");
    for &level in levels {
        let g = StepFunction::new(
            crate::seqcore::IndexSet::Integers,
            (1..=level as i64).map(|j| (j - 1, vec![Cell::new(1.0, j as f64)])),
        )?;
        let m = Multiplier::new(g)?;
        let k = m.level_set(level as f64 - 0.5)?;
        let (lo, hi) = ratio(&m, &k, params, cfg)?;
        rep.push(CaseRecord::le(
            "ratio_ge_level",
            &digest(&(level, params)),
            NormBracket::exact(level as f64),
            NormBracket::new_clamped(lo, hi),
            tolerance,
        ));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;
    use crate::seqcore::IndexSet;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    fn params() -> AmalgamParams {
        AmalgamParams::new(2.0, 1.0, 1.0).unwrap()
    }

    fn steps(pieces: &[(i64, &[(f64, f64)])]) -> StepFunction {
        StepFunction::new(
            IndexSet::Integers,
            pieces.iter().map(|(k, cells)| (*k, cells.iter().map(|&(w, v)| Cell::new(w, v)).collect())),
        )
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let g = Multiplier::new(steps(&[(0, &[(1.0, 2.0)]), (1, &[(1.0, 2.0)]), (2, &[(1.0, 2.0)])])).unwrap();
        let f = steps(&[(0, &[(1.0, 1.0)])]);
        let out = g.apply(&f).unwrap();
        assert_eq!(out.cells_at(0), vec![Cell::new(1.0, 2.0)]);
        assert_eq!(out.support(), vec![0]);
        let zero = Multiplier::new(StepFunction::zero(IndexSet::Integers)).unwrap();
        assert!(zero.apply(&f).unwrap().support().is_empty());
        let unimodular = Multiplier::new(steps(&[(0, &[(0.5, -1.0), (0.5, 1.0)])])).unwrap();
        let f = steps(&[(0, &[(0.25, 3.0), (0.75, -2.0)])]);
        let out = unimodular.apply(&f).unwrap();
        let pairs = crate::amalgam::refine(&out.cells_at(0), &f.cells_at(0));
        assert!(pairs.iter().all(|&(_, a, b)| a.abs() == b.abs()));
    }

    #[test]
    fn plateau_norm_estimate() {
        let m = Multiplier::new(steps(&[(0, &[(1.0, 2.0)]), (1, &[(1.0, 2.0)]), (2, &[(1.0, 2.0)])])).unwrap();
        let est = op_norm_estimate(&m, &params(), &[], &cfg()).unwrap();
        assert_eq!(est.upper, 2.0);
        assert!(est.lower >= 2.0 - 1e-3, "{est:?}");
        let two = Multiplier::new(steps(&[(0, &[(0.5, 1.0), (0.5, 3.0)]), (3, &[(1.0, -1.0)])])).unwrap();
        let est = op_norm_estimate(&two, &params(), &[steps(&[(3, &[(1.0, 1.0)])])], &cfg()).unwrap();
        assert_eq!(est.upper, 3.0);
        assert!(est.lower >= 3.0 - 1e-3);
        assert!(est.ladder.windows(2).all(|w| w[1].lower >= w[0].lower));
        let zero = Multiplier::new(StepFunction::zero(IndexSet::Integers)).unwrap();
        let est = op_norm_estimate(&zero, &params(), &[], &cfg()).unwrap();
        assert_eq!((est.lower, est.upper), (0.0, 0.0));
    }

    #[test]
    fn op_norm_check_passes() {
        let m = Multiplier::new(steps(&[(0, &[(0.5, 1.0), (0.5, 3.0)]), (2, &[(1.0, -0.5)])])).unwrap();
        let trials = [steps(&[(0, &[(1.0, 1.0)])]), steps(&[(2, &[(0.3, 2.0), (0.7, 1.0)]), (5, &[(1.0, 4.0)])])];
        let rep = op_norm_check(&m, &params(), &trials, &cfg(), 1e-9).unwrap();
        assert!(rep.passed(), "{}", rep.to_json_lines());
    }

    #[test]
    fn isometry_both_directions() {
        let uni = Multiplier::new(steps(&[(0, &[(1.0, 1.0)]), (1, &[(0.5, -1.0), (0.5, 1.0)])])).unwrap();
        let trials = [steps(&[(0, &[(1.0, 2.0)]), (1, &[(0.25, 1.0), (0.75, -3.0)])]), steps(&[(1, &[(1.0, 1.0)])])];
        let rep = isometry_check(&uni, &params(), &trials, &cfg(), 1e-9).unwrap();
        assert!(rep.passed(), "{}", rep.to_json_lines());
        let half = Multiplier::new(steps(&[(0, &[(1.0, 0.5)])])).unwrap();
        let rep = isometry_check(&half, &params(), &[], &cfg(), 1e-9).unwrap();
        assert!(rep.passed());
        assert!(rep.records[0].detail.as_ref().unwrap().contains("5.000000000"));
        let dent = Multiplier::new(steps(&[(0, &[(0.75, 1.0), (0.25, 0.5)]), (1, &[(1.0, -1.0)])])).unwrap();
        let rep = isometry_check(&dent, &params(), &[], &cfg(), 1e-9).unwrap();
        assert!(rep.passed());
        assert!(isometry_check(&dent, &params(), &[steps(&[(4, &[(1.0, 1.0)])])], &cfg(), 1e-9).is_err());
    }

    #[test]
    fn l1_bound_tight_case() {
        let m = Multiplier::new(steps(&[(0, &[(1.0, 1.0)])])).unwrap();
        let f = steps(&[(0, &[(1.0, 1.0)])]);
        let rep = l1_bound_check(&m, &params(), &[f, StepFunction::zero(IndexSet::Integers)], &SearchBudget::default(), &cfg(), 1e-9).unwrap();
        assert!(rep.passed());
        assert!((rep.records[0].rhs.lower() - 1.0).abs() < 1e-6);
        assert_eq!(rep.records[1].lhs.upper(), 0.0);
    }

    #[test]
    fn unboundedness_grows() {
        let rep = unboundedness_ladder(&[1, 4, 16, 64], &params(), &cfg(), 1e-9).unwrap();
        assert!(rep.passed(), "{}", rep.to_json_lines());
        assert!(rep.records.iter().all(|r| r.status == Status::Pass));
    }
}

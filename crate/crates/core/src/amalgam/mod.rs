//! Step functions on the unit intervals `I_k = [k, k+1)` and the amalgam norms
//! obtained by applying sequence norms to their local `L^p` norms.

mod checks;
mod format;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grandnorm::{grand_norm, GrandParams, OptimizerConfig};
use crate::seqcore::{lp_norm, GrandSequence, IndexSet, NormBracket, PowerLogTail};
use crate::smallnorm::{small_norm_upper, SearchBudget, SmallNormEstimate};
use crate::specfun::psi_max;

pub use checks::{
    char_fn_check, embedding_check, holder_integral_check, integral_over_set_bound, product_composition_check,
    strictness_witnesses, EmbeddingCase, ProductExponents, WitnessParams,
};
pub use format::StepRecord;

/// Absolute tolerance on the widths of one unit interval summing to 1.
pub const WIDTH_SUM_TOL: f64 = 1e-12;

/// Breakpoints closer than this are merged when refining two partitions.
const MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub width: f64,
    pub value: f64,
}

impl Cell {
    pub fn new(width: f64, value: f64) -> Self {
        Self { width, value }
    }
}

/// Closed-form infinite families, active on `I_n` for every `n >= n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticFamily {
    /// `n^(-power) (ln(n+1))^(-log_power)` on all of `I_n`.
    PowerLogPlateau { n0: u64, power: f64, log_power: f64 },
    /// `n^kappa` on `[n, n + n^(-gamma))` and zero on the rest of `I_n`.
    ShrinkingSupport { n0: u64, kappa: f64, gamma: f64 },
}

impl AnalyticFamily {
    pub fn n0(&self) -> u64 {
        match *self {
            Self::PowerLogPlateau { n0, .. } | Self::ShrinkingSupport { n0, .. } => n0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidStepFunction(m));
        if self.n0() < 1 {
            return bad("family must start at n0 >= 1".into());
        }
        match *self {
            Self::PowerLogPlateau { power, log_power, .. } => {
                if !(power.is_finite() && power >= 0.0 && log_power.is_finite() && log_power >= 0.0) {
                    return bad(format!("plateau exponents must be finite and >= 0, got {power}, {log_power}"));
                }
            }
            Self::ShrinkingSupport { kappa, gamma, .. } => {
                if !(kappa.is_finite() && gamma.is_finite() && gamma >= 0.0) {
                    return bad(format!("shrinking support needs finite kappa and gamma >= 0, got {kappa}, {gamma}"));
                }
            }
        }
        Ok(())
    }

    /// Cells of the family on `I_n`, `n >= n0`.
    pub fn cells(&self, n: u64) -> Vec<Cell> {
        let nf = n as f64;
        match *self {
            Self::PowerLogPlateau { power, log_power, .. } => {
                let v = (-power * nf.ln() - log_power * (nf + 1.0).ln().ln()).exp();
                vec![Cell::new(1.0, v)]
            }
            Self::ShrinkingSupport { kappa, gamma, .. } => {
                let w = nf.powf(-gamma);
                let v = nf.powf(kappa);
                if w >= 1.0 {
                    vec![Cell::new(1.0, v)]
                } else {
                    vec![Cell::new(w, v), Cell::new(1.0 - w, 0.0)]
                }
            }
        }
    }

    /// Local `L^p` norms as a power-log tail; `p` may be infinite.
    pub fn local_tail(&self, p: f64) -> Result<PowerLogTail> {
        let n0 = self.n0();
        match *self {
            Self::PowerLogPlateau { power, log_power, .. } => PowerLogTail::new(n0, power, log_power),
            Self::ShrinkingSupport { kappa, gamma, .. } => {
                let a = if p.is_infinite() { -kappa } else { gamma / p - kappa };
                if a < 0.0 {
                    return Err(domain(format!("local norms n^{} grow; only decaying families are supported", -a)));
                }
                PowerLogTail::new(n0, a, 0.0)
            }
        }
    }

    /// `int_{I_n} |g|`.
    fn local_integral(&self, n: u64) -> f64 {
        self.cells(n).iter().map(|c| c.width * c.value.abs()).sum()
    }
}

/// Piecewise constant function: finitely many explicit unit intervals plus an
/// optional analytic family beyond them. Intervals not listed are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    index_set: IndexSet,
    pieces: BTreeMap<i64, Vec<Cell>>,
    family: Option<AnalyticFamily>,
}

impl StepFunction {
    pub fn zero(index_set: IndexSet) -> Self {
        Self { index_set, pieces: BTreeMap::new(), family: None }
    }

    pub fn new<I>(index_set: IndexSet, pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Vec<Cell>)>,
    {
        let mut map = BTreeMap::new();
        for (k, cells) in pieces {
            if map.insert(k, cells).is_some() {
                return Err(Error::InvalidStepFunction(format!("duplicate interval {k}")));
            }
        }
        let f = Self { index_set, pieces: map, family: None };
        f.validate()?;
        Ok(f)
    }

    pub fn with_family(mut self, family: AnalyticFamily) -> Result<Self> {
        self.family = Some(family);
        self.validate()?;
        Ok(self)
    }

    /// Pure analytic family over `N`.
    pub fn family(family: AnalyticFamily) -> Result<Self> {
        Self::zero(IndexSet::Naturals).with_family(family)
    }

    /// Constant `value` on the whole of `I_k`.
    pub fn plateau(index_set: IndexSet, k: i64, value: f64) -> Result<Self> {
        Self::new(index_set, [(k, vec![Cell::new(1.0, value)])])
    }

    /// Indicator of a finite union of half-open intervals `[a, b)`.
    pub fn indicator(index_set: IndexSet, intervals: &[(f64, f64)]) -> Result<Self> {
        let mut per_k: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
        for &(a, b) in intervals {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidStepFunction("interval endpoints must be finite".into()));
            }
            if b <= a {
                continue;
            }
            let (k_lo, k_hi) = (a.floor() as i64, (b.ceil() as i64) - 1);
            for k in k_lo..=k_hi {
                let kf = k as f64;
                let s = (a - kf).max(0.0);
                let e = (b - kf).min(1.0);
                if e > s {
                    per_k.entry(k).or_default().push((s, e));
                }
            }
        }
        let mut pieces = Vec::new();
        for (k, mut spans) in per_k {
            spans.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (s, e) in spans {
                match merged.last_mut() {
                    Some(last) if s <= last.1 => last.1 = last.1.max(e),
                    _ => merged.push((s, e)),
                }
            }
            let mut cells = Vec::new();
            let mut pos = 0.0;
            for (s, e) in merged {
                if s > pos {
                    cells.push(Cell::new(s - pos, 0.0));
                }
                cells.push(Cell::new(e - s, 1.0));
                pos = e;
            }
            if pos < 1.0 {
                cells.push(Cell::new(1.0 - pos, 0.0));
            }
            cells.retain(|c| c.width > 0.0);
            pieces.push((k, cells));
        }
        Self::new(index_set, pieces)
    }

    /// Indicator of `[-m, m)` over `Z`.
    pub fn interval_indicator(m: u64) -> Self {
        let m = m as f64;
        Self::indicator(IndexSet::Integers, &[(-m, m)]).expect("valid interval")
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidStepFunction(m));
        for (&k, cells) in &self.pieces {
            if !self.index_set.contains(k) {
                return bad(format!("interval {k} not in {:?}", self.index_set));
            }
            if cells.is_empty() {
                return bad(format!("interval {k} has no cells"));
            }
            let mut total = 0.0;
            for c in cells {
                if !(c.width.is_finite() && c.width > 0.0) {
                    return bad(format!("interval {k}: cell widths must be positive, got {}", c.width));
                }
                if !c.value.is_finite() {
                    return bad(format!("interval {k}: non-finite value"));
                }
                total += c.width;
            }
            if (total - 1.0).abs() > WIDTH_SUM_TOL {
                return bad(format!("interval {k}: widths sum to {total}, not 1"));
            }
        }
        if let Some(fam) = &self.family {
            fam.validate()?;
            if !self.index_set.is_one_sided() {
                return bad("analytic families need a one-sided index set".into());
            }
            if let Some((&last, _)) = self.pieces.last_key_value() {
                if last >= fam.n0() as i64 {
                    return bad(format!("family starts at {} but explicit pieces reach {last}", fam.n0()));
                }
            }
        }
        Ok(())
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn pieces(&self) -> &BTreeMap<i64, Vec<Cell>> {
        &self.pieces
    }

    pub fn analytic_family(&self) -> Option<&AnalyticFamily> {
        self.family.as_ref()
    }

    /// No analytic family attached.
    pub fn is_finite(&self) -> bool {
        self.family.is_none()
    }

    /// Cells on `I_k`, including the analytic family; a single zero cell when absent.
    pub fn cells_at(&self, k: i64) -> Vec<Cell> {
        if let Some(cells) = self.pieces.get(&k) {
            return cells.clone();
        }
        match &self.family {
            Some(fam) if k >= fam.n0() as i64 => fam.cells(k as u64),
            _ => vec![Cell::new(1.0, 0.0)],
        }
    }

    /// Explicit intervals carrying a nonzero value.
    pub fn support(&self) -> Vec<i64> {
        self.pieces
            .iter()
            .filter(|(_, cells)| cells.iter().any(|c| c.value != 0.0))
            .map(|(&k, _)| k)
            .collect()
    }

    /// `sup |g|` over cells of positive width, or `+inf` for unbounded families.
    pub fn ess_sup(&self) -> f64 {
        let explicit = self.pieces.values().flatten().map(|c| c.value.abs()).fold(0.0, f64::max);
        match self.family.map(|f| f.local_tail(f64::INFINITY)) {
            None => explicit,
            Some(Ok(t)) => explicit.max(t.term(t.n0)),
            Some(Err(_)) => f64::INFINITY,
        }
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !self.is_finite() && alpha != 1.0 {
            return Err(Error::Precondition("only finite step functions can be rescaled".into()));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|(&k, cells)| (k, cells.iter().map(|c| Cell::new(c.width, alpha * c.value)).collect()));
        let mut out = Self::new(self.index_set, pieces)?;
        out.family = self.family;
        Ok(out)
    }

    /// Pointwise `|g|`.
    pub fn abs(&self) -> Self {
        let mut out = self.clone();
        for cells in out.pieces.values_mut() {
            for c in cells.iter_mut() {
                c.value = c.value.abs();
            }
        }
        out
    }

    /// Pointwise product on the common refinement of the cell partitions.
    /// At least one factor must be finite; the result is finite.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.index_set != other.index_set {
            return Err(Error::Precondition("step functions use different index sets".into()));
        }
        let keys: Vec<i64> = match (self.is_finite(), other.is_finite()) {
            (true, _) => self.pieces.keys().copied().collect(),
            (false, true) => other.pieces.keys().copied().collect(),
            _ => return Err(Error::Precondition("product of two infinite families".into())),
        };
        let mut pieces = Vec::new();
        for k in keys {
            let cells: Vec<Cell> = refine(&self.cells_at(k), &other.cells_at(k))
                .into_iter()
                .map(|(w, a, b)| Cell::new(w, a * b))
                .collect();
            pieces.push((k, merge_cells(cells)));
        }
        Self::new(self.index_set, pieces)
    }

    /// `int |g|` restricted to intervals `k <= horizon`, families included.
    pub fn partial_integral_abs(&self, horizon: i64) -> f64 {
        let mut total: f64 =
            self.pieces.range(..=horizon).flat_map(|(_, cells)| cells.iter()).map(|c| c.width * c.value.abs()).sum();
        if let Some(fam) = &self.family {
            for n in fam.n0()..=(horizon.max(0) as u64) {
                total += fam.local_integral(n);
            }
        }
        total
    }

    /// Smallest `M >= 1` with the support of `g` inside `[-M, M]`.
    pub fn support_radius(&self) -> Result<u64> {
        if !self.is_finite() {
            return Err(Error::Precondition("unbounded support".into()));
        }
        Ok(self.support().iter().map(|&k| k.unsigned_abs().max((k + 1).unsigned_abs())).max().unwrap_or(1).max(1))
    }
}

/// Common refinement of two partitions of `[0, 1)`: `(width, left value, right value)`.
pub(crate) fn refine(a: &[Cell], b: &[Cell]) -> Vec<(f64, f64, f64)> {
    let ends = |cells: &[Cell]| -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = cells
            .iter()
            .map(|c| {
                acc += c.width;
                acc
            })
            .collect();
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    };
    let (ea, eb) = (ends(a), ends(b));
    let (mut i, mut j, mut pos) = (0, 0, 0.0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        let end = ea[i].min(eb[j]);
        if end - pos > 0.0 {
            out.push((end - pos, a[i].value, b[j].value));
        }
        pos = end;
        if ea[i] - end <= MERGE_TOL {
            i += 1;
        }
        if eb[j] - end <= MERGE_TOL {
            j += 1;
        }
    }
    out
}

/// Joins neighbouring cells with equal values.
fn merge_cells(cells: Vec<Cell>) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::with_capacity(cells.len());
    for c in cells {
        match out.last_mut() {
            Some(last) if last.value == c.value => last.width += c.width,
            _ => out.push(c),
        }
    }
    out
}

/// `||g chi_{I}||_{L^p}` for the cells of one unit interval; `p` may be infinite.
pub fn cell_norm(cells: &[Cell], p: f64) -> f64 {
    let m = cells.iter().map(|c| c.value.abs()).fold(0.0, f64::max);
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    let s: f64 = cells.iter().map(|c| c.width * (c.value.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// The sequence of local norms `||g chi_{I_k}||_{L^p}`; `p` may be infinite.
pub fn local_lp(g: &StepFunction, p: f64) -> Result<GrandSequence> {
    if p.is_nan() || p < 1.0 {
        return Err(domain(format!("local exponent must satisfy p >= 1, got {p}")));
    }
    let seq = GrandSequence::finite(g.index_set, g.pieces.iter().map(|(&k, cells)| (k, cell_norm(cells, p))))?;
    match &g.family {
        Some(fam) => seq.with_tail(fam.local_tail(p)?),
        None => Ok(seq),
    }
}

/// `int |f g|`, exact on the common refinement. At least one factor must be finite.
pub fn integral_abs_product(f: &StepFunction, g: &StepFunction) -> Result<f64> {
    let prod = f.mul(g)?;
    Ok(prod.partial_integral_abs(i64::MAX))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAmalgamParams")]
pub struct AmalgamParams {
    p: f64,
    q: f64,
    theta: f64,
}

#[derive(Deserialize)]
struct RawAmalgamParams {
    p: f64,
    q: f64,
    theta: f64,
}

impl TryFrom<RawAmalgamParams> for AmalgamParams {
    type Error = Error;
    fn try_from(r: RawAmalgamParams) -> Result<Self> {
        AmalgamParams::new(r.p, r.q, r.theta)
    }
}

impl AmalgamParams {
    pub fn new(p: f64, q: f64, theta: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(domain(format!("p must be finite and >= 1, got {p}")));
        }
        GrandParams::new(q, theta)?;
        Ok(Self { p, q, theta })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn grand(&self) -> GrandParams {
        GrandParams::new(self.q, self.theta).expect("validated")
    }
}

pub fn amalgam_grand_norm(g: &StepFunction, params: &AmalgamParams, cfg: &OptimizerConfig) -> Result<NormBracket> {
    grand_norm(&local_lp(g, params.p)?, &params.grand(), cfg)
}

/// `|| ||g chi_{I_k}||_{L^p} ||_{l^r}`.
pub fn classical_amalgam_norm(g: &StepFunction, p: f64, r: f64) -> Result<NormBracket> {
    lp_norm(&local_lp(g, p)?, r)
}

/// `(2M)^(1/q) psi_max^(theta/q)`, the bound for indicators of subsets of `[-M, M]`.
pub fn char_fn_norm_bound(m: u64, params: &AmalgamParams) -> f64 {
    (2.0 * m as f64).powf(1.0 / params.q) * psi_max().powf(params.theta / params.q)
}

/// Small norm of the local `L^p` norms of `f`.
pub fn amalgam_small_norm(
    f: &StepFunction,
    params: &AmalgamParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
) -> Result<SmallNormEstimate> {
    small_norm_of_local(f, params.p, &params.grand(), budget, cfg)
}

/// Small norm of the local `L^local_p` norms; `local_p` may be infinite.
pub(crate) fn small_norm_of_local(
    f: &StepFunction,
    local_p: f64,
    params: &GrandParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
) -> Result<SmallNormEstimate> {
    if !f.is_finite() {
        return Err(Error::Precondition("small norm needs finitely many pieces".into()));
    }
    small_norm_upper(&local_lp(f, local_p)?, params, budget, cfg)
}

/// `n^(-1/q) (ln(n+1))^(-a)` on each `I_n`, `n >= 1`.
pub fn powerlog_plateau(q: f64, a: f64) -> Result<StepFunction> {
    StepFunction::family(AnalyticFamily::PowerLogPlateau { n0: 1, power: 1.0 / q, log_power: a })
}

/// Indicator of `E = U [n, n + n^(-alpha))`, `n >= 1`.
pub fn sparse_indicator(alpha: f64) -> Result<StepFunction> {
    StepFunction::family(AnalyticFamily::ShrinkingSupport { n0: 1, kappa: 0.0, gamma: alpha })
}

/// `n^((beta-alpha)/p)` on `[n, n + n^(-beta))` with `alpha = p/q`, `beta = (q-alpha)/(q-1)`,
/// for `1 <= p < q`. Its local norms are `n^(-1/q)` while its integral diverges.
pub fn sparse_weighted(p: f64, q: f64) -> Result<StepFunction> {
    if !(p >= 1.0 && p < q) {
        return Err(domain(format!("needs 1 <= p < q, got p = {p}, q = {q}")));
    }
    let alpha = p / q;
    let beta = (q - alpha) / (q - 1.0);
    StepFunction::family(AnalyticFamily::ShrinkingSupport { n0: 1, kappa: (beta - alpha) / p, gamma: beta })
}

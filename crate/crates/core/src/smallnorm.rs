//! The small Lebesgue sequence norm: an infimum over decompositions
//! `|y_k| = sum_j y_{k,j}` of `sum_j inf_{eps>0} eps^(-theta/(q(1+eps))) ||y_{.,j}||_{(q(1+eps))'}`.
//!
//! Upper bounds come from explicit decompositions, lower bounds from Hölder
//! pairings against grand-norm brackets.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grandnorm::{grand_norm, GrandParams};
use crate::report::{digest, CaseRecord, VerificationReport};
use crate::search::{maximize, Objective, OptimizerConfig};
use crate::seqcore::{pointwise_dominates, GrandSequence, IndexSet, NormBracket};
use crate::specfun::{ln_psi, max_ln_psi_on, shifted_ln_psi_argmax, w_of_inv_e};

/// Row sums must match `|base_k|` within this relative tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    base: GrandSequence,
    parts: Vec<GrandSequence>,
}

impl Decomposition {
    pub fn new(base: GrandSequence, parts: Vec<GrandSequence>) -> Result<Self> {
        let d = Self { base, parts };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDecomposition(m));
        if !self.base.is_finite_support() {
            return bad("base must be finitely supported".into());
        }
        let mut sums: HashMap<i64, f64> = HashMap::new();
        for (j, p) in self.parts.iter().enumerate() {
            if !p.is_finite_support() || p.index_set() != self.base.index_set() {
                return bad(format!("part {j} must be finite over the base index set"));
            }
            for (k, v) in p.entries() {
                if v < 0.0 {
                    return bad(format!("part {j} is negative at index {k}"));
                }
                *sums.entry(k).or_insert(0.0) += v;
            }
        }
        for (k, v) in self.base.entries() {
            let s = sums.remove(&k).unwrap_or(0.0);
            if (s - v.abs()).abs() > ROW_SUM_TOL * v.abs().max(1.0) {
                return bad(format!("row {k} sums to {s}, expected {}", v.abs()));
            }
        }
        if let Some((k, s)) = sums.into_iter().find(|(_, s)| *s > ROW_SUM_TOL) {
            return bad(format!("row {k} sums to {s} outside the base support"));
        }
        Ok(())
    }

    /// The single part `|y|`.
    pub fn trivial(y: &GrandSequence) -> Result<Self> {
        Self::from_groups(y, &[y.support()])
    }

    /// One part per support index.
    pub fn per_index(y: &GrandSequence) -> Result<Self> {
        let groups: Vec<Vec<i64>> = y.support().into_iter().map(|k| vec![k]).collect();
        Self::from_groups(y, &groups)
    }

    /// Consecutive runs of `size` support indices.
    pub fn blocks(y: &GrandSequence, size: usize) -> Result<Self> {
        let groups: Vec<Vec<i64>> = y.support().chunks(size.max(1)).map(<[i64]>::to_vec).collect();
        Self::from_groups(y, &groups)
    }

    /// One part per group of indices; the groups must partition the support.
    pub fn from_groups(y: &GrandSequence, groups: &[Vec<i64>]) -> Result<Self> {
        let set = y.index_set();
        let parts = groups
            .iter()
            .filter(|g| !g.is_empty())
            .map(|g| GrandSequence::finite(set, g.iter().map(|&k| (k, y.get(k).abs()))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(y.clone(), parts)
    }

    /// Splits every row in the fixed proportions `weights`.
    pub fn proportional(y: &GrandSequence, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidDecomposition("weights must be nonnegative with positive sum".into()));
        }
        let n = weights.len();
        let mut parts: Vec<Vec<(i64, f64)>> = vec![Vec::new(); n];
        for (k, v) in y.entries() {
            let mut rest = v.abs();
            for (j, w) in weights.iter().enumerate() {
                // last part absorbs the rounding so rows sum exactly
                let share = if j + 1 == n { rest } else { (v.abs() * w / total).min(rest) };
                rest -= share;
                parts[j].push((k, share));
            }
        }
        let parts = parts
            .into_iter()
            .map(|p| GrandSequence::finite(y.index_set(), p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(y.clone(), parts)
    }

    /// Parts of `a` followed by parts of `b`, over the base `|a.base| + |b.base|`.
    pub fn concat(a: &Self, b: &Self) -> Result<Self> {
        let base = a.base.abs().add(&b.base.abs())?;
        let parts = a.parts.iter().chain(&b.parts).cloned().collect();
        Self::new(base, parts)
    }

    pub fn base(&self) -> &GrandSequence {
        &self.base
    }

    pub fn parts(&self) -> &[GrandSequence] {
        &self.parts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallNormEstimate {
    pub upper: f64,
    pub lower: f64,
    pub witness_decomposition: Decomposition,
    pub witness_dual: GrandSequence,
    pub evaluations: usize,
}

impl SmallNormEstimate {
    pub fn bracket(&self) -> NormBracket {
        NormBracket::new_clamped(self.lower.min(self.upper), self.upper)
    }
}

/// Deterministic search budget, counted in decomposition evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub evaluations: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { evaluations: 200, seed: 0 }
    }
}

/// `inf_{eps>0} eps^(-theta/(q(1+eps))) ||part||_{(q(1+eps))'}` for a finite part.
pub fn inner_inf(part: &GrandSequence, params: &GrandParams, cfg: &OptimizerConfig) -> Result<NormBracket> {
    if !part.is_finite_support() {
        return Err(Error::Precondition("inner infimum needs a finite part".into()));
    }
    cfg.validate()?;
    let values: Vec<f64> = part.entries().map(|(_, v)| v.abs()).collect();
    Ok(inner_inf_values(&values, params, cfg))
}

fn inner_inf_values(values: &[f64], params: &GrandParams, cfg: &OptimizerConfig) -> NormBracket {
    let vals: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    match vals.len() {
        0 => NormBracket::exact(0.0),
        // a single entry scales psi^(-theta/q), whose infimum sits at the peak of psi
        1 => NormBracket::exact(vals[0] * (-params.weight() * w_of_inv_e()).exp()),
        _ => {
            let mut obj = InnerObjective::new(&vals, params);
            let l1: f64 = vals.iter().sum();
            let hi = cfg.eps_max;
            let lo = cfg.eps_min;
            let out = maximize(&mut obj, lo, hi, f64::INFINITY, cfg, Some((-l1.ln(), f64::INFINITY)));
            NormBracket::new_clamped((-out.bound).exp(), (-out.best).exp())
        }
    }
}

struct InnerObjective {
    ln_vals: Vec<f64>,
    ln_max: f64,
    q: f64,
    theta: f64,
    k: f64,
    /// `ln ||y||_{q'}`, the limit of the norm factor as `eps -> 0`.
    ln_limit_small: f64,
}

impl InnerObjective {
    fn new(vals: &[f64], params: &GrandParams) -> Self {
        let ln_vals: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let ln_max = ln_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q = params.q();
        let ln_limit_small = if q == 1.0 {
            ln_max
        } else {
            let qc = q / (q - 1.0);
            let s: f64 = ln_vals.iter().map(|l| (qc * (l - ln_max)).exp()).sum();
            ln_max + s.ln() / qc
        };
        Self { ln_vals, ln_max, q, theta: params.theta(), k: params.weight(), ln_limit_small }
    }

    /// Conjugate of `q(1+eps)` without cancellation for small `eps`.
    fn conj(&self, eps: f64) -> f64 {
        let r = self.q * (1.0 + eps);
        r / ((self.q - 1.0) + self.q * eps)
    }
}

impl Objective for InnerObjective {
    /// `(ln ||y||_p, entropy of the weights |y_i|^p / sum)` at `p = (q(1+eps))'`.
    type Node = (f64, f64);

    fn eval(&mut self, eps: f64) -> (f64, f64) {
        let p = self.conj(eps);
        let zs: Vec<f64> = self.ln_vals.iter().map(|l| p * (l - self.ln_max)).collect();
        let s: f64 = zs.iter().map(|z| z.exp()).sum();
        let ln_s = s.ln();
        let mean_z: f64 = zs.iter().map(|z| z.exp() * z).sum::<f64>() / s;
        let entropy = (ln_s - mean_z).max(0.0);
        (self.ln_max + ln_s / p, entropy)
    }

    fn achieved(&self, eps: f64, n: &(f64, f64)) -> f64 {
        self.k * ln_psi(eps) - n.0
    }

    fn cell_bound(&self, l: f64, nl: &(f64, f64), r: f64, nr: &(f64, f64)) -> (f64, f64) {
        // ||y||_{r'} grows with eps.
        let mut best = -self.k * max_ln_psi_on(l, r) + nl.0;
        let mut split = f64::NAN;
        // ln ||y||_p is convex in 1/p with slope equal to the entropy.
        for (m, node) in [(l, nl), (r, nr)] {
            let kappa = node.1 / self.theta;
            let e = shifted_ln_psi_argmax(kappa).clamp(l, r);
            let low = node.0 + node.1 / (self.q * (1.0 + m)) - self.k * (e.ln() + kappa) / (1.0 + e);
            if low > best {
                best = low;
                split = e;
            }
        }
        (-best, split)
    }

    fn below_bound(&mut self, eps: f64, _n: &(f64, f64)) -> f64 {
        self.k * max_ln_psi_on(0.0, eps) - self.ln_limit_small
    }

    fn above_bound(&self, eps: f64, n: &(f64, f64), cap: f64) -> f64 {
        self.k * max_ln_psi_on(eps, cap) - n.0
    }
}

/// Memoised inner infima keyed by the multiset of part values.
pub struct SmallNormEvaluator {
    params: GrandParams,
    cfg: OptimizerConfig,
    cache: HashMap<Vec<u64>, NormBracket>,
}

impl SmallNormEvaluator {
    pub fn new(params: &GrandParams, cfg: &OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { params: *params, cfg: cfg.clone(), cache: HashMap::new() })
    }

    pub fn params(&self) -> &GrandParams {
        &self.params
    }

    pub fn inner(&mut self, values: &[f64]) -> NormBracket {
        let mut key: Vec<u64> = values.iter().filter(|v| **v != 0.0).map(|v| v.abs().to_bits()).collect();
        key.sort_unstable();
        if let Some(b) = self.cache.get(&key) {
            return *b;
        }
        let vals: Vec<f64> = key.iter().map(|b| f64::from_bits(*b)).collect();
        let b = inner_inf_values(&vals, &self.params, &self.cfg);
        self.cache.insert(key, b);
        b
    }

    pub fn value(&mut self, d: &Decomposition) -> NormBracket {
        d.parts.iter().fold(NormBracket::exact(0.0), |acc, p| {
            let vals: Vec<f64> = p.entries().map(|(_, v)| v).collect();
            acc.add(&self.inner(&vals))
        })
    }

    fn groups_value(&mut self, values: &[f64], labels: &[usize]) -> f64 {
        let mut by_label: HashMap<usize, Vec<f64>> = HashMap::new();
        for (v, l) in values.iter().zip(labels) {
            by_label.entry(*l).or_default().push(*v);
        }
        let mut keys: Vec<usize> = by_label.keys().copied().collect();
        keys.sort_unstable();
        keys.iter().map(|l| self.inner(&by_label[l]).upper()).sum()
    }
}

/// Sum of inner infima over the parts of `d`.
pub fn decomposition_value(d: &Decomposition, params: &GrandParams, cfg: &OptimizerConfig) -> Result<NormBracket> {
    d.validate()?;
    Ok(SmallNormEvaluator::new(params, cfg)?.value(d))
}

/// Decompositions visited by the structured stage of the search, best last.
pub(crate) struct SearchTrace {
    pub explored: Vec<Decomposition>,
    pub best: Decomposition,
    pub best_upper: f64,
    pub evaluations: usize,
}

/// Searches decompositions of `|y|`: trivial, per index, contiguous blocks of
/// sizes `2^i`, then simulated annealing over partitions of the support.
pub(crate) fn search_decompositions(
    y: &GrandSequence,
    ev: &mut SmallNormEvaluator,
    budget: &SearchBudget,
    seed_groups: Option<Vec<Vec<i64>>>,
) -> Result<SearchTrace> {
    let support = y.support();
    let n = support.len();
    let values: Vec<f64> = support.iter().map(|&k| y.get(k).abs()).collect();
    let to_groups = |labels: &[usize]| -> Vec<Vec<i64>> {
        let mut g: Vec<Vec<i64>> = Vec::new();
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            let slot = *seen.entry(*l).or_insert_with(|| {
                g.push(Vec::new());
                g.len() - 1
            });
            g[slot].push(support[i]);
        }
        g
    };

    let mut candidates: Vec<Vec<usize>> = vec![vec![0; n]];
    if let Some(groups) = seed_groups {
        let mut labels = vec![usize::MAX; n];
        for (gi, g) in groups.iter().enumerate() {
            for k in g {
                if let Ok(i) = support.binary_search(k) {
                    labels[i] = gi;
                }
            }
        }
        let fresh = groups.len();
        for (i, l) in labels.iter_mut().enumerate() {
            if *l == usize::MAX {
                *l = fresh + i;
            }
        }
        candidates.push(labels);
    }
    candidates.push((0..n).collect());
    let mut size = 2;
    while size < n {
        candidates.push((0..n).map(|i| i / size).collect());
        size *= 2;
    }

    let mut evaluations = 0;
    let mut explored = Vec::new();
    let mut best_labels = vec![0; n];
    let mut best_val = f64::INFINITY;
    for (ci, labels) in candidates.iter().enumerate() {
        if ci > 0 && evaluations >= budget.evaluations {
            break;
        }
        let v = ev.groups_value(&values, labels);
        evaluations += 1;
        explored.push(Decomposition::from_groups(y, &to_groups(labels))?);
        if v < best_val {
            best_val = v;
            best_labels = labels.clone();
        }
    }

    if n >= 2 && evaluations < budget.evaluations {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        let mut cur = best_labels.clone();
        let mut cur_val = best_val;
        let steps = budget.evaluations - evaluations;
        let t0 = 0.02 * best_val.max(f64::MIN_POSITIVE);
        for step in 0..steps {
            let mut next = cur.clone();
            let mut labels: Vec<usize> = next.clone();
            labels.sort_unstable();
            labels.dedup();
            match rng.random_range(0..3) {
                0 => {
                    let i = rng.random_range(0..n);
                    let fresh = labels.last().map_or(0, |l| l + 1);
                    let choice = rng.random_range(0..=labels.len());
                    next[i] = if choice == labels.len() { fresh } else { labels[choice] };
                }
                1 if labels.len() >= 2 => {
                    let a = labels[rng.random_range(0..labels.len())];
                    let b = labels[rng.random_range(0..labels.len())];
                    for l in next.iter_mut() {
                        if *l == b {
                            *l = a;
                        }
                    }
                }
                _ => {
                    let a = labels[rng.random_range(0..labels.len())];
                    let fresh = labels.last().map_or(0, |l| l + 1);
                    for l in next.iter_mut() {
                        if *l == a && rng.random_bool(0.5) {
                            *l = fresh;
                        }
                    }
                }
            }
            if next == cur {
                continue;
            }
            let v = ev.groups_value(&values, &next);
            evaluations += 1;
            let temp = t0 * (1.0 - step as f64 / steps as f64) + 1e-300;
            if v < cur_val || rng.random::<f64>() < (-(v - cur_val) / temp).exp() {
                cur = next;
                cur_val = v;
                if v < best_val {
                    best_val = v;
                    best_labels = cur.clone();
                }
            }
        }
    }
    let best = Decomposition::from_groups(y, &to_groups(&best_labels))?;
    let best_upper = ev.value(&best).upper();
    Ok(SearchTrace { explored, best, best_upper, evaluations })
}

/// Best decomposition found within `budget`, with a dual lower bound from
/// [`default_dual_candidates`].
pub fn small_norm_upper(
    y: &GrandSequence,
    params: &GrandParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
) -> Result<SmallNormEstimate> {
    if !y.is_finite_support() {
        return Err(Error::Precondition("small norm search needs finite support".into()));
    }
    if y.is_zero() {
        return Ok(SmallNormEstimate {
            upper: 0.0,
            lower: 0.0,
            witness_decomposition: Decomposition::new(y.clone(), Vec::new())?,
            witness_dual: y.clone(),
            evaluations: 0,
        });
    }
    let mut ev = SmallNormEvaluator::new(params, cfg)?;
    let trace = search_decompositions(y, &mut ev, budget, None)?;
    let (lower, witness_dual) = dual_lower_bound_with_witness(y, params, &default_dual_candidates(y, params)?, cfg)?;
    Ok(SmallNormEstimate {
        upper: trace.best_upper,
        lower,
        witness_decomposition: trace.best,
        witness_dual,
        evaluations: trace.evaluations,
    })
}

/// Spikes, contiguous block indicators, `|y|^gamma` profiles and the rank power profile.
pub fn default_dual_candidates(y: &GrandSequence, params: &GrandParams) -> Result<Vec<GrandSequence>> {
    let set = y.index_set();
    let support = y.support();
    let mut out = Vec::new();
    for &k in support.iter().take(64) {
        out.push(GrandSequence::spike(set, k, 1.0)?);
    }
    let mut size = 2;
    while size <= support.len() {
        for chunk in support.chunks(size) {
            out.push(GrandSequence::finite(set, chunk.iter().map(|&k| (k, 1.0)))?);
        }
        size *= 2;
    }
    for gamma in [0.25, 0.5, 1.0, 2.0, 4.0] {
        out.push(GrandSequence::finite(set, y.entries().map(|(k, v)| (k, v.abs().powf(gamma))))?);
    }
    let mut ranked: Vec<(i64, f64)> = y.entries().map(|(k, v)| (k, v.abs())).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out.push(GrandSequence::finite(
        set,
        ranked.iter().enumerate().map(|(r, (k, _))| (*k, ((r + 1) as f64).powf(-1.0 / params.q()))),
    )?);
    Ok(out)
}

/// `max_x sum |x_k y_k| / ||x||` over the candidates, a lower bound for the small norm.
pub fn dual_lower_bound(
    y: &GrandSequence,
    params: &GrandParams,
    candidates: &[GrandSequence],
    cfg: &OptimizerConfig,
) -> Result<f64> {
    Ok(dual_lower_bound_with_witness(y, params, candidates, cfg)?.0)
}

fn dual_lower_bound_with_witness(
    y: &GrandSequence,
    params: &GrandParams,
    candidates: &[GrandSequence],
    cfg: &OptimizerConfig,
) -> Result<(f64, GrandSequence)> {
    let mut best = (0.0, GrandSequence::zero(y.index_set()));
    for x in candidates {
        if !x.is_finite_support() {
            return Err(Error::Precondition("dual candidates must be finite".into()));
        }
        let pairing: f64 = x.entries().map(|(k, v)| (v * y.get(k)).abs()).sum();
        if pairing == 0.0 {
            continue;
        }
        let norm = grand_norm(x, params, cfg)?.upper();
        if norm == 0.0 || !norm.is_finite() {
            continue;
        }
        let v = pairing / norm;
        if v > best.0 {
            best = (v, x.clone());
        }
    }
    Ok(best)
}

/// Decomposition of a dominated sequence obtained by trimming each row of a
/// dominating decomposition from the last part backwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub decomposition: Decomposition,
    /// Amounts removed from each part, `0 <= z_{k,j} <= x_{k,j}`.
    pub excess: Vec<GrandSequence>,
}

/// For each row `k` with partial sums `S_j = x_{k,1} + ... + x_{k,j}`, removes
/// `z_{k,j} = x_{k,j} - max(y_k - S_{j-1}, 0)` when `S_j > y_k` and nothing otherwise,
/// so that the kept parts `x_{k,j} - z_{k,j}` sum to `y_k`.
pub fn transfer_decomposition(x_decomp: &Decomposition, y: &GrandSequence) -> Result<Transfer> {
    x_decomp.validate()?;
    if !y.is_finite_support() || y.index_set() != x_decomp.base.index_set() {
        return Err(Error::Precondition("target must be finite over the same index set".into()));
    }
    if !y.is_nonnegative() {
        return Err(Error::Precondition("target must be nonnegative".into()));
    }
    for (k, v) in y.entries() {
        let b = x_decomp.base.get(k).abs();
        if v > b + ROW_SUM_TOL * b.max(1.0) {
            return Err(Error::Precondition(format!("target exceeds the base at index {k}: {v} > {b}")));
        }
    }
    let set = y.index_set();
    let m = x_decomp.parts.len();
    let mut kept: Vec<Vec<(i64, f64)>> = vec![Vec::new(); m];
    let mut excess: Vec<Vec<(i64, f64)>> = vec![Vec::new(); m];
    for k in x_decomp.base.support() {
        let target = y.get(k);
        let mut before = 0.0;
        let mut remaining = target;
        for j in 0..m {
            let xkj = x_decomp.parts[j].get(k);
            let after = before + xkj;
            let z = if after > target { xkj - (target - before).max(0.0) } else { 0.0 };
            let z = z.clamp(0.0, xkj);
            let mut keep = xkj - z;
            if keep > remaining {
                keep = remaining;
            }
            remaining -= keep;
            kept[j].push((k, keep));
            excess[j].push((k, xkj - keep));
            before = after;
        }
        // rounding residue goes to the last part that kept anything
        if remaining > 0.0 {
            if let Some(slot) = kept.iter_mut().rev().find_map(|p| p.last_mut().filter(|e| e.0 == k && e.1 > 0.0)) {
                slot.1 += remaining;
            }
        }
    }
    let to_seqs = |v: Vec<Vec<(i64, f64)>>| -> Result<Vec<GrandSequence>> {
        v.into_iter().map(|p| GrandSequence::finite(set, p)).collect()
    };
    let decomposition = Decomposition::new(y.clone(), to_seqs(kept)?)?;
    Ok(Transfer { decomposition, excess: to_seqs(excess)? })
}

/// Lattice comparison for `0 <= y <= x`: every structured decomposition of `x`
/// transfers to one of `y` with no larger value, and the searched small norm of
/// `y` does not exceed that of `x`.
pub fn lattice_compare(
    x: &GrandSequence,
    y: &GrandSequence,
    params: &GrandParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    if !x.is_finite_support() || !y.is_finite_support() {
        return Err(Error::Precondition("lattice comparison needs finite support".into()));
    }
    if !pointwise_dominates(x, y)? {
        return Err(Error::Precondition("y is not dominated by x".into()));
    }
    let d = digest(&(x, y, params));
    let mut ev = SmallNormEvaluator::new(params, cfg)?;
    let mut rep = VerificationReport::new("lattice");
    let trace_x = search_decompositions(x, &mut ev, budget, None)?;
    for dx in trace_x.explored.iter().chain(std::iter::once(&trace_x.best)) {
        let t = transfer_decomposition(dx, y)?;
        let lhs = ev.value(&t.decomposition);
        let rhs = ev.value(dx);
        rep.push(CaseRecord::le("transfer_value_le_source_value", &d, lhs, rhs, tolerance));
    }
    let seed = transfer_decomposition(&trace_x.best, y)?;
    let seed_groups: Vec<Vec<i64>> = seed.decomposition.parts.iter().map(|p| p.support()).collect();
    let trace_y = search_decompositions(y, &mut ev, budget, Some(seed_groups))?;
    let seeded = ev.value(&seed.decomposition).upper();
    let y_upper = trace_y.best_upper.min(seeded);
    rep.push(CaseRecord::le(
        "small_norm_y_le_small_norm_x",
        &d,
        NormBracket::exact(y_upper),
        NormBracket::exact(trace_x.best_upper),
        tolerance,
    ));
    Ok(rep)
}

/// `||y1 + y2|| <= ||y1|| + ||y2||` through the concatenated decomposition,
/// transferred onto `|y1 + y2|`.
pub fn subadditivity_check(
    y1: &GrandSequence,
    y2: &GrandSequence,
    params: &GrandParams,
    budget: &SearchBudget,
    cfg: &OptimizerConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    let mut ev = SmallNormEvaluator::new(params, cfg)?;
    let t1 = search_decompositions(y1, &mut ev, budget, None)?;
    let t2 = search_decompositions(y2, &mut ev, budget, None)?;
    let sum = y1.add(y2)?;
    let joined = Decomposition::concat(&t1.best, &t2.best)?;
    let t = transfer_decomposition(&joined, &sum.abs())?;
    let lhs = ev.value(&t.decomposition);
    let rhs = NormBracket::exact(t1.best_upper + t2.best_upper);
    let mut rep = VerificationReport::new("subadditivity");
    rep.push(CaseRecord::le("sum_le_sum_of_norms", &digest(&(y1, y2, params)), lhs, rhs, tolerance));
    Ok(rep)
}

/// Indicator of `{-m, ..., m}` over `Z`.
pub fn symmetric_indicator(m: i64) -> GrandSequence {
    GrandSequence::finite(IndexSet::Integers, (-m..=m).map(|k| (k, 1.0))).expect("valid indicator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{psi_max, psi_max_recip};

    fn params(q: f64, theta: f64) -> GrandParams {
        GrandParams::new(q, theta).unwrap()
    }

    fn seq(values: &[f64]) -> GrandSequence {
        GrandSequence::from_values(IndexSet::Naturals, 1, values).unwrap()
    }

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    /// Golden-section minimiser over `ln eps`.
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c.exp()) < f(d.exp()) {
                b = d;
            } else {
                a = c;
            }
        }
        f((0.5 * (a + b)).exp())
    }

    #[test]
    fn spike_inner_inf_is_e_w() {
        let b = inner_inf(&seq(&[1.0]), &params(1.0, 1.0), &cfg()).unwrap();
        assert!((b.mid() - 0.756_945_106_457_583_7).abs() < 1e-15);
        assert!((b.mid() - psi_max_recip()).abs() < 1e-15);
        assert_eq!(inner_inf(&seq(&[]), &params(1.0, 1.0), &cfg()).unwrap(), NormBracket::exact(0.0));
    }

    #[test]
    fn pair_inner_inf_matches_oracle() {
        // eps^(-1/(1+eps)) 2^(1/r'), r' = (1+eps)/eps, compared with the limit 2
        let oracle = golden_min(|e| e.powf(-1.0 / (1.0 + e)) * 2f64.powf(e / (1.0 + e)), -10.0, 10.0);
        let b = inner_inf(&seq(&[1.0, 1.0]), &params(1.0, 1.0), &cfg()).unwrap();
        assert!(b.lower() <= oracle + 1e-12 && oracle <= b.upper() + 1e-12, "{b:?} {oracle}");
        assert!(b.width() < 1e-9);
        assert!(b.upper() < 2.0);
    }

    #[test]
    fn general_inner_inf_matches_oracle() {
        let vals = [0.3, 2.0, 0.7, 1.1];
        let p = params(2.5, 0.7);
        let f = |e: f64| {
            let r = 2.5 * (1.0 + e);
            let rc = r / (r - 1.0);
            let n: f64 = vals.iter().map(|v: &f64| v.powf(rc)).sum::<f64>().powf(1.0 / rc);
            e.powf(-0.7 / (2.5 * (1.0 + e))) * n
        };
        let oracle = golden_min(f, -12.0, 12.0).min(vals.iter().sum());
        let b = inner_inf(&seq(&vals), &p, &cfg()).unwrap();
        assert!(b.lower() <= oracle * (1.0 + 1e-12) && oracle <= b.upper() * (1.0 + 1e-12), "{b:?} {oracle}");
    }

    #[test]
    fn spike_small_norm_is_tight() {
        let y = seq(&[1.0]);
        let est = small_norm_upper(&y, &params(1.0, 1.0), &SearchBudget::default(), &cfg()).unwrap();
        assert!((est.upper - psi_max_recip()).abs() < 1e-9);
        assert!(est.upper - est.lower <= 1e-6, "{est:?}");
        assert!(est.lower <= est.upper + 1e-9);
    }

    #[test]
    fn indicator_example_bounds() {
        let y = symmetric_indicator(1);
        let est = small_norm_upper(&y, &params(1.0, 1.0), &SearchBudget::default(), &cfg()).unwrap();
        assert!(est.upper <= 3.0 * psi_max_recip() + 1e-9);
        assert!(est.upper <= 3.0 * psi_max());
        assert!(est.lower <= est.upper + 1e-9);
    }

    #[test]
    fn budget_zero_is_trivial() {
        let y = seq(&[1.0, 3.0, 0.5]);
        let p = params(2.0, 1.0);
        let est = small_norm_upper(&y, &p, &SearchBudget { evaluations: 0, seed: 1 }, &cfg()).unwrap();
        assert_eq!(est.witness_decomposition, Decomposition::trivial(&y).unwrap());
        let zero = small_norm_upper(&seq(&[]), &p, &SearchBudget::default(), &cfg()).unwrap();
        assert_eq!((zero.upper, zero.lower), (0.0, 0.0));
    }

    #[test]
    fn decomposition_validation() {
        let y = seq(&[1.0, 2.0]);
        assert!(Decomposition::new(y.clone(), vec![seq(&[1.0, 1.0])]).is_err());
        assert!(Decomposition::new(y.clone(), vec![seq(&[1.0, 1.0]), seq(&[0.0, 1.0])]).is_ok());
        assert!(Decomposition::new(y.clone(), vec![seq(&[1.0, 3.0]), seq(&[0.0, -1.0])]).is_err());
        assert!(Decomposition::new(y, vec![seq(&[1.0, 2.0, 0.5])]).is_err());
    }

    #[test]
    fn proportional_split_keeps_value() {
        let p = params(1.5, 0.8);
        let y = seq(&[1.0, 0.2, 3.0]);
        let a = decomposition_value(&Decomposition::trivial(&y).unwrap(), &p, &cfg()).unwrap();
        let b = decomposition_value(&Decomposition::proportional(&y, &[0.3, 0.7]).unwrap(), &p, &cfg()).unwrap();
        assert!((a.mid() - b.mid()).abs() <= 1e-9 * a.mid());
    }

    #[test]
    fn transfer_hand_example() {
        let x = GrandSequence::spike(IndexSet::Naturals, 1, 3.0).unwrap();
        let d = Decomposition::new(
            x,
            vec![
                GrandSequence::spike(IndexSet::Naturals, 1, 1.0).unwrap(),
                GrandSequence::spike(IndexSet::Naturals, 1, 2.0).unwrap(),
            ],
        )
        .unwrap();
        let y = GrandSequence::spike(IndexSet::Naturals, 1, 2.0).unwrap();
        let t = transfer_decomposition(&d, &y).unwrap();
        assert_eq!(t.excess[0].get(1), 0.0);
        assert_eq!(t.excess[1].get(1), 1.0);
        assert_eq!(t.decomposition.parts()[0].get(1), 1.0);
        assert_eq!(t.decomposition.parts()[1].get(1), 1.0);
    }

    #[test]
    fn transfer_identity_and_zero() {
        let x = seq(&[1.0, 2.0, 4.0]);
        let d = Decomposition::proportional(&x, &[1.0, 2.0, 1.0]).unwrap();
        let same = transfer_decomposition(&d, &x).unwrap();
        assert_eq!(same.decomposition.parts(), d.parts());
        let zero = transfer_decomposition(&d, &seq(&[])).unwrap();
        assert!(zero.decomposition.parts().iter().all(GrandSequence::is_zero));
        assert!(transfer_decomposition(&d, &seq(&[2.0])).is_err());
    }

    #[test]
    fn lattice_examples() {
        let p = params(2.0, 1.0);
        let x = seq(&[1.0, 0.5, 2.0, 0.1]);
        let b = SearchBudget { evaluations: 24, seed: 3 };
        let half = x.scale(0.5).unwrap();
        assert!(lattice_compare(&x, &half, &p, &b, &cfg(), 1e-9).unwrap().passed());
        assert!(lattice_compare(&x, &x, &p, &b, &cfg(), 1e-9).unwrap().passed());
        assert!(lattice_compare(&half, &x, &p, &b, &cfg(), 1e-9).is_err());
    }

    #[test]
    fn subadditivity_example() {
        let p = params(1.5, 0.5);
        let b = SearchBudget { evaluations: 16, seed: 9 };
        let rep = subadditivity_check(&seq(&[1.0, -2.0]), &seq(&[0.5, 2.0, 1.0]), &p, &b, &cfg(), 1e-9).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn nonneg_seq() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec((-3.0f64..3.0).prop_map(|e| 10f64.powf(e)), 1..10)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn duality_sandwich(v in nonneg_seq(), q in 1.0f64..3.0, t in 0.2f64..2.0) {
                let p = params(q, t);
                let y = seq(&v);
                let c = OptimizerConfig::fast();
                let est = small_norm_upper(&y, &p, &SearchBudget { evaluations: 20, seed: 0 }, &c).unwrap();
                prop_assert!(est.lower <= est.upper * (1.0 + 1e-9) + 1e-9);
            }

            #[test]
            fn transfer_properties(v in nonneg_seq(), fr in prop::collection::vec(0.0f64..1.0, 10), w in prop::collection::vec(0.01f64..1.0, 1..5)) {
                let x = seq(&v);
                let y = seq(&v.iter().zip(&fr).map(|(a, f)| a * f).collect::<Vec<_>>());
                let d = Decomposition::proportional(&x, &w).unwrap();
                let t = transfer_decomposition(&d, &y).unwrap();
                for (j, part) in d.parts().iter().enumerate() {
                    for (k, xv) in part.entries() {
                        let z = t.excess[j].get(k);
                        prop_assert!(z >= 0.0 && z <= xv + 1e-12 * xv.max(1.0));
                        prop_assert!((t.decomposition.parts()[j].get(k) - (xv - z)).abs() <= 1e-12 * xv.max(1.0));
                    }
                }
                t.decomposition.validate().unwrap();
            }
        }
    }
}

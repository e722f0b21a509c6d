//! Real sequences over `N`, `N0` or `Z` with a finitely supported part and an
//! optional power-log tail, together with certified `l^p` norm brackets.

mod bracket;
mod format;
mod tail;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use bracket::NormBracket;
pub use format::SequenceRecord;
pub(crate) use tail::{excess, exp_power_integral_upper};

pub use tail::{tail_sum_bounds, TailOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    #[serde(rename = "N")]
    Naturals,
    #[serde(rename = "N0")]
    NaturalsWithZero,
    #[serde(rename = "Z")]
    Integers,
}

impl IndexSet {
    pub fn contains(self, k: i64) -> bool {
        match self {
            IndexSet::Naturals => k >= 1,
            IndexSet::NaturalsWithZero => k >= 0,
            IndexSet::Integers => true,
        }
    }

    pub fn is_one_sided(self) -> bool {
        !matches!(self, IndexSet::Integers)
    }
}

/// `x_n = n^(-a) (ln(n+1))^(-b)` for `n >= n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogTail {
    pub n0: u64,
    pub a: f64,
    pub b: f64,
}

impl PowerLogTail {
    pub fn new(n0: u64, a: f64, b: f64) -> Result<Self> {
        let tail = Self { n0, a, b };
        tail.validate()?;
        Ok(tail)
    }

    fn validate(&self) -> Result<()> {
        if self.n0 < 1 {
            return Err(Error::InvalidSequence("tail must start at n0 >= 1".into()));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidSequence(format!(
                "tail power exponent must be finite and >= 0, got {}",
                self.a
            )));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::InvalidSequence(format!(
                "tail log exponent must be finite and >= 0, got {}",
                self.b
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn ln_term(&self, n: u64) -> f64 {
        let nf = n as f64;
        let mut v = -self.a * nf.ln();
        if self.b != 0.0 {
            v -= self.b * (nf + 1.0).ln().ln();
        }
        v
    }

    pub fn term(&self, n: u64) -> f64 {
        if n < self.n0 {
            0.0
        } else {
            self.ln_term(n).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrandSequence {
    index_set: IndexSet,
    entries: BTreeMap<i64, f64>,
    tail: Option<PowerLogTail>,
}

impl GrandSequence {
    pub fn zero(index_set: IndexSet) -> Self {
        Self { index_set, entries: BTreeMap::new(), tail: None }
    }

    /// Finitely supported sequence. Zero values are dropped.
    pub fn finite<I>(index_set: IndexSet, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if !index_set.contains(k) {
                return Err(Error::InvalidSequence(format!("index {k} not in {index_set:?}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidSequence(format!("non-finite value at index {k}")));
            }
            if map.contains_key(&k) {
                return Err(Error::InvalidSequence(format!("duplicate index {k}")));
            }
            if v != 0.0 {
                map.insert(k, v);
            }
        }
        Ok(Self { index_set, entries: map, tail: None })
    }

    /// Consecutive values starting at index `start`.
    pub fn from_values(index_set: IndexSet, start: i64, values: &[f64]) -> Result<Self> {
        Self::finite(index_set, values.iter().enumerate().map(|(i, &v)| (start + i as i64, v)))
    }

    /// The single entry `value` at index `k`.
    pub fn spike(index_set: IndexSet, k: i64, value: f64) -> Result<Self> {
        Self::finite(index_set, [(k, value)])
    }

    pub fn with_tail(mut self, tail: PowerLogTail) -> Result<Self> {
        tail.validate()?;
        if !self.index_set.is_one_sided() {
            return Err(Error::InvalidSequence("tails apply only to N or N0 index sets".into()));
        }
        if let Some((&last, _)) = self.entries.last_key_value() {
            if last >= tail.n0 as i64 {
                return Err(Error::InvalidSequence(format!(
                    "tail start {} overlaps finite support ending at {last}",
                    tail.n0
                )));
            }
        }
        self.tail = Some(tail);
        Ok(self)
    }

    /// Pure power-log sequence over `N` starting at `n0`.
    pub fn power_log(n0: u64, a: f64, b: f64) -> Result<Self> {
        Self::zero(IndexSet::Naturals).with_tail(PowerLogTail::new(n0, a, b)?)
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn tail(&self) -> Option<&PowerLogTail> {
        self.tail.as_ref()
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn support(&self) -> Vec<i64> {
        self.entries.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_finite_support(&self) -> bool {
        self.tail.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty() && self.tail.is_none()
    }

    pub fn get(&self, k: i64) -> f64 {
        if let Some(&v) = self.entries.get(&k) {
            return v;
        }
        match &self.tail {
            Some(t) if k >= t.n0 as i64 => t.term(k as u64),
            _ => 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.values().all(|&v| v >= 0.0)
    }

    /// `alpha * x`; a nonzero scale on a tailed sequence is rejected unless `|alpha| = 1`
    /// and `alpha > 0`, since tails are fixed positive families.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(domain("scale factor must be finite"));
        }
        if self.tail.is_some() && alpha != 1.0 {
            return Err(Error::InvalidSequence("cannot scale a tailed sequence".into()));
        }
        Self::finite(self.index_set, self.entries().map(|(k, v)| (k, alpha * v)))
            .map(|s| Self { tail: self.tail, ..s })
    }

    pub fn abs(&self) -> Self {
        Self {
            index_set: self.index_set,
            entries: self.entries.iter().map(|(&k, &v)| (k, v.abs())).collect(),
            tail: self.tail,
        }
    }

    /// Entrywise sum of two finitely supported sequences.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Entrywise product of two finitely supported sequences.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.tail.is_some() || other.tail.is_some() {
            return Err(Error::InvalidSequence("entrywise operations need finite support".into()));
        }
        if self.index_set != other.index_set {
            return Err(Error::InvalidSequence("index sets differ".into()));
        }
        let mut keys: Vec<i64> = self.entries.keys().chain(other.entries.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        Self::finite(self.index_set, keys.into_iter().map(|k| (k, f(self.get(k), other.get(k)))))
    }

    /// Largest magnitude among finite entries and the first tail term.
    pub(crate) fn max_abs(&self) -> f64 {
        let fin = self.entries.values().fold(0.0f64, |m, v| m.max(v.abs()));
        match &self.tail {
            Some(t) => fin.max(t.term(t.n0)),
            None => fin,
        }
    }
}

/// Certified bracket for `(sum |x_n|^p)^(1/p)`.
pub fn lp_norm(x: &GrandSequence, p: f64) -> Result<NormBracket> {
    lp_norm_with(x, p, &TailOptions::default())
}

pub fn lp_norm_with(x: &GrandSequence, p: f64, opts: &TailOptions) -> Result<NormBracket> {
    check_exponent(p)?;
    Ok(LpEvaluator::new(x, opts.clone()).eval(p))
}

/// `sup_n |x_n|`; tails are nonincreasing so their first term is their sup.
pub fn linf_norm(x: &GrandSequence) -> f64 {
    x.max_abs()
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(domain(format!("l^p exponent must satisfy 1 <= p < inf, got {p}")));
    }
    Ok(())
}

/// Whether `y_k <= x_k` for every index. Both sequences must be nonnegative.
pub fn pointwise_dominates(x: &GrandSequence, y: &GrandSequence) -> Result<bool> {
    if x.index_set != y.index_set {
        return Err(Error::Precondition("sequences use different index sets".into()));
    }
    if !x.is_nonnegative() || !y.is_nonnegative() {
        return Err(Error::Precondition("domination needs nonnegative sequences".into()));
    }
    let finite_end = x
        .entries
        .keys()
        .chain(y.entries.keys())
        .copied()
        .max()
        .unwrap_or(i64::MIN);
    for (&k, &v) in &y.entries {
        if v > x.get(k) {
            return Ok(false);
        }
    }
    match (&x.tail, &y.tail) {
        (_, None) => Ok(true),
        (None, Some(_)) => Ok(false),
        (Some(tx), Some(ty)) => {
            let start = (finite_end + 1).max(tx.n0.min(ty.n0) as i64).max(1) as u64;
            // Finite stretch where one tail is active and the other is not, or
            // where x has finite entries (already handled through `get`).
            if ty.n0 < tx.n0 {
                for n in ty.n0.max(start)..tx.n0 {
                    if ty.term(n) > x.get(n as i64) {
                        return Ok(false);
                    }
                }
            }
            let from = start.max(tx.n0).max(ty.n0);
            Ok(tail_dominates_from(tx, ty, from))
        }
    }
}

/// `ty(n) <= tx(n)` for every `n >= from`, by direct evaluation up to a horizon
/// and an asymptotic sign certificate beyond it.
fn tail_dominates_from(tx: &PowerLogTail, ty: &PowerLogTail, from: u64) -> bool {
    const HORIZON: u64 = 4096;
    let da = ty.a - tx.a;
    let db = ty.b - tx.b;
    // ln tx(n) - ln ty(n) = da ln n + db lnln(n+1) must stay >= 0.
    let phi = |n: u64| {
        let nf = n as f64;
        da * nf.ln() + db * (nf + 1.0).ln().ln()
    };
    let h = from.max(HORIZON);
    for n in from..=h {
        if phi(n) < -1e-12 * (da.abs() + db.abs()) {
            return false;
        }
    }
    if da >= 0.0 && db >= 0.0 {
        return true;
    }
    if da <= 0.0 {
        return false;
    }
    // da > 0 > db: lnln(n+1)/ln n decreases for n >= 16, so the sign at the
    // horizon bounds every later term.
    let hf = h as f64;
    let ratio = (hf + 1.0).ln().ln() / hf.ln();
    da + db * ratio >= 0.0
}

/// Reusable `l^p` evaluator that caches log-magnitudes so that the grand norm
/// search can evaluate many exponents cheaply.
pub(crate) struct LpEvaluator<'a> {
    seq: &'a GrandSequence,
    opts: TailOptions,
    ln_max: f64,
    ln_finite: Vec<f64>,
    ln_tail: Vec<f64>,
}

impl<'a> LpEvaluator<'a> {
    pub(crate) fn new(seq: &'a GrandSequence, opts: TailOptions) -> Self {
        let m = seq.max_abs();
        let ln_finite = seq.entries.values().map(|v| v.abs().ln()).collect();
        Self { seq, opts, ln_max: m.ln(), ln_finite, ln_tail: Vec::new() }
    }

    pub(crate) fn sequence(&self) -> &GrandSequence {
        self.seq
    }

    fn ensure_tail_terms(&mut self, tail: &PowerLogTail, count: usize) {
        while self.ln_tail.len() < count {
            let n = tail.n0 + self.ln_tail.len() as u64;
            self.ln_tail.push(tail.ln_term(n));
        }
    }

    /// Scaled finite sum `sum (|v|/M)^p`.
    fn finite_scaled(&self, p: f64) -> f64 {
        self.ln_finite.iter().map(|&l| (p * (l - self.ln_max)).exp()).sum()
    }

    pub(crate) fn eval(&mut self, p: f64) -> NormBracket {
        self.eval_with(p, None)
    }

    /// Norm at `p = q(1+eps)`; the tail exponent excess `q(1+eps)a - 1` is formed
    /// from `q a - 1` and `q a eps` so that small `eps` keeps full relative precision.
    pub(crate) fn eval_grand(&mut self, q: f64, eps: f64) -> NormBracket {
        self.eval_with(q * (1.0 + eps), Some((q, eps)))
    }

    fn eval_with(&mut self, p: f64, grand: Option<(f64, f64)>) -> NormBracket {
        if self.seq.is_zero() {
            return NormBracket::exact(0.0);
        }
        let m = self.ln_max.exp();
        let fin = self.finite_scaled(p);
        let (lo, hi) = match self.seq.tail {
            None => (fin, fin),
            Some(tail) => {
                let c = match grand {
                    Some((q, eps)) => excess(q, tail.a) + q * tail.a * eps,
                    None => excess(p, tail.a),
                };
                let (tl, th) = self.tail_scaled(&tail, p, c, fin);
                (fin + tl, fin + th)
            }
        };
        let lower = m * lo.powf(1.0 / p);
        let upper = if hi.is_finite() { m * hi.powf(1.0 / p) } else { f64::INFINITY };
        NormBracket::new_clamped(lower, upper)
    }

    /// Lower bound of `(sum_{n < horizon} |x_n|^p)^(1/p)` using only explicit terms.
    #[cfg(test)]
    pub(crate) fn partial_norm(&mut self, p: f64, horizon: u64) -> f64 {
        let m = self.ln_max.exp();
        let mut s = self
            .seq
            .entries
            .iter()
            .filter(|(&k, _)| k < horizon as i64)
            .map(|(_, v)| (p * (v.abs().ln() - self.ln_max)).exp())
            .sum::<f64>();
        if let Some(tail) = self.seq.tail {
            if horizon > tail.n0 {
                let count = (horizon - tail.n0) as usize;
                s += (0..count)
                    .map(|i| {
                        let n = tail.n0 + i as u64;
                        (p * (tail.ln_term(n) - self.ln_max)).exp()
                    })
                    .sum::<f64>();
            }
        }
        m * s.powf(1.0 / p)
    }

    /// Bracket for `sum_{n >= n0} (f(n)/M)^p`.
    fn tail_scaled(&mut self, tail: &PowerLogTail, p: f64, c: f64, finite_part: f64) -> (f64, f64) {
        let t = p * tail.b;
        let divergent = tail::diverges_excess(c, t);
        let lnm = self.ln_max;
        let mut count = self.opts.initial_terms.max(1);
        let mut summed = 0usize;
        let mut partial = 0.0;
        let mut last_width = f64::INFINITY;
        loop {
            self.ensure_tail_terms(tail, count);
            partial += self.ln_tail[summed..count].iter().map(|&l| (p * (l - lnm)).exp()).sum::<f64>();
            summed = count;
            if divergent {
                return (partial, f64::INFINITY);
            }
            let horizon = tail.n0 + count as u64;
            // the sandwich width is about |f'(N)|/8; skip the quadrature while that alone is too wide
            let f_n = (p * (self.ln_tail[count - 1] - lnm)).exp();
            let nf = horizon as f64;
            let sandwich = f_n * (1.0 + c + t / nf.ln().max(1.0)) / (8.0 * nf);
            if sandwich > 0.25 * self.opts.rel_width * (finite_part + partial) && count < self.opts.max_terms {
                count = (count * 2).min(self.opts.max_terms);
                continue;
            }
            let (ln_lo, ln_hi) = tail::ln_tail_sum_bounds(c, t, horizon, self.opts.quad_tol);
            // the tail family is n^(-a) (ln(n+1))^(-b); raising to p and scaling by M^-p
            let lo = partial + (ln_lo - p * lnm).exp();
            let hi = partial + (ln_hi - p * lnm).exp();
            let total = finite_part + lo;
            let width = hi - lo;
            // stop once more terms no longer shrink the bracket: the quadrature gap dominates
            if width <= self.opts.rel_width * total || count >= self.opts.max_terms || width > 0.5 * last_width {
                return (lo, hi);
            }
            last_width = width;
            count = (count * 2).min(self.opts.max_terms);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(values: &[f64]) -> GrandSequence {
        GrandSequence::from_values(IndexSet::Naturals, 1, values).unwrap()
    }

    #[test]
    fn finite_bracket_is_exact() {
        let b = lp_norm(&n(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(b.lower(), b.upper());
        assert!((b.lower() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn basel_tail_bracket() {
        let x = GrandSequence::power_log(1, 2.0, 0.0).unwrap();
        let b = lp_norm(&x, 1.0).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(b.contains(zeta2), "{b:?}");
        assert!(b.width() <= 1e-6, "{b:?}");
    }

    #[test]
    fn harmonic_tail_diverges() {
        let x = GrandSequence::power_log(1, 1.0, 0.0).unwrap();
        let b = lp_norm(&x, 1.0).unwrap();
        assert!(b.upper().is_infinite());
        assert!(b.lower().is_finite() && b.lower() > 1.0);
    }

    #[test]
    fn log_boundary_tail_converges_only_past_one() {
        // sum 1/(n ln^2(n+1)) converges, sum 1/(n ln(n+1)) does not.
        let conv = GrandSequence::power_log(1, 1.0, 2.0).unwrap();
        assert!(lp_norm(&conv, 1.0).unwrap().is_finite());
        let div = GrandSequence::power_log(1, 1.0, 1.0).unwrap();
        assert!(!lp_norm(&div, 1.0).unwrap().is_finite());
    }

    #[test]
    fn linf_examples() {
        let x = n(&[3.0, -5.0, 2.0]);
        assert_eq!(linf_norm(&x), 5.0);
        let t = GrandSequence::power_log(10, 0.5, 0.0).unwrap();
        assert!((linf_norm(&t) - 10f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(linf_norm(&GrandSequence::zero(IndexSet::Integers)), 0.0);
    }

    #[test]
    fn domination_examples() {
        assert!(pointwise_dominates(&n(&[1.0, 2.0]), &n(&[1.0, 0.0])).unwrap());
        assert!(!pointwise_dominates(&n(&[1.0, 2.0]), &n(&[1.0, 3.0])).unwrap());
        let x = n(&[4.0, 0.5]);
        assert!(pointwise_dominates(&x, &x).unwrap());
        assert!(pointwise_dominates(&x, &n(&[-1.0])).is_err());
    }

    #[test]
    fn domination_with_tails() {
        let slow = GrandSequence::power_log(1, 0.5, 0.0).unwrap();
        let fast = GrandSequence::power_log(1, 1.0, 0.0).unwrap();
        assert!(pointwise_dominates(&slow, &fast).unwrap());
        assert!(!pointwise_dominates(&fast, &slow).unwrap());
        let with_log = GrandSequence::power_log(1, 1.0, 0.5).unwrap();
        // the log factor exceeds 1 at n = 1 (ln 2 < 1), so no domination there
        assert!(!pointwise_dominates(&fast, &with_log).unwrap());
        let from3 = GrandSequence::power_log(3, 1.0, 0.5).unwrap();
        assert!(pointwise_dominates(&fast, &from3).unwrap());
    }

    #[test]
    fn tail_validation() {
        assert!(PowerLogTail::new(0, 1.0, 0.0).is_err());
        assert!(PowerLogTail::new(1, -1.0, 0.0).is_err());
        assert!(PowerLogTail::new(1, 1.0, -0.5).is_err());
        let s = n(&[1.0, 2.0, 3.0]);
        assert!(s.clone().with_tail(PowerLogTail::new(3, 1.0, 0.0).unwrap()).is_err());
        assert!(s.with_tail(PowerLogTail::new(4, 1.0, 0.0).unwrap()).is_ok());
        let z = GrandSequence::zero(IndexSet::Integers);
        assert!(z.with_tail(PowerLogTail::new(1, 1.0, 0.0).unwrap()).is_err());
        assert!(GrandSequence::finite(IndexSet::Naturals, [(0, 1.0)]).is_err());
    }

    #[test]
    fn exponent_domain() {
        assert!(lp_norm(&n(&[1.0]), 0.5).is_err());
        assert!(lp_norm(&n(&[1.0]), f64::NAN).is_err());
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let x = n(&[1e3, 5e2, 1.0]);
        let b = lp_norm(&x, 1e4).unwrap();
        assert!((b.lower() - 1e3).abs() < 1e-6 * 1e3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn finite_seq() -> impl Strategy<Value = GrandSequence> {
            prop::collection::vec(-1e3f64..1e3, 1..24)
                .prop_map(|v| GrandSequence::from_values(IndexSet::Integers, -3, &v).unwrap())
        }

        proptest! {
            #[test]
            fn homogeneity(x in finite_seq(), alpha in -50.0f64..50.0, p in 1.0f64..8.0) {
                let a = lp_norm(&x.scale(alpha).unwrap(), p).unwrap().upper();
                let b = alpha.abs() * lp_norm(&x, p).unwrap().upper();
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }

            #[test]
            fn triangle(x in finite_seq(), y in finite_seq(), p in 1.0f64..8.0) {
                let lhs = lp_norm(&x.add(&y).unwrap(), p).unwrap().upper();
                let rhs = lp_norm(&x, p).unwrap().upper() + lp_norm(&y, p).unwrap().upper();
                prop_assert!(rhs - lhs >= -1e-12 * rhs.max(1.0));
            }

            #[test]
            fn nesting(x in finite_seq(), p1 in 1.0f64..6.0, dp in 0.0f64..6.0) {
                let a = lp_norm(&x, p1 + dp).unwrap();
                let b = lp_norm(&x, p1).unwrap();
                prop_assert!(a.upper() <= b.upper() * (1.0 + 1e-12) + a.width() + b.width());
            }

            #[test]
            fn tail_bracket_is_sound(a in 0.6f64..3.0, b in 0.0f64..2.0, p in 1.0f64..3.0, h in 10u64..3000) {
                prop_assume!(p * a > 1.0);
                let x = GrandSequence::power_log(1, a, b).unwrap();
                let br = lp_norm(&x, p).unwrap();
                let mut ev = LpEvaluator::new(&x, TailOptions::default());
                let partial = ev.partial_norm(p, h);
                prop_assert!(br.lower() >= partial * (1.0 - 1e-12));
                prop_assert!(partial <= br.upper());
            }
        }
    }
}

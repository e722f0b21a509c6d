//! Enclosures for `sum_{n >= N} n^(-s) (ln(n+1))^(-t)`.
//!
//! The summand is convex and decreasing in `n`, so
//! `I(N) + f(N)/2 <= sum_{n >= N} f(n) <= I(N - 1/2)` with `I(a) = int_a^inf f`.

/// Controls how far tails are summed explicitly before the integral bound takes over.
#[derive(Debug, Clone, PartialEq)]
pub struct TailOptions {
    pub initial_terms: usize,
    pub max_terms: usize,
    /// Target relative width of the full bracket.
    pub rel_width: f64,
    /// Target relative gap of the quadrature enclosure.
    pub quad_tol: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { initial_terms: 1024, max_terms: 1_000_000, rel_width: 1e-9, quad_tol: 1e-9 }
    }
}

/// Excesses `s - 1` within a few ulps of 0 are treated as exactly 0 so that
/// borderline tails are classified by their log factor.
pub(crate) fn snap_excess(c: f64) -> f64 {
    if c.abs() <= 8.9e-16 {
        0.0
    } else {
        c
    }
}

/// `s - 1` for `s = p a`, formed with a fused multiply-add.
pub(crate) fn excess(p: f64, a: f64) -> f64 {
    snap_excess(p.mul_add(a, -1.0))
}

/// Divergence in terms of the excess `c = s - 1`.
pub(crate) fn diverges_excess(c: f64, t: f64) -> bool {
    c < 0.0 || (c == 0.0 && t <= 1.0)
}

#[inline]
fn ln_summand(s: f64, t: f64, x: f64) -> f64 {
    let mut v = -s * x.ln();
    if t != 0.0 {
        v -= t * x.ln_1p().ln();
    }
    v
}

/// Bracket `(lower, upper)` for `sum_{n >= N} n^(-s) (ln(n+1))^(-t)`, `N >= 1`.
/// The upper end is `+inf` when the series diverges.
pub fn tail_sum_bounds(s: f64, t: f64, n: u64) -> (f64, f64) {
    let (lo, hi) = ln_tail_sum_bounds(snap_excess(s - 1.0), t, n, TailOptions::default().quad_tol);
    (lo.exp(), hi.exp())
}

/// As [`tail_sum_bounds`] in logs, with the exponent given by its excess `c = s - 1`.
pub(crate) fn ln_tail_sum_bounds(c: f64, t: f64, n: u64, tol: f64) -> (f64, f64) {
    if diverges_excess(c, t) {
        return (f64::INFINITY, f64::INFINITY);
    }
    let nf = n as f64;
    let (int_lo, _) = ln_integral_bounds(c, t, nf, tol);
    let (_, int_hi) = ln_integral_bounds(c, t, nf - 0.5, tol);
    let half_head = ln_summand(1.0 + c, t, nf) - std::f64::consts::LN_2;
    (ln_add(int_lo, half_head), int_hi)
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Bounds on `ln int_a^inf x^(-1-c) (ln(x+1))^(-t) dx` for `a >= 1/2`.
pub(crate) fn ln_integral_bounds(c: f64, t: f64, a: f64, tol: f64) -> (f64, f64) {
    if diverges_excess(c, t) {
        return (f64::INFINITY, f64::INFINITY);
    }
    if t == 0.0 {
        let v = -c * a.ln() - c.ln();
        return (v, v);
    }
    // x = e^v turns the integrand into exp(-c v - t ln softplus(v)), and
    // ln softplus is concave, so the log-integrand is convex in v.
    let lg = |v: f64| -c * v - t * softplus(v).ln();
    let v0 = a.ln();
    let v_end = if c > 0.0 { v0 + 40.0 / c } else { v0.max(1.0) * 1e8 };
    let h = (8.0 * tol / t).sqrt().clamp(1e-5, 0.05);
    let span = ((v_end.max(1.0)) / v0.max(1.0)).ln() + (1.0 - v0).max(0.0);
    let h = h.max(span / 400_000.0);
    let base = lg(v0);
    let mut lo_sum = 0.0;
    let mut hi_sum = 0.0;
    let mut x0 = v0;
    let mut d0 = 0.0;
    while x0 < v_end {
        let x1 = (x0 + h * x0.max(1.0)).min(v_end);
        let dv = x1 - x0;
        let d1 = lg(x1) - base;
        let drop = d0 - d1;
        let chord = if drop.abs() > 1e-300 { (-drop).exp_m1() / -drop } else { 1.0 };
        hi_sum += dv * d0.exp() * chord;
        // tangent of the log-integrand at the midpoint
        let m = 0.5 * (x0 + x1);
        let slope = -c - t * softplus_logderiv(m);
        let half = 0.5 * dv * slope.abs();
        let sinhc = if half > 1e-8 { half.sinh() / half } else { 1.0 };
        lo_sum += dv * (lg(m) - base).exp() * sinhc;
        x0 = x1;
        d0 = d1;
    }
    // softplus(v) >= v past the cutoff
    let ln_rest = {
        let g = d0 + base + t * softplus(v_end).ln() - t * v_end.ln();
        let by_exp = if c > 0.0 { g - c.ln() } else { f64::INFINITY };
        let by_pow = if t > 1.0 {
            -c * v_end + (1.0 - t) * v_end.ln() - (t - 1.0).ln()
        } else {
            f64::INFINITY
        };
        by_exp.min(by_pow)
    };
    let ln_lo = base + lo_sum.ln();
    let ln_hi = ln_add(base + hi_sum.ln(), ln_rest);
    (ln_lo, ln_hi)
}

#[inline]
fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

/// Derivative of `ln softplus(v)`.
#[inline]
fn softplus_logderiv(v: f64) -> f64 {
    let sigma = 1.0 / (1.0 + (-v).exp());
    sigma / softplus(v)
}

/// Upper bound on `int_L^inf e^(-c u) u^(-t) du` for `c > 0` or `t > 1`, `L > 0`.
pub(crate) fn exp_power_integral_upper(c: f64, l: f64, t: f64) -> f64 {
    if c < 0.0 || (c == 0.0 && t <= 1.0) {
        return f64::INFINITY;
    }
    if t == 0.0 {
        return (-c * l).exp() / c;
    }
    if c == 0.0 {
        return l.powf(1.0 - t) / (t - 1.0);
    }
    // u = ln(x+1) maps this onto the power-log integral from x = e^L - 1,
    // bounded above by the same integral with ln x in place of ln(x+1).
    let mut best = (-c * l).exp() * l.powf(-t) / c;
    if t > 1.0 {
        best = best.min(l.powf(1.0 - t) / (t - 1.0));
    }
    best
}

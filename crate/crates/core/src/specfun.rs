//! Scalar special functions behind every norm constant.
//!
//! The scaling function `psi(eps) = eps^(1/(1+eps))` is unimodal on `(0, inf)`.
//! Its maximiser is `1/W(1/e)` and its maximum is `1/(e W(1/e))`, where `W`
//! is the principal branch of the Lambert W function. Both constants are
//! exposed through [`psi_argmax`] and [`psi_max`].

use std::f64::consts::E;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Positive, finite norm parameter.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(domain(format!("epsilon must be positive and finite, got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

const HALLEY_MAX_ITER: usize = 50;
const HALLEY_RESIDUAL: f64 = 1e-14;

/// Principal branch `W0` on `[0, inf)`: the `w >= 0` with `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!("lambert_w0 requires a finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > 1e100 {
        return Ok(lambert_w0_of_exp(x.ln()));
    }
    Ok(halley(x))
}

fn halley(x: f64) -> f64 {
    let mut w = x.ln_1p();
    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= HALLEY_RESIDUAL * x.max(1.0) * 1e-2 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-16 * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    w
}

/// `W0(e^y)` without forming `e^y`, usable for arbitrarily large `y`.
pub fn lambert_w0_of_exp(y: f64) -> f64 {
    if y <= 500.0 {
        return halley(y.exp());
    }
    // w + ln w = y
    let mut w = y - y.ln();
    for _ in 0..HALLEY_MAX_ITER {
        let g = w + w.ln() - y;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 1e-16 * w {
            break;
        }
    }
    w
}

pub(crate) fn w_of_inv_e() -> f64 {
    static W: OnceLock<f64> = OnceLock::new();
    *W.get_or_init(|| halley(1.0 / E))
}

/// `1/W(1/e)`, the location of the maximum of `psi` (about 3.59).
pub fn psi_argmax() -> f64 {
    1.0 / w_of_inv_e()
}

/// `1/(e W(1/e))`, the maximum value of `psi` (about 1.32).
pub fn psi_max() -> f64 {
    1.0 / (E * w_of_inv_e())
}

/// `e W(1/e)`, the reciprocal of [`psi_max`] (about 0.757).
pub fn psi_max_recip() -> f64 {
    E * w_of_inv_e()
}

/// `psi(eps) = eps^(1/(1+eps))`, evaluated as `exp(ln eps / (1+eps))`.
#[inline]
pub fn psi(eps: Epsilon) -> f64 {
    ln_psi(eps.get()).exp()
}

#[inline]
pub(crate) fn ln_psi(eps: f64) -> f64 {
    eps.ln() / (1.0 + eps)
}

/// Maximum of `ln psi` over the closed interval `[lo, hi]` (`hi` may be infinite).
pub(crate) fn max_ln_psi_on(lo: f64, hi: f64) -> f64 {
    let peak = psi_argmax();
    if hi <= peak {
        ln_psi(hi)
    } else if lo >= peak {
        ln_psi(lo)
    } else {
        w_of_inv_e()
    }
}

/// Minimum of `ln psi` over `[lo, hi]`, `0 < lo <= hi < inf`.
#[cfg(test)]
pub(crate) fn min_ln_psi_on(lo: f64, hi: f64) -> f64 {
    ln_psi(lo).min(ln_psi(hi))
}

/// `r / (r - 1)` for `r > 1`.
pub fn conjugate_exponent(r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 1.0) {
        return Err(domain(format!("conjugate exponent requires r > 1, got {r}")));
    }
    Ok(r / (r - 1.0))
}

/// Hölder conjugate on `[1, inf]`, mapping `1` to `inf` and `inf` to `1`.
pub fn holder_conjugate(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(domain(format!("Hölder conjugate requires p >= 1, got {p}")));
    }
    if p == 1.0 {
        Ok(f64::INFINITY)
    } else if p.is_infinite() {
        Ok(1.0)
    } else {
        conjugate_exponent(p)
    }
}

/// `c(eps0) = psi_max * eps0^(-1/(1+eps0)) = psi_max / psi(eps0)`, always `>= 1`.
pub fn c_eps0(eps0: Epsilon) -> f64 {
    (w_of_inv_e() - ln_psi(eps0.get())).exp()
}

/// Location of the maximum of `(ln eps + kappa)/(1 + eps)` over `eps > 0`.
///
/// The stationarity condition `1 + 1/eps = ln eps + kappa` gives
/// `eps = 1/W(e^(kappa-1))`.
pub(crate) fn shifted_ln_psi_argmax(kappa: f64) -> f64 {
    1.0 / lambert_w0_of_exp(kappa - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit reference values (mpmath, dps=50).
    const W_INV_E: f64 = 0.278_464_542_761_073_795_109_358_739_022_980_155_439_477_488_619_75;
    const PSI_ARGMAX: f64 = 3.591_121_476_668_622_136_649_222_925_741_634_842_103_075_401_592_8;
    const PSI_MAX: f64 = 1.321_099_762_015_617_456_962_355_870_878_829_561_623_557_500_156_4;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        let w = lambert_w0(1.0 / E).unwrap();
        assert!((w - W_INV_E).abs() < 1e-15);
        assert!(((1.0 / w) - 3.59).abs() < 0.01);
        assert!((1.0 / (E * w) - 1.32).abs() < 0.01);
    }

    #[test]
    fn lambert_rejects_bad_input() {
        assert!(lambert_w0(-1e-3).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
        assert!(lambert_w0(f64::INFINITY).is_err());
    }

    #[test]
    fn lambert_residual_over_wide_range() {
        let mut x = 1e-300;
        let mut prev = 0.0;
        while x < 1e300 {
            let w = lambert_w0(x).unwrap();
            let resid = (w * w.exp() - x).abs();
            if w < 700.0 {
                assert!(resid <= 1e-12 * x.max(1.0), "x={x} w={w} resid={resid}");
            }
            assert!(w >= prev);
            prev = w;
            x *= 3.7;
        }
    }

    #[test]
    fn lambert_of_exp_matches_direct() {
        for y in [-20.0, -1.0, 0.0, 0.5, 3.0, 40.0, 400.0] {
            let a = lambert_w0_of_exp(y);
            let b = lambert_w0(f64::exp(y)).unwrap();
            assert!((a - b).abs() <= 1e-13 * b.max(1e-300), "y={y}");
        }
        let w = lambert_w0_of_exp(1e4);
        assert!((w + w.ln() - 1e4).abs() < 1e-9);
    }

    #[test]
    fn constants_match_reference() {
        assert!((psi_argmax() - PSI_ARGMAX).abs() <= 1e-12 * PSI_ARGMAX);
        assert!((psi_max() - PSI_MAX).abs() <= 1e-12 * PSI_MAX);
        assert!((psi_max() * psi_max_recip() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(eps(1.0)), 1.0);
        assert!((psi(eps(PSI_ARGMAX)) - PSI_MAX).abs() < 1e-14);
        // 4^(1/5) = 1.3195079107728942593740019712... (mpmath)
        assert!((psi(eps(4.0)) - 1.319_507_910_772_894_3).abs() < 1e-14);
    }

    #[test]
    fn psi_is_unimodal() {
        let peak = psi_argmax();
        let mut prev = psi(eps(1e-6));
        let mut e = 1e-6;
        while e < 1e4 {
            let next_e = e * 1.01;
            let v = psi(eps(next_e));
            if next_e < peak {
                assert!(v > prev, "not increasing at {next_e}");
            } else if e > peak {
                assert!(v < prev, "not decreasing at {next_e}");
            }
            prev = v;
            e = next_e;
        }
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert!((conjugate_exponent(4.0 / 3.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(conjugate_exponent(1.0 * (1.0 + 1.0)).unwrap(), 2.0);
        assert!(conjugate_exponent(1.0).is_err());
        assert!(conjugate_exponent(0.5).is_err());
        assert_eq!(holder_conjugate(1.0).unwrap(), f64::INFINITY);
        assert_eq!(holder_conjugate(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn c_eps0_examples() {
        assert!((c_eps0(eps(PSI_ARGMAX)) - 1.0).abs() < 1e-14);
        assert!((c_eps0(eps(1.0)) - PSI_MAX).abs() < 1e-14);
        // mpmath: 126.22158636531370609383601237...
        assert!((c_eps0(eps(0.01)) - 126.221_586_365_313_7).abs() < 1e-10);
    }

    #[test]
    fn shifted_argmax_reduces_to_psi_argmax() {
        assert!((shifted_ln_psi_argmax(0.0) - psi_argmax()).abs() < 1e-13);
        // kappa = ln 2 is the {1,1} grand objective; mpmath: 2.1595682831457235703
        assert!((shifted_ln_psi_argmax(2f64.ln()) - 2.159_568_283_145_723_6).abs() < 1e-13);
    }

    #[test]
    fn interval_extrema_of_ln_psi() {
        let p = psi_argmax();
        assert_eq!(max_ln_psi_on(0.5, 1.0), ln_psi(1.0));
        assert_eq!(max_ln_psi_on(5.0, 10.0), ln_psi(5.0));
        assert!((max_ln_psi_on(1.0, 10.0) - ln_psi(p)).abs() < 1e-15);
        assert_eq!(max_ln_psi_on(10.0, f64::INFINITY), ln_psi(10.0));
        assert_eq!(min_ln_psi_on(1.0, 10.0), ln_psi(1.0).min(ln_psi(10.0)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lambert_residual(x in 0.0f64..1e6) {
                let w = lambert_w0(x).unwrap();
                prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.max(1.0));
            }

            #[test]
            fn c_eps0_at_least_one(e in 1e-6f64..1e6) {
                let c = c_eps0(Epsilon::new(e).unwrap());
                prop_assert!(c >= 1.0 - 1e-15);
                if (e - psi_argmax()).abs() > 1e-3 {
                    prop_assert!(c > 1.0);
                }
            }

            #[test]
            fn conjugate_is_involution(r in 1.0001f64..1e6) {
                let back = conjugate_exponent(conjugate_exponent(r).unwrap()).unwrap();
                prop_assert!((back - r).abs() <= 4e-16 * r * r.max(1.0 / (r - 1.0)));
            }
        }
    }
}

use serde::{Deserialize, Serialize};

/// Enclosure `[lower, upper]` of a nonnegative quantity. `upper` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    lower: f64,
    #[serde(with = "infinite_as_null")]
    upper: f64,
}

impl NormBracket {
    /// Panics if the bounds are out of order or `lower` is not finite.
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(lower.is_finite() && lower >= 0.0, "bracket lower bound must be finite and >= 0");
        assert!(upper >= lower, "bracket bounds out of order: [{lower}, {upper}]");
        Self { lower, upper }
    }

    /// Like [`NormBracket::new`], absorbing rounding-level inversions.
    pub(crate) fn new_clamped(lower: f64, upper: f64) -> Self {
        let lower = if lower.is_finite() { lower.max(0.0) } else { 0.0 };
        let upper = if upper.is_nan() { f64::INFINITY } else { upper.max(lower) };
        Self { lower, upper }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, value)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn mid(&self) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper)
        } else {
            self.lower
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        let k = k.abs();
        Self::new_clamped(self.lower * k, if k == 0.0 { 0.0 } else { self.upper * k })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new_clamped(self.lower + other.lower, self.upper + other.upper)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let upper = if self.upper == 0.0 || other.upper == 0.0 {
            0.0
        } else {
            self.upper * other.upper
        };
        Self::new_clamped(self.lower * other.lower, upper)
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = NormBracket::new(1.0, 2.0);
        let b = NormBracket::new(0.5, f64::INFINITY);
        assert_eq!(a.add(&b).upper(), f64::INFINITY);
        assert_eq!(a.mul(&NormBracket::exact(0.0)).upper(), 0.0);
        assert_eq!(a.scale(-2.0), NormBracket::new(2.0, 4.0));
        assert!(a.contains(1.5) && !a.contains(2.5));
    }

    #[test]
    #[should_panic]
    fn inverted_bounds_panic() {
        let _ = NormBracket::new(2.0, 1.0);
    }

    #[test]
    fn infinite_upper_serializes_as_null() {
        let b = NormBracket::new(1.0, f64::INFINITY);
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"lower":1.0,"upper":null}"#);
        let back: NormBracket = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }
}

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A value in `]-inf, +inf]`.
///
/// Potentials and divergences are proper, so `-inf` never occurs. NaN is
/// rejected at construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const INFINITY: ExtendedReal = ExtendedReal(f64::INFINITY);
    pub const ZERO: ExtendedReal = ExtendedReal(0.0);

    /// Wraps a finite value or `+inf`. Panics on NaN or `-inf`.
    pub fn new(v: f64) -> Self {
        assert!(!v.is_nan() && v != f64::NEG_INFINITY, "ExtendedReal must lie in ]-inf, +inf], got {v}");
        ExtendedReal(v)
    }

    /// NaN and `-inf` collapse to `+inf`; used where a formula leaves the
    /// effective domain numerically.
    pub fn saturating(v: f64) -> Self {
        if v.is_nan() || v == f64::NEG_INFINITY {
            ExtendedReal::INFINITY
        } else {
            ExtendedReal(v)
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        !self.0.is_finite()
    }

    pub fn finite(self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }

    /// Raw `f64`, `+inf` included.
    pub fn raw(self) -> f64 {
        self.0
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::new(v)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            f.write_str("inf")
        }
    }
}

// Finite values serialize as numbers, +inf as the string "inf".
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = ExtendedReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtendedReal, E> {
                if v.is_nan() || v == f64::NEG_INFINITY {
                    return Err(E::custom("value outside ]-inf, +inf]"));
                }
                Ok(ExtendedReal(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtendedReal, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(ExtendedReal::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_round_trip() {
        for v in [ExtendedReal::new(-2.5), ExtendedReal::ZERO, ExtendedReal::INFINITY] {
            let s = serde_json::to_string(&v).unwrap();
            let back: ExtendedReal = serde_json::from_str(&s).unwrap();
            assert_eq!(back, v);
        }
        assert_eq!(serde_json::to_string(&ExtendedReal::INFINITY).unwrap(), "\"inf\"");
    }

    #[test]
    #[should_panic]
    fn rejects_negative_infinity() {
        let _ = ExtendedReal::new(f64::NEG_INFINITY);
    }

    #[test]
    fn saturating_maps_nan_to_infinity() {
        assert!(ExtendedReal::saturating(f64::NAN).is_infinite());
        assert_eq!(ExtendedReal::saturating(1.0).raw(), 1.0);
    }
}

//! Kind-tagged 64-bit scalar values carried by tokens.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Int,
    Float,
}

impl ValueType {
    pub fn zero(self) -> Scalar {
        match self {
            ValueType::Int => Scalar::Int(0),
            ValueType::Float => Scalar::Float(0.0),
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            ValueType::Int => "i64",
            ValueType::Float => "f64",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Int => "int",
            ValueType::Float => "float",
        })
    }
}

/// A token payload. Integers wrap on overflow; floats are IEEE doubles.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn ty(self) -> ValueType {
        match self {
            Scalar::Int(_) => ValueType::Int,
            Scalar::Float(_) => ValueType::Float,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Scalar::Int(v) => v,
            Scalar::Float(v) => v as i64,
        }
    }

    pub fn as_float(self) -> f64 {
        match self {
            Scalar::Int(v) => v as f64,
            Scalar::Float(v) => v,
        }
    }

    pub fn truthy(self) -> bool {
        match self {
            Scalar::Int(v) => v != 0,
            Scalar::Float(v) => v != 0.0,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        Scalar::Int(b as i64)
    }

    /// Converts to `ty`, truncating floats toward zero.
    pub fn cast(self, ty: ValueType) -> Scalar {
        match ty {
            ValueType::Int => Scalar::Int(self.as_int()),
            ValueType::Float => Scalar::Float(self.as_float()),
        }
    }

    /// Bitwise identity, so `NaN == NaN` and `0.0 != -0.0`.
    pub fn bit_eq(self, other: Scalar) -> bool {
        match (self, other) {
            (Scalar::Int(a), Scalar::Int(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }

    /// Parses a value of the given type from text.
    pub fn parse(text: &str, ty: ValueType) -> Option<Scalar> {
        let text = text.trim();
        match ty {
            ValueType::Int => text.parse::<i64>().ok().map(Scalar::Int),
            ValueType::Float => text.parse::<f64>().ok().map(Scalar::Float),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.bit_eq(*other)
    }
}

impl Eq for Scalar {}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Int(v) => {
                0u8.hash(state);
                v.hash(state);
            }
            Scalar::Float(v) => {
                1u8.hash(state);
                v.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            // `{:?}` keeps a trailing `.0` and round-trips exactly
            Scalar::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips() {
        for v in [0.1, -3.0, 1e300, f64::MIN_POSITIVE] {
            let s = Scalar::Float(v).to_string();
            assert_eq!(Scalar::parse(&s, ValueType::Float), Some(Scalar::Float(v)));
        }
        assert_eq!(Scalar::Int(-7).to_string(), "-7");
    }

    #[test]
    fn bit_equality() {
        assert_eq!(Scalar::Float(f64::NAN), Scalar::Float(f64::NAN));
        assert_ne!(Scalar::Float(0.0), Scalar::Float(-0.0));
        assert_ne!(Scalar::Int(1), Scalar::Float(1.0));
    }
}

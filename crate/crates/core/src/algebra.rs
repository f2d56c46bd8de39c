//! Value domain and the commutative semi-rings that define how factor values
//! combine (`⊙`) and how labelings are accumulated (`⊕`).
//!
//! | semi-ring | domain        | combine | one | accumulate | zero |
//! |-----------|---------------|---------|-----|------------|------|
//! | `MinSum`  | ℝ ∪ {+∞}      | `+`     | 0   | `min`      | +∞   |
//! | `SumProd` | ℝ⁺            | `·`     | 1   | `+`        | 0    |
//! | `MaxProd` | ℝ⁺            | `·`     | 1   | `max`      | 0    |
//! | `OrAnd`   | {0, 1}        | `∧`     | 1   | `∨`        | 0    |
//!
//! Values are `f64` throughout. NaN is never a legal value.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Element of the value domain Ω.
pub type Value = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semiring {
    MinSum,
    SumProd,
    MaxProd,
    OrAnd,
}

impl Semiring {
    pub const ALL: [Semiring; 4] = [
        Semiring::MinSum,
        Semiring::SumProd,
        Semiring::MaxProd,
        Semiring::OrAnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Semiring::MinSum => "minsum",
            Semiring::SumProd => "sumprod",
            Semiring::MaxProd => "maxprod",
            Semiring::OrAnd => "orand",
        }
    }

    /// Identity of `⊙`.
    #[inline]
    pub fn one(self) -> Value {
        match self {
            Semiring::MinSum => 0.0,
            Semiring::SumProd | Semiring::MaxProd | Semiring::OrAnd => 1.0,
        }
    }

    /// Identity of `⊕`.
    #[inline]
    pub fn zero(self) -> Value {
        match self {
            Semiring::MinSum => f64::INFINITY,
            Semiring::SumProd | Semiring::MaxProd | Semiring::OrAnd => 0.0,
        }
    }

    /// `(one, zero)`.
    pub fn identities(self) -> (Value, Value) {
        (self.one(), self.zero())
    }

    /// True when `⊕` always returns one of its arguments, so an optimizing
    /// labeling is well defined.
    pub fn accumulate_is_selective(self) -> bool {
        !matches!(self, Semiring::SumProd)
    }

    pub fn is_valid(self, v: Value) -> bool {
        match self {
            Semiring::MinSum => !v.is_nan() && v != f64::NEG_INFINITY,
            Semiring::SumProd | Semiring::MaxProd => v.is_finite() && v >= 0.0,
            Semiring::OrAnd => v == 0.0 || v == 1.0,
        }
    }

    pub fn validate(self, v: Value) -> Result<Value> {
        if self.is_valid(v) {
            Ok(v)
        } else {
            Err(Error::InvalidValue {
                value: v,
                semiring: self,
            })
        }
    }

    /// `a ⊙ b` with domain checks on inputs and result.
    pub fn combine(self, a: Value, b: Value) -> Result<Value> {
        self.validate(a)?;
        self.validate(b)?;
        self.validate(self.mul(a, b))
    }

    /// `a ⊕ b` with domain checks on inputs and result.
    pub fn accumulate(self, a: Value, b: Value) -> Result<Value> {
        self.validate(a)?;
        self.validate(b)?;
        self.validate(self.add(a, b))
    }

    /// Unchecked `⊙` for inner loops over already validated values.
    #[inline]
    pub fn mul(self, a: Value, b: Value) -> Value {
        match self {
            Semiring::MinSum => a + b,
            Semiring::SumProd | Semiring::MaxProd => a * b,
            Semiring::OrAnd => a.min(b),
        }
    }

    /// Unchecked `⊕` for inner loops over already validated values.
    #[inline]
    pub fn add(self, a: Value, b: Value) -> Value {
        match self {
            Semiring::MinSum => a.min(b),
            Semiring::SumProd => a + b,
            Semiring::MaxProd | Semiring::OrAnd => a.max(b),
        }
    }

    /// Whether `a` is strictly preferred over `b` by a selective `⊕`.
    /// Always false for `SumProd`.
    #[inline]
    pub fn better(self, a: Value, b: Value) -> bool {
        match self {
            Semiring::MinSum => a < b,
            Semiring::SumProd => false,
            Semiring::MaxProd | Semiring::OrAnd => a > b,
        }
    }

    /// Index of the `⊕`-optimal entry, smallest index on ties. For `SumProd`
    /// the largest entry is taken.
    pub fn arg_best(self, values: &[Value]) -> usize {
        let prefer = |a: Value, b: Value| match self {
            Semiring::MinSum => a < b,
            _ => a > b,
        };
        let mut best = 0;
        for (i, &v) in values.iter().enumerate().skip(1) {
            if prefer(v, values[best]) {
                best = i;
            }
        }
        best
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minsum" => Ok(Semiring::MinSum),
            "sumprod" => Ok(Semiring::SumProd),
            "maxprod" => Ok(Semiring::MaxProd),
            "orand" => Ok(Semiring::OrAnd),
            other => Err(Error::InvalidArgument(format!(
                "unknown semi-ring `{other}` (expected minsum, sumprod, maxprod or orand)"
            ))),
        }
    }
}

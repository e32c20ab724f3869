//! Extended reals with an explicit `Undefined` state.
//!
//! Differences of two quantities that may both be infinite cannot be assigned
//! a meaningful value; `Undefined` records that collision and propagates
//! through all arithmetic instead of silently producing a NaN.

use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Values below this threshold are treated as -inf (log underflow guard).
pub const NEG_INF_SENTINEL: f64 = -1e30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
    Undefined,
}

impl ExtReal {
    /// Classifies a raw floating sample: NaN becomes `Undefined`, infinities
    /// and anything below the sentinel become the corresponding infinite state.
    pub fn from_sample(x: f64) -> Self {
        if x.is_nan() {
            ExtReal::Undefined
        } else if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY || x <= NEG_INF_SENTINEL {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, ExtReal::NegInf)
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, ExtReal::Undefined)
    }

    /// Multiplication by a real scalar. `0 * (+-inf) = 0` by the measure-theory
    /// convention; negative scalars flip the infinities.
    pub fn scale(self, lambda: f64) -> Self {
        match self {
            ExtReal::Undefined => ExtReal::Undefined,
            ExtReal::Finite(x) => ExtReal::Finite(lambda * x),
            ExtReal::PosInf => {
                if lambda > 0.0 {
                    ExtReal::PosInf
                } else if lambda < 0.0 {
                    ExtReal::NegInf
                } else {
                    ExtReal::Finite(0.0)
                }
            }
            ExtReal::NegInf => {
                if lambda > 0.0 {
                    ExtReal::NegInf
                } else if lambda < 0.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::Finite(0.0)
                }
            }
        }
    }

    /// Order for minimization: NegInf < Finite < PosInf. `Undefined` never wins.
    pub fn better_minimum_than(self, other: ExtReal) -> bool {
        fn rank(v: ExtReal) -> (u8, f64) {
            match v {
                ExtReal::NegInf => (0, 0.0),
                ExtReal::Finite(x) => (1, x),
                ExtReal::PosInf => (2, 0.0),
                ExtReal::Undefined => (3, 0.0),
            }
        }
        let (ra, va) = rank(self);
        let (rb, vb) = rank(other);
        if self.is_undefined() {
            return false;
        }
        ra < rb || (ra == rb && va < vb)
    }

    /// Collapses to a plain objective value for derivative-free search.
    pub fn to_objective(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::NegInf => -1e18,
            ExtReal::PosInf | ExtReal::Undefined => 1e18,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, rhs) {
            (Undefined, _) | (_, Undefined) => Undefined,
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => Undefined,
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Undefined => ExtReal::Undefined,
        }
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "+inf"),
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Undefined => write!(f, "undefined"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtReal::*;

    const STATES: [ExtReal; 4] = [Finite(2.5), PosInf, NegInf, Undefined];

    #[test]
    fn addition_table_is_exact() {
        // Exhaustive 4x4 table.
        let expect = |a: ExtReal, b: ExtReal| -> ExtReal {
            match (a, b) {
                (Undefined, _) | (_, Undefined) => Undefined,
                (PosInf, NegInf) | (NegInf, PosInf) => Undefined,
                (PosInf, _) | (_, PosInf) => PosInf,
                (NegInf, _) | (_, NegInf) => NegInf,
                (Finite(x), Finite(y)) => Finite(x + y),
            }
        };
        for &a in &STATES {
            for &b in &STATES {
                assert_eq!(a + b, expect(a, b), "{a} + {b}");
            }
        }
    }

    #[test]
    fn subtraction_matches_negated_addition() {
        for &a in &STATES {
            for &b in &STATES {
                assert_eq!(a - b, a + (-b));
            }
        }
        assert_eq!(PosInf - PosInf, Undefined);
        assert_eq!(NegInf - NegInf, Undefined);
        assert_eq!(Finite(1.0) - NegInf, PosInf);
    }

    #[test]
    fn undefined_propagates_through_everything() {
        for &a in &STATES {
            assert_eq!(Undefined + a, Undefined);
            assert_eq!(a + Undefined, Undefined);
            assert_eq!(Undefined - a, Undefined);
        }
        assert_eq!(Undefined.scale(3.0), Undefined);
        assert_eq!(-Undefined, Undefined);
    }

    #[test]
    fn sentinel_classification() {
        assert_eq!(ExtReal::from_sample(-2e30), NegInf);
        assert_eq!(ExtReal::from_sample(f64::NEG_INFINITY), NegInf);
        assert_eq!(ExtReal::from_sample(f64::NAN), Undefined);
        assert_eq!(ExtReal::from_sample(-1e29), Finite(-1e29));
    }

    #[test]
    fn minimization_order() {
        assert!(NegInf.better_minimum_than(Finite(-1e9)));
        assert!(Finite(-1.0).better_minimum_than(Finite(0.0)));
        assert!(Finite(1.0).better_minimum_than(PosInf));
        assert!(!Undefined.better_minimum_than(PosInf));
        assert!(!Undefined.better_minimum_than(Undefined));
    }

    #[test]
    fn scale_conventions() {
        assert_eq!(PosInf.scale(0.0), Finite(0.0));
        assert_eq!(NegInf.scale(-2.0), PosInf);
        assert_eq!(Finite(3.0).scale(-1.5), Finite(-4.5));
    }
}

//! Completed idempotent semirings and their scalar arithmetic.
//!
//! Every scalar lives in one of three completed semirings:
//!
//! | name            | carrier            | ⊕   | ⊙   | 𝟘    | 𝟙   | ⊤    |
//! |-----------------|--------------------|-----|-----|------|-----|------|
//! | `rmax-complete` | ℝ ∪ {−∞, +∞}       | max | +   | −∞   | 0   | +∞   |
//! | `zmax-complete` | ℤ ∪ {−∞, +∞}       | max | +   | −∞   | 0   | +∞   |
//! | `boolean`       | {𝟘, 𝟙}             | or  | and | 𝟘    | 𝟙   | 𝟙    |
//!
//! The standard order is `x ≼ y ⇔ x ⊕ y = y`, every bounded set has a
//! supremum (the empty set included: `sup ∅ = 𝟘`, `inf ∅ = ⊤`) and
//! multiplication distributes over arbitrary sups.  Multiplication by the
//! bottom element absorbs the top: `𝟘 ⊙ ⊤ = 𝟘`.
//!
//! Values are carried as `f64` with the infinities as sentinels; the boolean
//! semiring is embedded as `{−∞, 0}`.  NaN is rejected at construction, so
//! comparisons are total on everything the constructors let through.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which completed semiring a scalar belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemiringKind {
    #[serde(rename = "rmax-complete")]
    RmaxComplete,
    #[serde(rename = "zmax-complete")]
    ZmaxComplete,
    #[serde(rename = "boolean")]
    Boolean,
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SemiringKind::RmaxComplete => "rmax-complete",
            SemiringKind::ZmaxComplete => "zmax-complete",
            SemiringKind::Boolean => "boolean",
        };
        f.write_str(name)
    }
}

impl SemiringKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "rmax-complete" => Ok(SemiringKind::RmaxComplete),
            "zmax-complete" => Ok(SemiringKind::ZmaxComplete),
            "boolean" => Ok(SemiringKind::Boolean),
            other => Err(Error::InvalidParameter(format!(
                "unknown semiring `{other}`"
            ))),
        }
    }

    pub fn descriptor(self) -> SemiringDescriptor {
        SemiringDescriptor {
            name: self,
            // Dropping ⊤ from the carrier leaves a semifield in all three
            // cases; the boolean semiring is a semifield outright.
            is_semifield_on_finite_part: true,
        }
    }

    fn top_value(self) -> f64 {
        match self {
            SemiringKind::RmaxComplete | SemiringKind::ZmaxComplete => f64::INFINITY,
            SemiringKind::Boolean => 0.0,
        }
    }
}

/// Runtime description of a scalar domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SemiringDescriptor {
    pub name: SemiringKind,
    pub is_semifield_on_finite_part: bool,
}

impl SemiringDescriptor {
    pub fn zero(&self) -> Scalar {
        Scalar::zero(self.name)
    }

    pub fn one(&self) -> Scalar {
        Scalar::one(self.name)
    }

    pub fn top(&self) -> Scalar {
        Scalar::top(self.name)
    }
}

/// An element of one of the completed semirings.
///
/// The semiring tag travels with the value; binary operations on scalars
/// from different semirings are domain errors, never coercions.
#[derive(Clone, Copy, PartialEq)]
pub struct Scalar {
    value: f64,
    kind: SemiringKind,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self, self.kind)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else if self.value == f64::INFINITY {
            f.write_str("+inf")
        } else if self.value.fract() == 0.0 && self.value.abs() < 1e15 {
            write!(f, "{}", self.value as i64)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

impl Scalar {
    /// Validates `value` against the carrier of `kind`.
    pub fn new(kind: SemiringKind, value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::InvalidScalar {
                kind,
                reason: "NaN is not an element".into(),
            });
        }
        match kind {
            SemiringKind::RmaxComplete => {}
            SemiringKind::ZmaxComplete => {
                if value.is_finite() && value.fract() != 0.0 {
                    return Err(Error::InvalidScalar {
                        kind,
                        reason: format!("{value} is not an integer"),
                    });
                }
            }
            SemiringKind::Boolean => {
                if value != f64::NEG_INFINITY && value != 0.0 {
                    return Err(Error::InvalidScalar {
                        kind,
                        reason: format!("{value} is neither 𝟘 nor 𝟙"),
                    });
                }
            }
        }
        Ok(Scalar { value, kind })
    }

    /// Internal constructor for values produced by the arithmetic below,
    /// which preserves the carrier invariants by case analysis.
    fn raw(kind: SemiringKind, value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Scalar { value, kind }
    }

    /// Shorthand for finite `rmax-complete` values; handy in tests and demos.
    pub fn rmax(value: f64) -> Self {
        Scalar::new(SemiringKind::RmaxComplete, value).expect("finite rmax value")
    }

    pub fn zero(kind: SemiringKind) -> Self {
        Scalar::raw(kind, f64::NEG_INFINITY)
    }

    pub fn one(kind: SemiringKind) -> Self {
        Scalar::raw(kind, 0.0)
    }

    pub fn top(kind: SemiringKind) -> Self {
        Scalar::raw(kind, kind.top_value())
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }

    pub fn is_one(&self) -> bool {
        self.value == 0.0
    }

    pub fn is_top(&self) -> bool {
        self.value == self.kind.top_value()
    }

    /// Multiplicatively invertible elements.  For `rmax`/`zmax` these are the
    /// finite values; for the boolean semiring the unit (its own inverse).
    pub fn is_invertible(&self) -> bool {
        match self.kind {
            SemiringKind::RmaxComplete | SemiringKind::ZmaxComplete => self.value.is_finite(),
            SemiringKind::Boolean => !self.is_zero(),
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_invertible() {
            Some(Scalar::raw(self.kind, -self.value))
        } else {
            None
        }
    }

    fn check_kind(&self, rhs: &Scalar) -> Result<()> {
        if self.kind == rhs.kind {
            Ok(())
        } else {
            Err(Error::SemiringMismatch {
                left: self.kind,
                right: rhs.kind,
            })
        }
    }

    /// Idempotent addition `x ⊕ y = max{x, y}`.
    pub fn oplus(&self, rhs: &Scalar) -> Result<Scalar> {
        self.check_kind(rhs)?;
        Ok(Scalar::raw(self.kind, self.value.max(rhs.value)))
    }

    /// Multiplication `x ⊙ y = x + y`, with `𝟘` absorbing everything
    /// including `⊤`.
    pub fn odot(&self, rhs: &Scalar) -> Result<Scalar> {
        self.check_kind(rhs)?;
        if self.is_zero() || rhs.is_zero() {
            return Ok(Scalar::zero(self.kind));
        }
        Ok(Scalar::raw(self.kind, self.value + rhs.value))
    }

    /// The standard order `x ≼ y ⇔ x ⊕ y = y`.
    pub fn leq(&self, rhs: &Scalar) -> Result<bool> {
        self.check_kind(rhs)?;
        Ok(self.value <= rhs.value)
    }

    /// Residual `a \ b = sup{ c : a ⊙ c ≼ b }`: the largest solution of the
    /// one-sided inequality, adjoint to `⊙` (Galois: `a⊙c ≼ b ⇔ c ≼ a\b`).
    pub fn residual(&self, rhs: &Scalar) -> Result<Scalar> {
        self.check_kind(rhs)?;
        let kind = self.kind;
        if self.is_zero() {
            return Ok(Scalar::top(kind));
        }
        if self.is_top() {
            return Ok(if rhs.is_top() {
                Scalar::top(kind)
            } else {
                Scalar::zero(kind)
            });
        }
        // self is finite here, so the difference never produces NaN.
        Ok(Scalar::raw(kind, rhs.value - self.value))
    }
}

/// `⊕` over a finite family; the empty sup is `𝟘`.
pub fn sup_set(kind: SemiringKind, items: &[Scalar]) -> Result<Scalar> {
    let mut acc = Scalar::zero(kind);
    for s in items {
        acc = acc.oplus(s)?;
    }
    Ok(acc)
}

/// `∧` over a finite family; the empty inf is `⊤` (the semirings here are
/// all completed, so a top element always exists).
pub fn inf_set(kind: SemiringKind, items: &[Scalar]) -> Result<Scalar> {
    let mut acc = Scalar::top(kind);
    for s in items {
        acc.check_kind(s)?;
        if s.value < acc.value {
            acc = *s;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> Scalar {
        Scalar::rmax(v)
    }

    #[test]
    fn oplus_is_max() {
        assert_eq!(r(3.0).oplus(&r(5.0)).unwrap(), r(5.0));
        let x = r(-2.0);
        assert_eq!(x.oplus(&Scalar::zero(x.kind())).unwrap(), x);
        assert_eq!(x.oplus(&x).unwrap(), x);
    }

    #[test]
    fn odot_is_addition_with_absorbing_zero() {
        assert_eq!(r(3.0).odot(&r(5.0)).unwrap(), r(8.0));
        let kind = SemiringKind::RmaxComplete;
        let zero = Scalar::zero(kind);
        let top = Scalar::top(kind);
        assert_eq!(zero.odot(&top).unwrap(), zero);
        assert_eq!(top.odot(&zero).unwrap(), zero);
        assert_eq!(Scalar::one(kind).odot(&r(7.0)).unwrap(), r(7.0));
        assert_eq!(top.odot(&r(1.0)).unwrap(), top);
    }

    #[test]
    fn order_and_bounds() {
        let kind = SemiringKind::RmaxComplete;
        assert!(Scalar::zero(kind).leq(&r(-100.0)).unwrap());
        assert!(r(4.0).leq(&Scalar::top(kind)).unwrap());
        assert!(!r(4.0).leq(&r(3.0)).unwrap());
    }

    #[test]
    fn empty_sup_and_inf() {
        let kind = SemiringKind::RmaxComplete;
        assert_eq!(sup_set(kind, &[]).unwrap(), Scalar::zero(kind));
        assert_eq!(inf_set(kind, &[]).unwrap(), Scalar::top(kind));
        assert_eq!(sup_set(kind, &[r(1.0), r(-3.0)]).unwrap(), r(1.0));
        assert_eq!(inf_set(kind, &[r(1.0), r(-3.0)]).unwrap(), r(-3.0));
    }

    #[test]
    fn residual_cases() {
        let kind = SemiringKind::RmaxComplete;
        let zero = Scalar::zero(kind);
        let top = Scalar::top(kind);
        assert_eq!(r(2.0).residual(&r(5.0)).unwrap(), r(3.0));
        assert_eq!(zero.residual(&r(5.0)).unwrap(), top);
        assert_eq!(zero.residual(&zero).unwrap(), top);
        assert_eq!(top.residual(&r(5.0)).unwrap(), zero);
        assert_eq!(top.residual(&top).unwrap(), top);
        assert_eq!(r(2.0).residual(&top).unwrap(), top);
        assert_eq!(r(2.0).residual(&zero).unwrap(), zero);
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let a = Scalar::one(SemiringKind::RmaxComplete);
        let b = Scalar::one(SemiringKind::Boolean);
        assert!(matches!(
            a.oplus(&b),
            Err(Error::SemiringMismatch { .. })
        ));
        assert!(matches!(a.odot(&b), Err(Error::SemiringMismatch { .. })));
        assert!(matches!(a.leq(&b), Err(Error::SemiringMismatch { .. })));
        assert!(matches!(
            a.residual(&b),
            Err(Error::SemiringMismatch { .. })
        ));
    }

    #[test]
    fn carrier_validation() {
        assert!(Scalar::new(SemiringKind::RmaxComplete, f64::NAN).is_err());
        assert!(Scalar::new(SemiringKind::ZmaxComplete, 1.5).is_err());
        assert!(Scalar::new(SemiringKind::ZmaxComplete, -4.0).is_ok());
        assert!(Scalar::new(SemiringKind::Boolean, 1.0).is_err());
        assert!(Scalar::new(SemiringKind::Boolean, 0.0).is_ok());
        assert!(Scalar::new(SemiringKind::Boolean, f64::NEG_INFINITY).is_ok());
    }

    #[test]
    fn boolean_top_is_the_unit() {
        let kind = SemiringKind::Boolean;
        assert_eq!(Scalar::top(kind), Scalar::one(kind));
        let t = Scalar::one(kind);
        let f = Scalar::zero(kind);
        assert_eq!(t.odot(&t).unwrap(), t);
        assert_eq!(t.odot(&f).unwrap(), f);
        assert_eq!(f.oplus(&t).unwrap(), t);
        // residuals stay inside the carrier
        assert_eq!(f.residual(&f).unwrap(), t);
        assert_eq!(t.residual(&f).unwrap(), f);
        assert_eq!(t.residual(&t).unwrap(), t);
    }

    #[test]
    fn descriptor_provides_constants() {
        for kind in [
            SemiringKind::RmaxComplete,
            SemiringKind::ZmaxComplete,
            SemiringKind::Boolean,
        ] {
            let d = kind.descriptor();
            assert!(d.zero().is_zero());
            assert!(d.one().is_one());
            assert!(d.zero().leq(&d.top()).unwrap());
            assert!(d.one().leq(&d.top()).unwrap());
        }
    }

    #[test]
    fn galois_connection_spot_checks() {
        let kind = SemiringKind::RmaxComplete;
        let grid: Vec<Scalar> = [-3.0, -1.0, 0.0, 2.0]
            .iter()
            .map(|&v| r(v))
            .chain([Scalar::zero(kind), Scalar::top(kind)])
            .collect();
        for a in &grid {
            for b in &grid {
                let res = a.residual(b).unwrap();
                for c in &grid {
                    let lhs = a.odot(c).unwrap().leq(b).unwrap();
                    let rhs = c.leq(&res).unwrap();
                    assert_eq!(lhs, rhs, "a={a} b={b} c={c}");
                }
            }
        }
    }
}

//! Scalar abstractions.
//!
//! Operator math is written against [`Real`], which both `f32` and `f64`
//! satisfy. The linear-programming kernel behind the coherence auditor is
//! written against [`LpScalar`], which `f64` and exact [`BigRational`]
//! satisfy.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Real scalar for complex-operator computations.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display {
    /// Default tolerance for invariant checks at this precision.
    fn tolerance() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

/// Ordered field used by the simplex kernel.
pub trait LpScalar: Clone + Debug + PartialOrd + Signed + FromPrimitive {
    /// Magnitudes at or below this are treated as zero when choosing pivots.
    fn pivot_epsilon() -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Interpret a double as the decimal it prints as (`0.3` becomes `3/10`
    /// for exact scalars).
    fn from_decimal(x: f64) -> Option<Self>;

    #[inline]
    fn is_pos(&self) -> bool {
        *self > Self::pivot_epsilon()
    }

    #[inline]
    fn is_neg(&self) -> bool {
        *self < -Self::pivot_epsilon()
    }
}

impl LpScalar for f64 {
    fn pivot_epsilon() -> Self {
        1e-12
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn from_decimal(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

impl LpScalar for BigRational {
    fn pivot_epsilon() -> Self {
        BigRational::zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_decimal(x: f64) -> Option<Self> {
        rational_from_decimal(x)
    }
}

/// Exact rational for the shortest decimal string that round-trips to `x`.
pub fn rational_from_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // `{:e}` is the shortest round-trip form: "-1.2345e-7"
    let s = format!("{x:e}");
    let (mantissa, exp) = s.split_once('e')?;
    let exp: i64 = exp.parse().ok()?;
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rationals_are_exact() {
        let r = rational_from_decimal(0.3).unwrap();
        assert_eq!(r, BigRational::new(3.into(), 10.into()));
        let a = rational_from_decimal(0.3).unwrap() + rational_from_decimal(0.4).unwrap();
        assert_eq!(a, rational_from_decimal(0.7).unwrap());
        assert_eq!(
            rational_from_decimal(-1.25e-7).unwrap(),
            BigRational::new((-125).into(), 1_000_000_000u64.into())
        );
        assert_eq!(rational_from_decimal(1e21).unwrap().to_f64(), Some(1e21));
        assert_eq!(rational_from_decimal(0.0).unwrap(), BigRational::zero());
        assert!(rational_from_decimal(f64::NAN).is_none());
    }

    #[test]
    fn decimal_round_trip_random() {
        for x in [0.1234567890123, 1.0 / 3.0, 7e-300, 123456.789] {
            assert_eq!(rational_from_decimal(x).unwrap().to_f64().unwrap(), x);
        }
    }
}

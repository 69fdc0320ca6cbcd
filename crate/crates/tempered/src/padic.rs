//! Exact p-adic valuation and absolute value on arbitrary-precision rationals.
//!
//! Everything here is exact: no floats, no rounding. The value group of the
//! absolute value is the discrete group of integer powers of p, which is what
//! makes the norm-reduction loops elsewhere in the crate terminate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Exact rational scalar. `BigRational` keeps the fraction reduced with a
/// positive denominator, which is exactly the invariant we need.
pub type Scalar = BigRational;

/// A verified prime, used as the residue characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::SpecMismatch(format!("{p} is not prime")))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation; infinite exactly for the zero scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        use Valuation::*;
        match (self, other) {
            (Infinite, Infinite) => Ordering::Equal,
            (Infinite, Finite(_)) => Ordering::Greater,
            (Finite(_), Infinite) => Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// Multiplicity of `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: Prime) -> i64 {
    assert!(!n.is_zero(), "valuation of zero integer");
    let p = p.to_bigint();
    let mut n = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if r.is_zero() {
            v += 1;
            n = q;
        } else {
            return v;
        }
    }
}

/// v_p on rationals: v_p(num) - v_p(den), infinite at zero.
pub fn valuation(x: &Scalar, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// Exact power p^e as a rational, for any integer exponent.
pub fn p_pow(p: Prime, e: i64) -> BigRational {
    let base = p.to_bigint();
    if e >= 0 {
        BigRational::from_integer(base.pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), base.pow((-e) as u32))
    }
}

/// |x|_p = p^(-v_p(x)). Zero maps to zero.
pub fn abs_value(x: &Scalar, p: Prime) -> NormValue {
    match valuation(x, p) {
        Valuation::Infinite => NormValue::zero(),
        Valuation::Finite(v) => NormValue::new(p_pow(p, -v)),
    }
}

/// True when |x|_p = 1.
pub fn is_unit(x: &Scalar, p: Prime) -> bool {
    valuation(x, p) == Valuation::Finite(0)
}

/// True when |x|_p <= 1 (x is p-integral).
pub fn is_integral(x: &Scalar, p: Prime) -> bool {
    valuation(x, p) >= Valuation::Finite(0)
}

/// A nonnegative exact rational norm value. Comparison, max and product are
/// all exact; there is deliberately no addition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NormValue(BigRational);

impl NormValue {
    pub fn new(r: BigRational) -> NormValue {
        assert!(!r.is_negative(), "norm values are nonnegative");
        NormValue(r)
    }

    pub fn zero() -> NormValue {
        NormValue(BigRational::zero())
    }

    pub fn one() -> NormValue {
        NormValue(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn max(self, other: NormValue) -> NormValue {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }
}

impl Mul for &NormValue {
    type Output = NormValue;
    fn mul(self, rhs: &NormValue) -> NormValue {
        NormValue(&self.0 * &rhs.0)
    }
}

impl Mul for NormValue {
    type Output = NormValue;
    fn mul(self, rhs: NormValue) -> NormValue {
        NormValue(self.0 * rhs.0)
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn prime_check() {
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(97).is_ok());
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(91).is_err()); // 7 * 13
    }

    #[test]
    fn valuation_examples() {
        let p2 = Prime::new(2).unwrap();
        let p5 = Prime::new(5).unwrap();
        // 20 = 2^2 * 5
        assert_eq!(valuation(&q(3, 20), p2), Valuation::Finite(-2));
        assert_eq!(valuation(&q(3, 20), p5), Valuation::Finite(-1));
        assert_eq!(valuation(&Scalar::zero(), p2), Valuation::Infinite);
        assert_eq!(valuation(&q(48, 1), p2), Valuation::Finite(4));
    }

    #[test]
    fn abs_value_examples() {
        let p2 = Prime::new(2).unwrap();
        let p3 = Prime::new(3).unwrap();
        assert_eq!(abs_value(&q(1, 8), p2), NormValue::new(q(8, 1)));
        assert_eq!(abs_value(&q(9, 7), p3), NormValue::new(q(1, 9)));
        assert!(abs_value(&Scalar::zero(), p2).is_zero());
    }

    #[test]
    fn valuation_orders_like_infinity_at_zero() {
        assert!(Valuation::Infinite > Valuation::Finite(1 << 40));
        assert!(Valuation::Finite(-3) < Valuation::Finite(0));
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        // numerator, denominator and an explicit power of the prime so that
        // interesting valuations actually show up
        (-200i64..200, 1i64..200, -6i32..6).prop_map(|(n, d, e)| {
            let base = q(n, d);
            if e >= 0 {
                base * BigRational::from_integer(BigInt::from(2).pow(e as u32))
            } else {
                base / BigRational::from_integer(BigInt::from(2).pow((-e) as u32))
            }
        })
    }

    proptest! {
        #[test]
        fn multiplicative(x in arb_scalar(), y in arb_scalar()) {
            let p = Prime::new(2).unwrap();
            let lhs = abs_value(&(&x * &y), p);
            let rhs = abs_value(&x, p) * abs_value(&y, p);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ultrametric(x in arb_scalar(), y in arb_scalar()) {
            let p = Prime::new(2).unwrap();
            let lhs = abs_value(&(&x + &y), p);
            let rhs = abs_value(&x, p).max(abs_value(&y, p));
            prop_assert!(lhs <= rhs);
        }
    }
}

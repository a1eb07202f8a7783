//! Exact signed arbitrary-precision rational arithmetic.
//!
//! This is the value domain every conversion and encryption step runs in.
//! No operation here ever rounds; precision only enters the picture when a
//! value is rendered back into digits (see [`crate::baseconv`]).

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero cannot be raised to a negative power")]
    ZeroToNegativePower,
    #[error("result magnitude exceeds the digit budget ({digits} > {budget} decimal digits)")]
    BudgetExceeded { digits: u64, budget: u64 },
}

/// Bound on the size of intermediate results, in decimal digits per
/// numerator/denominator. Exceeding it is a clean error instead of an OOM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    max_digits: u64,
}

pub const DEFAULT_BUDGET_DIGITS: u64 = 1_000_000;

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET_DIGITS)
    }
}

impl Budget {
    pub fn new(max_digits: u64) -> Self {
        Budget {
            max_digits: max_digits.max(1),
        }
    }

    pub fn max_digits(&self) -> u64 {
        self.max_digits
    }

    pub fn check(&self, value: &Rational) -> Result<(), NumericError> {
        let digits = decimal_digits(value.numer()).max(decimal_digits(value.denom()));
        if digits > self.max_digits {
            Err(NumericError::BudgetExceeded {
                digits,
                budget: self.max_digits,
            })
        } else {
            Ok(())
        }
    }
}

fn decimal_digits(n: &BigInt) -> u64 {
    // Upper estimate from the bit length; exact counting would mean
    // materializing the decimal expansion of megabit integers.
    (n.bits() as f64 * std::f64::consts::LOG10_2).ceil() as u64
}

/// Exact signed rational in canonical form: reduced, positive denominator,
/// zero represented as 0/1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den` in canonical form. Fails on a zero denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self, NumericError> {
        if den.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Rational(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Rational(&self.0 - &rhs.0)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Rational(&self.0 * &rhs.0)
    }

    pub fn neg(&self) -> Self {
        Rational(-&self.0)
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Multiplicative inverse, the `1/X` building block.
    pub fn invert_value(&self) -> Result<Self, NumericError> {
        if self.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    /// Integer power with exact results. `0^0 = 1`; negative exponents
    /// invert first. The budget is consulted up front (the result size is
    /// predictable) and again on the final value.
    pub fn pow_int(&self, k: &BigInt, budget: &Budget) -> Result<Self, NumericError> {
        if self.is_zero() {
            return match k.sign() {
                Sign::Minus => Err(NumericError::ZeroToNegativePower),
                Sign::NoSign => Ok(Rational::one()),
                Sign::Plus => Ok(Rational::zero()),
            };
        }
        if self.0.abs().is_one() {
            let odd = k.magnitude().bit(0);
            return Ok(if self.is_negative() && odd {
                self.clone()
            } else {
                Rational::one()
            });
        }
        let base_digits = decimal_digits(self.numer()).max(decimal_digits(self.denom()));
        // result digits ~ base digits * |k|; reject early rather than loop.
        let projected = k
            .magnitude()
            .to_u64()
            .and_then(|m| base_digits.checked_mul(m.max(1)));
        let exp = match projected {
            Some(d) if d <= budget.max_digits => k.magnitude().to_u64().expect("projected fit"),
            _ => {
                return Err(NumericError::BudgetExceeded {
                    digits: projected.unwrap_or(u64::MAX),
                    budget: budget.max_digits,
                })
            }
        };
        let mut result = BigRational::one();
        let mut base = self.0.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result *= &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        let mut out = Rational(result);
        if k.is_negative() {
            out = out.invert_value()?;
        }
        budget.check(&out)?;
        Ok(out)
    }

    pub fn pow_i64(&self, k: i64, budget: &Budget) -> Result<Self, NumericError> {
        self.pow_int(&BigInt::from(k), budget)
    }

    pub fn compare(&self, rhs: &Self) -> std::cmp::Ordering {
        self.0.cmp(&rhs.0)
    }

    /// The integer value when the denominator is 1.
    pub fn to_bigint(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.numer().clone())
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// Quotient and remainder of `n / radix` with `0 <= remainder < radix`.
/// The digit-extraction primitive behind every rendering loop.
///
/// `radix` must be at least 2.
pub fn divmod_int(n: &BigUint, radix: u32) -> (BigUint, u32) {
    assert!(radix >= 2, "radix must be at least 2");
    let r = BigUint::from(radix);
    let (q, rem) = num_integer::Integer::div_rem(n, &r);
    (q, rem.to_u32().expect("remainder below radix"))
}

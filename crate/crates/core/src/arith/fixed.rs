//! 128-bit fixed-point enclosures of numbers in `[0, 1)`.
//!
//! Used on hot paths (iterated floors, fractional-part scans) as a sound
//! filter: every answer is certified from outward-rounded bounds, and `None`
//! means the caller must fall back to [`NumberExpr`](super::NumberExpr)
//! evaluation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::enclosure::{pow2, Enclosure};

/// Bounds `lo/2^128 <= x <= hi/2^128` for some `x` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedUnit {
    lo: u128,
    hi: u128,
}

/// Fractional part of a scaled [`FixedUnit`], in units of `2^-128`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaledFrac {
    /// `frac(k x)` lies in `[lo, hi]`.
    Within { floor: u64, lo: u128, hi: u128 },
    /// `k x` is within `below + above` of the integer `ceil`: its
    /// fractional part lies in `[1 - below, 1) ∪ [0, above]`.
    NearInteger { ceil: u64, below: u128, above: u128 },
    Wide,
}

fn mul_wide(x: u128, k: u64) -> (u64, u128) {
    let k = k as u128;
    let low = (x as u64 as u128) * k;
    let mid = (x >> 64) * k + (low >> 64);
    let int = (mid >> 64) as u64;
    let frac = (mid << 64) | (low & u64::MAX as u128);
    (int, frac)
}

fn to_u128(v: &BigInt) -> Option<u128> {
    v.to_u128()
}

impl FixedUnit {
    /// `None` unless the enclosure lies inside `[0, 1)` at 128-bit resolution.
    pub fn from_enclosure(enc: &Enclosure) -> Option<Self> {
        if enc.lo().is_negative() {
            return None;
        }
        let scale = BigRational::from_integer(pow2(128));
        let lo = (enc.lo() * &scale).floor().to_integer();
        let hi = (enc.hi() * &scale).ceil().to_integer();
        Some(Self {
            lo: to_u128(&lo)?,
            hi: to_u128(&hi)?,
        })
    }

    /// Rational value `numer/denom`-free constructor for tests and fixtures.
    pub fn from_bounds(lo: u128, hi: u128) -> Self {
        assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn lo(&self) -> u128 {
        self.lo
    }

    pub fn hi(&self) -> u128 {
        self.hi
    }

    /// Certified `floor(k x)` when both bounds agree.
    pub fn floor_mul(&self, k: u64) -> Option<u64> {
        let (a, _) = mul_wide(self.lo, k);
        let (b, _) = mul_wide(self.hi, k);
        (a == b).then_some(a)
    }

    pub fn scaled_frac(&self, k: u64) -> ScaledFrac {
        let (int_lo, frac_lo) = mul_wide(self.lo, k);
        let (int_hi, frac_hi) = mul_wide(self.hi, k);
        if int_lo == int_hi {
            ScaledFrac::Within {
                floor: int_lo,
                lo: frac_lo,
                hi: frac_hi,
            }
        } else if int_hi == int_lo + 1 {
            ScaledFrac::NearInteger {
                ceil: int_hi,
                below: frac_lo.wrapping_neg(),
                above: frac_hi,
            }
        } else {
            ScaledFrac::Wide
        }
    }
}

/// Lower and upper `2^-128` fixed-point bounds of a value in `[0, 1)`,
/// rounding outward. Values at or above 1 saturate to `u128::MAX`.
pub fn fixed_bounds(enc: &Enclosure) -> (u128, u128) {
    let scale = BigRational::from_integer(pow2(128));
    let lo = (enc.lo() * &scale).floor().to_integer();
    let hi = (enc.hi() * &scale).ceil().to_integer();
    let clamp = |v: BigInt| -> u128 {
        if v.is_negative() {
            0
        } else {
            v.to_u128().unwrap_or(u128::MAX)
        }
    };
    (clamp(lo), clamp(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::NumberExpr;

    #[test]
    fn wide_multiply_matches_bigint() {
        let x: u128 = 0xDEAD_BEEF_0123_4567_89AB_CDEF_FEDC_BA98;
        let k: u64 = 0xFFFF_FFFF_FFFF_FFF1;
        let (int, frac) = mul_wide(x, k);
        let exact = BigInt::from(x) * BigInt::from(k);
        let two128 = BigInt::from(1) << 128usize;
        assert_eq!(BigInt::from(int), &exact >> 128usize);
        assert_eq!(BigInt::from(frac), exact % two128);
    }

    #[test]
    fn floors_of_multiples_of_inverse_sqrt_two() {
        let theta = NumberExpr::parse("(/ 1 (sqrt 2))").unwrap().refine(160).unwrap();
        let fixed = FixedUnit::from_enclosure(theta.enclosure()).unwrap();
        assert_eq!(fixed.floor_mul(34), Some(24));
        assert_eq!(fixed.floor_mul(1), Some(0));
        assert_eq!(fixed.floor_mul(99), Some(70));
    }

    #[test]
    fn exact_integers_are_near_integer() {
        let half = NumberExpr::rational(1, 2);
        let fixed = FixedUnit::from_enclosure(half.enclosure()).unwrap();
        // 1/2 is a dyadic, so the fixed bounds are exact and 2 * 1/2 lands on 1.
        match fixed.scaled_frac(2) {
            ScaledFrac::Within { floor, lo, hi } => {
                assert_eq!((floor, lo, hi), (1, 0, 0));
            }
            other => panic!("unexpected {other:?}"),
        }
        let third = NumberExpr::rational(1, 3);
        let fixed = FixedUnit::from_enclosure(third.enclosure()).unwrap();
        assert!(matches!(
            fixed.scaled_frac(3),
            ScaledFrac::NearInteger { ceil: 1, .. }
        ));
    }
}

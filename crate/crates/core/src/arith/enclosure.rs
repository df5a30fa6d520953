use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A closed interval `[lo, hi]` with exact rational endpoints.
///
/// Point enclosures (`lo == hi`) carry exact rationals. Non-degenerate
/// enclosures are rounded outward onto the dyadic grid `2^-p` of the working
/// precision after every operation, which keeps endpoint sizes bounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

pub(crate) fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn floor_scaled(r: &BigRational, bits: u32) -> BigInt {
    let scaled = r * BigRational::from_integer(pow2(bits));
    scaled.floor().to_integer()
}

fn ceil_scaled(r: &BigRational, bits: u32) -> BigInt {
    let scaled = r * BigRational::from_integer(pow2(bits));
    scaled.ceil().to_integer()
}

impl Enclosure {
    pub fn point(value: BigRational) -> Self {
        Self {
            lo: value.clone(),
            hi: value,
        }
    }

    /// Builds `[lo, hi]`; panics in debug builds when `lo > hi`.
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi, "inverted enclosure");
        Self { lo, hi }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, value: &BigRational) -> bool {
        &self.lo <= value && value <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Smallest absolute value over the interval.
    pub fn mignitude(&self) -> BigRational {
        if self.contains_zero() {
            BigRational::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn magnitude(&self) -> BigRational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    /// `Some(n)` when every point of the enclosure has floor `n`.
    pub fn common_floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    /// Intersection of two enclosures of the same real number.
    ///
    /// Both operands are sound, so the result is non-empty; if rounding ever
    /// produced disjoint sets we keep `self` rather than fabricate an interval.
    pub fn intersect(&self, other: &Enclosure) -> Enclosure {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        if lo <= hi {
            Enclosure { lo, hi }
        } else {
            self.clone()
        }
    }

    /// Certified ordering of two enclosures, `None` when they overlap.
    pub fn certified_cmp(&self, other: &Enclosure) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Rounds a non-degenerate enclosure outward to the grid `2^-bits`.
    pub fn round_out(self, bits: u32) -> Enclosure {
        if self.is_point() {
            return self;
        }
        let denom = pow2(bits);
        let lo = BigRational::new(floor_scaled(&self.lo, bits), denom.clone());
        let hi = BigRational::new(ceil_scaled(&self.hi, bits), denom);
        Enclosure { lo, hi }
    }

    pub fn add(&self, other: &Enclosure, bits: u32) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
        .round_out(bits)
    }

    pub fn sub(&self, other: &Enclosure, bits: u32) -> Enclosure {
        Enclosure {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
        .round_out(bits)
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, other: &Enclosure, bits: u32) -> Enclosure {
        if self.is_point() && other.is_point() {
            return Enclosure::point(&self.lo * &other.lo);
        }
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().cloned().unwrap();
        let hi = products.iter().max().cloned().unwrap();
        Enclosure { lo, hi }.round_out(bits)
    }

    /// Multiplication by an exact integer, without rounding.
    pub fn scale(&self, factor: &BigInt) -> Enclosure {
        let f = BigRational::from_integer(factor.clone());
        if factor.is_negative() {
            Enclosure {
                lo: &self.hi * &f,
                hi: &self.lo * &f,
            }
        } else {
            Enclosure {
                lo: &self.lo * &f,
                hi: &self.hi * &f,
            }
        }
    }

    /// `None` when the divisor enclosure contains zero.
    pub fn recip(&self, bits: u32) -> Option<Enclosure> {
        if self.contains_zero() {
            return None;
        }
        if self.is_point() {
            return Some(Enclosure::point(self.lo.recip()));
        }
        Some(
            Enclosure {
                lo: self.hi.recip(),
                hi: self.lo.recip(),
            }
            .round_out(bits),
        )
    }

    pub fn div(&self, other: &Enclosure, bits: u32) -> Option<Enclosure> {
        let r = other.recip(bits + 8)?;
        Some(self.mul(&r, bits))
    }

    /// Enclosure of `sqrt(value)` for a positive rational.
    ///
    /// Exact when the rational is a perfect square, otherwise the integer
    /// square root of the scaled radicand brackets the value on the `2^-bits`
    /// grid.
    pub fn sqrt_of(value: &BigRational, bits: u32) -> Enclosure {
        debug_assert!(value.is_positive());
        if let Some(root) = exact_rational_sqrt(value) {
            return Enclosure::point(root);
        }
        let denom = pow2(bits);
        let scaled_lo = floor_scaled(value, 2 * bits);
        let scaled_hi = ceil_scaled(value, 2 * bits);
        let lo_root = scaled_lo.sqrt();
        let mut hi_root = scaled_hi.sqrt();
        if &hi_root * &hi_root < scaled_hi {
            hi_root += 1;
        }
        Enclosure {
            lo: BigRational::new(lo_root, denom.clone()),
            hi: BigRational::new(hi_root, denom),
        }
    }

    /// True when `width <= 2^-bits * max(1, |x|)` holds for every `x` inside.
    pub fn meets_width(&self, bits: u32) -> bool {
        let scale = self.mignitude().max(BigRational::one());
        let bound = scale / BigRational::from_integer(pow2(bits));
        self.width() <= bound
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "[{}]", self.lo)
        } else {
            write!(f, "[{:.17e}, {:.17e}]", self.lo_f64(), self.hi_f64())
        }
    }
}

/// Exact square root of a rational when numerator and denominator are both
/// perfect squares.
pub fn exact_rational_sqrt(value: &BigRational) -> Option<BigRational> {
    if value.is_negative() {
        return None;
    }
    let n = value.numer();
    let d = value.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Floor of an exact rational as a `BigInt`.
pub fn rational_floor(value: &BigRational) -> BigInt {
    value.numer().div_floor(value.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sqrt_brackets_two() {
        let e = Enclosure::sqrt_of(&r(2, 1), 40);
        assert!(e.lo() * e.lo() <= r(2, 1));
        assert!(e.hi() * e.hi() >= r(2, 1));
        assert!(e.width() <= r(1, 1 << 40));
    }

    #[test]
    fn sqrt_of_square_is_exact() {
        let e = Enclosure::sqrt_of(&r(9, 4), 10);
        assert!(e.is_point());
        assert_eq!(e.lo(), &r(3, 2));
    }

    #[test]
    fn rounding_is_outward() {
        let e = Enclosure::new(r(1, 3), r(2, 3)).round_out(4);
        assert!(e.lo() <= &r(1, 3));
        assert!(e.hi() >= &r(2, 3));
        assert_eq!(e.lo(), &r(5, 16));
        assert_eq!(e.hi(), &r(11, 16));
    }

    #[test]
    fn recip_rejects_zero_straddle() {
        assert!(Enclosure::new(r(-1, 2), r(1, 2)).recip(10).is_none());
        assert!(Enclosure::point(r(0, 1)).recip(10).is_none());
    }

    #[test]
    fn mixed_sign_products() {
        let a = Enclosure::new(r(-2, 1), r(3, 1));
        let b = Enclosure::new(r(-5, 1), r(1, 1));
        let p = a.mul(&b, 8);
        assert_eq!(p.lo(), &r(-15, 1));
        assert_eq!(p.hi(), &r(10, 1));
    }
}

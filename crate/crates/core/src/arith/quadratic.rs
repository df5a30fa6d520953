//! Exact arithmetic in a single real quadratic field `Q(sqrt d)`.
//!
//! Expressions whose square roots are all rational multiples of one common
//! radical normalize to `a + b sqrt(d)`; everything else (two independent
//! radicals, opaque decimals) is reported as not normalizable. This is what
//! lets `compare_certified` prove equalities such as `1/(2+sqrt 2) = (2-sqrt 2)/2`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;

use super::enclosure::exact_rational_sqrt;
use super::{Node, NumberExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticValue {
    pub rational: BigRational,
    pub radical_coeff: BigRational,
    /// Non-square positive radicand; `None` when `radical_coeff` is zero.
    pub radicand: Option<BigRational>,
}

impl QuadraticValue {
    pub fn rational(r: BigRational) -> Self {
        Self {
            rational: r,
            radical_coeff: BigRational::zero(),
            radicand: None,
        }
    }

    fn canonical(self) -> Self {
        if self.radical_coeff.is_zero() {
            Self::rational(self.rational)
        } else {
            self
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.radicand.is_none().then_some(&self.rational)
    }

    /// Exact sign of `a + b sqrt(d)`.
    pub fn sign(&self) -> Ordering {
        let a = &self.rational;
        let b = &self.radical_coeff;
        let Some(d) = &self.radicand else {
            return a.cmp(&BigRational::zero());
        };
        let sa = a.cmp(&BigRational::zero());
        let sb = b.cmp(&BigRational::zero());
        if sa == sb || sa == Ordering::Equal {
            return sb;
        }
        if sb == Ordering::Equal {
            return sa;
        }
        // Opposite signs: the larger of a^2 and b^2 d wins. Equality would
        // make d a rational square.
        if a * a > b * b * d {
            sa
        } else {
            sb
        }
    }

    fn neg(self) -> Self {
        Self {
            rational: -self.rational,
            radical_coeff: -self.radical_coeff,
            radicand: self.radicand,
        }
    }

    /// Rewrites `rhs` over the radicand of `self` (or vice versa).
    /// `None` when the two radicals are not rational multiples of each other.
    fn unify(lhs: Self, rhs: Self) -> Option<(Self, Self)> {
        match (&lhs.radicand, &rhs.radicand) {
            (None, None) => Some((lhs, rhs)),
            (Some(d), None) => {
                let d = d.clone();
                Some((
                    lhs,
                    Self {
                        radicand: Some(d),
                        ..rhs
                    },
                ))
            }
            (None, Some(d)) => {
                let d = d.clone();
                Some((
                    Self {
                        radicand: Some(d),
                        ..lhs
                    },
                    rhs,
                ))
            }
            (Some(d1), Some(d2)) => {
                if d1 == d2 {
                    return Some((lhs, rhs));
                }
                // sqrt(d2) = s sqrt(d1) with s = sqrt(d2/d1) rational.
                let s = exact_rational_sqrt(&(d2 / d1))?;
                let d1 = d1.clone();
                Some((
                    lhs,
                    Self {
                        rational: rhs.rational,
                        radical_coeff: rhs.radical_coeff * s,
                        radicand: Some(d1),
                    },
                ))
            }
        }
    }

    fn add(self, rhs: Self) -> Option<Self> {
        let (a, b) = Self::unify(self, rhs)?;
        Some(
            Self {
                rational: a.rational + b.rational,
                radical_coeff: a.radical_coeff + b.radical_coeff,
                radicand: a.radicand.or(b.radicand),
            }
            .canonical(),
        )
    }

    fn mul(self, rhs: Self) -> Option<Self> {
        let (a, b) = Self::unify(self, rhs)?;
        let d = a.radicand.clone().or(b.radicand.clone());
        let cross = match &d {
            Some(d) => &a.radical_coeff * &b.radical_coeff * d,
            None => BigRational::zero(),
        };
        Some(
            Self {
                rational: &a.rational * &b.rational + cross,
                radical_coeff: &a.rational * &b.radical_coeff + &a.radical_coeff * &b.rational,
                radicand: d,
            }
            .canonical(),
        )
    }

    fn recip(self) -> Option<Self> {
        match &self.radicand {
            None => {
                if self.rational.is_zero() {
                    None
                } else {
                    Some(Self::rational(self.rational.recip()))
                }
            }
            Some(d) => {
                let norm = &self.rational * &self.rational - &self.radical_coeff * &self.radical_coeff * d;
                if norm.is_zero() {
                    return None;
                }
                Some(
                    Self {
                        rational: &self.rational / &norm,
                        radical_coeff: -&self.radical_coeff / &norm,
                        radicand: Some(d.clone()),
                    }
                    .canonical(),
                )
            }
        }
    }
}

/// Normalizes an expression into a single quadratic field, if possible.
pub fn normalize(expr: &NumberExpr) -> Option<QuadraticValue> {
    match expr.node() {
        Node::Int(n) => Some(QuadraticValue::rational(BigRational::from_integer(n.clone()))),
        Node::Rational(r) => Some(QuadraticValue::rational(r.clone())),
        Node::Sqrt(r) => match exact_rational_sqrt(r) {
            Some(root) => Some(QuadraticValue::rational(root)),
            None => Some(QuadraticValue {
                rational: BigRational::zero(),
                radical_coeff: BigRational::from_integer(1.into()),
                radicand: Some(r.clone()),
            }),
        },
        Node::Decimal { .. } => None,
        Node::Neg(x) => normalize(x).map(QuadraticValue::neg),
        Node::Add(a, b) => normalize(a)?.add(normalize(b)?),
        Node::Sub(a, b) => normalize(a)?.add(normalize(b)?.neg()),
        Node::Mul(a, b) => normalize(a)?.mul(normalize(b)?),
        Node::Div(a, b) => normalize(a)?.mul(normalize(b)?.recip()?),
    }
}

/// Exact value when the expression normalizes to a rational.
pub fn exact_rational(expr: &NumberExpr) -> Option<BigRational> {
    normalize(expr).and_then(|q| q.as_rational().cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::NumberExpr;

    fn parse(s: &str) -> NumberExpr {
        s.parse().unwrap()
    }

    #[test]
    fn rationalizes_reciprocal() {
        let lhs = normalize(&parse("(/ 1 (+ 2 (sqrt 2)))")).unwrap();
        let rhs = normalize(&parse("(/ (- 2 (sqrt 2)) 2)")).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn merges_rational_multiples_of_one_radical() {
        let q = normalize(&parse("(- (sqrt 8) (* 2 (sqrt 2)))")).unwrap();
        assert_eq!(q.as_rational(), Some(&BigRational::zero()));
    }

    #[test]
    fn independent_radicals_do_not_normalize() {
        assert!(normalize(&parse("(+ (sqrt 2) (sqrt 3))")).is_none());
    }

    #[test]
    fn exact_sign() {
        // 3 - 2 sqrt 2 = 0.1716 > 0
        let q = normalize(&parse("(- 3 (* 2 (sqrt 2)))")).unwrap();
        assert_eq!(q.sign(), Ordering::Greater);
        let q = normalize(&parse("(- (* 2 (sqrt 2)) 3)")).unwrap();
        assert_eq!(q.sign(), Ordering::Less);
    }

    #[test]
    fn product_of_conjugates_is_rational() {
        let q = normalize(&parse("(* (+ 1 (sqrt 2)) (- (sqrt 2) 1))")).unwrap();
        assert_eq!(q.as_rational(), Some(&BigRational::from_integer(1.into())));
    }
}

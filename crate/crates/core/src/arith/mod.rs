//! Certified real arithmetic over symbolic expression trees.
//!
//! A [`NumberExpr`] is an immutable expression over integers, rationals,
//! square roots of positive rationals, opaque decimal literals and the four
//! field operations. Every value carries an enclosure `[lo, hi]` that is
//! guaranteed to contain the true value; refinement returns a new value with
//! a tighter enclosure and never widens the old one.
//!
//! Floors and comparisons are either certified from enclosures, proven exactly
//! by normalizing into a single quadratic field, or reported as ambiguous.
//! Nothing here rounds silently.

mod enclosure;
mod fixed;
mod parse;
mod quadratic;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use enclosure::{exact_rational_sqrt, rational_floor, Enclosure};
pub use fixed::{fixed_bounds, FixedUnit, ScaledFrac};
pub use quadratic::{exact_rational, normalize, QuadraticValue};

/// Default refinement budget, in bits, for floors and comparisons.
pub const DEFAULT_BUDGET_BITS: u32 = 256;

/// Precision of enclosures computed when an expression is first built.
pub const INITIAL_BITS: u32 = 64;

const EXACT: u32 = u32::MAX;
const GUARD_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArithError {
    #[error("floor of {expr} is ambiguous at {bits} bits: enclosure [{lo:e}, {hi:e}] straddles an integer")]
    AmbiguousFloor {
        expr: String,
        bits: u32,
        lo: f64,
        hi: f64,
    },
    #[error("divisor {expr} could not be separated from zero at {bits} bits")]
    DivisionByZero { expr: String, bits: u32 },
    #[error("square root of non-positive rational {0}")]
    NonPositiveSqrt(String),
    #[error("invalid decimal literal {0:?}")]
    BadDecimal(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

impl ArithError {
    /// True when more precision could settle the question.
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, ArithError::AmbiguousFloor { .. } | ArithError::DivisionByZero { .. })
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    Int(BigInt),
    /// Never integer-valued; those are stored as `Int`.
    Rational(BigRational),
    Sqrt(BigRational),
    /// An opaque real known only to lie within `2^-bits` of `value`.
    Decimal {
        digits: String,
        bits: u32,
    },
    Neg(NumberExpr),
    Add(NumberExpr, NumberExpr),
    Sub(NumberExpr, NumberExpr),
    Mul(NumberExpr, NumberExpr),
    Div(NumberExpr, NumberExpr),
}

/// Result of a certified comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CertifiedOrdering {
    Less,
    Equal,
    Greater,
    Undecidable,
}

impl CertifiedOrdering {
    pub fn reverse(self) -> Self {
        match self {
            Self::Less => Self::Greater,
            Self::Greater => Self::Less,
            other => other,
        }
    }

    pub fn as_ordering(self) -> Option<Ordering> {
        match self {
            Self::Less => Some(Ordering::Less),
            Self::Equal => Some(Ordering::Equal),
            Self::Greater => Some(Ordering::Greater),
            Self::Undecidable => None,
        }
    }
}

impl From<Ordering> for CertifiedOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Self::Less,
            Ordering::Equal => Self::Equal,
            Ordering::Greater => Self::Greater,
        }
    }
}

impl fmt::Display for CertifiedOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Less => "Less",
            Self::Equal => "Equal",
            Self::Greater => "Greater",
            Self::Undecidable => "Undecidable",
        };
        f.write_str(s)
    }
}

/// An exact symbolic real with a refinable enclosure. Cheap to clone.
#[derive(Clone)]
pub struct NumberExpr {
    node: Arc<Node>,
    enclosure: Enclosure,
    precision: u32,
    opaque: bool,
}

impl NumberExpr {
    fn leaf(node: Node, enclosure: Enclosure, precision: u32, opaque: bool) -> Self {
        Self {
            node: Arc::new(node),
            enclosure,
            precision,
            opaque,
        }
    }

    pub fn int(value: impl Into<BigInt>) -> Self {
        let v: BigInt = value.into();
        let enc = Enclosure::point(BigRational::from_integer(v.clone()));
        Self::leaf(Node::Int(v), enc, EXACT, false)
    }

    pub fn from_rational(value: BigRational) -> Self {
        if value.is_integer() {
            return Self::int(value.to_integer());
        }
        let enc = Enclosure::point(value.clone());
        Self::leaf(Node::Rational(value), enc, EXACT, false)
    }

    /// `numer / denom` as an exact rational leaf. Panics if `denom == 0`.
    pub fn rational(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Self::from_rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn sqrt_of(radicand: BigRational) -> Result<Self, ArithError> {
        if !radicand.is_positive() {
            return Err(ArithError::NonPositiveSqrt(radicand.to_string()));
        }
        let enc = Enclosure::sqrt_of(&radicand, INITIAL_BITS);
        let precision = if enc.is_point() { EXACT } else { INITIAL_BITS };
        Ok(Self::leaf(Node::Sqrt(radicand), enc, precision, false))
    }

    /// Square root of a positive integer. Panics on non-positive input.
    pub fn sqrt_int(n: i64) -> Self {
        Self::sqrt_of(BigRational::from_integer(n.into())).expect("positive radicand")
    }

    /// An opaque decimal literal accurate to `2^-bits`.
    pub fn decimal(digits: &str, bits: u32) -> Result<Self, ArithError> {
        let value = parse::parse_decimal_digits(digits)
            .ok_or_else(|| ArithError::BadDecimal(digits.to_string()))?;
        let half = BigRational::new(BigInt::one(), enclosure::pow2(bits));
        let enc = Enclosure::new(&value - &half, &value + &half);
        Ok(Self::leaf(
            Node::Decimal {
                digits: digits.to_string(),
                bits,
            },
            enc,
            bits,
            true,
        ))
    }

    pub fn parse(text: &str) -> Result<Self, ArithError> {
        parse::parse_expr(text)
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    pub fn enclosure(&self) -> &Enclosure {
        &self.enclosure
    }

    /// Bits of the current refinement (`u32::MAX` for exact values).
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Contains an opaque decimal leaf, so enclosures cannot shrink indefinitely.
    pub fn is_opaque(&self) -> bool {
        self.opaque
    }

    /// Exact value when the enclosure has collapsed to a point.
    pub fn exact_value(&self) -> Option<&BigRational> {
        self.enclosure.is_point().then(|| self.enclosure.lo())
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.exact_value(), Some(v) if v.is_zero())
    }

    /// Midpoint of the enclosure after refining to 64 bits.
    pub fn to_f64(&self) -> f64 {
        match self.refine(64) {
            Ok(r) => r.enclosure.to_f64(),
            Err(_) => self.enclosure.to_f64(),
        }
    }

    fn binary(node: Node, lhs: &NumberExpr, rhs: &NumberExpr, enclosure: Enclosure) -> Self {
        let precision = if enclosure.is_point() {
            EXACT
        } else {
            lhs.precision.min(rhs.precision)
        };
        Self::leaf(node, enclosure, precision, lhs.opaque || rhs.opaque)
    }

    fn working_bits(lhs: &NumberExpr, rhs: &NumberExpr) -> u32 {
        lhs.precision.min(rhs.precision).min(1 << 20)
    }

    /// `self / rhs`; fails when the divisor cannot be separated from zero
    /// within the default budget.
    pub fn checked_div(&self, rhs: &NumberExpr) -> Result<NumberExpr, ArithError> {
        let mut divisor = rhs.clone();
        let mut bits = INITIAL_BITS;
        while divisor.enclosure.contains_zero() {
            if divisor.enclosure.is_point() || bits >= DEFAULT_BUDGET_BITS {
                return Err(ArithError::DivisionByZero {
                    expr: rhs.to_string(),
                    bits,
                });
            }
            bits = (bits * 2).min(DEFAULT_BUDGET_BITS);
            divisor = divisor.refine(bits)?;
        }
        let w = Self::working_bits(self, &divisor);
        let enc = self
            .enclosure
            .div(&divisor.enclosure, w)
            .expect("divisor separated from zero");
        let node = Node::Div(self.clone(), rhs.clone());
        let precision = if enc.is_point() {
            EXACT
        } else {
            self.precision.min(divisor.precision)
        };
        Ok(Self::leaf(node, enc, precision, self.opaque || rhs.opaque))
    }

    pub fn recip(&self) -> Result<NumberExpr, ArithError> {
        NumberExpr::int(1).checked_div(self)
    }

    /// `k * self` for an integer multiplier.
    pub fn scaled(&self, k: impl Into<BigInt>) -> NumberExpr {
        let k = k.into();
        match self.exact_value() {
            Some(r) if !self.opaque => NumberExpr::from_rational(r * BigRational::from_integer(k)),
            _ => NumberExpr::int(k) * self,
        }
    }

    /// Returns `self` with enclosure width at most `2^-bits * max(1, |x|)`.
    ///
    /// Idempotent at equal bits. Values containing opaque decimals stop
    /// tightening once their literal's precision is reached.
    pub fn refine(&self, bits: u32) -> Result<NumberExpr, ArithError> {
        if bits <= self.precision || self.enclosure.is_point() {
            return Ok(self.clone());
        }
        let cap = bits.saturating_mul(8).saturating_add(1024);
        let mut work = bits.saturating_add(GUARD_BITS);
        loop {
            match evaluate(self, work) {
                Ok(enc) => {
                    if enc.meets_width(bits) || self.opaque || work >= cap {
                        return Ok(NumberExpr {
                            node: self.node.clone(),
                            enclosure: enc,
                            precision: bits,
                            opaque: self.opaque,
                        });
                    }
                }
                Err(e) if work >= cap => return Err(e),
                Err(_) => {}
            }
            work = work.saturating_mul(2).min(cap);
        }
    }

    /// Precision ladder `64, 128, ... , budget` used by certified operations.
    fn ladder(&self, budget: u32) -> impl Iterator<Item = u32> {
        let start = if self.precision == EXACT {
            0
        } else {
            self.precision
        };
        let mut next = Some(INITIAL_BITS.max(start.saturating_add(1)).min(budget.max(1)));
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= budget {
                None
            } else {
                Some(cur.saturating_mul(2).min(budget))
            };
            Some(cur)
        })
    }

    /// Certified `floor(self)`, refining up to `budget` bits.
    pub fn floor_certified(&self, budget: u32) -> Result<BigInt, ArithError> {
        if let Some(f) = self.enclosure.common_floor() {
            return Ok(f);
        }
        let mut last = self.clone();
        for bits in self.ladder(budget) {
            last = last.refine(bits)?;
            if let Some(f) = last.enclosure.common_floor() {
                return Ok(f);
            }
        }
        if let Some(exact) = exact_rational(self) {
            return Ok(rational_floor(&exact));
        }
        Err(ArithError::AmbiguousFloor {
            expr: self.to_string(),
            bits: budget,
            lo: last.enclosure.lo_f64(),
            hi: last.enclosure.hi_f64(),
        })
    }

    /// `self - floor(self)`, an expression with value in `[0, 1)`.
    pub fn frac_certified(&self, budget: u32) -> Result<NumberExpr, ArithError> {
        let f = self.floor_certified(budget)?;
        if f.is_zero() {
            return Ok(self.clone());
        }
        Ok(self - &NumberExpr::int(f))
    }

    /// Certified comparison of `self` against `other`.
    ///
    /// `Less`/`Greater` come from disjoint enclosures or an exact sign in a
    /// quadratic field; `Equal` only from an exact normalization.
    pub fn compare_certified(&self, other: &NumberExpr, budget: u32) -> CertifiedOrdering {
        if let Some(o) = self.enclosure.certified_cmp(&other.enclosure) {
            return o.into();
        }
        if !self.opaque && !other.opaque {
            if let Some(q) = normalize(&(self - other)) {
                return q.sign().into();
            }
        }
        let mut a = self.clone();
        let mut b = other.clone();
        for bits in self.ladder(budget) {
            let (Ok(ra), Ok(rb)) = (a.refine(bits), b.refine(bits)) else {
                break;
            };
            a = ra;
            b = rb;
            if let Some(o) = a.enclosure.certified_cmp(&b.enclosure) {
                return o.into();
            }
        }
        CertifiedOrdering::Undecidable
    }

    /// Certified sign relative to zero.
    pub fn sign_certified(&self, budget: u32) -> CertifiedOrdering {
        self.compare_certified(&NumberExpr::int(0), budget)
    }

    /// Enclosure at (at least) the requested refinement.
    pub fn enclosure_at(&self, bits: u32) -> Result<Enclosure, ArithError> {
        Ok(self.refine(bits)?.enclosure)
    }
}

/// Evaluates the tree at working precision `bits`, reusing any child whose
/// stored enclosure is already at least that precise.
fn evaluate(expr: &NumberExpr, bits: u32) -> Result<Enclosure, ArithError> {
    if expr.precision >= bits || expr.enclosure.is_point() {
        return Ok(expr.enclosure.clone());
    }
    let enc = match expr.node() {
        Node::Int(_) | Node::Rational(_) | Node::Decimal { .. } => expr.enclosure.clone(),
        Node::Sqrt(r) => Enclosure::sqrt_of(r, bits),
        Node::Neg(x) => evaluate(x, bits)?.neg(),
        Node::Add(a, b) => evaluate(a, bits)?.add(&evaluate(b, bits)?, bits),
        Node::Sub(a, b) => evaluate(a, bits)?.sub(&evaluate(b, bits)?, bits),
        Node::Mul(a, b) => evaluate(a, bits)?.mul(&evaluate(b, bits)?, bits),
        Node::Div(a, b) => {
            let num = evaluate(a, bits)?;
            let den = evaluate(b, bits)?;
            num.div(&den, bits).ok_or_else(|| ArithError::DivisionByZero {
                expr: b.to_string(),
                bits,
            })?
        }
    };
    Ok(enc.intersect(&expr.enclosure))
}

impl fmt::Display for NumberExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::write_expr(self, f)
    }
}

impl fmt::Debug for NumberExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ∈ {}", self, self.enclosure)
    }
}

impl FromStr for NumberExpr {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse_expr(s)
    }
}

impl From<i64> for NumberExpr {
    fn from(v: i64) -> Self {
        NumberExpr::int(v)
    }
}

impl From<BigRational> for NumberExpr {
    fn from(v: BigRational) -> Self {
        NumberExpr::from_rational(v)
    }
}

impl Serialize for NumberExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NumberExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Neg for &NumberExpr {
    type Output = NumberExpr;

    fn neg(self) -> NumberExpr {
        let enc = self.enclosure.neg();
        NumberExpr::leaf(Node::Neg(self.clone()), enc, self.precision, self.opaque)
    }
}

impl Neg for NumberExpr {
    type Output = NumberExpr;

    fn neg(self) -> NumberExpr {
        -&self
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident, $enc:ident) => {
        impl $trait<&NumberExpr> for &NumberExpr {
            type Output = NumberExpr;

            fn $method(self, rhs: &NumberExpr) -> NumberExpr {
                let w = NumberExpr::working_bits(self, rhs);
                let enc = self.enclosure.$enc(&rhs.enclosure, w);
                NumberExpr::binary(Node::$variant(self.clone(), rhs.clone()), self, rhs, enc)
            }
        }

        impl $trait<NumberExpr> for NumberExpr {
            type Output = NumberExpr;

            fn $method(self, rhs: NumberExpr) -> NumberExpr {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&NumberExpr> for NumberExpr {
            type Output = NumberExpr;

            fn $method(self, rhs: &NumberExpr) -> NumberExpr {
                (&self).$method(rhs)
            }
        }

        impl $trait<NumberExpr> for &NumberExpr {
            type Output = NumberExpr;

            fn $method(self, rhs: NumberExpr) -> NumberExpr {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, Add, add);
binary_op!(Sub, sub, Sub, sub);
binary_op!(Mul, mul, Mul, mul);

/// Sum of a sequence of expressions (`0` when empty).
pub fn sum<'a>(terms: impl IntoIterator<Item = &'a NumberExpr>) -> NumberExpr {
    let mut iter = terms.into_iter();
    match iter.next() {
        None => NumberExpr::int(0),
        Some(first) => iter.fold(first.clone(), |acc, t| acc + t),
    }
}

/// `f64` approximation of an exact rational.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> NumberExpr {
        s.parse().unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn refine_sqrt_two() {
        let x = NumberExpr::sqrt_int(2).refine(8).unwrap();
        let enc = x.enclosure();
        assert!(enc.lo() <= &r(14142135624, 10000000000));
        assert!(enc.hi() >= &r(14142135623, 10000000000));
        assert!(enc.width() <= r(1, 256));
    }

    #[test]
    fn rational_refines_to_point() {
        let x = parse("3/7").refine(200).unwrap();
        assert_eq!(x.exact_value(), Some(&r(3, 7)));
        let y = parse("(/ 3 7)").refine(5).unwrap();
        assert_eq!(y.exact_value(), Some(&r(3, 7)));
    }

    #[test]
    fn refine_is_idempotent_at_equal_bits() {
        let x = parse("(- 1 (/ 1 (sqrt 2)))").refine(50).unwrap();
        let y = x.refine(50).unwrap();
        assert_eq!(x.enclosure(), y.enclosure());
        assert!(x.enclosure().meets_width(50));
    }

    #[test]
    fn floors() {
        assert_eq!(parse("(* 2 (sqrt 2))").floor_certified(64).unwrap(), 2.into());
        assert_eq!(parse("5").floor_certified(64).unwrap(), 5.into());
        assert_eq!(parse("(* 12 (- (sqrt 2) 1))").floor_certified(64).unwrap(), 4.into());
        assert_eq!(parse("-1/2").floor_certified(64).unwrap(), (-1).into());
    }

    #[test]
    fn symbolic_integer_has_certified_floor() {
        // sqrt2 * sqrt2 = 2 exactly; enclosures alone always straddle 2.
        let x = parse("(* (sqrt 2) (sqrt 2))");
        assert_eq!(x.floor_certified(128).unwrap(), 2.into());
    }

    #[test]
    fn ambiguous_floor_is_an_error() {
        let x = parse(r#"(+ 2 dec"0" bits=10)"#);
        assert!(matches!(
            x.floor_certified(256),
            Err(ArithError::AmbiguousFloor { .. })
        ));
    }

    #[test]
    fn fractional_parts() {
        let f = parse("(sqrt 2)").frac_certified(64).unwrap();
        assert!((f.to_f64() - 0.41421356237).abs() < 1e-10);
        let f = parse("7/2").frac_certified(64).unwrap();
        assert_eq!(f.exact_value(), Some(&r(1, 2)));
    }

    #[test]
    fn comparisons() {
        let a = parse("(/ 1 (+ 2 (sqrt 2)))");
        let b = parse("(/ (- 2 (sqrt 2)) 2)");
        assert_eq!(a.compare_certified(&b, 64), CertifiedOrdering::Equal);
        assert_eq!(
            parse("(sqrt 2)").compare_certified(&parse("3/2"), 64),
            CertifiedOrdering::Less
        );
        let opaque = parse(r#"dec"3.146" bits=8"#);
        assert_eq!(
            parse("(+ (sqrt 2) (sqrt 3))").compare_certified(&opaque, 32),
            CertifiedOrdering::Undecidable
        );
    }

    #[test]
    fn division_by_symbolic_zero_fails() {
        let z = parse("(- (sqrt 2) (sqrt 2))");
        assert!(matches!(
            NumberExpr::int(1).checked_div(&z),
            Err(ArithError::DivisionByZero { .. })
        ));
    }

    #[test]
    fn nested_refinement_never_widens() {
        let x = parse("(/ (+ (sqrt 3) 1/3) (- (sqrt 5) 2))");
        let mut prev = x.clone();
        for bits in [16, 40, 90, 200] {
            let next = prev.refine(bits).unwrap();
            assert!(next.enclosure().is_subset_of(prev.enclosure()));
            assert!(next.enclosure().meets_width(bits));
            prev = next;
        }
    }
}

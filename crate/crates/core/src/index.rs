//! Iterated Conley-Zehnder indices from a rotation decomposition.
//!
//! An orbit's linearized return map is summarized by an integer `p`, a count
//! `q <= n-1` and `q` irrational rotation numbers `theta_j` in `(0, 1)`. Every
//! iterate then has index
//!
//! ```text
//! mu(gamma^l) = l p + 2 sum_j floor(l theta_j) + q
//! ```
//!
//! and mean index `p + 2 sum_j theta_j`.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{
    self, ArithError, CertifiedOrdering, FixedUnit, NumberExpr, DEFAULT_BUDGET_BITS,
};

/// Precision at which rotation numbers are cached on construction.
const THETA_BITS: u32 = 160;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndexError {
    #[error("orbit {label}: floor({ell} * theta_{j}) is ambiguous: {source}")]
    AmbiguousIterate {
        label: String,
        ell: u64,
        j: usize,
        #[source]
        source: ArithError,
    },
    #[error("orbit {label}: {reason}")]
    InvalidOrbit { label: String, reason: String },
    #[error("invalid orbit system: {0}")]
    InvalidSystem(String),
    #[error("iterate multiplier must be at least 1")]
    ZeroIterate,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("comparison undecidable within {bits} bits: {what}")]
    Undecidable { what: String, bits: u32 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl IndexError {
    pub fn is_budget_exhausted(&self) -> bool {
        match self {
            IndexError::AmbiguousIterate { .. } | IndexError::Undecidable { .. } => true,
            IndexError::Arith(e) => e.is_budget_exhausted(),
            _ => false,
        }
    }
}

/// `(p, q, theta)` normal form of a nondegenerate linearized return map.
///
/// `q` is `thetas.len()`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationDecomposition {
    pub p: i64,
    pub thetas: Vec<NumberExpr>,
}

impl RotationDecomposition {
    pub fn new(p: i64, thetas: Vec<NumberExpr>) -> Self {
        Self { p, thetas }
    }

    pub fn hyperbolic(p: i64) -> Self {
        Self { p, thetas: vec![] }
    }

    pub fn q(&self) -> usize {
        self.thetas.len()
    }

    /// Checks `q <= n-1`, `p` even when `q = n-1`, and `0 < theta_j < 1`.
    pub fn validate(&self, n: usize, label: &str, budget: u32) -> Result<(), IndexError> {
        let bad = |reason: String| IndexError::InvalidOrbit {
            label: label.to_string(),
            reason,
        };
        if n == 0 {
            return Err(bad("dimension n must be at least 1".into()));
        }
        if self.q() > n - 1 {
            return Err(bad(format!("q = {} exceeds n - 1 = {}", self.q(), n - 1)));
        }
        if self.q() == n - 1 && self.p.rem_euclid(2) == 1 {
            return Err(bad(format!("q = n - 1 = {} requires p even, got p = {}", n - 1, self.p)));
        }
        let zero = NumberExpr::int(0);
        let one = NumberExpr::int(1);
        for (j, theta) in self.thetas.iter().enumerate() {
            let above = theta.compare_certified(&zero, budget);
            let below = theta.compare_certified(&one, budget);
            match (above, below) {
                (CertifiedOrdering::Greater, CertifiedOrdering::Less) => {}
                (CertifiedOrdering::Undecidable, _) | (_, CertifiedOrdering::Undecidable) => {
                    return Err(IndexError::Undecidable {
                        what: format!("orbit {label}: theta_{} = {theta} against (0, 1)", j + 1),
                        bits: budget,
                    })
                }
                _ => return Err(bad(format!("theta_{} = {theta} is not in (0, 1)", j + 1))),
            }
        }
        Ok(())
    }
}

/// A simple closed Reeb orbit: rotation data plus its (positive) action.
#[derive(Debug, Clone)]
pub struct SimpleOrbit {
    label: String,
    n: usize,
    action: NumberExpr,
    rotation: RotationDecomposition,
    fast: Vec<Option<FixedUnit>>,
    mean: NumberExpr,
    budget: u32,
}

impl PartialEq for SimpleOrbit {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.n == other.n
            && self.action.to_string() == other.action.to_string()
            && self.rotation.p == other.rotation.p
            && self.rotation.thetas.len() == other.rotation.thetas.len()
            && self
                .rotation
                .thetas
                .iter()
                .zip(&other.rotation.thetas)
                .all(|(a, b)| a.to_string() == b.to_string())
    }
}

impl SimpleOrbit {
    pub fn new(
        label: impl Into<String>,
        n: usize,
        action: NumberExpr,
        rotation: RotationDecomposition,
    ) -> Result<Self, IndexError> {
        Self::with_budget(label, n, action, rotation, DEFAULT_BUDGET_BITS)
    }

    pub fn with_budget(
        label: impl Into<String>,
        n: usize,
        action: NumberExpr,
        rotation: RotationDecomposition,
        budget: u32,
    ) -> Result<Self, IndexError> {
        let label = label.into();
        rotation.validate(n, &label, budget)?;
        match action.sign_certified(budget) {
            CertifiedOrdering::Greater => {}
            CertifiedOrdering::Undecidable => {
                return Err(IndexError::Undecidable {
                    what: format!("orbit {label}: sign of action {action}"),
                    bits: budget,
                })
            }
            _ => {
                return Err(IndexError::InvalidOrbit {
                    label,
                    reason: format!("action {action} is not positive"),
                })
            }
        }
        let thetas = rotation
            .thetas
            .iter()
            .map(|t| t.refine(THETA_BITS))
            .collect::<Result<Vec<_>, _>>()?;
        let fast = thetas
            .iter()
            .map(|t| FixedUnit::from_enclosure(t.enclosure()))
            .collect();
        let rotation = RotationDecomposition::new(rotation.p, thetas);
        let mean = NumberExpr::int(rotation.p) + arith::sum(&rotation.thetas).scaled(2);
        Ok(Self {
            label,
            n,
            action,
            rotation,
            fast,
            mean,
            budget,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn action(&self) -> &NumberExpr {
        &self.action
    }

    pub fn rotation(&self) -> &RotationDecomposition {
        &self.rotation
    }

    pub fn p(&self) -> i64 {
        self.rotation.p
    }

    pub fn q(&self) -> usize {
        self.rotation.q()
    }

    pub fn thetas(&self) -> &[NumberExpr] {
        &self.rotation.thetas
    }

    /// `p + 2 sum theta_j`, exact.
    pub fn mean_index(&self) -> &NumberExpr {
        &self.mean
    }

    /// Action of the `ell`-th iterate, `ell * A` exactly.
    pub fn iterate_action(&self, ell: u64) -> NumberExpr {
        if ell == 1 {
            self.action.clone()
        } else {
            self.action.scaled(ell)
        }
    }

    fn floor_theta(&self, j: usize, ell: u64, budget: u32) -> Result<i64, IndexError> {
        if let Some(f) = self.fast[j].and_then(|fx| fx.floor_mul(ell)) {
            return Ok(f as i64);
        }
        let theta = &self.rotation.thetas[j];
        let scaled = theta.enclosure().scale(&BigInt::from(ell));
        let f = match scaled.common_floor() {
            Some(f) => f,
            None => theta
                .scaled(ell)
                .floor_certified(budget)
                .map_err(|source| IndexError::AmbiguousIterate {
                    label: self.label.clone(),
                    ell,
                    j: j + 1,
                    source,
                })?,
        };
        Ok(f.to_i64().expect("iterate floor fits in i64"))
    }

    /// `ell p + 2 sum floor(ell theta_j) + q`.
    pub fn iterate_index_with(&self, ell: u64, budget: u32) -> Result<i64, IndexError> {
        if ell == 0 {
            return Err(IndexError::ZeroIterate);
        }
        let mut total = (ell as i64) * self.rotation.p + self.q() as i64;
        for j in 0..self.q() {
            total += 2 * self.floor_theta(j, ell, budget)?;
        }
        Ok(total)
    }

    /// Index at the budget the orbit was built with.
    pub fn iterate_index(&self, ell: u64) -> Result<i64, IndexError> {
        self.iterate_index_with(ell, self.budget)
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    /// Whether `gamma^ell` has the index parity of `gamma`.
    pub fn is_good(&self, ell: u64) -> Result<bool, IndexError> {
        let base = self.iterate_index(1)?;
        let it = self.iterate_index(ell)?;
        Ok((it - base).rem_euclid(2) == 0)
    }

    /// All iterates share one parity exactly when `p` is even.
    pub fn is_even_orbit(&self) -> bool {
        self.rotation.p.rem_euclid(2) == 0
    }

    /// Sign of `|claimed - ell * mean| - (n - 1)`: `Less` means the bound holds.
    fn deviation_against_bound(
        &self,
        ell: u64,
        claimed: i64,
        budget: u32,
    ) -> Result<(CertifiedOrdering, f64), IndexError> {
        let bound = BigRational::from_integer(BigInt::from(self.n as i64 - 1));
        let claimed_r = BigRational::from_integer(BigInt::from(claimed));
        let ell_b = BigInt::from(ell);
        let mut mean = self.mean.clone();
        let mut bits = self.mean.precision().clamp(64, DEFAULT_BUDGET_BITS);
        loop {
            let dev = mean.enclosure().scale(&ell_b);
            let lo = &claimed_r - dev.hi();
            let hi = &claimed_r - dev.lo();
            let approx = arith::rational_to_f64(&((&lo + &hi) / BigRational::from_integer(2.into())));
            if lo > -bound.clone() && hi < bound {
                return Ok((CertifiedOrdering::Less, approx));
            }
            if lo >= bound || hi <= -bound.clone() {
                let exact_edge = lo == bound || hi == -bound.clone();
                return Ok((
                    if exact_edge && dev.is_point() {
                        CertifiedOrdering::Equal
                    } else {
                        CertifiedOrdering::Greater
                    },
                    approx,
                ));
            }
            if bits >= budget {
                break;
            }
            bits = (bits * 2).min(budget);
            mean = mean.refine(bits)?;
        }
        // Enclosure pinned against the boundary: settle symbolically.
        let gap = NumberExpr::int(claimed) - self.mean.scaled(ell);
        let approx = gap.to_f64();
        let n1 = NumberExpr::int(self.n as i64 - 1);
        let upper = gap.compare_certified(&n1, budget);
        let lower = gap.compare_certified(&-&n1, budget);
        match (upper, lower) {
            (CertifiedOrdering::Less, CertifiedOrdering::Greater) => {
                Ok((CertifiedOrdering::Less, approx))
            }
            (CertifiedOrdering::Undecidable, _) | (_, CertifiedOrdering::Undecidable) => {
                Err(IndexError::Undecidable {
                    what: format!("orbit {}: deviation at ell = {ell}", self.label),
                    bits: budget,
                })
            }
            (CertifiedOrdering::Equal, _) | (_, CertifiedOrdering::Equal) => {
                Ok((CertifiedOrdering::Equal, approx))
            }
            _ => Ok((CertifiedOrdering::Greater, approx)),
        }
    }

    /// Certifies `|mu(gamma^ell) - ell mean| < n - 1` for `ell <= ell_max`.
    pub fn deviation_check(&self, ell_max: u64) -> Result<DeviationReport, IndexError> {
        let claims = (1..=ell_max)
            .map(|ell| self.iterate_index(ell).map(|mu| (ell, mu)))
            .collect::<Result<Vec<_>, _>>()?;
        self.deviation_check_claims(claims, DEFAULT_BUDGET_BITS)
    }

    /// Deviation check against externally supplied `(ell, index)` records.
    pub fn deviation_check_claims(
        &self,
        claims: impl IntoIterator<Item = (u64, i64)>,
        budget: u32,
    ) -> Result<DeviationReport, IndexError> {
        let mut report = DeviationReport {
            label: self.label.clone(),
            checked: 0,
            max_abs_deviation: 0.0,
            violation: None,
        };
        for (ell, mu) in claims {
            if ell == 0 {
                return Err(IndexError::ZeroIterate);
            }
            let (ord, approx) = self.deviation_against_bound(ell, mu, budget)?;
            report.checked += 1;
            report.max_abs_deviation = report.max_abs_deviation.max(approx.abs());
            if ord != CertifiedOrdering::Less && report.violation.is_none() {
                report.violation = Some(DeviationViolation {
                    ell,
                    index: mu,
                    deviation: approx,
                });
            }
        }
        Ok(report)
    }

    /// Checks `mu(gamma^{ell+1}) >= mu(gamma^ell) + c` for `ell < ell_max`.
    pub fn monotonicity_check(&self, c: i64, ell_max: u64) -> Result<MonotonicityReport, IndexError> {
        let mu1 = self.iterate_index(1)?;
        let need = self.n as i64 - 1 + c;
        if c < 0 || mu1 < need {
            return Err(IndexError::Precondition(format!(
                "orbit {}: monotonicity with c = {c} needs mu(gamma) >= n - 1 + c = {need}, got {mu1}",
                self.label
            )));
        }
        let mut report = MonotonicityReport {
            label: self.label.clone(),
            c,
            min_gap: None,
            first_failure: None,
        };
        let mut prev = mu1;
        for ell in 1..ell_max {
            let next = self.iterate_index(ell + 1)?;
            let gap = next - prev;
            report.min_gap = Some(report.min_gap.map_or(gap, |g: i64| g.min(gap)));
            if gap < c && report.first_failure.is_none() {
                report.first_failure = Some((ell, prev, next));
            }
            prev = next;
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationViolation {
    pub ell: u64,
    pub index: i64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub label: String,
    pub checked: u64,
    pub max_abs_deviation: f64,
    pub violation: Option<DeviationViolation>,
}

impl DeviationReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub label: String,
    pub c: i64,
    pub min_gap: Option<i64>,
    /// `(ell, mu(gamma^ell), mu(gamma^{ell+1}))` of the first gap below `c`.
    pub first_failure: Option<(u64, i64, i64)>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// A finite family of simple orbits in one dimension with distinct labels.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSystem {
    n: usize,
    orbits: Vec<SimpleOrbit>,
}

impl OrbitSystem {
    pub fn new(n: usize, orbits: Vec<SimpleOrbit>) -> Result<Self, IndexError> {
        let mut seen = HashSet::new();
        for o in &orbits {
            if o.n != n {
                return Err(IndexError::InvalidSystem(format!(
                    "orbit {} has n = {} but the system has n = {n}",
                    o.label, o.n
                )));
            }
            if !seen.insert(o.label.as_str()) {
                return Err(IndexError::InvalidSystem(format!("duplicate label {}", o.label)));
            }
        }
        Ok(Self { n, orbits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orbits(&self) -> &[SimpleOrbit] {
        &self.orbits
    }

    pub fn get(&self, label: &str) -> Option<&SimpleOrbit> {
        self.orbits.iter().find(|o| o.label == label)
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterateRecord {
    pub label: String,
    pub ell: u64,
    pub index: i64,
    pub good: bool,
    pub action: NumberExpr,
}

/// Largest `ell >= 0` with `ell * action <= cap`.
pub fn max_iterate(orbit: &SimpleOrbit, cap: &NumberExpr, budget: u32) -> Result<u64, IndexError> {
    let ratio = cap.checked_div(orbit.action())?;
    let f = ratio.floor_certified(budget)?;
    if f.is_negative() {
        return Ok(0);
    }
    f.to_u64()
        .ok_or_else(|| IndexError::Precondition(format!("action cap {cap} admits too many iterates")))
}

/// Every iterate `gamma_i^ell` with `ell * A(gamma_i) <= cap`, sorted by
/// `(index, action)` and then by label and `ell`.
///
/// Ties in action that cannot be certified at `budget` are ordered by the
/// midpoints of their `budget`-bit enclosures, which keeps the order total.
pub fn index_spectrum(
    system: &OrbitSystem,
    cap: &NumberExpr,
    budget: u32,
) -> Result<Vec<IterateRecord>, IndexError> {
    if cap.sign_certified(budget) != CertifiedOrdering::Greater {
        return Err(IndexError::Precondition(format!("action cap {cap} must be positive")));
    }
    let mut keyed = Vec::new();
    for orbit in system.orbits() {
        let ell_max = max_iterate(orbit, cap, budget)?;
        let base = orbit.iterate_index_with(1, budget)?;
        for ell in 1..=ell_max {
            let index = orbit.iterate_index_with(ell, budget)?;
            let action = orbit.iterate_action(ell);
            let key = action.enclosure_at(budget)?.midpoint();
            keyed.push((
                key,
                IterateRecord {
                    label: orbit.label().to_string(),
                    ell,
                    index,
                    good: (index - base).rem_euclid(2) == 0,
                    action,
                },
            ));
        }
    }
    keyed.sort_by(|(ka, a), (kb, b)| {
        a.index
            .cmp(&b.index)
            .then_with(|| ka.cmp(kb))
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.ell.cmp(&b.ell))
    });
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

/// Certified ordering of two iterate actions, used by matching code that
/// must not pair equal actions.
pub fn compare_actions(a: &NumberExpr, b: &NumberExpr, budget: u32) -> Option<Ordering> {
    a.compare_certified(b, budget).as_ordering()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> NumberExpr {
        s.parse().unwrap()
    }

    fn orbit(n: usize, p: i64, thetas: &[&str]) -> SimpleOrbit {
        SimpleOrbit::new(
            "g",
            n,
            NumberExpr::int(1),
            RotationDecomposition::new(p, thetas.iter().map(|t| expr(t)).collect()),
        )
        .unwrap()
    }

    #[test]
    fn iterate_index_examples() {
        assert_eq!(orbit(2, 2, &["(- (sqrt 2) 1)"]).iterate_index(1).unwrap(), 3);
        assert_eq!(orbit(2, 2, &[]).iterate_index(7).unwrap(), 14);
        assert_eq!(orbit(3, 1, &["(/ 1 (sqrt 2))"]).iterate_index(34).unwrap(), 83);
    }

    #[test]
    fn zero_iterate_is_rejected() {
        assert_eq!(orbit(2, 2, &[]).iterate_index(0), Err(IndexError::ZeroIterate));
    }

    #[test]
    fn mean_index_examples() {
        let m = orbit(3, 1, &["(/ 1 (sqrt 2))"]).mean_index().clone();
        assert_eq!(
            m.compare_certified(&expr("(+ 1 (sqrt 2))"), 256),
            CertifiedOrdering::Equal
        );
        let m = orbit(2, 2, &["(- (sqrt 2) 1)"]).mean_index().clone();
        assert_eq!(
            m.compare_certified(&expr("(* 2 (sqrt 2))"), 256),
            CertifiedOrdering::Equal
        );
    }

    #[test]
    fn goodness_examples() {
        assert!(orbit(2, 2, &[]).is_good(5).unwrap());
        assert!(!orbit(2, 1, &[]).is_good(2).unwrap());
        assert!(!orbit(3, 1, &["(/ 1 (sqrt 2))"]).is_good(2).unwrap());
        assert!(orbit(3, 4, &["(/ 1 (sqrt 2))", "(- (sqrt 3) 1)"]).is_even_orbit());
    }

    #[test]
    fn validation() {
        let bad = |n, p, thetas: &[&str]| {
            SimpleOrbit::new(
                "x",
                n,
                NumberExpr::int(1),
                RotationDecomposition::new(p, thetas.iter().map(|t| expr(t)).collect()),
            )
            .is_err()
        };
        assert!(bad(2, 1, &["(- (sqrt 2) 1)"]));
        assert!(bad(2, 2, &["(sqrt 2)"]));
        assert!(bad(2, 2, &["(- (sqrt 2) 1)", "(- (sqrt 3) 1)"]));
        assert!(SimpleOrbit::new("x", 2, NumberExpr::int(0), RotationDecomposition::hyperbolic(2)).is_err());
    }

    #[test]
    fn tampered_claim_is_flagged() {
        let g = orbit(3, 1, &["(/ 1 (sqrt 2))"]);
        assert!(g.deviation_check(100).unwrap().holds());
        let report = g.deviation_check_claims([(1, 2), (3, 99)], 256).unwrap();
        assert_eq!(report.violation.unwrap().ell, 3);
    }

    #[test]
    fn monotonicity_precondition() {
        let g = orbit(3, 1, &[]);
        assert!(matches!(g.monotonicity_check(1, 10), Err(IndexError::Precondition(_))));
        let g = orbit(2, 2, &[]);
        assert!(matches!(g.monotonicity_check(2, 10), Err(IndexError::Precondition(_))));
        let r = g.monotonicity_check(1, 50).unwrap();
        assert!(r.holds());
        assert_eq!(r.min_gap, Some(2));
        let g = orbit(2, 2, &["(- (sqrt 2) 1)"]);
        let r = g.monotonicity_check(2, 200).unwrap();
        assert!(r.holds());
        assert!(r.min_gap.unwrap() >= 2);
    }

    #[test]
    fn spectrum_of_single_hyperbolic_orbit() {
        let sys = OrbitSystem::new(2, vec![orbit(2, 2, &[])]).unwrap();
        let recs = index_spectrum(&sys, &expr("5/2"), 256).unwrap();
        let idx: Vec<_> = recs.iter().map(|r| r.index).collect();
        assert_eq!(idx, vec![2, 4]);
    }
}

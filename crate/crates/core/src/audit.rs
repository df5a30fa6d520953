//! Dataset-level audits: dynamical convexity, common-jump multiplicity
//! windows, perfectness, and the two-orbit resonance analysis.
//!
//! A `Violation` means the dataset cannot be the complete set of simple
//! orbits of a nondegenerate starshaped hypersurface; every violation carries
//! a witness that can be recomputed from the data.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::arith::{CertifiedOrdering, NumberExpr};
use crate::cij::{find_common_jump, CijError, CijOptions, CijSolution};
use crate::homology::{
    cap_for_window, generator_table, morse_feasibility, target_betti, Feasibility,
    GradedGeneratorTable, HomologyError,
};
use crate::index::{IndexError, OrbitSystem, SimpleOrbit};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("n odd required (got n = {0})")]
    NOddRequired(usize),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Cij(#[from] CijError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

impl AuditError {
    pub fn is_budget_exhausted(&self) -> bool {
        match self {
            AuditError::Index(e) => e.is_budget_exhausted(),
            AuditError::Cij(e) => e.is_budget_exhausted(),
            AuditError::Homology(e) => e.is_budget_exhausted(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violation,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Violation => "violation",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub name: String,
    pub degrees: Vec<i64>,
    pub orbits: Vec<String>,
    pub passed: bool,
    pub explanation: String,
}

impl Finding {
    fn new(name: &str, passed: bool, explanation: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            degrees: vec![],
            orbits: vec![],
            passed,
            explanation: explanation.into(),
        }
    }

    fn degrees(mut self, d: impl IntoIterator<Item = i64>) -> Self {
        self.degrees = d.into_iter().collect();
        self
    }

    fn orbits<'a>(mut self, o: impl IntoIterator<Item = &'a str>) -> Self {
        self.orbits = o.into_iter().map(String::from).collect();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub check: String,
    pub verdict: Verdict,
    /// Degree exhibiting a violation, when one exists.
    pub witness_degree: Option<i64>,
    pub findings: Vec<Finding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump: Option<CijSolution>,
    /// Action cap needed for a conclusive answer, when too small.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_cap: Option<NumberExpr>,
}

impl AuditReport {
    fn new(check: &str, verdict: Verdict) -> Self {
        Self {
            check: check.into(),
            verdict,
            witness_degree: None,
            findings: vec![],
            jump: None,
            required_cap: None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

fn in_p_n_plus_1(o: &SimpleOrbit) -> Result<bool, AuditError> {
    let mu = o.iterate_index(1)?;
    Ok((mu - o.n() as i64 - 1).rem_euclid(2) == 0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub holds: bool,
    /// `(label, ell, index)` of the first iterate below `n + 1`.
    pub first_failure: Option<(String, u64, i64)>,
}

/// Every simple orbit has index at least `n + 1`; iterates up to `spot_check`
/// are re-verified.
pub fn check_dynamical_convexity(system: &OrbitSystem, spot_check: u64) -> Result<ConvexityReport, AuditError> {
    let bound = system.n() as i64 + 1;
    for o in system.orbits() {
        let mu = o.iterate_index(1)?;
        if mu < bound {
            return Ok(ConvexityReport {
                holds: false,
                first_failure: Some((o.label().into(), 1, mu)),
            });
        }
        for ell in 2..=spot_check {
            let m = o.iterate_index(ell)?;
            if m < bound {
                return Ok(ConvexityReport {
                    holds: false,
                    first_failure: Some((o.label().into(), ell, m)),
                });
            }
        }
    }
    Ok(ConvexityReport {
        holds: true,
        first_failure: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Threshold {
    /// Every simple orbit in `P_{n+1}` has index `>= n + 1`.
    NPlusOne,
    /// Every orbit has index `>= n - 1`.
    NMinusOne,
}

fn subsystem(system: &OrbitSystem, keep: impl Fn(&SimpleOrbit) -> bool) -> Result<OrbitSystem, AuditError> {
    Ok(OrbitSystem::new(
        system.n(),
        system.orbits().iter().filter(|o| keep(o)).cloned().collect(),
    )?)
}

/// Fillers `gamma_i^{2 m_i}` (good ones only) of the jump window, by degree.
fn window_fillers(system: &OrbitSystem, sol: &CijSolution) -> Result<BTreeMap<i64, Vec<String>>, AuditError> {
    let mut out: BTreeMap<i64, Vec<String>> = BTreeMap::new();
    for o in system.orbits() {
        let entry = sol.entry(o.label()).expect("solution covers every orbit");
        let ell = 2 * entry.m;
        if o.is_good(ell)? {
            out.entry(o.iterate_index(ell)?).or_default().push(o.label().into());
        }
    }
    Ok(out)
}

/// Runs the common-jump window count behind the multiplicity theorems.
///
/// Candidates are the simple orbits in `P_{n+1}`. With `M = 1` their indices
/// jump over the open window around `2N`, where only the iterates
/// `gamma_i^{2 m_i}` can sit. The target homology needs a good generator in
/// each degree `2N - (n-1), ..., 2N + (n-1)` (threshold `n+1`) or
/// `2N - (n-3), ..., 2N + (n-3)` (threshold `n-1`) of parity `n+1`.
pub fn multiplicity_audit(
    system: &OrbitSystem,
    threshold: Threshold,
    opts: &CijOptions,
) -> Result<AuditReport, AuditError> {
    let n = system.n() as i64;
    let name = match threshold {
        Threshold::NPlusOne => "multiplicity(n+1)",
        Threshold::NMinusOne => "multiplicity(n-1)",
    };
    let mut report = AuditReport::new(name, Verdict::Consistent);
    for o in system.orbits() {
        let mu = o.iterate_index(1)?;
        let ok = match threshold {
            Threshold::NPlusOne => !in_p_n_plus_1(o)? || mu > n,
            Threshold::NMinusOne => mu >= n - 1,
        };
        if !ok {
            return Err(AuditError::Precondition(format!(
                "orbit {} has index {mu}, below the audit threshold",
                o.label()
            )));
        }
    }
    let candidates = subsystem(system, |o| in_p_n_plus_1(o).unwrap_or(false))?;
    let half = match threshold {
        Threshold::NPlusOne => n - 1,
        Threshold::NMinusOne => n - 3,
    };
    let required_count = match threshold {
        Threshold::NPlusOne => n,
        Threshold::NMinusOne => n - 2,
    };
    report.findings.push(
        Finding::new(
            "candidates",
            true,
            format!("{} simple orbit(s) with index of parity n+1", candidates.len()),
        )
        .orbits(candidates.orbits().iter().map(|o| o.label())),
    );
    if candidates.is_empty() {
        if required_count > 0 {
            report.verdict = Verdict::Violation;
            report.witness_degree = Some(n + 1);
            report.findings.push(
                Finding::new(
                    "window",
                    false,
                    "no simple orbit has index of parity n+1, so degree n+1 has no good generator",
                )
                .degrees([n + 1]),
            );
        }
        return Ok(report);
    }
    let cij_opts = CijOptions {
        horizon: 1,
        min_n: opts.min_n.max(system.n() as u64),
        ..*opts
    };
    let sol = match find_common_jump(&candidates, &cij_opts) {
        Ok(s) => s,
        Err(CijError::SearchExhausted { bound }) => {
            report.verdict = Verdict::Inconclusive;
            report.findings.push(Finding::new(
                "common jump",
                false,
                format!("no common index jump with N <= {bound}"),
            ));
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let two_n = 2 * sol.n_jump as i64;
    let fillers = window_fillers(&candidates, &sol)?;
    let required: Vec<i64> = (0..required_count.max(0)).map(|j| two_n - half + 2 * j).collect();
    let mut unfilled = Vec::new();
    for &d in &required {
        let who = fillers.get(&d).cloned().unwrap_or_default();
        if who.is_empty() {
            unfilled.push(d);
        }
        report.findings.push(
            Finding::new(
                "window degree",
                !who.is_empty(),
                if who.is_empty() {
                    format!("degree {d} = 2N{:+} has no good iterate", d - two_n)
                } else {
                    format!("degree {d} = 2N{:+} filled", d - two_n)
                },
            )
            .degrees([d])
            .orbits(who.iter().map(String::as_str)),
        );
    }
    if let Some(&d) = unfilled.first() {
        report.verdict = Verdict::Violation;
        report.witness_degree = Some(d);
    }
    if threshold == Threshold::NMinusOne && report.verdict == Verdict::Consistent {
        // Degree n - 2 is empty, so generators of index n - 1 can only be
        // cancelled by distinct generators of index n.
        let cap = cap_for_window(system, n, opts.budget)?;
        let table = generator_table(system, &cap, opts.budget)?;
        let (low, high) = (table.count(n - 1), table.count(n));
        let ok = low <= high;
        report.findings.push(
            Finding::new(
                "low degrees",
                ok,
                format!("{low} good generator(s) of index n-1 against {high} of index n"),
            )
            .degrees([n - 1, n]),
        );
        if !ok {
            report.verdict = Verdict::Violation;
            report.witness_degree = Some(n - 1);
        }
    }
    report.jump = Some(sol);
    Ok(report)
}

/// Perfectness of the table inside its complete window, and the count of
/// even simple orbits that perfectness forces (exactly `n`).
pub fn perfectness_check(system: &OrbitSystem, cap: &NumberExpr, opts: &CijOptions) -> Result<AuditReport, AuditError> {
    let n = system.n();
    let table = generator_table(system, cap, opts.budget)?;
    let mut report = AuditReport::new("perfect", Verdict::Consistent);
    let Some((lo, hi)) = table.window else {
        report.verdict = Verdict::Inconclusive;
        report.findings.push(Finding::new("window", false, "action cap yields no complete window"));
        return Ok(report);
    };
    let mut mismatch = None;
    for d in lo..=hi {
        let (c, b) = (table.count(d), target_betti(n, d) as usize);
        if c != b {
            mismatch = Some((d, c, b));
            break;
        }
    }
    let perfect = mismatch.is_none();
    report.findings.push(
        Finding::new(
            "perfect table",
            perfect,
            match mismatch {
                None => format!("one good generator in each degree n-1+2k within [{lo}, {hi}], none elsewhere"),
                Some((d, c, b)) => format!("degree {d} has {c} good generator(s), target rank {b}"),
            },
        )
        .degrees(mismatch.map(|m| m.0)),
    );
    if !perfect {
        // Not perfect: the corollary does not apply.
        report.witness_degree = mismatch.map(|m| m.0);
        return Ok(report);
    }
    let even = subsystem(system, SimpleOrbit::is_even_orbit)?;
    let odd: Vec<&str> = system
        .orbits()
        .iter()
        .filter(|o| !o.is_even_orbit())
        .map(|o| o.label())
        .collect();
    if !odd.is_empty() {
        report.findings.push(
            Finding::new("odd orbits", true, "odd simple orbits present; only even orbits are counted")
                .orbits(odd),
        );
    }
    let count_ok = even.len() == n;
    report.findings.push(
        Finding::new(
            "even orbit count",
            count_ok,
            format!("{} even simple orbit(s); a perfect form has exactly n = {n}", even.len()),
        )
        .orbits(even.orbits().iter().map(|o| o.label())),
    );
    if count_ok {
        return Ok(report);
    }
    report.verdict = Verdict::Violation;
    if even.len() < n {
        let sub = multiplicity_audit(&even, Threshold::NPlusOne, opts);
        match sub {
            Ok(r) => {
                report.witness_degree = r.witness_degree;
                report.jump = r.jump;
                report.findings.extend(r.findings);
            }
            Err(AuditError::Precondition(msg)) => {
                report.findings.push(Finding::new("window", false, msg));
            }
            Err(e) => return Err(e),
        }
        return Ok(report);
    }
    // More than n even orbits: their jump iterates crowd n target degrees.
    let cij_opts = CijOptions {
        horizon: 1,
        min_n: opts.min_n.max(n as u64),
        ..*opts
    };
    match find_common_jump(&even, &cij_opts) {
        Ok(sol) => {
            let fillers = window_fillers(&even, &sol)?;
            let crowded = fillers
                .iter()
                .find(|(d, who)| who.len() != target_betti(n, **d) as usize);
            if let Some((d, who)) = crowded {
                report.witness_degree = Some(*d);
                report.findings.push(
                    Finding::new(
                        "window degree",
                        false,
                        format!("degree {d} carries {} good generators, target rank {}", who.len(), target_betti(n, *d)),
                    )
                    .degrees([*d])
                    .orbits(who.iter().map(String::as_str)),
                );
            }
            report.jump = Some(sol);
        }
        Err(CijError::SearchExhausted { bound }) => {
            report.findings.push(Finding::new(
                "common jump",
                false,
                format!("no common index jump with N <= {bound}; witness degree unavailable"),
            ));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

fn action_ratio(o: &SimpleOrbit) -> Result<NumberExpr, AuditError> {
    Ok(o.action().checked_div(o.mean_index()).map_err(IndexError::from)?)
}

fn two_orbits(system: &OrbitSystem, budget: u32) -> Result<(&SimpleOrbit, &SimpleOrbit), AuditError> {
    let [a, b] = system.orbits() else {
        return Err(AuditError::Precondition(format!(
            "exactly two orbits required, got {}",
            system.len()
        )));
    };
    for o in [a, b] {
        if o.mean_index().sign_certified(budget) != CertifiedOrdering::Greater {
            return Err(AuditError::Precondition(format!(
                "orbit {} needs a positive mean index",
                o.label()
            )));
        }
    }
    Ok((a, b))
}

/// Certified comparison of `A/mh` of the first orbit against the second.
pub fn resonance_check(system: &OrbitSystem, budget: u32) -> Result<CertifiedOrdering, AuditError> {
    let (a, b) = two_orbits(system, budget)?;
    Ok(action_ratio(a)?.compare_certified(&action_ratio(b)?, budget))
}

/// Smallest `kappa >= 1` with `f(R) big >= small` at `R = 2 kappa + n + 1`,
/// where `f(R) = (R - n + 1)/(R + n)` (first case) or `(R - n)/(R + n - 1)`
/// (second case). Both are increasing in `R`.
fn kappa_zero(big: &NumberExpr, small: &NumberExpr, n: i64, first_case: bool, budget: u32) -> Option<i64> {
    let holds = |kappa: i64| -> bool {
        let r = 2 * kappa + n + 1;
        let (num, den) = if first_case { (r - n + 1, r + n) } else { (r - n, r + n - 1) };
        let factor = NumberExpr::from_rational(BigRational::new(num.into(), den.into()));
        matches!(
            (factor * big).compare_certified(small, budget),
            CertifiedOrdering::Greater | CertifiedOrdering::Equal
        )
    };
    // f(R) >= t  <=>  R >= (n - 1 + n t)/(1 - t) in the first case.
    let t = small.to_f64() / big.to_f64();
    let nf = n as f64;
    let r_est = if first_case {
        (nf - 1.0 + nf * t) / (1.0 - t)
    } else {
        (nf + (nf - 1.0) * t) / (1.0 - t)
    };
    let guess = (((r_est - nf - 1.0) / 2.0).floor() as i64 - 2).clamp(1, 1 << 40);
    let mut kappa = guess;
    while kappa > 1 && holds(kappa - 1) {
        kappa -= 1;
    }
    for _ in 0..1_000_000 {
        if holds(kappa) {
            return Some(kappa);
        }
        kappa += 1;
    }
    None
}

/// Counts of good generators and whether `gamma`'s indices fill
/// `min - 2 + 2N` inside the window.
fn spectrum_diagnostic(table: &GradedGeneratorTable, gamma: &SimpleOrbit, lo: i64, hi: i64) -> Finding {
    let mut own: Vec<i64> = table
        .entries
        .values()
        .flatten()
        .filter(|r| r.label == gamma.label())
        .map(|r| r.index)
        .filter(|&d| d <= hi)
        .collect();
    own.sort_unstable();
    own.dedup();
    let Some(&min) = own.first() else {
        return Finding::new("spectrum of gamma", false, "no good iterate of gamma inside the window")
            .orbits([gamma.label()]);
    };
    let missing: Vec<i64> = (min..=hi)
        .step_by(2)
        .filter(|d| *d >= lo && own.binary_search(d).is_err())
        .collect();
    Finding::new(
        "spectrum of gamma",
        missing.is_empty(),
        if missing.is_empty() {
            format!("indices of gamma cover {min} + 2k up to {hi}")
        } else {
            format!("indices of gamma skip {} degree(s) of the form {min} + 2k", missing.len())
        },
    )
    .degrees(missing)
    .orbits([gamma.label()])
}

/// Two-orbit analysis for odd `n >= 3`: when the action/mean-index ratios
/// differ, the count identities forced by the action comparison at high
/// degrees must fail for a two-orbit table.
pub fn third_orbit_analysis(system: &OrbitSystem, cap: &NumberExpr, budget: u32) -> Result<AuditReport, AuditError> {
    let n = system.n();
    if n % 2 == 0 || n < 3 {
        return Err(AuditError::NOddRequired(n));
    }
    let ni = n as i64;
    let (a, b) = two_orbits(system, budget)?;
    let mut report = AuditReport::new("third-orbit", Verdict::Inconclusive);
    let ord = resonance_check(system, budget)?;
    report.findings.push(Finding::new(
        "resonance",
        true,
        format!("A/mh({}) vs A/mh({}): {ord}", a.label(), b.label()),
    ));
    match ord {
        CertifiedOrdering::Equal => {
            report.findings.push(Finding::new("resonant", true, "ratios are equal; no conclusion"));
            return Ok(report);
        }
        CertifiedOrdering::Undecidable => {
            report.findings.push(Finding::new("resonance", false, "ratio comparison undecidable at budget"));
            return Ok(report);
        }
        _ => {}
    }
    let table = generator_table(system, cap, budget)?;
    let fallback = |report: &mut AuditReport, why: &str| -> Result<(), AuditError> {
        match morse_feasibility(&table)? {
            Feasibility::Infeasible { witness, .. } => {
                report.verdict = Verdict::Violation;
                report.witness_degree = Some(witness);
                report.findings.push(
                    Finding::new(
                        "third orbit forced",
                        false,
                        format!("{why}; the two-orbit table cannot realize the target homology"),
                    )
                    .degrees([witness]),
                );
            }
            _ => report
                .findings
                .push(Finding::new("table", true, format!("{why}; table is feasible in its window"))),
        }
        Ok(())
    };
    let (pa, pb) = (in_p_n_plus_1(a)?, in_p_n_plus_1(b)?);
    if pa == pb {
        fallback(&mut report, "neither or both orbits have index parity n+1")?;
        return Ok(report);
    }
    let (gamma, delta) = if pa { (a, b) } else { (b, a) };
    let (rg, rd) = (action_ratio(gamma)?, action_ratio(delta)?);
    let first_case = rg.compare_certified(&rd, budget) == CertifiedOrdering::Greater;
    let (big, small) = if first_case { (&rg, &rd) } else { (&rd, &rg) };
    let Some(k0) = kappa_zero(big, small, ni, first_case, budget) else {
        report.findings.push(Finding::new("kappa_0", false, "no kappa_0 found within search range"));
        return Ok(report);
    };
    report.findings.push(
        Finding::new(
            "kappa_0",
            true,
            format!(
                "{} case: kappa_0 = {k0} (gamma = {}, delta = {})",
                if first_case { "first" } else { "second" },
                gamma.label(),
                delta.label()
            ),
        )
        .orbits([gamma.label(), delta.label()]),
    );
    let Some((lo, hi)) = table.window else {
        report.required_cap = Some(cap_for_window(system, 2 * k0 + ni + 2, budget)?);
        report.findings.push(Finding::new("window", false, "action cap yields no complete window"));
        return Ok(report);
    };
    report.findings.push(spectrum_diagnostic(&table, gamma, lo, hi));
    let top_pair = if first_case { 1 } else { 2 };
    if 2 * k0 + ni + top_pair > hi {
        report.required_cap = Some(cap_for_window(system, 2 * k0 + ni + 2, budget)?);
        report.findings.push(Finding::new(
            "window",
            false,
            format!("complete window ends at {hi}, below 2 kappa_0 + n + {top_pair} = {}", 2 * k0 + ni + top_pair),
        ));
        return Ok(report);
    }
    let mut kappa = k0;
    while 2 * kappa + ni + top_pair <= hi {
        let (d_low, d_high, lhs, rhs, text) = if first_case {
            let (x, y) = (2 * kappa + ni, 2 * kappa + ni + 1);
            let (cx, cy) = (table.count(x), table.count(y));
            (x, y, cx + 1, cy, format!("#{x} + 1 = {} vs #{y} = {cy}", cx + 1))
        } else {
            let (x, y) = (2 * kappa + ni + 1, 2 * kappa + ni + 2);
            let (cx, cy) = (table.count(x), table.count(y));
            (x, y, cx, cy + 1, format!("#{x} = {cx} vs #{y} + 1 = {}", cy + 1))
        };
        if lhs != rhs {
            report.verdict = Verdict::Violation;
            report.witness_degree = Some(d_low);
            report.findings.push(
                Finding::new("third orbit forced", false, format!("count identity fails at kappa = {kappa}: {text}"))
                    .degrees([d_low, d_high]),
            );
            return Ok(report);
        }
        kappa += 1;
    }
    report.findings.push(Finding::new(
        "count identities",
        true,
        format!("identities hold for kappa in [{k0}, {}]", kappa - 1),
    ));
    fallback(&mut report, "count identities hold in the window")?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::RotationDecomposition;

    fn orbit(label: &str, n: usize, action: &str, p: i64, thetas: &[&str]) -> SimpleOrbit {
        SimpleOrbit::new(
            label,
            n,
            action.parse().unwrap(),
            RotationDecomposition::new(p, thetas.iter().map(|t| t.parse().unwrap()).collect()),
        )
        .unwrap()
    }

    fn e1_sqrt2() -> OrbitSystem {
        OrbitSystem::new(
            2,
            vec![
                orbit("g1", 2, "1", 2, &["(/ 1 (sqrt 2))"]),
                orbit("g2", 2, "(sqrt 2)", 4, &["(- (sqrt 2) 1)"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn convexity() {
        assert!(check_dynamical_convexity(&e1_sqrt2(), 50).unwrap().holds);
        let s = OrbitSystem::new(3, vec![orbit("g", 3, "1", 2, &[])]).unwrap();
        assert!(!check_dynamical_convexity(&s, 50).unwrap().holds);
        let empty = OrbitSystem::new(3, vec![]).unwrap();
        assert!(check_dynamical_convexity(&empty, 50).unwrap().holds);
    }

    #[test]
    fn ellipsoid_multiplicity_is_consistent() {
        let r = multiplicity_audit(&e1_sqrt2(), Threshold::NPlusOne, &CijOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn two_convex_orbits_in_dimension_three_violate() {
        let s = OrbitSystem::new(
            3,
            vec![orbit("a", 3, "1", 4, &[]), orbit("b", 3, "(sqrt 2)", 4, &[])],
        )
        .unwrap();
        let r = multiplicity_audit(&s, Threshold::NPlusOne, &CijOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Violation);
        let sol = r.jump.unwrap();
        assert_eq!(sol.n_jump, 4);
        assert_eq!(r.witness_degree, Some(6));
    }

    #[test]
    fn low_index_candidate_is_a_precondition_error() {
        let s = OrbitSystem::new(2, vec![orbit("g", 2, "1", -3, &[])]).unwrap();
        assert!(multiplicity_audit(&s, Threshold::NPlusOne, &CijOptions::default()).is_err());
    }

    #[test]
    fn ellipsoid_resonance_is_exact() {
        assert_eq!(resonance_check(&e1_sqrt2(), 256).unwrap(), CertifiedOrdering::Equal);
        let s = OrbitSystem::new(2, vec![orbit("a", 2, "1", 2, &[]), orbit("b", 2, "1", 3, &[])]);
        // p = 3 with q = 0 is allowed for n = 2 (q < n - 1 = 1 fails only when q = 1).
        let s = s.unwrap();
        assert_eq!(resonance_check(&s, 256).unwrap(), CertifiedOrdering::Greater);
    }

    #[test]
    fn perfect_ellipsoid() {
        let r = perfectness_check(&e1_sqrt2(), &NumberExpr::int(20), &CijOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent, "{r:?}");
    }

    #[test]
    fn third_orbit_forced() {
        let s = OrbitSystem::new(
            3,
            vec![orbit("gamma", 3, "6/5", 4, &[]), orbit("delta", 3, "3/2", 3, &[])],
        )
        .unwrap();
        let r = third_orbit_analysis(&s, &NumberExpr::int(40), 256).unwrap();
        assert_eq!(r.verdict, Verdict::Violation, "{r:#?}");
        assert_eq!(r.witness_degree, Some(14));
        let even = OrbitSystem::new(2, vec![]).unwrap();
        assert_eq!(
            third_orbit_analysis(&even, &NumberExpr::int(10), 256).unwrap_err(),
            AuditError::NOddRequired(2)
        );
    }
}

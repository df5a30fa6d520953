//! Common index jumps.
//!
//! For orbits with positive mean indices `mh_i`, searches for `N` and `m_i`
//! such that, for `1 <= m <= M`,
//!
//! ```text
//! mu(g_i^{2 m_i - m}) = 2N - mu(g_i^m)
//! mu(g_i^{2 m_i + m}) = 2N + mu(g_i^m)
//! 2N - (n-1) <= mu(g_i^{2 m_i}) <= 2N + (n-1)
//! ```
//!
//! The search scans multiples `k` of the vector `v = (1/mh_i, theta_ij/mh_i)`
//! until every component of `k v` lies within `eps` of an integer, then sets
//! `N = k` and `m_i = floor(N/mh_i)` or `ceil(N/mh_i)` depending on which
//! side of the integer `N/mh_i` falls.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    fixed_bounds, ArithError, CertifiedOrdering, FixedUnit, NumberExpr, ScaledFrac,
    DEFAULT_BUDGET_BITS,
};
use crate::index::{IndexError, OrbitSystem, SimpleOrbit};

pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;
const SCAN_BITS: u32 = 192;
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CijError {
    #[error("orbit {label}: mean index {mean} is not certified positive")]
    NonPositiveMean { label: String, mean: String },
    #[error("orbit system is empty")]
    EmptySystem,
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("no common index jump with N <= {bound}; the search is inconclusive, not a refutation")]
    SearchExhausted { bound: u64 },
    #[error("certified evaluation failed: {0}")]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("comparison undecidable within {bits} bits: {what}")]
    Undecidable { what: String, bits: u32 },
    #[error("constructed solution failed re-verification: {0}")]
    VerificationFailure(String),
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

impl CijError {
    pub fn is_budget_exhausted(&self) -> bool {
        match self {
            CijError::Undecidable { .. } => true,
            CijError::Arith(e) => e.is_budget_exhausted(),
            CijError::Index(e) => e.is_budget_exhausted(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CijOptions {
    /// Horizon `M >= 0` of the symmetric identities.
    pub horizon: u64,
    pub search_bound: u64,
    pub budget: u32,
    /// Smallest `N` the scan may return.
    pub min_n: u64,
    /// Worker threads for the scan; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for CijOptions {
    fn default() -> Self {
        Self {
            horizon: 1,
            search_bound: DEFAULT_SEARCH_BOUND,
            budget: DEFAULT_BUDGET_BITS,
            min_n: 1,
            workers: None,
        }
    }
}

impl CijOptions {
    pub fn with_horizon(horizon: u64) -> Self {
        Self {
            horizon,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CijEntry {
    pub label: String,
    pub m: u64,
    pub eta: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CijSolution {
    #[serde(rename = "N")]
    pub n_jump: u64,
    pub entries: Vec<CijEntry>,
    pub epsilon: NumberExpr,
    #[serde(rename = "M")]
    pub horizon: u64,
}

impl CijSolution {
    pub fn entry(&self, label: &str) -> Option<&CijEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

fn require_positive_means(system: &OrbitSystem, budget: u32) -> Result<(), CijError> {
    if system.is_empty() {
        return Err(CijError::EmptySystem);
    }
    for o in system.orbits() {
        if o.mean_index().sign_certified(budget) != CertifiedOrdering::Greater {
            return Err(CijError::NonPositiveMean {
                label: o.label().to_string(),
                mean: o.mean_index().to_string(),
            });
        }
    }
    Ok(())
}

/// `frac(m theta)` and `1 - frac(m theta)` for `m <= M`, `1/(6 q)`, `1/mh`.
fn epsilon_candidates(
    system: &OrbitSystem,
    horizon: u64,
    budget: u32,
) -> Result<Vec<(String, NumberExpr)>, CijError> {
    let one = NumberExpr::int(1);
    let mut out = Vec::new();
    for o in system.orbits() {
        for (j, theta) in o.thetas().iter().enumerate() {
            for m in 1..=horizon {
                let f = theta.scaled(m).frac_certified(budget)?;
                if f.sign_certified(budget) != CertifiedOrdering::Greater {
                    return Err(CijError::Degenerate(format!(
                        "orbit {}: {m} * theta_{} is an integer",
                        o.label(),
                        j + 1
                    )));
                }
                out.push((format!("{}: frac({m} theta_{})", o.label(), j + 1), f.clone()));
                out.push((format!("{}: 1 - frac({m} theta_{})", o.label(), j + 1), &one - &f));
            }
        }
        if o.q() > 0 {
            out.push((
                format!("{}: 1/(6 q)", o.label()),
                NumberExpr::rational(1, 6 * o.q() as i64),
            ));
        }
        out.push((format!("{}: 1/mean", o.label()), o.mean_index().recip()?));
    }
    Ok(out)
}

/// `eps = min(list) / 8`, certified.
///
/// When two candidates cannot be ordered within the budget, a rational lower
/// bound of both replaces them; any smaller `eps` keeps the construction valid.
pub fn choose_epsilon(system: &OrbitSystem, horizon: u64, budget: u32) -> Result<NumberExpr, CijError> {
    require_positive_means(system, budget)?;
    let candidates = epsilon_candidates(system, horizon, budget)?;
    let mut best: Option<NumberExpr> = None;
    for (_, c) in candidates {
        best = Some(match best {
            None => c,
            Some(cur) => match c.compare_certified(&cur, budget) {
                CertifiedOrdering::Less => c,
                CertifiedOrdering::Equal | CertifiedOrdering::Greater => cur,
                CertifiedOrdering::Undecidable => {
                    let lo_c = c.enclosure_at(budget)?.lo().clone();
                    let lo_cur = cur.enclosure_at(budget)?.lo().clone();
                    let lo: BigRational = lo_c.min(lo_cur);
                    if lo <= BigRational::from_integer(0.into()) {
                        return Err(CijError::Undecidable {
                            what: "positive lower bound for epsilon".into(),
                            bits: budget,
                        });
                    }
                    NumberExpr::from_rational(lo)
                }
            },
        });
    }
    let min = best.expect("at least one candidate per orbit");
    Ok(min * NumberExpr::rational(1, 8))
}

/// One component of `v`, with its fractional part cached in fixed point.
struct Component {
    value: NumberExpr,
    frac: NumberExpr,
    fixed: Option<FixedUnit>,
}

struct EpsBounds {
    eps: NumberExpr,
    one_minus: NumberExpr,
    lo: u128,
    hi: u128,
}

impl Component {
    fn new(value: NumberExpr, budget: u32) -> Result<Self, CijError> {
        let frac = value.frac_certified(budget)?.refine(SCAN_BITS)?;
        let fixed = FixedUnit::from_enclosure(frac.enclosure());
        Ok(Self { value, frac, fixed })
    }

    /// `Some(true)` when `frac(k c)` is certainly within `eps` of an integer,
    /// `Some(false)` when certainly not, `None` when undecided at 128 bits.
    fn fast_in_set(&self, k: u64, eps: &EpsBounds) -> Option<bool> {
        let fixed = self.fixed?;
        match fixed.scaled_frac(k) {
            ScaledFrac::Within { lo, hi, .. } => {
                if hi < eps.lo || (lo > 0 && lo.wrapping_neg() < eps.lo) {
                    Some(true)
                } else if lo >= eps.hi && hi > 0 && hi.wrapping_neg() >= eps.hi {
                    Some(false)
                } else {
                    None
                }
            }
            ScaledFrac::NearInteger { below, above, .. } => {
                (below < eps.lo && above < eps.lo).then_some(true)
            }
            ScaledFrac::Wide => None,
        }
    }

    fn exact_in_set(&self, k: u64, eps: &EpsBounds, budget: u32) -> Result<bool, CijError> {
        let f = self.frac.scaled(k).frac_certified(budget)?;
        let undecidable = || CijError::Undecidable {
            what: format!("frac({k} * {}) against epsilon", self.value),
            bits: budget,
        };
        match f.compare_certified(&eps.eps, budget) {
            CertifiedOrdering::Less => return Ok(true),
            CertifiedOrdering::Undecidable => return Err(undecidable()),
            _ => {}
        }
        match f.compare_certified(&eps.one_minus, budget) {
            CertifiedOrdering::Greater => Ok(true),
            CertifiedOrdering::Undecidable => Err(undecidable()),
            _ => Ok(false),
        }
    }

    fn in_set(&self, k: u64, eps: &EpsBounds, budget: u32) -> Result<bool, CijError> {
        match self.fast_in_set(k, eps) {
            Some(v) => Ok(v),
            None => self.exact_in_set(k, eps, budget),
        }
    }
}

fn components(system: &OrbitSystem, budget: u32) -> Result<Vec<Component>, CijError> {
    let mut out = Vec::new();
    for o in system.orbits() {
        let inv = o.mean_index().recip()?;
        out.push(Component::new(inv.clone(), budget)?);
        for theta in o.thetas() {
            out.push(Component::new(theta * &inv, budget)?);
        }
    }
    Ok(out)
}

fn passes(comps: &[Component], k: u64, eps: &EpsBounds, budget: u32) -> Result<bool, CijError> {
    // Cheap certain rejections first, then the exact fallbacks.
    let mut undecided = Vec::new();
    for c in comps {
        match c.fast_in_set(k, eps) {
            Some(false) => return Ok(false),
            Some(true) => {}
            None => undecided.push(c),
        }
    }
    for c in undecided {
        if !c.in_set(k, eps, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest `k` in `[start, bound]` passing the fractional-part test.
fn scan(
    comps: &[Component],
    eps: &EpsBounds,
    start: u64,
    bound: u64,
    budget: u32,
) -> Result<Option<u64>, CijError> {
    let wave = (rayon::current_num_threads() as u64).max(1) * 4;
    let mut lo = start;
    while lo <= bound {
        let wave_end = bound.min(lo.saturating_add(CHUNK * wave - 1));
        let starts: Vec<u64> = (0..wave)
            .map(|i| lo + i * CHUNK)
            .take_while(|&s| s <= wave_end)
            .collect();
        let results: Vec<Result<Option<u64>, CijError>> = starts
            .par_iter()
            .map(|&s| {
                let e = wave_end.min(s + CHUNK - 1);
                for k in s..=e {
                    if passes(comps, k, eps, budget)? {
                        return Ok(Some(k));
                    }
                }
                Ok(None)
            })
            .collect();
        for r in results {
            if let Some(k) = r? {
                return Ok(Some(k));
            }
        }
        if wave_end == u64::MAX {
            break;
        }
        lo = wave_end + 1;
    }
    Ok(None)
}

/// `(m, eta)` from the side of the integer on which `N / mh` falls.
fn jump_for(orbit: &SimpleOrbit, n_jump: u64, eps: &NumberExpr, budget: u32) -> Result<(u64, i8), CijError> {
    let r = NumberExpr::int(n_jump).checked_div(orbit.mean_index())?;
    let fl = r.floor_certified(budget)?;
    let fl = fl
        .to_u64()
        .ok_or_else(|| CijError::Degenerate(format!("orbit {}: N/mean out of range", orbit.label())))?;
    let frac = &r - &NumberExpr::int(fl);
    match frac.compare_certified(eps, budget) {
        CertifiedOrdering::Less => Ok((fl, 1)),
        CertifiedOrdering::Undecidable => Err(CijError::Undecidable {
            what: format!("side of N/mean for orbit {}", orbit.label()),
            bits: budget,
        }),
        _ => Ok((fl + 1, -1)),
    }
}

fn run_in_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T, CijError> + Send,
) -> Result<T, CijError> {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| CijError::Workers(e.to_string()))?
            .install(f),
    }
}

/// Smallest common index jump with `N` in `[min_n, search_bound]`.
pub fn find_common_jump(system: &OrbitSystem, opts: &CijOptions) -> Result<CijSolution, CijError> {
    let budget = opts.budget;
    let eps = choose_epsilon(system, opts.horizon, budget)?;
    let eps_ref = eps.refine(SCAN_BITS)?;
    let (lo, hi) = fixed_bounds(eps_ref.enclosure());
    let bounds = EpsBounds {
        one_minus: NumberExpr::int(1) - eps.clone(),
        eps: eps.clone(),
        lo,
        hi,
    };
    let comps = components(system, budget)?;
    run_in_pool(opts.workers, || {
        let mut start = opts.min_n.max(1);
        loop {
            let Some(k) = scan(&comps, &bounds, start, opts.search_bound, budget)? else {
                return Err(CijError::SearchExhausted {
                    bound: opts.search_bound,
                });
            };
            let mut entries = Vec::with_capacity(system.len());
            let mut usable = true;
            for o in system.orbits() {
                let (m, eta) = jump_for(o, k, &eps, budget)?;
                if 2 * m < opts.horizon + 1 {
                    usable = false;
                    break;
                }
                entries.push(CijEntry {
                    label: o.label().to_string(),
                    m,
                    eta,
                });
            }
            if usable {
                let sol = CijSolution {
                    n_jump: k,
                    entries,
                    epsilon: eps.clone(),
                    horizon: opts.horizon,
                };
                let report = verify_solution(system, &sol)?;
                if let Some(bad) = report.checks.iter().find(|c| !c.passed) {
                    return Err(CijError::VerificationFailure(bad.description.clone()));
                }
                return Ok(sol);
            }
            if k == u64::MAX {
                return Err(CijError::SearchExhausted {
                    bound: opts.search_bound,
                });
            }
            start = k + 1;
        }
    })
}

/// Whether some `k` in `[start, end]` passes the fractional-part test at `eps`.
/// Used to re-check minimality of a returned `N`.
pub fn first_recurrence(
    system: &OrbitSystem,
    eps: &NumberExpr,
    start: u64,
    end: u64,
    budget: u32,
) -> Result<Option<u64>, CijError> {
    let eps_ref = eps.refine(SCAN_BITS)?;
    let (lo, hi) = fixed_bounds(eps_ref.enclosure());
    let bounds = EpsBounds {
        one_minus: NumberExpr::int(1) - eps.clone(),
        eps: eps.clone(),
        lo,
        hi,
    };
    let comps = components(system, budget)?;
    scan(&comps, &bounds, start, end, budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Lower,
    Upper,
    WindowLow,
    WindowHigh,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    /// The `m` of the identity; `0` for the window inequalities.
    pub m: u64,
    pub passed: bool,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Re-checks every identity of a solution through `iterate_index`.
///
/// Per orbit this is `2M` identities plus the two sides of the window
/// inequality at `2 m_i`.
pub fn verify_solution(system: &OrbitSystem, sol: &CijSolution) -> Result<VerificationReport, CijError> {
    let n_big = 2 * sol.n_jump as i64;
    let mut checks = Vec::new();
    for o in system.orbits() {
        let label = o.label().to_string();
        let Some(entry) = sol.entry(&label) else {
            checks.push(Check {
                label: label.clone(),
                kind: CheckKind::WindowLow,
                m: 0,
                passed: false,
                description: format!("orbit {label} missing from solution"),
            });
            continue;
        };
        let mi = entry.m;
        for m in 1..=sol.horizon {
            let mu_m = o.iterate_index(m)?;
            if 2 * mi > m {
                let lhs = o.iterate_index(2 * mi - m)?;
                checks.push(Check {
                    label: label.clone(),
                    kind: CheckKind::Lower,
                    m,
                    passed: lhs == n_big - mu_m,
                    description: format!(
                        "{label}: mu(g^{}) = {lhs} vs 2N - mu(g^{m}) = {}",
                        2 * mi - m,
                        n_big - mu_m
                    ),
                });
            } else {
                checks.push(Check {
                    label: label.clone(),
                    kind: CheckKind::Lower,
                    m,
                    passed: false,
                    description: format!("{label}: iterate 2m_i - {m} is not positive"),
                });
            }
            let rhs = o.iterate_index(2 * mi + m)?;
            checks.push(Check {
                label: label.clone(),
                kind: CheckKind::Upper,
                m,
                passed: rhs == n_big + mu_m,
                description: format!(
                    "{label}: mu(g^{}) = {rhs} vs 2N + mu(g^{m}) = {}",
                    2 * mi + m,
                    n_big + mu_m
                ),
            });
        }
        let slack = o.n() as i64 - 1;
        let mid = if mi > 0 { Some(o.iterate_index(2 * mi)?) } else { None };
        for (kind, ok, what) in [
            (
                CheckKind::WindowLow,
                mid.is_some_and(|v| n_big - slack <= v),
                format!("2N - (n-1) = {} <= mu(g^{})", n_big - slack, 2 * mi),
            ),
            (
                CheckKind::WindowHigh,
                mid.is_some_and(|v| v <= n_big + slack),
                format!("mu(g^{}) <= 2N + (n-1) = {}", 2 * mi, n_big + slack),
            ),
        ] {
            checks.push(Check {
                label: label.clone(),
                kind,
                m: 0,
                passed: ok,
                description: match mid {
                    Some(v) => format!("{label}: {what} = {v}"),
                    None => format!("{label}: {what} (no iterate)"),
                },
            });
        }
    }
    Ok(VerificationReport { checks })
}

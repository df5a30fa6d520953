//! Graded tables of good iterates and Morse-type cancellation feasibility.
//!
//! The target is the positive equivariant homology of the sphere: rank one
//! in each degree `n - 1 + 2k` (`k >= 1`) and zero elsewhere. A table is
//! feasible when surplus generators can be cancelled in pairs of adjacent
//! degrees, the upper generator having strictly larger action, so that the
//! survivors match the target in every degree of the complete window.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::{CertifiedOrdering, NumberExpr};
use crate::index::{index_spectrum, max_iterate, IndexError, IterateRecord, OrbitSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomologyError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("actions of {a} and {b} cannot be compared within {bits} bits")]
    Undecidable { a: String, b: String, bits: u32 },
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

impl HomologyError {
    pub fn is_budget_exhausted(&self) -> bool {
        match self {
            HomologyError::Undecidable { .. } => true,
            HomologyError::Index(e) => e.is_budget_exhausted(),
            HomologyError::InvalidTable(_) => false,
        }
    }
}

/// Rank of the target homology in `degree`.
pub fn target_betti(n: usize, degree: i64) -> u32 {
    let n = n as i64;
    u32::from(degree > n && (degree - n - 1) % 2 == 0)
}

/// Good iterates graded by index, with the degree range known to be complete.
#[derive(Debug, Clone, Serialize)]
pub struct GradedGeneratorTable {
    pub n: usize,
    pub cap: NumberExpr,
    pub entries: BTreeMap<i64, Vec<IterateRecord>>,
    /// Degrees `d` for which every iterate of index `<= d + 1` is present.
    pub window: Option<(i64, i64)>,
    #[serde(skip)]
    budget: u32,
}

impl GradedGeneratorTable {
    /// A table from explicit records (all assumed good), e.g. synthetic data.
    pub fn from_records(
        n: usize,
        cap: NumberExpr,
        records: impl IntoIterator<Item = IterateRecord>,
        window: Option<(i64, i64)>,
        budget: u32,
    ) -> Self {
        let mut entries: BTreeMap<i64, Vec<IterateRecord>> = BTreeMap::new();
        for r in records {
            entries.entry(r.index).or_default().push(r);
        }
        Self {
            n,
            cap,
            entries,
            window,
            budget,
        }
    }

    pub fn count(&self, degree: i64) -> usize {
        self.entries.get(&degree).map_or(0, Vec::len)
    }

    pub fn generators(&self, degree: i64) -> &[IterateRecord] {
        self.entries.get(&degree).map_or(&[], Vec::as_slice)
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn in_window(&self, degree: i64) -> bool {
        self.window.is_some_and(|(lo, hi)| lo <= degree && degree <= hi)
    }
}

/// Highest degree `d` with every iterate of index `<= d + 1` below the cap.
///
/// From `mu(g^l) > l mh - (n - 1)`, an iterate of index `<= d + 1` has
/// `l < (d + n) / mh`; all such `l` are below the cap iff
/// `d <= (l_K + 1) mh - n`, with `l_K = floor(K / A)`.
pub fn window_top(system: &OrbitSystem, cap: &NumberExpr, budget: u32) -> Result<Option<i64>, HomologyError> {
    let mut top: Option<i64> = None;
    for o in system.orbits() {
        if o.mean_index().sign_certified(budget) != CertifiedOrdering::Greater {
            return Ok(None);
        }
        let lk = max_iterate(o, cap, budget)?;
        let reach = o.mean_index().scaled(BigInt::from(lk) + 1);
        let f = reach.floor_certified(budget).map_err(IndexError::from)?;
        let f = f.to_i64().ok_or_else(|| {
            HomologyError::InvalidTable("complete window exceeds the i64 range".into())
        })?;
        let d = f - system.n() as i64;
        top = Some(top.map_or(d, |t| t.min(d)));
    }
    Ok(top)
}

/// Complete window `[1 - n, top]`; `None` when empty or undefined.
pub fn complete_window(
    system: &OrbitSystem,
    cap: &NumberExpr,
    budget: u32,
) -> Result<Option<(i64, i64)>, HomologyError> {
    let lo = 1 - system.n() as i64;
    Ok(window_top(system, cap, budget)?.filter(|&hi| hi >= lo).map(|hi| (lo, hi)))
}

/// An action cap whose complete window reaches at least `target`.
pub fn cap_for_window(system: &OrbitSystem, target: i64, budget: u32) -> Result<NumberExpr, HomologyError> {
    let mut best: Option<NumberExpr> = None;
    for o in system.orbits() {
        if o.mean_index().sign_certified(budget) != CertifiedOrdering::Greater {
            return Err(HomologyError::InvalidTable(format!(
                "orbit {} has non-positive mean index",
                o.label()
            )));
        }
        let need = NumberExpr::int(target + system.n() as i64).checked_div(o.mean_index())
            .map_err(IndexError::from)?;
        // L = ceil(need); iterates up to L - 1 must fit under the cap.
        let f = need.floor_certified(budget).map_err(IndexError::from)?;
        let exact = need.compare_certified(&NumberExpr::int(f.clone()), budget) == CertifiedOrdering::Equal;
        let ceil: BigInt = if exact { f } else { f + 1 };
        let ell: BigInt = (ceil - BigInt::from(1)).max(BigInt::from(1));
        let k = o.action().scaled(ell);
        best = Some(match best {
            None => k,
            Some(cur) => match k.compare_certified(&cur, budget) {
                CertifiedOrdering::Greater => k,
                CertifiedOrdering::Undecidable => {
                    return Err(HomologyError::Undecidable {
                        a: k.to_string(),
                        b: cur.to_string(),
                        bits: budget,
                    })
                }
                _ => cur,
            },
        });
    }
    best.ok_or_else(|| HomologyError::InvalidTable("empty system".into()))
}

/// Good iterates with action at most `cap`, graded by index.
pub fn generator_table(
    system: &OrbitSystem,
    cap: &NumberExpr,
    budget: u32,
) -> Result<GradedGeneratorTable, HomologyError> {
    let records = index_spectrum(system, cap, budget)?
        .into_iter()
        .filter(|r| r.good);
    let window = if system.is_empty() {
        None
    } else {
        complete_window(system, cap, budget)?
    };
    Ok(GradedGeneratorTable::from_records(
        system.n(),
        cap.clone(),
        records,
        window,
        budget,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CancelPair {
    /// Generator at degree `d + 1`.
    pub source: IterateRecord,
    /// Generator at degree `d`.
    pub target: IterateRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingCertificate {
    pub window: (i64, i64),
    pub pairs: Vec<CancelPair>,
    /// Unpaired generators with degree inside the window.
    pub survivors: Vec<IterateRecord>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible(MatchingCertificate),
    /// The constraints on degrees `witness ..= top` cannot all be met.
    Infeasible { witness: i64, window: (i64, i64) },
    /// No complete window: nothing can be concluded.
    Inconclusive,
}

impl Feasibility {
    pub fn certificate(&self) -> Option<&MatchingCertificate> {
        match self {
            Feasibility::Feasible(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Survivor count per degree of a certificate.
pub fn homology_of_certificate(cert: &MatchingCertificate) -> BTreeMap<i64, u32> {
    let mut out = BTreeMap::new();
    for s in &cert.survivors {
        *out.entry(s.index).or_insert(0) += 1;
    }
    out
}

/// Dinic max flow on a small graph.
struct Flow {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl Flow {
    fn new(nodes: usize) -> Self {
        Self {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, u: usize, v: usize, c: i64) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [i32]) -> bool {
        level.iter_mut().for_each(|l| *l = -1);
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64, level: &[i32], it: &mut [usize]) -> i64 {
        if u == t {
            return f;
        }
        while it[u] < self.head[u].len() {
            let e = self.head[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let got = self.dfs(v, t, f.min(self.cap[e]), level, it);
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            it[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.head.len();
        let mut total = 0;
        let mut level = vec![-1; n];
        while self.bfs(s, t, &mut level) {
            let mut it = vec![0; n];
            loop {
                let f = self.dfs(s, t, i64::MAX, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Required number of paired generators per degree; `None` is unconstrained.
type Quotas = BTreeMap<i64, Option<usize>>;

struct Instance<'a> {
    gens: Vec<(i64, &'a IterateRecord)>,
    /// `(even-degree generator, odd-degree generator)` pairs allowed to cancel.
    edges: Vec<(usize, usize)>,
}

fn build_instance<'a>(table: &'a GradedGeneratorTable, lo: i64, top: i64) -> Result<Instance<'a>, HomologyError> {
    let mut gens = Vec::new();
    for d in lo..=top {
        for r in table.generators(d) {
            gens.push((d, r));
        }
    }
    let budget = table.budget;
    let mut edges = Vec::new();
    for (i, (di, ri)) in gens.iter().enumerate() {
        for (j, (dj, rj)) in gens.iter().enumerate() {
            if *dj != di + 1 {
                continue;
            }
            let ord = rj.action.compare_certified(&ri.action, budget);
            let allowed = match ord {
                CertifiedOrdering::Greater => true,
                CertifiedOrdering::Less | CertifiedOrdering::Equal => false,
                CertifiedOrdering::Undecidable => {
                    return Err(HomologyError::Undecidable {
                        a: format!("{}^{}", rj.label, rj.ell),
                        b: format!("{}^{}", ri.label, ri.ell),
                        bits: budget,
                    })
                }
            };
            if allowed {
                if di.rem_euclid(2) == 0 {
                    edges.push((i, j));
                } else {
                    edges.push((j, i));
                }
            }
        }
    }
    Ok(Instance { gens, edges })
}

/// Finds a cancellation meeting the quotas exactly, as a set of edge indices.
fn solve(inst: &Instance<'_>, quotas: &Quotas) -> Option<Vec<usize>> {
    let mut degrees: Vec<i64> = inst.gens.iter().map(|g| g.0).collect();
    degrees.extend(quotas.keys().copied());
    degrees.sort_unstable();
    degrees.dedup();
    let count = |d: i64| inst.gens.iter().filter(|g| g.0 == d).count();
    let dindex = |d: i64| degrees.binary_search(&d).unwrap();

    let g0 = 0;
    let d0 = inst.gens.len();
    let s = d0 + degrees.len();
    let t = s + 1;
    let ss = t + 1;
    let tt = ss + 1;
    let mut flow = Flow::new(tt + 1);
    let mut excess = vec![0i64; tt + 1];
    let mut lower = |flow: &mut Flow, u: usize, v: usize, lo: i64, hi: i64| {
        flow.add(u, v, hi - lo);
        excess[v] += lo;
        excess[u] -= lo;
    };
    for &d in &degrees {
        let c = count(d) as i64;
        let (lo, hi) = match quotas.get(&d).copied().flatten() {
            Some(q) => {
                if q as i64 > c {
                    return None;
                }
                (q as i64, q as i64)
            }
            None => (0, c),
        };
        let node = d0 + dindex(d);
        if d.rem_euclid(2) == 0 {
            lower(&mut flow, s, node, lo, hi);
        } else {
            lower(&mut flow, node, t, lo, hi);
        }
    }
    for (i, (d, _)) in inst.gens.iter().enumerate() {
        let node = d0 + dindex(*d);
        if d.rem_euclid(2) == 0 {
            flow.add(node, g0 + i, 1);
        } else {
            flow.add(g0 + i, node, 1);
        }
    }
    let edge_ids: Vec<usize> = inst
        .edges
        .iter()
        .map(|&(a, b)| flow.add(g0 + a, g0 + b, 1))
        .collect();
    flow.add(t, s, i64::MAX / 4);
    let mut need = 0;
    for (v, &e) in excess.iter().enumerate() {
        if e > 0 {
            flow.add(ss, v, e);
            need += e;
        } else if e < 0 {
            flow.add(v, tt, -e);
        }
    }
    if flow.max_flow(ss, tt) != need {
        return None;
    }
    Some(
        edge_ids
            .iter()
            .enumerate()
            .filter(|(_, &id)| flow.cap[id] == 0)
            .map(|(k, _)| k)
            .collect(),
    )
}

fn quotas_for(table: &GradedGeneratorTable, lo: i64, hi: i64, from: i64) -> Option<Quotas> {
    let mut q = Quotas::new();
    for d in lo..=hi + 1 {
        if d < from || d > hi {
            q.insert(d, None);
            continue;
        }
        let c = table.count(d);
        let b = target_betti(table.n, d) as usize;
        if c < b {
            return None;
        }
        q.insert(d, Some(c - b));
    }
    Some(q)
}

/// Decides whether the surplus generators of the complete window can be
/// cancelled against adjacent degrees with strictly decreasing action.
///
/// Generators one degree above the window may absorb cancellations but
/// carry no constraint of their own. When infeasible, the witness is the
/// largest degree `d` such that the constraints on `d ..= top` already
/// conflict.
pub fn morse_feasibility(table: &GradedGeneratorTable) -> Result<Feasibility, HomologyError> {
    let Some((lo, hi)) = table.window else {
        return Ok(Feasibility::Inconclusive);
    };
    let inst = build_instance(table, lo, hi + 1)?;
    let feasible_from = |from: i64| -> Option<Vec<usize>> {
        let quotas = quotas_for(table, lo, hi, from)?;
        solve(&inst, &quotas)
    };
    if let Some(chosen) = feasible_from(lo) {
        let mut paired = vec![false; inst.gens.len()];
        let mut pairs = Vec::new();
        for k in chosen {
            let (a, b) = inst.edges[k];
            paired[a] = true;
            paired[b] = true;
            let (upper, lower) = if inst.gens[a].0 > inst.gens[b].0 { (a, b) } else { (b, a) };
            pairs.push(CancelPair {
                source: inst.gens[upper].1.clone(),
                target: inst.gens[lower].1.clone(),
            });
        }
        pairs.sort_by_key(|p| (p.target.index, p.target.label.clone(), p.target.ell));
        let survivors = inst
            .gens
            .iter()
            .zip(&paired)
            .filter(|((d, _), p)| !**p && *d <= hi)
            .map(|((_, r), _)| (*r).clone())
            .collect();
        return Ok(Feasibility::Feasible(MatchingCertificate {
            window: (lo, hi),
            pairs,
            survivors,
        }));
    }
    let mut witness = lo;
    for d in (lo..=hi).rev() {
        if feasible_from(d).is_none() {
            witness = d;
            break;
        }
    }
    Ok(Feasibility::Infeasible {
        witness,
        window: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{RotationDecomposition, SimpleOrbit};

    fn rec(label: &str, index: i64, action: i64) -> IterateRecord {
        IterateRecord {
            label: label.into(),
            ell: 1,
            index,
            good: true,
            action: NumberExpr::int(action),
        }
    }

    fn table(n: usize, recs: Vec<IterateRecord>, window: (i64, i64)) -> GradedGeneratorTable {
        GradedGeneratorTable::from_records(n, NumberExpr::int(100), recs, Some(window), 256)
    }

    #[test]
    fn betti_examples() {
        assert_eq!(target_betti(2, 3), 1);
        assert_eq!(target_betti(2, 4), 0);
        assert_eq!(target_betti(3, 2), 0);
        assert_eq!(target_betti(3, 4), 1);
    }

    #[test]
    fn forced_cancellation_starves_degree_three() {
        let t = table(2, vec![rec("a", 3, 1), rec("b", 4, 2)], (-1, 4));
        match morse_feasibility(&t).unwrap() {
            Feasibility::Infeasible { witness, .. } => assert_eq!(witness, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cancellation_with_spare_generator() {
        let t = table(2, vec![rec("a", 3, 1), rec("a'", 3, 3), rec("b", 4, 2)], (-1, 4));
        let Feasibility::Feasible(cert) = morse_feasibility(&t).unwrap() else {
            panic!("expected feasible");
        };
        assert_eq!(cert.pairs.len(), 1);
        assert_eq!(cert.pairs[0].source.label, "b");
        assert_eq!(cert.pairs[0].target.label, "a");
        assert_eq!(homology_of_certificate(&cert), BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn ties_forbid_pairing() {
        let t = table(2, vec![rec("a", 3, 2), rec("a'", 3, 3), rec("b", 4, 2)], (-1, 4));
        assert!(!morse_feasibility(&t).unwrap().is_feasible());
    }

    #[test]
    fn ellipsoid_table_is_perfect() {
        let sqrt2: NumberExpr = "(sqrt 2)".parse().unwrap();
        let inv = NumberExpr::int(1).checked_div(&sqrt2).unwrap();
        let g1 = SimpleOrbit::new("g1", 2, NumberExpr::int(1), RotationDecomposition::new(2, vec![inv])).unwrap();
        let g2 = SimpleOrbit::new(
            "g2",
            2,
            sqrt2.clone(),
            RotationDecomposition::new(4, vec![&sqrt2 - &NumberExpr::int(1)]),
        )
        .unwrap();
        let sys = OrbitSystem::new(2, vec![g1, g2]).unwrap();
        let t = generator_table(&sys, &NumberExpr::int(5), 256).unwrap();
        let degrees: Vec<i64> = t.entries.keys().copied().collect();
        assert_eq!(&degrees[..6], &[3, 5, 7, 9, 11, 13]);
        let (_, hi) = t.window.unwrap();
        assert!(hi >= 11);
        let Feasibility::Feasible(cert) = morse_feasibility(&t).unwrap() else {
            panic!("expected feasible");
        };
        assert!(cert.pairs.is_empty());
        let cap = cap_for_window(&sys, 21, 256).unwrap();
        let t = generator_table(&sys, &cap, 256).unwrap();
        assert!(t.window.unwrap().1 >= 21);
    }

    #[test]
    fn parity_rule_drops_bad_iterates() {
        let g = SimpleOrbit::new("g", 2, NumberExpr::int(1), RotationDecomposition::hyperbolic(1)).unwrap();
        let sys = OrbitSystem::new(2, vec![g]).unwrap();
        let t = generator_table(&sys, &NumberExpr::int(10), 256).unwrap();
        assert!(t.entries.keys().all(|d| d % 2 == 1));
        assert_eq!(t.entries.len(), 5);
    }

    #[test]
    fn empty_system_has_empty_table() {
        let sys = OrbitSystem::new(2, vec![]).unwrap();
        let t = generator_table(&sys, &NumberExpr::int(10), 256).unwrap();
        assert!(t.entries.is_empty());
        assert!(matches!(morse_feasibility(&t).unwrap(), Feasibility::Inconclusive));
    }
}

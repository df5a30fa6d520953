//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reeb_index_core::arith::Enclosure;
use reeb_index_core::homology::target_betti;
use reeb_index_core::{EllipsoidSpec, IterateRecord, NumberExpr};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Radius `r * sqrt(m)` with `r` rational and `m` squarefree.
#[derive(Debug, Clone)]
pub struct Radius {
    pub r: BigRational,
    pub m: u64,
}

impl Radius {
    pub fn expr(&self) -> NumberExpr {
        let root = if self.m == 1 {
            NumberExpr::int(1)
        } else {
            NumberExpr::sqrt_int(self.m as i64)
        };
        if self.r.is_one() {
            root
        } else {
            NumberExpr::from_rational(self.r.clone()) * root
        }
    }
}

const SQUAREFREE: [u64; 9] = [1, 2, 3, 5, 6, 7, 10, 11, 13];

/// Radii with pairwise irrational ratios: distinct squarefree parts.
pub fn random_radii(rng: &mut ChaCha8Rng, n: usize) -> Vec<Radius> {
    let mut pool = SQUAREFREE.to_vec();
    pool.shuffle(rng);
    pool.truncate(n);
    pool.into_iter()
        .map(|m| {
            let den = rng.gen_range(1..=4i64);
            let num = rng.gen_range(den..=2 * den);
            Radius {
                r: BigRational::new(num.into(), den.into()),
                m,
            }
        })
        .collect()
}

pub fn spec_of(radii: &[Radius]) -> EllipsoidSpec {
    EllipsoidSpec::new(radii.iter().map(Radius::expr).collect()).unwrap()
}

/// `floor(sqrt(x))` for a non-negative rational, in integers only.
fn floor_sqrt(x: &BigRational) -> BigInt {
    // floor(sqrt(P/Q)) = floor(isqrt(P Q) / Q)
    let (p, q) = (x.numer(), x.denom());
    (p * q).sqrt() / q
}

/// `n - 1 + 2 sum_j floor(ell a_k / a_j)` using only integer square roots.
pub fn ellipsoid_index_oracle(radii: &[Radius], k: usize, ell: u64) -> i64 {
    let n = radii.len() as i64;
    let l = BigRational::from_integer(ell.into());
    let mut total = BigInt::from(n - 1);
    for a in radii {
        // (ell a_k / a_j)^2 = ell^2 (r_k/r_j)^2 m_k / m_j
        let s = &l * &radii[k].r / &a.r;
        let sq = &s * &s * BigRational::new(radii[k].m.into(), a.m.into());
        total += 2 * floor_sqrt(&sq);
    }
    total.to_i64().unwrap()
}

/// Fresh 200-bit enclosures of the thetas.
pub fn theta_enclosures(thetas: &[NumberExpr]) -> Vec<Enclosure> {
    thetas.iter().map(|t| t.enclosure_at(200).unwrap()).collect()
}

/// Long's formula on rational theta enclosures; `None` if a floor is ambiguous.
pub fn long_index_from(p: i64, encs: &[Enclosure], ell: u64) -> Option<i64> {
    let l = BigRational::from_integer(ell.into());
    let mut total = BigInt::from(ell) * p + encs.len() as i64;
    for enc in encs {
        let lo = (&l * enc.lo()).floor().to_integer();
        let hi = (&l * enc.hi()).floor().to_integer();
        if lo != hi {
            return None;
        }
        total += 2 * lo;
    }
    total.to_i64()
}

pub fn long_index_oracle(p: i64, thetas: &[NumberExpr], ell: u64) -> Option<i64> {
    long_index_from(p, &theta_enclosures(thetas), ell)
}

/// Exact floor of a rational.
pub fn rational_floor(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// Independent 128-bit enclosure of `1/sqrt(2)` from integer square roots.
pub fn inv_sqrt2_enclosure(bits: u32) -> (BigRational, BigRational) {
    let scale = BigInt::one() << (2 * bits as usize);
    // sqrt(2^{2b} / 2) = 2^b / sqrt 2
    let s = (&scale / 2u32).sqrt();
    let den = BigInt::one() << bits as usize;
    (
        BigRational::new(s.clone(), den.clone()),
        BigRational::new(s + 1, den),
    )
}

/// Brute-force jump search for one orbit `(p, q = 1, theta)` with `theta`
/// given by a rational enclosure: smallest `N` with every component of
/// `N v` within `eps` of an integer, where `v = (1/mh, theta/mh)`.
pub fn brute_single_orbit_jump(
    p: i64,
    theta: &(BigRational, BigRational),
    eps: &BigRational,
    horizon: u64,
    bound: u64,
) -> Option<(u64, u64, i8)> {
    let two = BigRational::from_integer(2.into());
    let mh = (
        BigRational::from_integer(p.into()) + &two * &theta.0,
        BigRational::from_integer(p.into()) + &two * &theta.1,
    );
    let near = |lo: &BigRational, hi: &BigRational| -> Option<bool> {
        // returns Some(true) if certainly near an integer, Some(false) if certainly not
        let fl = lo.floor();
        if hi.floor() != fl {
            return None;
        }
        let (flo, fhi) = (lo - &fl, hi - &fl);
        if fhi < *eps || flo > BigRational::one() - eps {
            Some(true)
        } else if flo >= *eps && fhi <= BigRational::one() - eps {
            Some(false)
        } else {
            None
        }
    };
    for n in 1..=bound {
        let nn = BigRational::from_integer(n.into());
        let c1 = (&nn / &mh.1, &nn / &mh.0);
        let c2 = (&nn * &theta.0 / &mh.1, &nn * &theta.1 / &mh.0);
        if near(&c1.0, &c1.1)? && near(&c2.0, &c2.1)? {
            let fl = c1.0.floor().to_integer().to_u64()?;
            let below = &c1.1 - BigRational::from_integer(fl.into()) < *eps;
            let (m, eta) = if below { (fl, 1) } else { (fl + 1, -1) };
            if 2 * m > horizon {
                return Some((n, m, eta));
            }
        }
    }
    None
}

/// Synthetic generator.
pub fn record(label: &str, index: i64, action: i64) -> IterateRecord {
    IterateRecord {
        label: label.into(),
        ell: 1,
        index,
        good: true,
        action: NumberExpr::int(action),
    }
}

/// Exhaustive search over action-respecting partial matchings of
/// generators in `[lo, hi + 1]`: survivors inside `[lo, hi]` must match
/// the target ranks; degree `hi + 1` is unconstrained.
pub fn exhaustive_feasible(n: usize, gens: &[(i64, i64)], lo: i64, hi: i64) -> bool {
    let gens: Vec<(i64, i64)> = gens.iter().copied().filter(|g| g.0 >= lo && g.0 <= hi + 1).collect();
    let mut used = vec![false; gens.len()];
    fn ok(n: usize, gens: &[(i64, i64)], used: &[bool], lo: i64, hi: i64) -> bool {
        let mut counts: BTreeMap<i64, u32> = BTreeMap::new();
        for (g, u) in gens.iter().zip(used) {
            if !u {
                *counts.entry(g.0).or_default() += 1;
            }
        }
        (lo..=hi).all(|d| counts.get(&d).copied().unwrap_or(0) == target_betti(n, d))
    }
    fn go(i: usize, n: usize, gens: &[(i64, i64)], used: &mut [bool], lo: i64, hi: i64) -> bool {
        if i == gens.len() {
            return ok(n, gens, used, lo, hi);
        }
        if used[i] {
            return go(i + 1, n, gens, used, lo, hi);
        }
        // leave i unmatched
        if go(i + 1, n, gens, used, lo, hi) {
            return true;
        }
        for j in i + 1..gens.len() {
            if used[j] {
                continue;
            }
            let (a, b) = (gens[i], gens[j]);
            let pairable = (a.0 == b.0 + 1 && a.1 > b.1) || (b.0 == a.0 + 1 && b.1 > a.1);
            if pairable {
                used[i] = true;
                used[j] = true;
                let r = go(i + 1, n, gens, used, lo, hi);
                used[i] = false;
                used[j] = false;
                if r {
                    return true;
                }
            }
        }
        false
    }
    go(0, n, &gens, &mut used, lo, hi)
}

/// Random synthetic table `(degree, action)` with at most `max_gens` entries.
pub fn random_table(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64, max_gens: usize) -> Vec<(i64, i64)> {
    let mut gens = Vec::new();
    if rng.gen_bool(0.7) {
        for d in lo..=hi {
            if target_betti(n, d) == 1 && gens.len() < max_gens {
                gens.push((d, rng.gen_range(1..=20)));
            }
        }
    }
    while gens.len() + 2 <= max_gens && rng.gen_bool(0.6) {
        let d = rng.gen_range(lo..=hi);
        let a = rng.gen_range(1..=20);
        if rng.gen_bool(0.8) {
            gens.push((d + 1, a + rng.gen_range(0..=5)));
            gens.push((d, a));
        } else {
            gens.push((d, a));
        }
    }
    gens
}

pub fn sign(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

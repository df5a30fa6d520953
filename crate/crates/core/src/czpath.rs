//! Conley-Zehnder index of a sampled symplectic path, computed as the degree
//! of `rho^2` along an admissible extension.
//!
//! Coordinates are `(x_1..x_d, y_1..y_d)` with `J = [[0, -I], [I, 0]]`; the
//! `k`-th elementary block acts on the `(x_k, y_k)` plane. The unitary part
//! `[[A, -B], [B, A]]` of each sample is identified with `A + iB` in `U(d)`,
//! and the index is the winding number of `det(A + iB)^2`.
//!
//! This module is a floating-point oracle: its output is an integer with a
//! wide decision margin, and undersampling or non-integral winding is
//! reported rather than rounded away.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{ArithError, NumberExpr, DEFAULT_BUDGET_BITS};
use crate::index::RotationDecomposition;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SAMPLES_PER_UNIT: usize = 512;
const STAGE_SAMPLES: usize = 64;
const MAX_UNWRAP_STEP: f64 = PI / 2.0;
const WINDING_SLACK: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CzError {
    #[error("path has no samples")]
    Empty,
    #[error("sample {index}: expected a {expected}x{expected} matrix")]
    BadShape { index: usize, expected: usize },
    #[error("sample times must increase strictly from 0 to 1 (problem at sample {index})")]
    BadTimes { index: usize },
    #[error("path must start at the identity")]
    NotAtIdentity,
    #[error("sample at t = {t} is not symplectic (defect {defect:e})")]
    NotSymplectic { t: f64, defect: f64 },
    #[error("endpoint has eigenvalue 1: |det(psi(1) - I)| = {det:e}")]
    DegenerateEndpoint { det: f64 },
    #[error("admissible extension failed: {0}")]
    ExtensionFailure(String),
    #[error("unwrapping step {step:.3} rad at t = {t} exceeds pi/2; increase sampling")]
    UndersampledPath { t: f64, step: f64 },
    #[error("winding {winding:.4} is not within 0.1 of an integer")]
    NonIntegerWinding { winding: f64 },
    #[error("invalid block spec: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A sampled path `psi: [0, 1] -> Sp(2d)` with `psi(0) = I`.
#[derive(Debug, Clone)]
pub struct SymplecticPath {
    d: usize,
    samples: Vec<(f64, DMatrix<f64>)>,
    tolerance: f64,
}

fn standard_j(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        j[(k, d + k)] = -1.0;
        j[(d + k, k)] = 1.0;
    }
    j
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn symplectic_defect(m: &DMatrix<f64>, j: &DMatrix<f64>) -> f64 {
    let scale = max_abs(m).max(1.0);
    max_abs(&(m.transpose() * j * m - j)) / (scale * scale)
}

fn det_minus_identity(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::identity(n, n)).determinant()
}

impl SymplecticPath {
    pub fn new(samples: Vec<(f64, DMatrix<f64>)>, tolerance: f64) -> Result<Self, CzError> {
        let first = samples.first().ok_or(CzError::Empty)?;
        let size = first.1.nrows();
        if size == 0 || size % 2 != 0 {
            return Err(CzError::BadShape {
                index: 0,
                expected: size.max(2),
            });
        }
        let d = size / 2;
        let j = standard_j(d);
        for (i, (t, m)) in samples.iter().enumerate() {
            if m.nrows() != size || m.ncols() != size {
                return Err(CzError::BadShape {
                    index: i,
                    expected: size,
                });
            }
            let ordered = if i == 0 {
                *t == 0.0
            } else {
                *t > samples[i - 1].0
            };
            if !ordered || !t.is_finite() {
                return Err(CzError::BadTimes { index: i });
            }
            let defect = symplectic_defect(m, &j);
            if defect > tolerance {
                return Err(CzError::NotSymplectic { t: *t, defect });
            }
        }
        if samples.len() < 2 || samples.last().unwrap().0 != 1.0 {
            return Err(CzError::BadTimes {
                index: samples.len() - 1,
            });
        }
        if max_abs(&(&first.1 - DMatrix::identity(size, size))) > tolerance {
            return Err(CzError::NotAtIdentity);
        }
        let det = det_minus_identity(&samples.last().unwrap().1);
        if det.abs() <= tolerance {
            return Err(CzError::DegenerateEndpoint { det });
        }
        Ok(Self {
            d,
            samples,
            tolerance,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn samples(&self) -> &[(f64, DMatrix<f64>)] {
        &self.samples
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn endpoint(&self) -> &DMatrix<f64> {
        &self.samples.last().unwrap().1
    }

    /// One sample per line: `t m11 m12 ... m_{2d,2d}` (row-major).
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_text(text: &str, tolerance: f64) -> Result<Self, CzError> {
        let mut samples = Vec::new();
        let mut width = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| CzError::Parse {
                        line: lineno + 1,
                        message: format!("invalid number {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let entries = values.len() - 1;
            let size = (entries as f64).sqrt().round() as usize;
            if size * size != entries || size == 0 || size % 2 != 0 {
                return Err(CzError::Parse {
                    line: lineno + 1,
                    message: format!("{entries} matrix entries do not form a 2d x 2d matrix"),
                });
            }
            if *width.get_or_insert(size) != size {
                return Err(CzError::Parse {
                    line: lineno + 1,
                    message: "matrix size changes between samples".into(),
                });
            }
            samples.push((values[0], DMatrix::from_row_slice(size, size, &values[1..])));
        }
        Self::new(samples, tolerance)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, m) in &self.samples {
            out.push_str(&format!("{t:e}"));
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push_str(&format!(" {:e}", m[(i, j)]));
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StandardEndpoint {
    /// `-I`, reached when `det(psi(1) - I) > 0`.
    WPlus,
    /// `diag(2, -1, ..., -1, 1/2, -1, ..., -1)`.
    WMinus,
}

impl StandardEndpoint {
    pub fn matrix(self, d: usize) -> DMatrix<f64> {
        let mut m = -DMatrix::identity(2 * d, 2 * d);
        if self == StandardEndpoint::WMinus {
            m[(0, 0)] = 2.0;
            m[(d, d)] = 0.5;
        }
        m
    }
}

/// The original path followed by an extension on `(1, 2]` to `W+` or `W-`.
#[derive(Debug, Clone)]
pub struct ExtendedPath {
    d: usize,
    samples: Vec<(f64, DMatrix<f64>)>,
    endpoint: StandardEndpoint,
}

impl ExtendedPath {
    pub fn samples(&self) -> &[(f64, DMatrix<f64>)] {
        &self.samples
    }

    pub fn endpoint(&self) -> StandardEndpoint {
        self.endpoint
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

fn rot2(phi: f64) -> [[f64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn set_block(m: &mut DMatrix<f64>, d: usize, k: usize, b: [[f64; 2]; 2]) {
    let idx = [k, d + k];
    for i in 0..2 {
        for j in 0..2 {
            m[(idx[i], idx[j])] = b[i][j];
        }
    }
}

/// `R(phi) diag(a, 1/a)`, optionally conjugated by `R(conj)`.
fn normal_block(phi: f64, a: f64, conj: f64) -> [[f64; 2]; 2] {
    let core = mul2(rot2(phi), [[a, 0.0], [0.0, 1.0 / a]]);
    if conj == 0.0 {
        core
    } else {
        mul2(mul2(rot2(conj), core), rot2(-conj))
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockState {
    phi: f64,
    a: f64,
}

fn block_diag(d: usize, blocks: &[BlockState]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for (k, b) in blocks.iter().enumerate() {
        set_block(&mut m, d, k, normal_block(b.phi, b.a, 0.0));
    }
    m
}

/// Reads `R(phi) diag(a, 1/a)` blocks off a block-diagonal endpoint.
fn read_blocks(m: &DMatrix<f64>, d: usize, tol: f64) -> Result<Vec<BlockState>, CzError> {
    let scale = max_abs(m).max(1.0);
    for i in 0..2 * d {
        for j in 0..2 * d {
            if i % d != j % d && m[(i, j)].abs() > tol * scale {
                return Err(CzError::ExtensionFailure(
                    "endpoint is not block diagonal in the (x_k, y_k) planes".into(),
                ));
            }
        }
    }
    let mut blocks = Vec::with_capacity(d);
    for k in 0..d {
        let b = [[m[(k, k)], m[(k, d + k)]], [m[(d + k, k)], m[(d + k, d + k)]]];
        let phi = (b[1][0] - b[0][1]).atan2(b[0][0] + b[1][1]);
        let p = mul2(rot2(-phi), b);
        let bscale = p[0][0].abs().max(p[1][1].abs()).max(1.0);
        if p[0][1].abs() > tol * bscale || p[1][0].abs() > tol * bscale || p[0][0] <= 0.0 {
            return Err(CzError::ExtensionFailure(format!(
                "block {} is not of the form R(phi) diag(a, 1/a)",
                k + 1
            )));
        }
        let a = p[0][0];
        let elliptic = (a - 1.0).abs() <= 1e-7;
        if elliptic {
            if phi.abs() <= 1e-9 {
                return Err(CzError::ExtensionFailure(format!(
                    "block {} is nearly the identity",
                    k + 1
                )));
            }
        } else if phi.abs() > 1e-7 && (PI - phi.abs()) > 1e-7 {
            return Err(CzError::ExtensionFailure(format!(
                "block {} mixes rotation and stretch",
                k + 1
            )));
        }
        blocks.push(BlockState { phi, a });
    }
    Ok(blocks)
}

fn is_positive_hyperbolic(b: &BlockState) -> bool {
    (b.a - 1.0).abs() > 1e-7 && b.phi.abs() <= 1e-7
}

/// Builds an admissible extension on `(1, 2]` ending at `W+` or `W-`.
///
/// The endpoint must be in block normal form: block diagonal, each block
/// a rotation, a positive hyperbolic `diag(a, 1/a)` or a negative hyperbolic
/// `-diag(a, 1/a)`. The homotopy moves rotation angles to the nearest odd
/// multiple of pi without crossing a multiple of 2 pi, shrinks negative
/// hyperbolic stretches to 1, normalizes positive hyperbolic stretches to 2,
/// fuses them in pairs into negative hyperbolic blocks through
/// `2 R(pi s) (+) R(pi s)/2`, and rotates a last unpaired block into the first
/// slot. No eigenvalue 1 is crossed; this is re-checked on every sample.
pub fn admissible_extension(path: &SymplecticPath) -> Result<ExtendedPath, CzError> {
    let d = path.d;
    let tol = path.tolerance.max(1e-12).sqrt();
    let end = path.endpoint();
    let mut blocks = read_blocks(end, d, tol)?;
    let mut stages: Vec<Box<dyn Fn(f64) -> DMatrix<f64>>> = Vec::new();

    // Rotations to +-pi, negative hyperbolic stretches to 1, positive
    // hyperbolic angles snapped to 0.
    {
        let start = blocks.clone();
        let target: Vec<BlockState> = start
            .iter()
            .map(|b| {
                if is_positive_hyperbolic(b) {
                    BlockState { phi: 0.0, a: b.a }
                } else {
                    BlockState {
                        phi: PI * b.phi.signum(),
                        a: 1.0,
                    }
                }
            })
            .collect();
        let tgt = target.clone();
        stages.push(Box::new(move |s| {
            let cur: Vec<BlockState> = start
                .iter()
                .zip(&tgt)
                .map(|(a, b)| BlockState {
                    phi: a.phi + s * (b.phi - a.phi),
                    a: a.a.powf(1.0 - s) * b.a.powf(s),
                })
                .collect();
            block_diag(d, &cur)
        }));
        blocks = target;
    }

    let hyper: Vec<usize> = (0..d).filter(|&k| is_positive_hyperbolic(&blocks[k])).collect();

    // Positive hyperbolic blocks with a < 1 are turned over by conjugation.
    if hyper.iter().any(|&k| blocks[k].a < 1.0) {
        let start = blocks.clone();
        stages.push(Box::new(move |s| {
            let mut m = block_diag(d, &start);
            for (k, b) in start.iter().enumerate() {
                if is_positive_hyperbolic(b) && b.a < 1.0 {
                    set_block(&mut m, d, k, normal_block(0.0, b.a, s * PI / 2.0));
                }
            }
            m
        }));
        for &k in &hyper {
            if blocks[k].a < 1.0 {
                blocks[k].a = 1.0 / blocks[k].a;
            }
        }
    }

    if hyper.iter().any(|&k| (blocks[k].a - 2.0).abs() > 1e-15) {
        let start = blocks.clone();
        let hy = hyper.clone();
        stages.push(Box::new(move |s| {
            let mut cur = start.clone();
            for &k in &hy {
                cur[k].a = start[k].a.powf(1.0 - s) * 2.0f64.powf(s);
            }
            block_diag(d, &cur)
        }));
        for &k in &hyper {
            blocks[k].a = 2.0;
        }
    }

    let pairs: Vec<(usize, usize)> = hyper.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    if !pairs.is_empty() {
        let base = blocks.clone();
        let pr = pairs.clone();
        stages.push(Box::new(move |s| {
            let mut m = block_diag(d, &base);
            let r = rot2(PI * s);
            for &(j, k) in &pr {
                let idx = [j, k];
                for a in 0..2 {
                    for b in 0..2 {
                        m[(idx[a], idx[b])] = 2.0 * r[a][b];
                        m[(d + idx[a], d + idx[b])] = 0.5 * r[a][b];
                    }
                }
            }
            m
        }));
        for &(j, k) in &pairs {
            blocks[j] = BlockState { phi: PI, a: 2.0 };
            blocks[k] = BlockState { phi: PI, a: 2.0 };
        }
        let start = blocks.clone();
        let pr = pairs.clone();
        stages.push(Box::new(move |s| {
            let mut cur = start.clone();
            for &(j, k) in &pr {
                let a = 2.0f64.powf(1.0 - s);
                cur[j].a = a;
                cur[k].a = a;
            }
            block_diag(d, &cur)
        }));
        for &(j, k) in &pairs {
            blocks[j].a = 1.0;
            blocks[k].a = 1.0;
        }
    }

    let leftover = (hyper.len() % 2 == 1).then(|| *hyper.last().unwrap());
    if let Some(k) = leftover.filter(|&k| k != 0) {
        let base = blocks.clone();
        stages.push(Box::new(move |s| {
            let m = block_diag(d, &base);
            let mut q = DMatrix::identity(2 * d, 2 * d);
            let (sn, cs) = (s * PI / 2.0).sin_cos();
            for off in [0, d] {
                q[(off, off)] = cs;
                q[(off + k, off + k)] = cs;
                q[(off + k, off)] = sn;
                q[(off, off + k)] = -sn;
            }
            &q * m * q.transpose()
        }));
        blocks.swap(0, k);
    }

    let endpoint = if leftover.is_some() {
        StandardEndpoint::WMinus
    } else {
        StandardEndpoint::WPlus
    };

    let mut samples = path.samples.clone();
    let count = stages.len().max(1);
    for (i, stage) in stages.iter().enumerate() {
        for step in 1..=STAGE_SAMPLES {
            let s = step as f64 / STAGE_SAMPLES as f64;
            let t = 1.0 + (i as f64 + s) / count as f64;
            let m = stage(s);
            let det = det_minus_identity(&m);
            if det.abs() <= path.tolerance {
                return Err(CzError::ExtensionFailure(format!(
                    "eigenvalue 1 crossed at t = {t:.4} (|det(M - I)| = {det:e})"
                )));
            }
            samples.push((t, m));
        }
    }
    let w = endpoint.matrix(d);
    let last = &samples.last().unwrap().1;
    if max_abs(&(last - &w)) > tol {
        return Err(CzError::ExtensionFailure(
            "extension did not reach the standard endpoint".into(),
        ));
    }
    if stages.is_empty() {
        samples.push((2.0, w));
    }
    Ok(ExtendedPath {
        d,
        samples,
        endpoint,
    })
}

/// `det(A + iB)` for the unitary part `[[A, -B], [B, A]]` of `m`.
fn unitary_det(m: &DMatrix<f64>, d: usize) -> Complex<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors") * svd.v_t.expect("right singular vectors");
    if d == 1 {
        return Complex::new(u[(0, 0)], u[(1, 0)]);
    }
    let c = DMatrix::from_fn(d, d, |i, j| Complex::new(u[(i, j)], u[(d + i, j)]));
    c.determinant()
}

/// Total winding, in turns, of `det(U)^power` along the samples.
fn winding(samples: &[(f64, DMatrix<f64>)], d: usize, power: f64) -> Result<f64, CzError> {
    let args: Vec<f64> = samples
        .par_iter()
        .map(|(_, m)| unitary_det(m, d).arg())
        .collect();
    let mut total = 0.0;
    for i in 1..args.len() {
        let raw = power * (args[i] - args[i - 1]);
        let step = raw - 2.0 * PI * (raw / (2.0 * PI)).round();
        if step.abs() > MAX_UNWRAP_STEP {
            return Err(CzError::UndersampledPath {
                t: samples[i].0,
                step: step.abs(),
            });
        }
        total += step;
    }
    Ok(total / (2.0 * PI))
}

fn round_winding(w: f64) -> Result<i64, CzError> {
    let r = w.round();
    if (w - r).abs() > WINDING_SLACK {
        return Err(CzError::NonIntegerWinding { winding: w });
    }
    Ok(r as i64)
}

/// Degree of `rho^2` along the extended path.
pub fn rho_squared_degree(ext: &ExtendedPath) -> Result<i64, CzError> {
    round_winding(winding(&ext.samples, ext.d, 2.0)?)
}

/// Degree of the unitary determinant on a closed loop of symplectic
/// matrices (the Maslov index of the loop).
pub fn loop_degree(samples: &[(f64, DMatrix<f64>)]) -> Result<i64, CzError> {
    let first = samples.first().ok_or(CzError::Empty)?;
    let size = first.1.nrows();
    if size == 0 || size % 2 != 0 {
        return Err(CzError::BadShape {
            index: 0,
            expected: size.max(2),
        });
    }
    round_winding(winding(samples, size / 2, 1.0)?)
}

/// Conley-Zehnder index of a sampled path.
pub fn conley_zehnder(path: &SymplecticPath) -> Result<i64, CzError> {
    rho_squared_degree(&admissible_extension(path)?)
}

/// A hyperbolic block `R(pi h t) diag(s^t, s^-t)`: positive hyperbolic for
/// even `h`, negative hyperbolic for odd `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicBlock {
    pub stretch: f64,
    pub half_turns: i64,
}

impl HyperbolicBlock {
    /// `lambda > 0` is positive hyperbolic, `lambda < 0` negative hyperbolic.
    pub fn signed(lambda: f64) -> Result<Self, CzError> {
        if !lambda.is_finite() || lambda == 0.0 || lambda.abs() == 1.0 {
            return Err(CzError::InvalidSpec(format!(
                "hyperbolic stretch {lambda} must be finite with |lambda| != 0, 1"
            )));
        }
        Ok(Self {
            stretch: lambda.abs(),
            half_turns: if lambda < 0.0 { 1 } else { 0 },
        })
    }
}

/// Elementary-block description of a path: rotations `R(2 pi theta t)`
/// followed by hyperbolic blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSpec {
    pub rotations: Vec<NumberExpr>,
    #[serde(default)]
    pub hyperbolic: Vec<HyperbolicBlock>,
}

impl BlockSpec {
    pub fn new(rotations: Vec<NumberExpr>, hyperbolic: Vec<HyperbolicBlock>) -> Self {
        Self {
            rotations,
            hyperbolic,
        }
    }

    pub fn d(&self) -> usize {
        self.rotations.len() + self.hyperbolic.len()
    }

    /// Full turns traversed by the unitary part over `[0, 1]`.
    pub fn turns(&self) -> f64 {
        self.rotations.iter().map(|t| t.to_f64().abs()).sum::<f64>()
            + self
                .hyperbolic
                .iter()
                .map(|h| h.half_turns.unsigned_abs() as f64 / 2.0)
                .sum::<f64>()
    }

    /// Samples per unit time keeping every unwrapping step well below pi/2.
    pub fn recommended_samples(&self) -> usize {
        DEFAULT_SAMPLES_PER_UNIT.max((12.0 * self.turns()).ceil() as usize)
    }

    /// The `ell`-th iterate: angles times `ell`, stretches to the `ell`-th power.
    pub fn iterate(&self, ell: u64) -> BlockSpec {
        if ell == 1 {
            return self.clone();
        }
        BlockSpec {
            rotations: self.rotations.iter().map(|t| t.scaled(ell)).collect(),
            hyperbolic: self
                .hyperbolic
                .iter()
                .map(|h| HyperbolicBlock {
                    stretch: h.stretch.powi(ell as i32),
                    half_turns: h.half_turns * ell as i64,
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<(), CzError> {
        if self.d() == 0 {
            return Err(CzError::InvalidSpec("at least one block is required".into()));
        }
        for h in &self.hyperbolic {
            if !(h.stretch.is_finite() && h.stretch > 0.0 && h.stretch != 1.0) {
                return Err(CzError::InvalidSpec(format!(
                    "hyperbolic stretch {} must be positive and != 1",
                    h.stretch
                )));
            }
        }
        Ok(())
    }

    pub fn matrix_at(&self, t: f64) -> DMatrix<f64> {
        let d = self.d();
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        for (k, theta) in self.rotations.iter().enumerate() {
            set_block(&mut m, d, k, rot2(2.0 * PI * theta.to_f64() * t));
        }
        let off = self.rotations.len();
        for (k, h) in self.hyperbolic.iter().enumerate() {
            let b = normal_block(PI * h.half_turns as f64 * t, h.stretch.powf(t), 0.0);
            set_block(&mut m, d, off + k, b);
        }
        m
    }

    /// `p = sum 2 floor(theta) + sum half_turns`, `thetas = frac(theta)`.
    pub fn rotation_decomposition(&self) -> Result<RotationDecomposition, CzError> {
        let mut p = 0i64;
        let mut thetas = Vec::with_capacity(self.rotations.len());
        for theta in &self.rotations {
            let f = theta.floor_certified(DEFAULT_BUDGET_BITS)?;
            let f: i64 = f
                .try_into()
                .map_err(|_| CzError::InvalidSpec("rotation number out of range".into()))?;
            p += 2 * f;
            thetas.push(if f == 0 {
                theta.clone()
            } else {
                theta - &NumberExpr::int(f)
            });
        }
        p += self.hyperbolic.iter().map(|h| h.half_turns).sum::<i64>();
        Ok(RotationDecomposition::new(p, thetas))
    }
}

/// Samples a block path uniformly at `samples_per_unit` steps.
pub fn path_from_blocks(spec: &BlockSpec, samples_per_unit: usize) -> Result<SymplecticPath, CzError> {
    spec.validate()?;
    let steps = samples_per_unit.max(1);
    let samples = (0..=steps)
        .map(|i| {
            let t = if i == steps { 1.0 } else { i as f64 / steps as f64 };
            (t, spec.matrix_at(t))
        })
        .collect();
    SymplecticPath::new(samples, DEFAULT_TOLERANCE)
}

pub fn iterate_block_path(spec: &BlockSpec, ell: u64) -> BlockSpec {
    spec.iterate(ell)
}

/// Index of the block path at its recommended sampling.
pub fn block_index(spec: &BlockSpec) -> Result<i64, CzError> {
    conley_zehnder(&path_from_blocks(spec, spec.recommended_samples())?)
}

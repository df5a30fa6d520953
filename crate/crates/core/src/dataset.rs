//! Irrational ellipsoid model systems and the JSON dataset format.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::{exact_rational, ArithError, CertifiedOrdering, NumberExpr, DEFAULT_BUDGET_BITS};
use crate::czpath::BlockSpec;
use crate::index::{IndexError, OrbitSystem, RotationDecomposition, SimpleOrbit};

pub const SCHEMA_ID: &str = "reeb-index/dataset";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid ellipsoid: {0}")]
    InvalidEllipsoid(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("JSON error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("orbit {label} ({field}): {source}")]
    Field {
        label: String,
        field: String,
        #[source]
        source: ArithError,
    },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub fn is_budget_exhausted(&self) -> bool {
        match self {
            DatasetError::Index(e) => e.is_budget_exhausted(),
            DatasetError::Arith(e) => e.is_budget_exhausted(),
            _ => false,
        }
    }
}

/// Splits a comma-separated list of expressions at top-level commas.
pub fn parse_expr_list(text: &str) -> Result<Vec<NumberExpr>, ArithError> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts.iter().map(|p| p.trim().parse::<NumberExpr>()).collect()
}

/// Ellipsoid `sum pi |z_j|^2 / a_j = 1` in `C^n`.
#[derive(Debug, Clone)]
pub struct EllipsoidSpec {
    radii: Vec<NumberExpr>,
}

impl EllipsoidSpec {
    /// Rejects `n < 2`, non-positive radii and ratios that normalize to rationals.
    pub fn new(radii: Vec<NumberExpr>) -> Result<Self, DatasetError> {
        if radii.len() < 2 {
            return Err(DatasetError::InvalidEllipsoid(format!(
                "need n >= 2 radii, got {}",
                radii.len()
            )));
        }
        for (j, a) in radii.iter().enumerate() {
            if a.sign_certified(DEFAULT_BUDGET_BITS) != CertifiedOrdering::Greater {
                return Err(DatasetError::InvalidEllipsoid(format!("radius a_{} = {a} is not positive", j + 1)));
            }
        }
        for j in 0..radii.len() {
            for k in j + 1..radii.len() {
                let ratio = radii[k].checked_div(&radii[j])?;
                if let Some(r) = exact_rational(&ratio) {
                    return Err(DatasetError::InvalidEllipsoid(format!(
                        "a_{}/a_{} = {r} is rational",
                        k + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { radii })
    }

    /// Parses a comma-separated radius list, commas inside parentheses kept.
    pub fn parse_list(text: &str) -> Result<Self, DatasetError> {
        Self::new(parse_expr_list(text)?)
    }

    pub fn n(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[NumberExpr] {
        &self.radii
    }

    fn ratio(&self, k: usize, j: usize) -> NumberExpr {
        self.radii[k]
            .checked_div(&self.radii[j])
            .expect("radii are certified positive")
    }

    /// `n - 1 + 2 sum_j floor(ell a_k / a_j)`, evaluated directly.
    pub fn closed_form_index(&self, k: usize, ell: u64, budget: u32) -> Result<i64, DatasetError> {
        let n = self.n() as i64;
        let mut total = n - 1 + 2 * ell as i64;
        for j in (0..self.n()).filter(|&j| j != k) {
            let f = self.ratio(k, j).scaled(ell).floor_certified(budget)?;
            let f: i64 = f
                .try_into()
                .map_err(|_| DatasetError::InvalidEllipsoid("index out of range".into()))?;
            total += 2 * f;
        }
        Ok(total)
    }

    /// Linearized return map of `gamma_k` as rotation blocks `a_k/a_j`; the
    /// first block carries the extra turn from the trivialization.
    pub fn block_spec(&self, k: usize) -> BlockSpec {
        let rotations = (0..self.n())
            .filter(|&j| j != k)
            .enumerate()
            .map(|(i, j)| {
                let r = self.ratio(k, j);
                if i == 0 {
                    r + NumberExpr::int(1)
                } else {
                    r
                }
            })
            .collect();
        BlockSpec::new(rotations, vec![])
    }

    fn rotation(&self, k: usize, budget: u32) -> Result<RotationDecomposition, DatasetError> {
        let mut p = 2i64;
        let mut thetas = Vec::with_capacity(self.n() - 1);
        for j in (0..self.n()).filter(|&j| j != k) {
            let r = self.ratio(k, j);
            let f: i64 = r
                .floor_certified(budget)?
                .try_into()
                .map_err(|_| DatasetError::InvalidEllipsoid("ratio out of range".into()))?;
            p += 2 * f;
            thetas.push(if f == 0 { r } else { r - NumberExpr::int(f) });
        }
        Ok(RotationDecomposition::new(p, thetas))
    }
}

/// Simple orbits `gamma_1..gamma_n` (labels `g1..gn`) with actions `a_k`.
pub fn ellipsoid_system(spec: &EllipsoidSpec) -> Result<OrbitSystem, DatasetError> {
    let n = spec.n();
    let orbits = (0..n)
        .map(|k| {
            Ok(SimpleOrbit::new(
                format!("g{}", k + 1),
                n,
                spec.radii[k].clone(),
                spec.rotation(k, DEFAULT_BUDGET_BITS)?,
            )?)
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    Ok(OrbitSystem::new(n, orbits)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitRecord {
    pub label: String,
    pub action: String,
    pub p: i64,
    pub q: usize,
    #[serde(default)]
    pub thetas: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub schema: String,
    pub version: u32,
    pub n: usize,
    pub orbits: Vec<OrbitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub system: OrbitSystem,
    pub warnings: Vec<String>,
    pub notes: Option<String>,
}

impl DatasetFile {
    pub fn from_system(system: &OrbitSystem, notes: Option<String>) -> Self {
        Self {
            schema: SCHEMA_ID.into(),
            version: SCHEMA_VERSION,
            n: system.n(),
            orbits: system
                .orbits()
                .iter()
                .map(|o| OrbitRecord {
                    label: o.label().into(),
                    action: o.action().to_string(),
                    p: o.p(),
                    q: o.q(),
                    thetas: o.thetas().iter().map(ToString::to_string).collect(),
                })
                .collect(),
            notes,
        }
    }

    pub fn into_system(self, budget: u32) -> Result<LoadedDataset, DatasetError> {
        if self.schema != SCHEMA_ID {
            return Err(DatasetError::Schema {
                path: "schema".into(),
                message: format!("expected {SCHEMA_ID:?}, got {:?}", self.schema),
            });
        }
        if self.version != SCHEMA_VERSION {
            return Err(DatasetError::Schema {
                path: "version".into(),
                message: format!("unsupported version {}", self.version),
            });
        }
        let mut warnings = Vec::new();
        let mut orbits = Vec::with_capacity(self.orbits.len());
        for (i, rec) in self.orbits.into_iter().enumerate() {
            let field = |name: &str, text: &str| {
                text.parse::<NumberExpr>().map_err(|source| DatasetError::Field {
                    label: rec.label.clone(),
                    field: name.into(),
                    source,
                })
            };
            if rec.q != rec.thetas.len() {
                return Err(DatasetError::Schema {
                    path: format!("orbits[{i}].q"),
                    message: format!("q = {} but {} theta(s) given", rec.q, rec.thetas.len()),
                });
            }
            let action = field("action", &rec.action)?;
            let thetas = rec
                .thetas
                .iter()
                .enumerate()
                .map(|(j, t)| field(&format!("thetas[{j}]"), t))
                .collect::<Result<Vec<_>, _>>()?;
            for (j, t) in thetas.iter().enumerate() {
                if exact_rational(t).is_some() {
                    warnings.push(format!(
                        "orbit {}: theta_{} = {t} is rational, violating the nondegeneracy assumption",
                        rec.label,
                        j + 1
                    ));
                }
            }
            orbits.push(SimpleOrbit::with_budget(
                rec.label.clone(),
                self.n,
                action,
                RotationDecomposition::new(rec.p, thetas),
                budget,
            )?);
        }
        Ok(LoadedDataset {
            system: OrbitSystem::new(self.n, orbits)?,
            warnings,
            notes: self.notes,
        })
    }
}

pub fn parse_dataset(text: &str, budget: u32) -> Result<LoadedDataset, DatasetError> {
    let file: DatasetFile = serde_json::from_str(text).map_err(|e| DatasetError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_system(budget)
}

pub fn dataset_to_json(system: &OrbitSystem, notes: Option<String>) -> String {
    serde_json::to_string_pretty(&DatasetFile::from_system(system, notes)).expect("dataset serializes")
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LoadedDataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&text, DEFAULT_BUDGET_BITS)
}

pub fn save_dataset(system: &OrbitSystem, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    fs::write(path, dataset_to_json(system, None) + "\n").map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::czpath::block_index;

    fn e(list: &str) -> EllipsoidSpec {
        EllipsoidSpec::parse_list(list).unwrap()
    }

    #[test]
    fn e1_sqrt2_rotation_data() {
        let s = ellipsoid_system(&e("1, (sqrt 2)")).unwrap();
        let g1 = s.get("g1").unwrap();
        assert_eq!((g1.p(), g1.q()), (2, 1));
        assert!((g1.thetas()[0].to_f64() - 0.5f64.sqrt()).abs() < 1e-12);
        let g2 = s.get("g2").unwrap();
        assert_eq!((g2.p(), g2.q()), (4, 1));
        assert!((g2.thetas()[0].to_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(g1.iterate_index(1).unwrap(), 3);
        assert_eq!(g2.iterate_index(1).unwrap(), 5);
    }

    #[test]
    fn three_way_agreement_small() {
        let spec = e("1, (sqrt 2), (sqrt 3)");
        let sys = ellipsoid_system(&spec).unwrap();
        for k in 0..3 {
            let blocks = spec.block_spec(k);
            for ell in [1u64, 2, 5] {
                let closed = spec.closed_form_index(k, ell, 256).unwrap();
                assert_eq!(sys.orbits()[k].iterate_index(ell).unwrap(), closed);
                assert_eq!(block_index(&blocks.iterate(ell)).unwrap(), closed);
            }
        }
    }

    #[test]
    fn guards() {
        assert!(EllipsoidSpec::parse_list("(sqrt 2)").is_err());
        assert!(EllipsoidSpec::parse_list("1, 2").is_err());
        assert!(EllipsoidSpec::parse_list("(sqrt 2), (sqrt 8)").is_err());
        assert!(EllipsoidSpec::parse_list("1, (- 0 (sqrt 2))").is_err());
    }

    #[test]
    fn round_trip() {
        let sys = ellipsoid_system(&e("1, (sqrt 2)")).unwrap();
        let text = dataset_to_json(&sys, None);
        let back = parse_dataset(&text, 256).unwrap();
        assert!(back.warnings.is_empty());
        assert_eq!(back.system, sys);
        assert_eq!(dataset_to_json(&back.system, None), text);
    }

    #[test]
    fn load_rejections_and_warnings() {
        let bad = r#"{"schema":"reeb-index/dataset","version":1,"n":2,
            "orbits":[{"label":"a","action":"1","p":3,"q":1,"thetas":["(/ 1 (sqrt 2))"]}]}"#;
        let err = parse_dataset(bad, 256).unwrap_err().to_string();
        assert!(err.contains("requires p even"), "{err}");
        let half = r#"{"schema":"reeb-index/dataset","version":1,"n":2,
            "orbits":[{"label":"a","action":"1","p":2,"q":1,"thetas":["1/2"]}]}"#;
        let w = parse_dataset(half, 256).unwrap().warnings;
        assert!(w[0].contains("rational"));
        let broken = "{\n \"schema\": 3 }";
        assert!(matches!(parse_dataset(broken, 256), Err(DatasetError::Json { line: 2, .. })));
    }
}

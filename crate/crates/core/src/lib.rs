//! Certified index calculus for closed Reeb orbits on starshaped hypersurfaces.
//!
//! Rotation data `(p, q, theta)` determines every iterated Conley-Zehnder
//! index; from those indices the crate builds common index jumps, graded
//! generator tables and the dataset audits.

pub mod arith;
pub mod audit;
pub mod cij;
pub mod czpath;
pub mod dataset;
pub mod homology;
pub mod index;

pub use arith::{ArithError, CertifiedOrdering, NumberExpr, DEFAULT_BUDGET_BITS};
pub use audit::{AuditError, AuditReport, Finding, Threshold, Verdict};
pub use cij::{CijEntry, CijError, CijOptions, CijSolution};
pub use czpath::{BlockSpec, CzError, HyperbolicBlock, SymplecticPath};
pub use dataset::{ellipsoid_system, DatasetError, EllipsoidSpec};
pub use homology::{Feasibility, GradedGeneratorTable, HomologyError, MatchingCertificate};
pub use index::{IndexError, IterateRecord, OrbitSystem, RotationDecomposition, SimpleOrbit};

//! Fixtures shared by the benchmarks.

use reeb_index_core::{ellipsoid_system, EllipsoidSpec, NumberExpr, OrbitSystem, RotationDecomposition, SimpleOrbit};

/// Irrational ellipsoid with radii `1, sqrt 2, sqrt 5, ...` truncated to `n`.
pub fn ellipsoid(n: usize) -> OrbitSystem {
    let radii = ["1", "(sqrt 2)", "(sqrt 5)", "(sqrt 7)", "(sqrt 11)"];
    let list = radii[..n].join(",");
    ellipsoid_system(&EllipsoidSpec::parse_list(&list).unwrap()).unwrap()
}

/// One orbit with `p = 1`, `theta = 1/sqrt 2` in dimension 3.
pub fn inv_sqrt2_orbit() -> OrbitSystem {
    let theta: NumberExpr = "(/ 1 (sqrt 2))".parse().unwrap();
    let g = SimpleOrbit::new("g", 3, NumberExpr::int(1), RotationDecomposition::new(1, vec![theta])).unwrap();
    OrbitSystem::new(3, vec![g]).unwrap()
}

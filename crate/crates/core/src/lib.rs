//! Exact linear Dirac geometry, pair groupoids, and numerical Poisson
//! structures on surfaces.

pub mod dirac_linear;
pub mod exact_linalg;
pub mod pair_groupoid;
pub mod surface_expr;
pub mod surface_poisson;
pub mod tree_invariant;

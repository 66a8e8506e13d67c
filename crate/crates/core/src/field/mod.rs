//! Fields on the reference domain: grid, nodal values, spectral calculus and
//! the elliptic solver.

pub mod domain;
pub mod elliptic;
pub mod grid;
pub mod spectral;
pub mod values;

pub use domain::{RadiusFunction, ReferenceDomain};
pub use elliptic::{solve_dirichlet, solve_dirichlet_with, EllipticProblem, SolveOptions, SolveReport};
pub use grid::Grid;
pub use spectral::{
    angular_boundary, angular_derivative, boundary_gradient, boundary_l2_norm, boundary_sobolev_norm_sq, derivatives,
    derivatives_up_to, differentiate, gradient, inner, integrate, integrate_boundary, l2_norm, normal_derivative,
    sobolev_norm_sq, tangential_derivative, Derivatives, MultiIndex,
};
pub use values::{sym2_eigenvalues, BoundaryField, Field, SymmetricTensorField};

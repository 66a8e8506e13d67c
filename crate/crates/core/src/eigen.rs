//! First Dirichlet eigenpair of `−Δ`, the barrier `Δψ = −1`, and the
//! comparison function built from them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    derivatives, inner, integrate, l2_norm, normal_derivative, solve_dirichlet, BoundaryField, EllipticProblem, Field,
    Grid,
};

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    /// Normalised so that `∫φ² = 1`, positive inside for the first pair.
    pub phi: Field,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 500;
const TOLERANCE: f64 = 1e-10;

/// `w` with `Δw = −u`, `w = 0` on Γ.
fn inverse_laplacian(grid: &Grid, u: &Field) -> Result<Field> {
    solve_dirichlet(grid, &EllipticProblem::poisson(grid, -u, BoundaryField::zeros(grid)))
}

fn normalise(grid: &Grid, u: &Field) -> Field {
    u * (1.0 / l2_norm(grid, u))
}

/// Inverse power iteration, optionally orthogonal to the pairs in `deflate`.
fn inverse_iteration(grid: &Grid, start: Field, deflate: &[&Field]) -> Result<EigenPair> {
    let project = |u: Field| deflate.iter().fold(u, |u, phi| &u - &(*phi * inner(grid, &u, phi)));
    let mut u = normalise(grid, &project(start));
    let mut lambda = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let w = project(inverse_laplacian(grid, &u)?);
        let next = 1.0 / inner(grid, &u, &w);
        let w = normalise(grid, &w);
        let moved = (&w - &u).max_abs();
        u = w;
        let change = ((next - lambda) / next).abs();
        lambda = next;
        // the quotient converges quadratically, so also wait for the vector
        if change < TOLERANCE && moved < TOLERANCE {
            return Ok(EigenPair {
                lambda,
                phi: u,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "inverse power iteration",
        iterations: MAX_ITERATIONS,
        residual: lambda,
    })
}

/// `(λ, φ₁)` with `φ₁ > 0` inside.
pub fn dirichlet_eigenpair(grid: &Grid) -> Result<EigenPair> {
    let start = Field::from_polar(grid, |r, _| 1.0 - r * r);
    let mut pair = inverse_iteration(grid, start, &[])?;
    if integrate(grid, &pair.phi) < 0.0 {
        pair.phi = -&pair.phi;
    }
    Ok(pair)
}

/// Next eigenpair by deflation against `first`.
pub fn second_eigenpair(grid: &Grid, first: &EigenPair) -> Result<EigenPair> {
    let start = Field::from_cartesian(grid, |x, y| x + 0.3 * y + 0.1 * x * y);
    let start = Field::from_array(start.values() * first.phi.values());
    inverse_iteration(grid, start, &[&first.phi])
}

/// `‖Δφ + λφ‖_∞`.
pub fn eigen_residual(grid: &Grid, pair: &EigenPair) -> f64 {
    let d = derivatives(grid, &pair.phi);
    (&(&d.dxx + &d.dyy) + &(&pair.phi * pair.lambda)).max_abs()
}

/// `∫|∇φ|² / ∫φ²`.
pub fn rayleigh_quotient(grid: &Grid, phi: &Field) -> f64 {
    let d = derivatives(grid, phi);
    (inner(grid, &d.dx, &d.dx) + inner(grid, &d.dy, &d.dy)) / inner(grid, phi, phi)
}

/// `ψ` with `Δψ = −1`, `ψ = 0` on Γ.
pub fn barrier_psi(grid: &Grid) -> Result<Field> {
    solve_dirichlet(
        grid,
        &EllipticProblem::poisson(grid, Field::constant(grid, -1.0), BoundaryField::zeros(grid)),
    )
}

/// `c₁ = ∫q₀φ₁`.
pub fn c1(grid: &Grid, q0: &Field, phi: &Field) -> f64 {
    inner(grid, q0, phi)
}

/// `F = κ₁ e^{−3λt/2} (φ₁ − κ₂ψ)`.
pub fn comparison_f(kappa1: f64, kappa2: f64, t: f64, lambda: f64, phi: &Field, psi: &Field) -> Field {
    &(phi - &(psi * kappa2)) * (kappa1 * (-1.5 * lambda * t).exp())
}

/// `κ₂* = min φ₁/ψ` over interior nodes: `F > 0` inside iff `κ₂ < κ₂*`.
pub fn kappa2_threshold(grid: &Grid, phi: &Field, psi: &Field) -> f64 {
    let b = grid.boundary_row();
    phi.values()
        .indexed_iter()
        .filter(|((p, _), _)| *p != b)
        .map(|((p, l), &f)| f / psi.values()[[p, l]])
        .fold(f64::INFINITY, f64::min)
}

/// `min_Γ(−∂_N u)`.
pub fn hopf_margin(grid: &Grid, u: &Field) -> f64 {
    -normal_derivative(grid, u).max()
}

/// Summary of the first two Dirichlet pairs on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub n_r: usize,
    pub n_theta: usize,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub rayleigh_quotient: f64,
    pub hopf_margin: f64,
    pub lambda2: f64,
}

pub fn eigen_report(grid: &Grid) -> Result<EigenReport> {
    let pair = dirichlet_eigenpair(grid)?;
    let second = second_eigenpair(grid, &pair)?;
    Ok(EigenReport {
        n_r: grid.n_r(),
        n_theta: grid.n_theta(),
        lambda: pair.lambda,
        iterations: pair.iterations,
        residual: eigen_residual(grid, &pair),
        rayleigh_quotient: rayleigh_quotient(grid, &pair.phi),
        hopf_margin: hopf_margin(grid, &pair.phi),
        lambda2: second.lambda,
    })
}

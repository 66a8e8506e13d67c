//! Harmonic gauge: the map Ψ with `ΔΨ = 0` in Ω and `Ψ = e + hN` on Γ, and
//! the pullback quantities built from it.

use crate::error::{Error, Result};
use crate::field::{gradient, solve_dirichlet, BoundaryField, EllipticProblem, Field, Grid};

/// Pointwise 2×2 matrix field, `m[row][col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField(pub [[Field; 2]; 2]);

impl MatrixField {
    pub fn identity(grid: &Grid) -> Self {
        let one = Field::constant(grid, 1.0);
        let zero = Field::zeros(grid);
        MatrixField([[one.clone(), zero.clone()], [zero, one]])
    }

    /// Jacobian matrix `m[i][k] = ∂_k u^i` of a vector field.
    pub fn jacobian(grid: &Grid, u: &[Field; 2]) -> Self {
        let [a, b] = gradient(grid, &u[0]);
        let [c, d] = gradient(grid, &u[1]);
        MatrixField([[a, b], [c, d]])
    }

    pub fn entry(&self, row: usize, col: usize) -> &Field {
        &self.0[row][col]
    }

    pub fn determinant(&self) -> Field {
        let [[a, b], [c, d]] = &self.0;
        &(a * d) - &(b * c)
    }

    /// Closed-form inverse; `det` must be nonzero at every node.
    pub fn inverse_with(&self, det: &Field) -> Self {
        let [[a, b], [c, d]] = &self.0;
        let inv = det.map(|v| 1.0 / v);
        MatrixField([[d * &inv, -&(b * &inv)], [-&(c * &inv), a * &inv]])
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.0.clone();
        MatrixField([[a, c], [b, d]])
    }

    pub fn mul(&self, other: &MatrixField) -> MatrixField {
        let e = |i: usize, j: usize| &(&self.0[i][0] * &other.0[0][j]) + &(&self.0[i][1] * &other.0[1][j]);
        MatrixField([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    /// `m · v` at every node.
    pub fn apply(&self, v: &[Field; 2]) -> [Field; 2] {
        let row = |i: usize| &(&self.0[i][0] * &v[0]) + &(&self.0[i][1] * &v[1]);
        [row(0), row(1)]
    }

    /// `mᵀ · v` at every node.
    pub fn apply_transpose(&self, v: &[Field; 2]) -> [Field; 2] {
        let col = |k: usize| &(&self.0[0][k] * &v[0]) + &(&self.0[1][k] * &v[1]);
        [col(0), col(1)]
    }

    /// Entry traces on Γ.
    pub fn trace(&self) -> [[BoundaryField; 2]; 2] {
        let t = |i: usize, j: usize| self.0[i][j].trace();
        [[t(0, 0), t(0, 1)], [t(1, 0), t(1, 1)]]
    }

    /// `max |m − Id|` over entries and nodes.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                dev = dev.max(self.0[i][j].map(|v| v - delta).max_abs());
            }
        }
        dev
    }
}

/// Ψ, its inverse deformation and the boundary factor Λ at one instant.
#[derive(Clone, Debug)]
pub struct GaugeState {
    pub psi: [Field; 2],
    /// `DΨ[i][k] = ∂_k Ψ^i`.
    pub dpsi: MatrixField,
    /// `A = (DΨ)⁻¹`.
    pub a: MatrixField,
    /// `J = det DΨ`.
    pub j: Field,
    /// `Λ = N·AᵀN` on Γ.
    pub lambda: BoundaryField,
    /// Gauge velocity `Ψ_t`.
    pub psi_t: [Field; 2],
}

impl GaugeState {
    /// The undeformed gauge `Ψ = e`.
    pub fn identity(grid: &Grid) -> Self {
        GaugeState {
            psi: identity_map(grid),
            dpsi: MatrixField::identity(grid),
            a: MatrixField::identity(grid),
            j: Field::constant(grid, 1.0),
            lambda: BoundaryField::constant(grid, 1.0),
            psi_t: [Field::zeros(grid), Field::zeros(grid)],
        }
    }
}

pub fn identity_map(grid: &Grid) -> [Field; 2] {
    [Field::from_array(grid.x().clone()), Field::from_array(grid.y().clone())]
}

/// Harmonic extension of the vector boundary data `φ N`.
fn extend_along_normal(grid: &Grid, phi: &BoundaryField) -> Result<[Field; 2]> {
    let [nx, ny] = grid.normal();
    let comp = |n: &ndarray::Array1<f64>| -> Result<Field> {
        let data = BoundaryField::from_array(phi.values() * n);
        if data.max_abs() == 0.0 {
            return Ok(Field::zeros(grid));
        }
        solve_dirichlet(grid, &EllipticProblem::harmonic_extension(grid, data))
    };
    Ok([comp(nx)?, comp(ny)?])
}

/// `Ψ = e + H[hN]`; equals `e + hN` at the boundary nodes.
pub fn harmonic_extension(grid: &Grid, h: &BoundaryField) -> Result<[Field; 2]> {
    let [ex, ey] = extend_along_normal(grid, h)?;
    let [x, y] = identity_map(grid);
    Ok([&x + &ex, &y + &ey])
}

/// `Ψ_t = H[h_t N]`.
pub fn gauge_velocity(grid: &Grid, h_t: &BoundaryField) -> Result<[Field; 2]> {
    extend_along_normal(grid, h_t)
}

/// Pullback quantities of `psi` with the supplied gauge velocity.
pub fn deformation(grid: &Grid, psi: [Field; 2], psi_t: [Field; 2]) -> Result<GaugeState> {
    let dpsi = MatrixField::jacobian(grid, &psi);
    let j = dpsi.determinant();
    if let Some(((p, l), &value)) = j.values().indexed_iter().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::GaugeBreakdown(format!(
            "J = {value:e} at node (r = {:.4}, theta = {:.4})",
            grid.r()[p],
            grid.theta()[l]
        )));
    }
    let a = dpsi.inverse_with(&j);
    let lambda = boundary_factor(grid, &a);
    Ok(GaugeState {
        psi,
        dpsi,
        a,
        j,
        lambda,
        psi_t,
    })
}

/// Fallback: `Ψ_t ≈ (Ψ − Ψ_prev)/Δt`.
pub fn deformation_from_difference(grid: &Grid, psi: [Field; 2], psi_prev: &[Field; 2], dt: f64) -> Result<GaugeState> {
    let psi_t = [
        &(&psi[0] - &psi_prev[0]) * (1.0 / dt),
        &(&psi[1] - &psi_prev[1]) * (1.0 / dt),
    ];
    deformation(grid, psi, psi_t)
}

/// `AᵀN` on Γ.
fn transpose_normal(grid: &Grid, a: &MatrixField) -> [BoundaryField; 2] {
    let [[a00, a01], [a10, a11]] = a.trace();
    let [nx, ny] = grid.normal();
    let comp = |c0: &BoundaryField, c1: &BoundaryField| BoundaryField::from_array(c0.values() * nx + c1.values() * ny);
    [comp(&a00, &a10), comp(&a01, &a11)]
}

/// `Λ = N·AᵀN`.
pub fn boundary_factor(grid: &Grid, a: &MatrixField) -> BoundaryField {
    let [tx, ty] = transpose_normal(grid, a);
    let [nx, ny] = grid.normal();
    BoundaryField::from_array(tx.values() * nx + ty.values() * ny)
}

/// Unit normal of the moving boundary, `n = AᵀN/|AᵀN|`, at the reference
/// boundary nodes.
pub fn moving_normal(grid: &Grid, a: &MatrixField) -> Result<[BoundaryField; 2]> {
    let [tx, ty] = transpose_normal(grid, a);
    let len = tx.zip_map(&ty, f64::hypot);
    if let Some(l) = len.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::GaugeBreakdown(format!(
            "|A^T N| vanishes at theta = {:.4}",
            grid.theta()[l]
        )));
    }
    Ok([tx.zip_map(&len, |a, b| a / b), ty.zip_map(&len, |a, b| a / b)])
}

//! Variable-coefficient Dirichlet problems
//! `a_kj ∂_kj u + b_k ∂_k u + c u = f` in Ω, `u = g` on Γ.
//!
//! The collocation system is solved by restarted GMRES, left-preconditioned
//! with a direct per-angular-mode solve of the constant-coefficient operator
//! `ᾱ Δ + c̄` on the disk of mean radius.

use nalgebra::{DMatrix, DVector, LU};
use ndarray::Array2;
use rustfft::num_complex::Complex64;

use super::grid::{frequency, rows_forward, rows_inverse, Grid};
use super::spectral::{cartesian, collocation_polar};
use super::values::{BoundaryField, Field, SymmetricTensorField};
use crate::error::{Error, Result};

/// Linear Dirichlet problem on the reference domain.
#[derive(Clone, Debug)]
pub struct EllipticProblem {
    pub a: SymmetricTensorField,
    pub b: [Field; 2],
    /// Zeroth-order coefficient, `c ≤ 0`.
    pub c: Field,
    pub f: Field,
    pub g: BoundaryField,
}

impl EllipticProblem {
    /// `Δu = f`, `u = g`.
    pub fn poisson(grid: &Grid, f: Field, g: BoundaryField) -> Self {
        EllipticProblem {
            a: SymmetricTensorField::identity(grid),
            b: [Field::zeros(grid), Field::zeros(grid)],
            c: Field::zeros(grid),
            f,
            g,
        }
    }

    /// Harmonic extension of `g`.
    pub fn harmonic_extension(grid: &Grid, g: BoundaryField) -> Self {
        Self::poisson(grid, Field::zeros(grid), g)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let shape = grid.shape();
        let fields = [
            &self.a.xx, &self.a.xy, &self.a.yy, &self.b[0], &self.b[1], &self.c, &self.f,
        ];
        if fields.iter().any(|f| f.values().dim() != shape) || self.g.len() != grid.n_theta() {
            return Err(Error::InvalidProblem("coefficient shapes do not match the grid".into()));
        }
        let finite = fields.iter().all(|f| f.values().iter().all(|v| v.is_finite()))
            && self.g.values().iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidProblem("non-finite coefficient or data".into()));
        }
        let lambda = self.a.min_eigenvalue().min();
        if !(lambda > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "second-order coefficients are not uniformly elliptic (min eigenvalue {lambda:e})"
            )));
        }
        let cmax = self.c.max();
        if cmax > 0.0 {
            return Err(Error::InvalidProblem(format!(
                "zeroth-order coefficient must be <= 0 (max {cmax:e})"
            )));
        }
        Ok(())
    }

    /// `a_kj ∂_kj u + b_k ∂_k u + c u` by collocation (linear in `u`).
    pub fn apply(&self, grid: &Grid, u: &Field) -> Field {
        let d = cartesian(grid, &collocation_polar(grid, u.values()));
        let (a, b) = (&self.a, &self.b);
        let out = a.xx.values() * d.dxx.values()
            + 2.0 * (a.xy.values() * d.dxy.values())
            + a.yy.values() * d.dyy.values()
            + b[0].values() * d.dx.values()
            + b[1].values() * d.dy.values()
            + self.c.values() * u.values();
        Field::from_array(out)
    }

    /// Interior residual `L u − f` (zero on Γ) and the boundary mismatch.
    pub fn residual(&self, grid: &Grid, u: &Field) -> (Field, f64) {
        let mut r = &self.apply(grid, u) - &self.f;
        let b = grid.boundary_row();
        r.values_mut().row_mut(b).fill(0.0);
        let mismatch = (&u.trace() - &self.g).max_abs();
        (r, mismatch)
    }

    fn is_constant_laplacian(&self, grid: &Grid) -> Option<(f64, f64)> {
        if !grid.domain().is_disk() {
            return None;
        }
        let alpha = self.a.xx.values()[[0, 0]];
        let c = self.c.values()[[0, 0]];
        let same = |f: &Field, v: f64| f.values().iter().all(|&x| x == v);
        (same(&self.a.xx, alpha)
            && same(&self.a.yy, alpha)
            && same(&self.a.xy, 0.0)
            && same(&self.b[0], 0.0)
            && same(&self.b[1], 0.0)
            && same(&self.c, c))
        .then_some((alpha, c))
    }
}

/// Stopping rule and limits for [`solve_dirichlet_with`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Absolute tolerance on the preconditioned residual (max norm).
    pub tolerance: f64,
    /// Relative tolerance against the size of the preconditioned data.
    pub relative_tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-10,
            relative_tolerance: 1e-12,
            restart: 40,
            max_iterations: 600,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: Field,
    pub iterations: usize,
    /// Max-norm preconditioned residual reached.
    pub residual: f64,
}

/// Solves the problem with default options.
pub fn solve_dirichlet(grid: &Grid, problem: &EllipticProblem) -> Result<Field> {
    solve_dirichlet_with(grid, problem, &SolveOptions::default(), None).map(|r| r.solution)
}

/// Solves the problem, optionally starting from `initial`.
pub fn solve_dirichlet_with(
    grid: &Grid,
    problem: &EllipticProblem,
    options: &SolveOptions,
    initial: Option<&Field>,
) -> Result<SolveReport> {
    problem.validate(grid)?;
    let shape = grid.shape();
    let b = grid.boundary_row();
    let mut rhs = problem.f.values().clone();
    rhs.row_mut(b).assign(problem.g.values());

    let (alpha, c_mean, exact) = match problem.is_constant_laplacian(grid) {
        Some((alpha, c)) => (alpha, c, true),
        None => {
            let trace = &problem.a.xx + &problem.a.yy;
            let alpha = 0.5 * trace.values().mean().unwrap_or(1.0);
            (alpha, problem.c.values().mean().unwrap_or(0.0), false)
        }
    };
    let modes = ModeSolver::new(grid, alpha, c_mean)?;

    let operator = |x: &[f64]| -> Vec<f64> {
        let u = Field::from_array(Array2::from_shape_vec(shape, x.to_vec()).expect("shape"));
        let mut out = problem.apply(grid, &u).into_array();
        out.row_mut(b).assign(&u.values().row(b));
        modes.solve(grid, &out).into_raw_vec_and_offset().0
    };
    let pre_rhs = modes.solve(grid, &rhs).into_raw_vec_and_offset().0;
    let scale = pre_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 && initial.is_none() {
        return Ok(SolveReport {
            solution: Field::zeros(grid),
            iterations: 0,
            residual: 0.0,
        });
    }
    let tol = options
        .tolerance
        .min(options.relative_tolerance * scale)
        .max(f64::MIN_POSITIVE);
    let pin = |x: Vec<f64>| {
        let mut u = Array2::from_shape_vec(shape, x).expect("shape");
        u.row_mut(b).assign(problem.g.values());
        Field::from_array(u)
    };
    if exact {
        let x = pre_rhs.clone();
        let r = operator(&x);
        let residual = max_norm(&r.iter().zip(&pre_rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
        return Ok(SolveReport {
            solution: pin(x),
            iterations: 0,
            residual,
        });
    }
    let x0 = match initial {
        Some(u) => u.values().iter().copied().collect(),
        None => pre_rhs.clone(),
    };
    let (x, iterations, residual) = gmres(operator, &pre_rhs, x0, tol, options)?;
    Ok(SolveReport {
        solution: pin(x),
        iterations,
        residual,
    })
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
/// Converges when the max norm of `rhs − A x` drops below `tol`.
fn gmres(
    op: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    options: &SolveOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let m = options.restart.max(1);
    let mut iterations = 0;
    loop {
        let ax = op(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let res = max_norm(&r);
        if res <= tol {
            return Ok((x, iterations, res));
        }
        if iterations >= options.max_iterations {
            return Err(Error::SolverFailure {
                iterations,
                residual: res,
            });
        }
        let beta = dot(&r, &r).sqrt();
        // Stop the inner cycle once the estimated 2-norm is well below the
        // max-norm target; the outer check decides.
        let inner_tol = tol * 0.1;
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && iterations < options.max_iterations {
            let mut w = op(&basis[k]);
            for (j, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[j][k] = hij;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            }
            let norm = dot(&w, &w).sqrt();
            h[k + 1][k] = norm;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k += 1;
            if g[k].abs() <= inner_tol || norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / norm).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[j]).for_each(|(xi, vi)| *xi += yj * vi);
        }
    }
}

/// Direct solver for `α Δ + c` on the disk of the grid's mean radius,
/// one LU factorisation per angular wavenumber. Boundary rows are identity.
struct ModeSolver {
    lu: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl ModeSolver {
    fn new(grid: &Grid, alpha: f64, c: f64) -> Result<Self> {
        let n_r = grid.n_r();
        let n_theta = grid.n_theta();
        let radius = grid.domain().radius().mean;
        let scale = alpha / (radius * radius);
        let r = grid.r();
        let mut lu = Vec::with_capacity(n_theta / 2 + 1);
        for m in 0..=n_theta / 2 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mf = m as f64;
            let mut mat = DMatrix::zeros(n_r, n_r);
            for p in 0..n_r - 1 {
                for q in 0..n_r {
                    let d1 = grid.d1_same[[p, q]] + sign * grid.d1_mirror[[p, q]];
                    let d2 = grid.d2_same[[p, q]] + sign * grid.d2_mirror[[p, q]];
                    mat[(p, q)] = scale * (d2 + d1 / r[p]);
                }
                mat[(p, p)] += c - scale * mf * mf / (r[p] * r[p]);
            }
            mat[(n_r - 1, n_r - 1)] = 1.0;
            let factor = mat.lu();
            if !factor.is_invertible() {
                return Err(Error::SolverFailure {
                    iterations: 0,
                    residual: f64::INFINITY,
                });
            }
            lu.push(factor);
        }
        Ok(ModeSolver { lu })
    }

    fn solve(&self, grid: &Grid, rhs: &Array2<f64>) -> Array2<f64> {
        let (n_r, n) = rhs.dim();
        let mut spectrum = rows_forward(&grid.fft, rhs);
        for k in 0..n {
            let m = frequency(k, n).unsigned_abs() as usize;
            let lu = &self.lu[m];
            let re = DVector::from_fn(n_r, |p, _| spectrum[p * n + k].re);
            let im = DVector::from_fn(n_r, |p, _| spectrum[p * n + k].im);
            let re = lu.solve(&re).expect("factorisation checked invertible");
            let im = lu.solve(&im).expect("factorisation checked invertible");
            for p in 0..n_r {
                spectrum[p * n + k] = Complex64::new(re[p], im[p]);
            }
        }
        rows_inverse(&grid.fft, spectrum, (n_r, n))
    }
}

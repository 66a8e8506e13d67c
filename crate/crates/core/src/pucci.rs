//! Pucci extremal operators `M^∓_{μ₁,μ₂}` with an optional drift bound,
//! their first half-eigenpairs, and the comparison checks built on them.
//!
//! `M⁻u = μ₁ Σ e⁺ + μ₂ Σ e⁻ − γ|∇u|` over the eigenvalues `e` of `D²u`;
//! `M⁺` swaps the roles of `μ₁`, `μ₂` and flips the sign of the drift term.

use ndarray::Zip;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::spectral::{cartesian, collocation_polar};
use crate::field::{
    solve_dirichlet_with, sym2_eigenvalues, BoundaryField, Derivatives, EllipticProblem, Field, Grid, SolveOptions,
    SymmetricTensorField,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PucciParams {
    pub mu1: f64,
    pub mu2: f64,
    /// Drift bound; `0` gives the pure second-order operator.
    pub gamma: f64,
}

impl PucciParams {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        Self::with_drift(mu1, mu2, 0.0)
    }

    pub fn with_drift(mu1: f64, mu2: f64, gamma: f64) -> Result<Self> {
        let p = PucciParams { mu1, mu2, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu1 > 0.0 && self.mu1 <= self.mu2 && self.mu2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need 0 < mu1 <= mu2, got mu1 = {}, mu2 = {}",
                self.mu1, self.mu2
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "drift bound must be >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// `(1 − s, 1 + s)` with drift bound `s`.
    pub fn symmetric_class(s: f64) -> Result<Self> {
        Self::with_drift(1.0 - s, 1.0 + s, s)
    }
}

/// Which extremal operator: the infimum or the supremum over the class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremal {
    Minus,
    Plus,
}

impl Extremal {
    /// Weights applied to (positive, negative) Hessian eigenvalues.
    fn weights(self, p: &PucciParams) -> (f64, f64) {
        match self {
            Extremal::Minus => (p.mu1, p.mu2),
            Extremal::Plus => (p.mu2, p.mu1),
        }
    }

    fn drift_sign(self) -> f64 {
        match self {
            Extremal::Minus => -1.0,
            Extremal::Plus => 1.0,
        }
    }
}

/// Second-order part of `M^±` for the matrix `[[xx, xy], [xy, yy]]`.
pub fn extremal_value(which: Extremal, xx: f64, xy: f64, yy: f64, params: &PucciParams) -> f64 {
    let (wp, wn) = which.weights(params);
    let (e1, e2) = sym2_eigenvalues(xx, xy, yy);
    wp * (e1.max(0.0) + e2.max(0.0)) + wn * (e1.min(0.0) + e2.min(0.0))
}

pub fn pucci_minus_matrix(xx: f64, xy: f64, yy: f64, params: &PucciParams) -> f64 {
    extremal_value(Extremal::Minus, xx, xy, yy, params)
}

pub fn pucci_plus_matrix(xx: f64, xy: f64, yy: f64, params: &PucciParams) -> f64 {
    extremal_value(Extremal::Plus, xx, xy, yy, params)
}

/// `M^±` at every node from a Hessian field and, when `γ > 0`, a gradient.
pub fn extremal(
    which: Extremal,
    hessian: &SymmetricTensorField,
    gradient: Option<&[Field; 2]>,
    params: &PucciParams,
) -> Field {
    let mut out = Field::from_array(hessian.xx.values().clone());
    Zip::from(out.values_mut())
        .and(hessian.xy.values())
        .and(hessian.yy.values())
        .for_each(|o, &xy, &yy| *o = extremal_value(which, *o, xy, yy, params));
    if let (Some([gx, gy]), true) = (gradient, params.gamma > 0.0) {
        let drift = gx.zip_map(gy, f64::hypot);
        out = &out + &(&drift * (which.drift_sign() * params.gamma));
    }
    out
}

pub fn pucci_minus(hessian: &SymmetricTensorField, gradient: Option<&[Field; 2]>, params: &PucciParams) -> Field {
    extremal(Extremal::Minus, hessian, gradient, params)
}

pub fn pucci_plus(hessian: &SymmetricTensorField, gradient: Option<&[Field; 2]>, params: &PucciParams) -> Field {
    extremal(Extremal::Plus, hessian, gradient, params)
}

fn collocation(grid: &Grid, u: &Field) -> Derivatives {
    cartesian(grid, &collocation_polar(grid, u.values()))
}

/// `M^±u` with collocation derivatives, the discretisation used by the solvers.
pub fn apply_extremal(grid: &Grid, which: Extremal, u: &Field, params: &PucciParams) -> Field {
    let d = collocation(grid, u);
    let hessian = SymmetricTensorField {
        xx: d.dxx,
        xy: d.dxy,
        yy: d.dyy,
    };
    extremal(which, &hessian, Some(&[d.dx, d.dy]), params)
}

/// Coefficients of the linear operator attaining `M^±u` at every node.
fn policy(grid: &Grid, which: Extremal, u: &Field, params: &PucciParams) -> (SymmetricTensorField, [Field; 2]) {
    let d = collocation(grid, u);
    let (wp, wn) = which.weights(params);
    let mut a = SymmetricTensorField::scaled_identity(grid, 0.0);
    Zip::from(a.xx.values_mut())
        .and(a.xy.values_mut())
        .and(a.yy.values_mut())
        .and(d.dxx.values())
        .and(d.dxy.values())
        .and(d.dyy.values())
        .for_each(|axx, axy, ayy, &h11, &h12, &h22| {
            let (e1, e2) = sym2_eigenvalues(h11, h12, h22);
            let pick = |e: f64| if e >= 0.0 { wp } else { wn };
            let (s1, s2) = (pick(e1), pick(e2));
            // unit eigenvector of e1, from whichever column of H − e2 is larger
            let (c1, c2) = ((h11 - e2, h12), (h12, h22 - e2));
            let (vx, vy) = if c1.0.hypot(c1.1) >= c2.0.hypot(c2.1) { c1 } else { c2 };
            let norm = vx.hypot(vy);
            let (vx, vy) = if norm > 0.0 { (vx / norm, vy / norm) } else { (1.0, 0.0) };
            *axx = s2 + (s1 - s2) * vx * vx;
            *axy = (s1 - s2) * vx * vy;
            *ayy = s2 + (s1 - s2) * vy * vy;
        });
    let mut b = [Field::zeros(grid), Field::zeros(grid)];
    if params.gamma > 0.0 {
        let g = which.drift_sign() * params.gamma;
        let (bx, by) = b.split_at_mut(1);
        Zip::from(bx[0].values_mut())
            .and(by[0].values_mut())
            .and(d.dx.values())
            .and(d.dy.values())
            .for_each(|bx, by, &ux, &uy| {
                let n = ux.hypot(uy);
                if n > 0.0 {
                    *bx = g * ux / n;
                    *by = g * uy / n;
                }
            });
    }
    (a, b)
}

/// Outcome of [`policy_solve`].
#[derive(Clone, Debug)]
pub struct PolicySolution {
    pub u: Field,
    pub iterations: usize,
    /// Whether the damped update was needed to break a policy cycle.
    pub damped: bool,
    /// `max |M^±u + f|` over interior nodes.
    pub residual: f64,
}

const POLICY_TOLERANCE: f64 = 1e-9;
const POLICY_MAX_ITERATIONS: usize = 100;

fn solver_options() -> SolveOptions {
    SolveOptions {
        tolerance: 1e-12,
        relative_tolerance: 1e-13,
        max_iterations: 2000,
        ..SolveOptions::default()
    }
}

fn interior_max_abs(grid: &Grid, u: &Field) -> f64 {
    let b = grid.boundary_row();
    u.values()
        .indexed_iter()
        .filter(|((p, _), _)| *p != b)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
}

/// Howard iteration for `−M^±u = f` in Ω, `u = 0` on Γ.
pub fn policy_solve(
    grid: &Grid,
    which: Extremal,
    f: &Field,
    params: &PucciParams,
    initial: Option<&Field>,
) -> Result<PolicySolution> {
    params.validate()?;
    let zero = BoundaryField::zeros(grid);
    let rhs = -f;
    let options = solver_options();
    let mut u = match initial {
        Some(u) => u.clone(),
        None => {
            let mean = 0.5 * (params.mu1 + params.mu2);
            let mut problem = EllipticProblem::poisson(grid, rhs.clone(), zero.clone());
            problem.a = SymmetricTensorField::scaled_identity(grid, mean);
            solve_dirichlet_with(grid, &problem, &options, None)?.solution
        }
    };
    let mut damped = false;
    let mut history: Vec<f64> = Vec::new();
    for it in 1..=POLICY_MAX_ITERATIONS {
        let (a, b) = policy(grid, which, &u, params);
        let problem = EllipticProblem {
            a,
            b,
            c: Field::zeros(grid),
            f: rhs.clone(),
            g: zero.clone(),
        };
        let mut next = solve_dirichlet_with(grid, &problem, &options, Some(&u))?.solution;
        if damped {
            next = &(&next + &u) * 0.5;
        }
        let change = (&next - &u).max_abs();
        u = next;
        if change < POLICY_TOLERANCE {
            let residual = interior_max_abs(grid, &(&apply_extremal(grid, which, &u, params) + f));
            return Ok(PolicySolution {
                u,
                iterations: it,
                damped,
                residual,
            });
        }
        // three non-contracting updates in a row count as a cycle
        history.push(change);
        let n = history.len();
        if !damped && n >= 4 && (n - 3..n).all(|i| history[i] >= 0.9 * history[i - 1]) {
            damped = true;
        }
    }
    Err(Error::NonConvergence {
        what: "policy iteration",
        iterations: POLICY_MAX_ITERATIONS,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Clone, Debug)]
pub struct HalfEigenpair {
    pub lambda: f64,
    /// `max ρ = 1` for the positive pair, `min ρ = −1` for the negative one.
    pub rho: Field,
    pub iterations: usize,
    /// `max |M^±ρ + λρ|` over interior nodes.
    pub residual: f64,
}

const EIGEN_TOLERANCE: f64 = 1e-8;
const EIGEN_MAX_ITERATIONS: usize = 300;
const BULK: f64 = 0.1;

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median of `−M^±ρ/ρ` over `{ρ > 0.1}` with `max ρ = 1`.
fn bulk_ratio(grid: &Grid, which: Extremal, rho: &Field, params: &PucciParams) -> f64 {
    let m = apply_extremal(grid, which, rho, params);
    let b = grid.boundary_row();
    let ratios = rho
        .values()
        .indexed_iter()
        .filter(|((p, _), &r)| *p != b && r > BULK)
        .map(|(i, &r)| -m.values()[i] / r)
        .collect();
    median(ratios)
}

fn positive_pair(grid: &Grid, which: Extremal, params: &PucciParams) -> Result<HalfEigenpair> {
    params.validate()?;
    let normalise = |u: &Field| u * (1.0 / u.max());
    let mut rho = normalise(&policy_solve(grid, which, &Field::constant(grid, 1.0), params, None)?.u);
    let mut lambda = bulk_ratio(grid, which, &rho, params);
    for it in 1..=EIGEN_MAX_ITERATIONS {
        let w = policy_solve(grid, which, &(&rho * lambda), params, Some(&rho))?.u;
        let next = normalise(&w);
        let next_lambda = bulk_ratio(grid, which, &next, params);
        let moved = (&next - &rho).max_abs();
        let change = ((next_lambda - lambda) / next_lambda).abs();
        rho = next;
        lambda = next_lambda;
        if change < EIGEN_TOLERANCE && moved < EIGEN_TOLERANCE {
            let residual = interior_max_abs(grid, &(&apply_extremal(grid, which, &rho, params) + &(&rho * lambda)));
            return Ok(HalfEigenpair {
                lambda,
                rho,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "half-eigenvalue iteration",
        iterations: EIGEN_MAX_ITERATIONS,
        residual: lambda,
    })
}

/// `(λ₁, ρ₁)` with `−M⁻ρ₁ = λ₁ρ₁`, `ρ₁ > 0` inside.
pub fn half_eigenpair(grid: &Grid, params: &PucciParams) -> Result<HalfEigenpair> {
    positive_pair(grid, Extremal::Minus, params)
}

/// `(λ₂, ρ₂)` with `−M⁻ρ₂ = λ₂ρ₂`, `ρ₂ < 0` inside, from the positive pair of `M⁺`.
pub fn negative_half_eigenpair(grid: &Grid, params: &PucciParams) -> Result<HalfEigenpair> {
    let mut pair = positive_pair(grid, Extremal::Plus, params)?;
    pair.rho = -&pair.rho;
    Ok(pair)
}

/// Both half-eigenpairs of one class.
#[derive(Clone, Debug, Serialize)]
pub struct PucciReport {
    pub params: PucciParams,
    pub n_r: usize,
    pub n_theta: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub residual1: f64,
    pub residual2: f64,
    pub iterations1: usize,
    pub iterations2: usize,
}

pub fn pucci_report(grid: &Grid, params: &PucciParams) -> Result<PucciReport> {
    let pos = half_eigenpair(grid, params)?;
    let neg = negative_half_eigenpair(grid, params)?;
    Ok(PucciReport {
        params: *params,
        n_r: grid.n_r(),
        n_theta: grid.n_theta(),
        lambda1: pos.lambda,
        lambda2: neg.lambda,
        residual1: pos.residual,
        residual2: neg.residual,
        iterations1: pos.iterations,
        iterations2: neg.iterations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsolutionReport {
    /// `max (−λ₁ρ₁ − (a:D²ρ₁ + b·∇ρ₁))` over interior nodes.
    pub residual: f64,
    pub max_drift: f64,
    /// `max |b| ≤ γ`.
    pub drift_covered: bool,
}

const CLASS_SLACK: f64 = 1e-12;

/// Residual of `e^{−λ₁t}ρ₁` as a subsolution of `∂_t − (a:D² + b·∇)`,
/// scaled by `e^{λ₁t}`.
pub fn subsolution_residual(
    grid: &Grid,
    pair: &HalfEigenpair,
    a: &SymmetricTensorField,
    b: &[Field; 2],
    params: &PucciParams,
) -> Result<SubsolutionReport> {
    params.validate()?;
    let (hi, lo) = a.eigenvalues();
    let (top, bottom) = (hi.max(), lo.min());
    if bottom < params.mu1 - CLASS_SLACK || top > params.mu2 + CLASS_SLACK {
        return Err(Error::OutsideClass(format!(
            "ellipticity range [{bottom}, {top}] is not inside [{}, {}]",
            params.mu1, params.mu2
        )));
    }
    let d = collocation(grid, &pair.rho);
    let l = a.xx.values() * d.dxx.values()
        + 2.0 * (a.xy.values() * d.dxy.values())
        + a.yy.values() * d.dyy.values()
        + b[0].values() * d.dx.values()
        + b[1].values() * d.dy.values();
    let r = -(pair.lambda * pair.rho.values()) - l;
    let boundary = grid.boundary_row();
    let residual = r
        .indexed_iter()
        .filter(|((p, _), _)| *p != boundary)
        .fold(f64::NEG_INFINITY, |m, (_, &v)| m.max(v));
    let max_drift = b[0].zip_map(&b[1], f64::hypot).max();
    Ok(SubsolutionReport {
        residual,
        max_drift,
        drift_covered: max_drift <= params.gamma + CLASS_SLACK,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiAudit {
    /// Largest `c` with `χ(t) ≥ c·c₁e^{−(λ₁+η/4)t}` on the series.
    pub c: f64,
    /// Time where the bound is tightest.
    pub t_min: f64,
    pub floor: f64,
    pub pass: bool,
}

pub fn chi_bound_audit(series: &[(f64, f64)], lambda1: f64, c1: f64, eta: f64, floor: f64) -> ChiAudit {
    let rate = lambda1 + 0.25 * eta;
    let (t_min, c) = series
        .iter()
        .map(|&(t, chi)| (t, chi * (rate * t).exp() / c1))
        .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    ChiAudit {
        c,
        t_min,
        floor,
        pass: c1 > 0.0 && c >= floor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{barrier_psi, dirichlet_eigenpair, hopf_margin};
    use std::f64::consts::PI;

    /// Minimum of `a:H` over `a = R diag(m₁, m₂) Rᵀ`, sampling the rotation
    /// and both eigenvalues on grids over `[μ₁, μ₂]`.
    fn brute_min(h: (f64, f64, f64), mu1: f64, mu2: f64) -> f64 {
        let spectrum: Vec<f64> = (0..=4).map(|i| mu1 + (mu2 - mu1) * i as f64 / 4.0).collect();
        let mut best = f64::INFINITY;
        for i in 0..20_000 {
            let t = PI * i as f64 / 20_000.0;
            let (c, s) = (t.cos(), t.sin());
            for &m1 in &spectrum {
                for &m2 in &spectrum {
                    let (axx, axy, ayy) = (m1 * c * c + m2 * s * s, (m1 - m2) * c * s, m1 * s * s + m2 * c * c);
                    best = best.min(axx * h.0 + 2.0 * axy * h.1 + ayy * h.2);
                }
            }
        }
        best
    }

    #[test]
    fn diagonal_example() {
        let p = PucciParams::new(1.0, 2.0).unwrap();
        assert_eq!(pucci_minus_matrix(2.0, 0.0, -3.0, &p), -4.0);
        assert!((brute_min((2.0, 0.0, -3.0), 1.0, 2.0) + 4.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_sampled_infimum() {
        let p = PucciParams::new(0.7, 1.9).unwrap();
        for h in [(1.0, 0.5, -2.0), (-0.3, 1.2, 0.4), (3.0, -0.1, 1.0), (-1.0, 0.0, -2.0)] {
            let exact = pucci_minus_matrix(h.0, h.1, h.2, &p);
            assert!((exact - brute_min(h, 0.7, 1.9)).abs() < 1e-6, "{h:?}");
        }
    }

    #[test]
    fn collapsed_class_is_scaled_trace() {
        let p = PucciParams::new(1.5, 1.5).unwrap();
        assert!((pucci_minus_matrix(0.4, -2.0, 1.1, &p) - 1.5 * 1.5).abs() < 1e-14);
    }

    #[test]
    fn invalid_params() {
        assert!(PucciParams::new(0.0, 1.0).is_err());
        assert!(PucciParams::new(2.0, 1.0).is_err());
        assert!(PucciParams::with_drift(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn drift_term_lowers_minus_and_raises_plus() {
        let g = Grid::unit_disk(16, 16).unwrap();
        let u = Field::from_cartesian(&g, |x, y| 3.0 * x - 4.0 * y);
        let p = PucciParams::with_drift(1.0, 1.0, 0.5).unwrap();
        let lo = apply_extremal(&g, Extremal::Minus, &u, &p);
        let hi = apply_extremal(&g, Extremal::Plus, &u, &p);
        assert!(lo.map(|v| v + 2.5).max_abs() < 1e-9);
        assert!(hi.map(|v| v - 2.5).max_abs() < 1e-9);
    }

    #[test]
    fn linear_policy_solve_is_the_barrier() {
        let g = Grid::unit_disk(24, 16).unwrap();
        let p = PucciParams::new(1.0, 1.0).unwrap();
        let s = policy_solve(&g, Extremal::Minus, &Field::constant(&g, 1.0), &p, None).unwrap();
        assert!((&s.u - &barrier_psi(&g).unwrap()).max_abs() < 1e-9);
    }

    #[test]
    fn zero_source_gives_zero() {
        let g = Grid::unit_disk(16, 16).unwrap();
        let p = PucciParams::new(1.0, 1.5).unwrap();
        let s = policy_solve(&g, Extremal::Minus, &Field::zeros(&g), &p, None).unwrap();
        assert_eq!(s.u.max_abs(), 0.0);
    }

    #[test]
    fn concave_radial_solution() {
        // (1 − r²)/(4μ₂) is concave, so M⁻ acts as μ₂Δ on it
        let g = Grid::unit_disk(24, 16).unwrap();
        let p = PucciParams::new(1.0, 1.5).unwrap();
        let s = policy_solve(&g, Extremal::Minus, &Field::constant(&g, 1.0), &p, None).unwrap();
        let exact = Field::from_polar(&g, |r, _| (1.0 - r * r) / 6.0);
        assert!((&s.u - &exact).max_abs() < 1e-9);
        assert!(s.residual < 1e-5);
        assert!(s.u.interior_min() > 0.0);
    }

    #[test]
    fn linear_half_eigenvalue() {
        let g = Grid::unit_disk(24, 24).unwrap();
        let lambda = dirichlet_eigenpair(&g).unwrap().lambda;
        let pair = half_eigenpair(&g, &PucciParams::new(1.0, 1.0).unwrap()).unwrap();
        assert!((pair.lambda - lambda).abs() < 1e-6, "{}", pair.lambda);
        assert!(pair.residual < 1e-5);
        assert!((pair.rho.max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn widened_class_half_eigenpairs() {
        let g = Grid::unit_disk(24, 24).unwrap();
        let lambda = dirichlet_eigenpair(&g).unwrap().lambda;
        let p = PucciParams::new(1.0, 1.2).unwrap();
        let pos = half_eigenpair(&g, &p).unwrap();
        let neg = negative_half_eigenpair(&g, &p).unwrap();
        assert!(pos.lambda >= 1.2 * lambda - 1e-4, "{}", pos.lambda);
        assert!(neg.lambda <= pos.lambda);
        // μ₁Δ belongs to the class, so the infimum is at most μ₁λ
        assert!(neg.lambda <= lambda + 1e-8, "{}", neg.lambda);
        assert!(pos.residual < 1e-5 && neg.residual < 1e-5);
        assert!(pos.rho.interior_min() > 0.0);
        assert!(neg.rho.interior_max() < 0.0);
        assert!(hopf_margin(&g, &pos.rho) >= 1e-3);
    }

    #[test]
    fn exact_eigenmode_is_not_a_strict_subsolution() {
        let g = Grid::unit_disk(24, 24).unwrap();
        let p = PucciParams::new(1.0, 1.0).unwrap();
        let pair = half_eigenpair(&g, &p).unwrap();
        let a = SymmetricTensorField::identity(&g);
        let b = [Field::zeros(&g), Field::zeros(&g)];
        let report = subsolution_residual(&g, &pair, &a, &b, &p).unwrap();
        assert!(report.residual.abs() < 1e-6, "{}", report.residual);
        assert!(report.drift_covered);
    }

    #[test]
    fn coefficients_outside_the_class_are_rejected() {
        let g = Grid::unit_disk(16, 16).unwrap();
        let p = PucciParams::new(1.0, 1.1).unwrap();
        let pair = HalfEigenpair {
            lambda: 1.0,
            rho: Field::from_polar(&g, |r, _| 1.0 - r * r),
            iterations: 0,
            residual: 0.0,
        };
        let a = SymmetricTensorField::scaled_identity(&g, 2.0);
        let b = [Field::zeros(&g), Field::zeros(&g)];
        let err = subsolution_residual(&g, &pair, &a, &b, &p).unwrap_err();
        assert!(matches!(err, Error::OutsideClass(_)));
    }

    #[test]
    fn chi_audit_on_synthetic_series() {
        let (lambda, c1, eta) = (5.78, 0.3, 0.578);
        let exact: Vec<_> = (0..50)
            .map(|i| i as f64 * 0.04)
            .map(|t| (t, c1 * (-lambda * t).exp()))
            .collect();
        let audit = chi_bound_audit(&exact, lambda, c1, eta, 0.1);
        assert!((audit.c - 1.0).abs() < 1e-12 && audit.t_min == 0.0 && audit.pass);
        let fast: Vec<_> = (0..200)
            .map(|i| i as f64 * 0.1)
            .map(|t| (t, c1 * (-(lambda + eta) * t).exp()))
            .collect();
        let audit = chi_bound_audit(&fast, lambda, c1, eta, 0.1);
        // e^{−3ηt/4} at t = 19.9
        assert!((audit.c - (-0.75 * eta * 19.9f64).exp()).abs() < 1e-12);
        assert!(!audit.pass);
    }
}

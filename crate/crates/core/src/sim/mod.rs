//! Time integration of the ALE Stefan system: backward-Euler heat step with
//! frozen coefficients, explicit transport of the height `h`, and a gauge
//! refresh every step.

mod run;

pub use run::{run, run_with, Breakdown, RunOutput, Snapshot};

use rustfft::num_complex::Complex64;

use crate::config::SimConfig;
use crate::error::{Error, Result, Stage};
use crate::field::{
    derivatives, gradient, solve_dirichlet_with, BoundaryField, EllipticProblem, Field, Grid, SolveOptions,
    SymmetricTensorField,
};
use crate::gauge::{deformation, gauge_velocity, harmonic_extension, GaugeState, MatrixField};

/// Temperature, velocity, height and gauge at one instant.
#[derive(Clone, Debug)]
pub struct StefanState {
    pub t: f64,
    pub q: Field,
    /// `v = −Aᵀ∇q`.
    pub v: [Field; 2],
    pub h: BoundaryField,
    /// Height velocity of the step that produced this state.
    pub h_t: BoundaryField,
    pub gauge: GaugeState,
    /// L² norm of the increment removed by the mode filter in that step.
    pub filtered: f64,
}

impl StefanState {
    /// State at `t = 0` with `h = 0` and the identity gauge.
    pub fn initial(grid: &Grid, q0: Field) -> Self {
        let gauge = GaugeState::identity(grid);
        let v = velocity(grid, &q0, &gauge.a);
        let h = BoundaryField::zeros(grid);
        let h_t = height_velocity(grid, &v, &gauge.a).unwrap_or_else(|_| h.clone());
        StefanState {
            t: 0.0,
            q: q0,
            v,
            h,
            h_t,
            gauge,
            filtered: 0.0,
        }
    }

    /// Initial state of a run: with a moving gauge the height rate and gauge
    /// velocity are those the first step will apply.
    pub fn start(grid: &Grid, q0: Field, cfg: &SimConfig) -> Result<Self> {
        let mut state = Self::initial(grid, q0);
        if cfg.scheme.frozen_gauge {
            state.h_t = BoundaryField::zeros(grid);
            return Ok(state);
        }
        let (_, rate, _) = boundary_step(grid, &state.h, &state.v, &state.gauge.a, 0.0, cfg.scheme.filter)
            .map_err(Error::at(Stage::BoundaryUpdate))?;
        state.gauge.psi_t = gauge_velocity(grid, &rate).map_err(Error::at(Stage::GaugeVelocity))?;
        state.h_t = rate;
        Ok(state)
    }
}

/// Quadratic coefficient `b` making the radial ansatz compatible with the
/// free-boundary condition `∂_NN q₀ + κ∂_N q₀ − (∂_N q₀)² = 0`.
pub fn compatible_b(a: f64) -> f64 {
    0.5 * a * (1.0 + a)
}

/// `q₀ = a(1−s²) + b(1−s²)² + δ s^k (1−s²)³ cos kθ` with `s` the normalised
/// radius of the reference chart. The factor `s^k` keeps the perturbation
/// smooth at the origin; the cubic factor keeps it out of the boundary
/// condition on `Δq₀`. The initial height is `h₀ = 0`.
pub fn make_initial_data(cfg: &SimConfig, grid: &Grid) -> Result<Field> {
    let a = cfg.initial.a;
    let b = compatible_b(a);
    let (delta, k) = (cfg.initial.delta, cfg.initial.k as f64);
    let q0 = Field::from_polar(grid, |r, th| {
        let w = 1.0 - r * r;
        a * w + b * w * w + delta * r.powf(k) * w * w * w * (k * th).cos()
    });
    let boundary = grid.boundary_row();
    for ((p, l), &value) in q0.values().indexed_iter() {
        if p != boundary && !(value > 0.0) {
            return Err(Error::NonPositiveInitialData {
                r: grid.r()[p],
                theta: grid.theta()[l],
                value,
            });
        }
    }
    Ok(q0)
}

/// Non-divergence coefficients of the pulled-back heat operator.
#[derive(Clone, Debug)]
pub struct Coefficients {
    /// `a_kj = A^k_i A^j_i`.
    pub a: SymmetricTensorField,
    /// `b_k = ∂_j(A^k_i) A^j_i + A^k_i Ψ_t^i`.
    pub b: [Field; 2],
}

impl Coefficients {
    pub fn identity(grid: &Grid) -> Self {
        Coefficients {
            a: SymmetricTensorField::identity(grid),
            b: [Field::zeros(grid), Field::zeros(grid)],
        }
    }

    /// `a:D²u + b·∇u`.
    pub fn apply(&self, grid: &Grid, u: &Field) -> Field {
        let d = derivatives(grid, u);
        let mut out = &(&self.a.xx * &d.dxx) + &(&self.a.yy * &d.dyy);
        out = &out + &(&(&self.a.xy * &d.dxy) * 2.0);
        out = &out + &(&self.b[0] * &d.dx);
        &out + &(&self.b[1] * &d.dy)
    }
}

pub fn coefficients(grid: &Grid, gauge: &GaugeState) -> Coefficients {
    let a = &gauge.a;
    let aat = a.mul(&a.transpose());
    let second = [derivatives(grid, &gauge.psi[0]), derivatives(grid, &gauge.psi[1])];
    // ∂_j DΨ[i][l] = ∂_j ∂_l Ψ^i, then ∂_j A = −A (∂_j DΨ) A
    let d_dpsi = |j: usize| {
        let e = |i: usize, l: usize| {
            let d = &second[i];
            match (j, l) {
                (0, 0) => d.dxx.clone(),
                (1, 1) => d.dyy.clone(),
                _ => d.dxy.clone(),
            }
        };
        MatrixField([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    };
    let at = a.transpose();
    let mut b = [Field::zeros(grid), Field::zeros(grid)];
    for j in 0..2 {
        let da = a.mul(&d_dpsi(j)).mul(a);
        let term = da.mul(&at);
        for (k, bk) in b.iter_mut().enumerate() {
            *bk = &*bk - term.entry(k, j);
        }
    }
    let transport = a.apply(&gauge.psi_t);
    let b = [&b[0] + &transport[0], &b[1] + &transport[1]];
    let sym = |i: usize, j: usize| (aat.entry(i, j) + aat.entry(j, i)).map(|v| 0.5 * v);
    Coefficients {
        a: SymmetricTensorField {
            xx: aat.entry(0, 0).clone(),
            xy: sym(0, 1),
            yy: aat.entry(1, 1).clone(),
        },
        b,
    }
}

fn heat_options(tolerance: f64) -> SolveOptions {
    SolveOptions {
        tolerance,
        relative_tolerance: 1e-11,
        ..SolveOptions::default()
    }
}

/// Backward-Euler step `(I − Δt(a:D² + b·∇)) q_new = q`, `q_new = 0` on Γ.
pub fn heat_step(grid: &Grid, q: &Field, coeffs: &Coefficients, dt: f64) -> Result<Field> {
    heat_step_with(grid, q, coeffs, dt, 1e-12)
}

pub fn heat_step_with(grid: &Grid, q: &Field, coeffs: &Coefficients, dt: f64, tolerance: f64) -> Result<Field> {
    if dt == 0.0 {
        return Ok(q.clone());
    }
    let problem = EllipticProblem {
        a: coeffs.a.clone(),
        b: coeffs.b.clone(),
        c: Field::constant(grid, -1.0 / dt),
        f: q * (-1.0 / dt),
        g: BoundaryField::zeros(grid),
    };
    solve_dirichlet_with(grid, &problem, &heat_options(tolerance), Some(q)).map(|r| r.solution)
}

/// `v = −Aᵀ∇q`.
pub fn velocity(grid: &Grid, q: &Field, a: &MatrixField) -> [Field; 2] {
    let [vx, vy] = a.apply_transpose(&gradient(grid, q));
    [-&vx, -&vy]
}

/// `h_t = v·AᵀN / Λ` on Γ.
pub fn height_velocity(grid: &Grid, v: &[Field; 2], a: &MatrixField) -> Result<BoundaryField> {
    let [[a00, a01], [a10, a11]] = a.trace();
    let [nx, ny] = grid.normal();
    let tx = a00.values() * nx + a10.values() * ny;
    let ty = a01.values() * nx + a11.values() * ny;
    let lambda = &tx * nx + &ty * ny;
    if let Some(l) = lambda.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::GaugeBreakdown(format!(
            "Lambda = {:e} at theta = {:.4}",
            lambda[l],
            grid.theta()[l]
        )));
    }
    let (vx, vy) = (v[0].trace(), v[1].trace());
    Ok(BoundaryField::from_array(
        (vx.values() * &tx + vy.values() * &ty) / lambda,
    ))
}

/// Removes the angular modes with `|m| > N_θ/3`; returns the filtered field
/// and the L² norm (per node) of what was removed.
pub fn filter_top_third(grid: &Grid, phi: &BoundaryField) -> (BoundaryField, f64) {
    let n = grid.n_theta();
    let cut = n / 3;
    let mut modes = phi.modes(grid);
    let mut removed = 0.0;
    for (k, z) in modes.iter_mut().enumerate() {
        let m = k.min(n - k);
        if m > cut {
            removed += z.norm_sqr();
            *z = Complex64::new(0.0, 0.0);
        }
    }
    (BoundaryField::from_modes(grid, &modes), removed.sqrt())
}

/// Explicit Euler update of the height. Returns the new height, the applied
/// rate `(h_new − h)/Δt` and the filtered amount.
pub fn boundary_step(
    grid: &Grid,
    h: &BoundaryField,
    v: &[Field; 2],
    a: &MatrixField,
    dt: f64,
    filter: bool,
) -> Result<(BoundaryField, BoundaryField, f64)> {
    let mut rate = height_velocity(grid, v, a)?;
    let mut removed = 0.0;
    if filter {
        (rate, removed) = filter_top_third(grid, &rate);
    }
    Ok((h + &(&rate * dt), rate, removed * dt))
}

/// One full cycle: velocity, height, gauge velocity, gauge refresh,
/// coefficients, heat solve.
pub fn step(grid: &Grid, state: &StefanState, cfg: &SimConfig) -> Result<StefanState> {
    let dt = cfg.time.dt;
    let tolerance = cfg.scheme.tolerance;
    if cfg.scheme.frozen_gauge {
        let coeffs = Coefficients::identity(grid);
        let q = heat_step_with(grid, &state.q, &coeffs, dt, tolerance).map_err(Error::at(Stage::HeatSolve))?;
        let v = velocity(grid, &q, &state.gauge.a);
        return Ok(StefanState {
            t: state.t + dt,
            q,
            v,
            h: state.h.clone(),
            h_t: BoundaryField::zeros(grid),
            gauge: state.gauge.clone(),
            filtered: 0.0,
        });
    }
    let v = velocity(grid, &state.q, &state.gauge.a);
    let (h, h_t, filtered) = boundary_step(grid, &state.h, &v, &state.gauge.a, dt, cfg.scheme.filter)
        .map_err(Error::at(Stage::BoundaryUpdate))?;
    let psi_t = gauge_velocity(grid, &h_t).map_err(Error::at(Stage::GaugeVelocity))?;
    let gauge = harmonic_extension(grid, &h)
        .and_then(|psi| deformation(grid, psi, psi_t))
        .map_err(Error::at(Stage::GaugeRefresh))?;
    let coeffs = coefficients(grid, &gauge);
    let finite = [&coeffs.a.xx, &coeffs.a.xy, &coeffs.a.yy, &coeffs.b[0], &coeffs.b[1]]
        .iter()
        .all(|f| f.values().iter().all(|v| v.is_finite()));
    if !finite {
        return Err(Error::at(Stage::Coefficients)(Error::GaugeBreakdown(
            "non-finite coefficients".into(),
        )));
    }
    let q = heat_step_with(grid, &state.q, &coeffs, dt, tolerance).map_err(Error::at(Stage::HeatSolve))?;
    let v = velocity(grid, &q, &gauge.a);
    Ok(StefanState {
        t: state.t + dt,
        q,
        v,
        h,
        h_t,
        gauge,
        filtered,
    })
}

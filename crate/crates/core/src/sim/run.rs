use serde::Serialize;

use super::{coefficients, make_initial_data, step, Coefficients, StefanState};
use crate::config::SimConfig;
use crate::diagnostics::{
    k_ratio, measure, qt_boundary_sign, rayleigh_taylor_check, t_k, DiagnosticsRow, Measurement, NormComponents,
    NormSpec, RayleighTaylor, Tracker,
};
use crate::eigen::{c1, dirichlet_eigenpair, EigenPair};
use crate::error::{Error, Result, Stage};
use crate::field::{Field, Grid};

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub index: usize,
    pub step: usize,
    pub state: StefanState,
}

/// Why and when a run stopped early.
#[derive(Clone, Debug, Serialize)]
pub struct Breakdown {
    pub t: f64,
    pub step: usize,
    pub stage: Option<Stage>,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub lambda: f64,
    pub eta: f64,
    /// `β = 2λ − η`.
    pub beta: f64,
    pub k: f64,
    pub t_k: f64,
    pub c1: f64,
    pub rayleigh_taylor: RayleighTaylor,
    pub rows: Vec<DiagnosticsRow>,
    pub measurements: Vec<Measurement>,
    pub snapshots: Vec<Snapshot>,
    pub breakdown: Option<Breakdown>,
    pub final_state: StefanState,
    /// `max |a − Id|` over recorded states.
    pub coefficient_deviation: f64,
    /// `max |e − 1|` over eigenvalues `e` of `a` at recorded states.
    pub ellipticity_deviation: f64,
    /// `max |b|` over recorded states.
    pub drift: f64,
    /// Largest per-step increment removed by the height filter.
    pub filtered_max: f64,
    pub norm: NormComponents,
}

/// Integrates the configured problem to `t_end` or the first failure.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let pair = dirichlet_eigenpair(&grid)?;
    run_with(cfg, &grid, &pair)
}

/// As [`run`] with a prebuilt grid and eigenpair.
pub fn run_with(cfg: &SimConfig, grid: &Grid, pair: &EigenPair) -> Result<RunOutput> {
    let q0 = make_initial_data(cfg, grid)?;
    let lambda = pair.lambda;
    let eta = cfg.eta.fraction * lambda;
    let beta = 2.0 * lambda - eta;
    let k = k_ratio(grid, &q0)?;
    let spec = NormSpec::default();

    let mut state = StefanState::start(grid, q0.clone(), cfg)?;
    let mut out = RunOutput {
        lambda,
        eta,
        beta,
        k,
        t_k: t_k(k, cfg.constants.c_bar),
        c1: c1(grid, &q0, &pair.phi),
        rayleigh_taylor: rayleigh_taylor_check(grid, &q0, &pair.phi, cfg.constants.c_star),
        rows: Vec::new(),
        measurements: Vec::new(),
        snapshots: Vec::new(),
        breakdown: None,
        final_state: state.clone(),
        coefficient_deviation: 0.0,
        ellipticity_deviation: 0.0,
        drift: 0.0,
        filtered_max: 0.0,
        norm: NormComponents::default(),
    };
    let mut tracker = Tracker::new(beta);
    let mut previous: Option<Field> = None;
    let stride = cfg.output.snapshot_stride;
    let steps = cfg.steps();
    let mut done = 0;

    for n in 0..=steps {
        if n > 0 {
            match step(grid, &state, cfg) {
                Ok(mut next) => {
                    next.t = n as f64 * cfg.time.dt;
                    done = n;
                    previous = Some(std::mem::replace(&mut state, next).q);
                }
                Err(e) => {
                    let stage = match &e {
                        Error::StepFailed { stage, .. } => Some(*stage),
                        _ => None,
                    };
                    out.breakdown = Some(Breakdown {
                        t: state.t + cfg.time.dt,
                        step: n,
                        stage,
                        reason: e.to_string(),
                    });
                    break;
                }
            }
        }
        let coeffs = if cfg.scheme.frozen_gauge {
            Coefficients::identity(grid)
        } else {
            coefficients(grid, &state.gauge)
        };
        out.coefficient_deviation = out.coefficient_deviation.max(coeffs.a.max_deviation_from_identity());
        let (hi, lo) = coeffs.a.eigenvalues();
        out.ellipticity_deviation = out.ellipticity_deviation.max(hi.max() - 1.0).max(1.0 - lo.min());
        out.drift = out.drift.max(coeffs.b[0].zip_map(&coeffs.b[1], f64::hypot).max_abs());
        out.filtered_max = out.filtered_max.max(state.filtered);
        let m = measure(grid, &state, &coeffs, &spec)?;
        let qt_sign = match &previous {
            Some(prev) => qt_boundary_sign(grid, Some(prev), &state.q, cfg.time.dt)?,
            None => m.qt_sign_pde,
        };
        out.rows.push(tracker.push(m.clone(), qt_sign));
        out.measurements.push(m);
        if n % stride == 0 || n == steps {
            out.snapshots.push(Snapshot {
                index: out.snapshots.len(),
                step: n,
                state: state.clone(),
            });
        }
    }
    if out.snapshots.last().map(|s| s.step) != Some(done) {
        out.snapshots.push(Snapshot {
            index: out.snapshots.len(),
            step: done,
            state: state.clone(),
        });
    }
    out.norm = tracker.norm().clone();
    out.final_state = state;
    Ok(out)
}

//! Scalar diagnostics of a run: χ, the truncated energy and dissipation,
//! the norm proxy S, the conserved heat-plus-area, decay fits, `K`, `T_K`
//! and the boundary sign of `∂_N q_t`.
//!
//! Truncation: interior orders `|α| + 2b ≤ 4` with at most one time
//! derivative, boundary orders `|β| + 2b ≤ 6` (`β ≤ 5` for `h_t` in the
//! dissipation). Time derivatives come from the equation, not from stored
//! history: `q_t = a:D²q + b·∇q`, `v_t = −A_tᵀ∇q − Aᵀ∇q_t`,
//! `A_t = −A(DΨ_t)A`.

mod tracker;

pub use tracker::{DiagnosticsRow, NormComponents, Tracker};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::{
    angular_derivative, boundary_sobolev_norm_sq, derivatives_up_to, gradient, inner, integrate, integrate_boundary,
    l2_norm, normal_derivative, sobolev_norm_sq, tangential_derivative, BoundaryField, Field, Grid,
};
use crate::gauge::MatrixField;
use crate::sim::{Coefficients, StefanState};

/// Orders of the truncated energy, dissipation and norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormSpec {
    pub boundary_order: usize,
    pub interior_order: usize,
    pub time_derivatives: usize,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec {
            boundary_order: 6,
            interior_order: 4,
            time_derivatives: 1,
        }
    }
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        if self.boundary_order > 6 || self.interior_order > 4 || self.time_derivatives > 1 {
            return Err(Error::DerivativeOrder {
                order: self.boundary_order.max(self.interior_order),
                max: 6,
            });
        }
        Ok(())
    }

    /// Interior order available to terms with `b` time derivatives.
    fn interior(&self, b: usize) -> Option<usize> {
        (b <= self.time_derivatives)
            .then(|| self.interior_order.checked_sub(2 * b))
            .flatten()
    }

    fn boundary(&self, b: usize) -> Option<usize> {
        (b <= self.time_derivatives)
            .then(|| self.boundary_order.checked_sub(2 * b))
            .flatten()
    }
}

/// `χ = min_Γ(−∂_N q)`.
pub fn chi(grid: &Grid, q: &Field) -> f64 {
    -normal_derivative(grid, q).max()
}

/// `∫ qJ + ∫ J`: heat content plus area of the physical domain.
pub fn conserved_heat(grid: &Grid, state: &StefanState) -> f64 {
    integrate(grid, &(&state.q * &state.gauge.j)) + integrate(grid, &state.gauge.j)
}

/// First time derivatives obtained from the equations.
#[derive(Clone, Debug)]
pub struct TimeDerivatives {
    pub q_t: Field,
    pub v_t: [Field; 2],
}

pub fn time_derivatives(grid: &Grid, state: &StefanState, coeffs: &Coefficients) -> TimeDerivatives {
    let q_t = coeffs.apply(grid, &state.q);
    let a = &state.gauge.a;
    let a_t = a.mul(&MatrixField::jacobian(grid, &state.gauge.psi_t)).mul(a);
    // A_t = −A (DΨ_t) A, so −A_tᵀ∇q = (A DΨ_t A)ᵀ∇q
    let grad_q = gradient(grid, &state.q);
    let first = a_t.apply_transpose(&grad_q);
    let second = a.apply_transpose(&gradient(grid, &q_t));
    TimeDerivatives {
        q_t,
        v_t: [&first[0] - &second[0], &first[1] - &second[1]],
    }
}

/// Individual contributions to the energy (before the factor ½).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyParts {
    pub velocity_tangential: f64,
    pub velocity_cartesian: f64,
    pub heat_tangential: f64,
    pub heat_cartesian: f64,
    /// `Σ_β ∫(−∂_N q)Λ²|∂_s^β h|²`.
    pub boundary_h: f64,
    /// `Σ_β ∫(−∂_N q)Λ²|∂_s^β h_t|²`.
    pub boundary_ht: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        0.5 * (self.velocity_tangential
            + self.velocity_cartesian
            + self.heat_tangential
            + self.heat_cartesian
            + self.boundary_h
            + self.boundary_ht)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DissipationParts {
    pub velocity_tangential: f64,
    pub velocity_cartesian: f64,
    pub heat_tangential: f64,
    pub heat_cartesian: f64,
    pub boundary_ht: f64,
}

impl DissipationParts {
    pub fn total(&self) -> f64 {
        self.velocity_tangential
            + self.velocity_cartesian
            + self.heat_tangential
            + self.heat_cartesian
            + self.boundary_ht
    }
}

/// Everything the tracker needs from one state.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub t: f64,
    pub chi: f64,
    pub energy: EnergyParts,
    pub dissipation: DissipationParts,
    pub q_h4_sq: f64,
    pub q_l2: f64,
    pub qt_h2_sq: f64,
    /// `Σ_{|α|+2b≤4} ‖∂_θ^α ∂_t^b v‖²`.
    pub v_tangential: f64,
    pub h_h6_sq: f64,
    pub h_h45_sq: f64,
    pub ht_h4_sq: f64,
    pub ht_h5_sq: f64,
    pub h_l2: f64,
    pub conserved: f64,
    pub max_q: f64,
    pub min_q: f64,
    /// `inf_Γ ∂_N q_t` from the equation.
    pub qt_sign_pde: f64,
}

fn weighted(grid: &Grid, weight: &Array2<f64>, u: &Field) -> f64 {
    (grid.area_weights() * weight * u.values() * u.values()).sum()
}

/// `Σ_{β ≤ order} ∫ w |∂_s^β φ|² dS`.
fn boundary_sum(grid: &Grid, weight: &BoundaryField, phi: &BoundaryField, order: usize) -> Result<f64> {
    let mut total = 0.0;
    for beta in 0..=order {
        let d = tangential_derivative(grid, phi, beta)?;
        total += integrate_boundary(grid, &weight.zip_map(&d, |w, v| w * v * v));
    }
    Ok(total)
}

/// Interior sums for a vector field `u` and the combination `f + g·v`,
/// in both cutoff regions, up to `order`.
struct Interior {
    vector_tangential: f64,
    vector_cartesian: f64,
    vector_plain_tangential: f64,
    combo_tangential: f64,
    combo_cartesian: f64,
}

fn interior_sums(
    grid: &Grid,
    u: &[Field; 2],
    f: &Field,
    g: &[Field; 2],
    v: &[Field; 2],
    order: usize,
) -> Result<Interior> {
    let mu = grid.cutoff();
    let rest = mu.mapv(|m| 1.0 - m);
    let ones = Array2::from_elem(grid.shape(), 1.0);
    let combo = |df: &Field, dg0: &Field, dg1: &Field| &(df + &(dg0 * &v[0])) + &(dg1 * &v[1]);

    let mut out = Interior {
        vector_tangential: 0.0,
        vector_cartesian: 0.0,
        vector_plain_tangential: 0.0,
        combo_tangential: 0.0,
        combo_cartesian: 0.0,
    };
    for j in 0..=order as u32 {
        for ui in u {
            let d = angular_derivative(grid, ui, j);
            out.vector_tangential += weighted(grid, mu, &d);
            out.vector_plain_tangential += weighted(grid, &ones, &d);
        }
        let c = combo(
            &angular_derivative(grid, f, j),
            &angular_derivative(grid, &g[0], j),
            &angular_derivative(grid, &g[1], j),
        );
        out.combo_tangential += weighted(grid, mu, &c);
    }
    for ui in u {
        for (_, d) in derivatives_up_to(grid, ui, order)? {
            out.vector_cartesian += weighted(grid, &rest, &d);
        }
    }
    let df = derivatives_up_to(grid, f, order)?;
    let dg0 = derivatives_up_to(grid, &g[0], order)?;
    let dg1 = derivatives_up_to(grid, &g[1], order)?;
    for ((a, b), c) in df.iter().zip(&dg0).zip(&dg1) {
        out.combo_cartesian += weighted(grid, &rest, &combo(&a.1, &b.1, &c.1));
    }
    Ok(out)
}

/// Evaluates every per-state diagnostic in one pass.
pub fn measure(grid: &Grid, state: &StefanState, coeffs: &Coefficients, spec: &NormSpec) -> Result<Measurement> {
    spec.validate()?;
    let td = time_derivatives(grid, state, coeffs);
    let gauge = &state.gauge;
    let dn = normal_derivative(grid, &state.q);
    let weight = dn.zip_map(&gauge.lambda, |d, l| -d * l * l);

    let mut energy = EnergyParts::default();
    let mut dissipation = DissipationParts::default();
    let mut v_tangential = 0.0;

    if let Some(order) = spec.interior(0) {
        let s = interior_sums(grid, &state.v, &state.q, &gauge.psi, &state.v, order)?;
        energy.velocity_tangential += s.vector_tangential;
        energy.velocity_cartesian += s.vector_cartesian;
        energy.heat_tangential += s.combo_tangential;
        energy.heat_cartesian += s.combo_cartesian;
        v_tangential += s.vector_plain_tangential;
    }
    if let Some(order) = spec.interior(1) {
        let s = interior_sums(grid, &td.v_t, &td.q_t, &gauge.psi_t, &state.v, order)?;
        energy.velocity_tangential += s.vector_tangential;
        energy.velocity_cartesian += s.vector_cartesian;
        energy.heat_tangential += s.combo_tangential;
        energy.heat_cartesian += s.combo_cartesian;
        dissipation.heat_tangential = s.combo_tangential;
        dissipation.heat_cartesian = s.combo_cartesian;
        v_tangential += s.vector_plain_tangential;
    }
    dissipation.velocity_tangential = energy.velocity_tangential;
    dissipation.velocity_cartesian = energy.velocity_cartesian;

    if let Some(order) = spec.boundary(0) {
        energy.boundary_h = boundary_sum(grid, &weight, &state.h, order)?;
        dissipation.boundary_ht = boundary_sum(grid, &weight, &state.h_t, order.saturating_sub(1))?;
    }
    if let Some(order) = spec.boundary(1) {
        energy.boundary_ht = boundary_sum(grid, &weight, &state.h_t, order)?;
    }

    let q_h4_sq = sobolev_norm_sq(grid, &state.q, 4)?;
    let qt_h2_sq = sobolev_norm_sq(grid, &td.q_t, 2)?;
    let h = &state.h;
    Ok(Measurement {
        t: state.t,
        chi: -dn.max(),
        energy,
        dissipation,
        q_h4_sq,
        q_l2: l2_norm(grid, &state.q),
        qt_h2_sq,
        v_tangential,
        h_h6_sq: boundary_sobolev_norm_sq(grid, h, 6.0),
        h_h45_sq: boundary_sobolev_norm_sq(grid, h, 4.5),
        ht_h4_sq: boundary_sobolev_norm_sq(grid, &state.h_t, 4.0),
        ht_h5_sq: boundary_sobolev_norm_sq(grid, &state.h_t, 5.0),
        h_l2: crate::field::boundary_l2_norm(grid, h),
        conserved: conserved_heat(grid, state),
        max_q: state.q.max(),
        min_q: state.q.interior_min(),
        qt_sign_pde: normal_derivative(grid, &td.q_t).min(),
    })
}

/// Instantaneous energy terms of a state.
pub fn energy_disc(grid: &Grid, state: &StefanState, coeffs: &Coefficients) -> Result<EnergyParts> {
    measure(grid, state, coeffs, &NormSpec::default()).map(|m| m.energy)
}

pub fn dissipation_disc(grid: &Grid, state: &StefanState, coeffs: &Coefficients) -> Result<DissipationParts> {
    measure(grid, state, coeffs, &NormSpec::default()).map(|m| m.dissipation)
}

/// Least-squares slope of `ln y` against `t`.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<f64> {
    if let Some((index, &(_, value))) = series.iter().enumerate().find(|(_, (_, y))| !(*y > 0.0)) {
        return Err(Error::NonPositiveSample { index, value });
    }
    if series.len() < 2 {
        return Err(Error::InsufficientHistory("a slope needs at least two samples"));
    }
    let n = series.len() as f64;
    let mean_t = series.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = series.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sty, mut stt) = (0.0, 0.0);
    for &(t, y) in series {
        sty += (t - mean_t) * (y.ln() - mean_y);
        stt += (t - mean_t) * (t - mean_t);
    }
    Ok(sty / stt)
}

/// `K = ‖q₀‖_{H⁴} / ‖q₀‖_{L²}`.
pub fn k_ratio(grid: &Grid, q0: &Field) -> Result<f64> {
    let l2 = l2_norm(grid, q0);
    if l2 == 0.0 {
        return Err(Error::ZeroData);
    }
    Ok(sobolev_norm_sq(grid, q0, 4)?.sqrt() / l2)
}

/// `T_K = C̄ ln K`.
pub fn t_k(k: f64, c_bar: f64) -> f64 {
    c_bar * k.ln()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RayleighTaylor {
    pub holds: bool,
    /// `min_Γ(−∂_N q₀) − C_* ∫q₀φ₁`.
    pub margin: f64,
}

pub fn rayleigh_taylor_check(grid: &Grid, q0: &Field, phi: &Field, c_star: f64) -> RayleighTaylor {
    let margin = chi(grid, q0) - c_star * inner(grid, q0, phi);
    RayleighTaylor {
        holds: margin >= 0.0,
        margin,
    }
}

/// `inf_Γ ∂_N(q − q_prev)/Δt`.
pub fn qt_boundary_sign(grid: &Grid, previous: Option<&Field>, current: &Field, dt: f64) -> Result<f64> {
    let previous = previous.ok_or(Error::InsufficientHistory(
        "the boundary sign of q_t needs two snapshots",
    ))?;
    Ok(normal_derivative(grid, &(&(current - previous) * (1.0 / dt))).min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dirichlet_eigenpair;
    use crate::gauge::GaugeState;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::unit_disk(32, 32).unwrap()
    }

    fn state(g: &Grid, q: Field, h: BoundaryField) -> StefanState {
        StefanState {
            t: 0.0,
            v: crate::sim::velocity(g, &q, &MatrixField::identity(g)),
            q,
            h,
            h_t: BoundaryField::zeros(g),
            gauge: GaugeState::identity(g),
            filtered: 0.0,
        }
    }

    #[test]
    fn chi_of_model_profiles() {
        let g = grid();
        assert!((chi(&g, &Field::from_polar(&g, |r, _| 1.0 - r * r)) - 2.0).abs() < 1e-10);
        let (a, b) = (0.1, 0.055);
        let q = Field::from_polar(&g, |r, _| a * (1.0 - r * r) + b * (1.0 - r * r).powi(2));
        assert!((chi(&g, &q) - 2.0 * a).abs() < 1e-11);
        assert_eq!(chi(&g, &Field::zeros(&g)), 0.0);
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = grid();
        let s = state(&g, Field::zeros(&g), BoundaryField::zeros(&g));
        let c = Coefficients::identity(&g);
        let m = measure(&g, &s, &c, &NormSpec::default()).unwrap();
        assert_eq!(m.energy.total(), 0.0);
        assert_eq!(m.dissipation.total(), 0.0);
    }

    #[test]
    fn boundary_energy_matches_multiplier_sum() {
        let g = grid();
        let eps = 0.01;
        let q = Field::from_polar(&g, |r, _| 1.0 - r * r);
        let h = BoundaryField::from_angle(&g, |t| eps * (3.0 * t).cos());
        let e = energy_disc(&g, &state(&g, q.clone(), h.clone()), &Coefficients::identity(&g)).unwrap();
        let oracle: f64 = (0..=6).map(|j| 2.0 * 9f64.powi(j) * eps * eps * PI).sum();
        assert!(
            (e.boundary_h - oracle).abs() < 1e-9 * oracle,
            "{} {oracle}",
            e.boundary_h
        );
        // weight is linear in q
        let e3 = energy_disc(&g, &state(&g, &q * 3.0, h), &Coefficients::identity(&g)).unwrap();
        assert!((e3.boundary_h - 3.0 * e.boundary_h).abs() < 1e-9 * oracle);
    }

    #[test]
    fn time_derivative_of_eigenmode() {
        let g = grid();
        let pair = dirichlet_eigenpair(&g).unwrap();
        let s = state(&g, pair.phi.clone(), BoundaryField::zeros(&g));
        let td = time_derivatives(&g, &s, &Coefficients::identity(&g));
        assert!((&td.q_t + &(&pair.phi * pair.lambda)).max_abs() < 1e-7);
        // v_t = −∇q_t = λ∇φ = −λ v
        for i in 0..2 {
            assert!((&td.v_t[i] + &(&s.v[i] * pair.lambda)).max_abs() < 1e-6);
        }
    }

    #[test]
    fn conserved_quantity_at_start() {
        let g = grid();
        let (a, b) = (0.1, 0.055);
        let q = Field::from_polar(&g, |r, _| a * (1.0 - r * r) + b * (1.0 - r * r).powi(2));
        let s = state(&g, q, BoundaryField::zeros(&g));
        // ∫ a(1−r²) + b(1−r²)² = π(a/2 + b/3)
        let oracle = PI * (a / 2.0 + b / 3.0) + PI;
        assert!((conserved_heat(&g, &s) - oracle).abs() < 1e-12);
    }

    #[test]
    fn decay_fit_examples() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.04).collect();
        let exact: Vec<_> = ts.iter().map(|&t| (t, 5.0 * (-3.0 * t).exp())).collect();
        assert!((decay_fit(&exact).unwrap() + 3.0).abs() < 1e-10);
        let lambda = 5.783;
        let wobble: Vec<_> = ts
            .iter()
            .map(|&t| (t, (-lambda * t).exp() * (1.0 + 0.01 * t.sin())))
            .collect();
        assert!((decay_fit(&wobble).unwrap() + lambda).abs() < 0.02);
        let flat: Vec<_> = ts.iter().map(|&t| (t, 2.0)).collect();
        assert!(decay_fit(&flat).unwrap().abs() < 1e-14);
        let bad = vec![(0.0, 1.0), (1.0, 0.0)];
        assert!(matches!(
            decay_fit(&bad),
            Err(Error::NonPositiveSample { index: 1, .. })
        ));
    }

    #[test]
    fn k_ratio_is_homogeneous_and_at_least_one() {
        let g = grid();
        let cfg = crate::config::SimConfig::default();
        let q0 = crate::sim::make_initial_data(&cfg, &g).unwrap();
        let k = k_ratio(&g, &q0).unwrap();
        assert!(k >= 1.0);
        assert!((k_ratio(&g, &(&q0 * 7.5)).unwrap() - k).abs() < 1e-12 * k);
        assert!(matches!(k_ratio(&g, &Field::zeros(&g)), Err(Error::ZeroData)));
        assert!((t_k(k, 2.0) - 2.0 * k.ln()).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_taylor_examples() {
        let g = grid();
        let pair = dirichlet_eigenpair(&g).unwrap();
        assert!(rayleigh_taylor_check(&g, &pair.phi, &pair.phi, 0.1).holds);
        let flat_normal = Field::from_polar(&g, |r, _| (1.0 - r * r).powi(2));
        let rt = rayleigh_taylor_check(&g, &flat_normal, &pair.phi, 0.01);
        assert!(!rt.holds && rt.margin < 0.0);
    }

    #[test]
    fn qt_sign_of_decaying_eigenmode() {
        let g = grid();
        let pair = dirichlet_eigenpair(&g).unwrap();
        let dt = 1e-3;
        let before = &pair.phi * (-pair.lambda * 0.5).exp();
        let after = &pair.phi * (-pair.lambda * (0.5 + dt)).exp();
        assert!(qt_boundary_sign(&g, Some(&before), &after, dt).unwrap() > 0.0);
        assert_eq!(qt_boundary_sign(&g, Some(&after), &after, dt).unwrap(), 0.0);
        assert!(qt_boundary_sign(&g, None, &after, dt).is_err());
    }
}

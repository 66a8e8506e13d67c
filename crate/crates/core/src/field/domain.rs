//! Star-shaped reference domains `{ r R(θ) (cos θ, sin θ) : 0 ≤ r ≤ 1 }`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Boundary radius as a truncated Fourier series
/// `R(θ) = mean + Σ_m (cos[m-1] cos mθ + sin[m-1] sin mθ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFunction {
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl RadiusFunction {
    pub fn constant(radius: f64) -> Self {
        RadiusFunction {
            mean: radius,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    /// `d^order R / dθ^order` for order ≤ 2.
    fn eval(&self, theta: f64, order: u32) -> f64 {
        let mut value = if order == 0 { self.mean } else { 0.0 };
        let terms = self.cos.len().max(self.sin.len());
        for idx in 0..terms {
            let m = (idx + 1) as f64;
            let a = self.cos.get(idx).copied().unwrap_or(0.0);
            let b = self.sin.get(idx).copied().unwrap_or(0.0);
            let (s, c) = (m * theta).sin_cos();
            value += match order {
                0 => a * c + b * s,
                1 => m * (-a * s + b * c),
                _ => -m * m * (a * c + b * s),
            };
        }
        value
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval(theta, 0)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.eval(theta, 1)
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        self.eval(theta, 2)
    }
}

/// Fixed reference domain Ω with its boundary Γ. The radius function must be
/// π-periodic so that the polar chart stays smooth through the origin.
///
/// Also carries the cutoff μ separating
/// the tangential (near Γ) and Cartesian (near the origin) energy regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDomain {
    radius: RadiusFunction,
    /// μ ≡ 0 on `|x| ≤ cutoff_inner`.
    cutoff_inner: f64,
    /// μ ≡ 1 within `collar` of Γ.
    collar: f64,
}

const STAR_SAMPLES: usize = 2048;

impl ReferenceDomain {
    pub fn unit_disk() -> Self {
        Self::disk(1.0).expect("unit disk is valid")
    }

    /// Disk of the given radius; cutoff parameters scale with the radius.
    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(RadiusFunction::constant(radius), 0.3 * radius, 0.2 * radius)
    }

    pub fn new(radius: RadiusFunction, cutoff_inner: f64, collar: f64) -> Result<Self> {
        let inradius = (0..STAR_SAMPLES)
            .map(|i| radius.value(2.0 * PI * i as f64 / STAR_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min);
        if !(inradius > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "radius function must be positive (min {inradius:e}); domain is not star-shaped about the origin"
            )));
        }
        // harmonic m sits at index m - 1; odd m have even index
        let has_odd = |c: &[f64]| c.iter().step_by(2).any(|&v| v != 0.0);
        let odd = has_odd(&radius.cos) || has_odd(&radius.sin);
        if odd {
            return Err(Error::InvalidDomain(
                "radius function must satisfy R(θ + π) = R(θ): odd harmonics are not supported".into(),
            ));
        }
        if !(cutoff_inner > 0.0 && collar > 0.0) {
            return Err(Error::InvalidDomain(
                "cutoff radius and boundary collar must be positive".into(),
            ));
        }
        if cutoff_inner + collar >= inradius {
            return Err(Error::InvalidDomain(format!(
                "cutoff plateaus overlap: rho + sigma = {} >= inradius {inradius}",
                cutoff_inner + collar
            )));
        }
        Ok(ReferenceDomain {
            radius,
            cutoff_inner,
            collar,
        })
    }

    pub fn radius(&self) -> &RadiusFunction {
        &self.radius
    }

    pub fn cutoff_inner(&self) -> f64 {
        self.cutoff_inner
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    pub fn is_disk(&self) -> bool {
        self.radius.is_constant()
    }

    /// γ(θ) on Γ.
    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius.value(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// dγ/dθ.
    pub fn boundary_tangent(&self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        let r = self.radius.value(theta);
        let dr = self.radius.derivative(theta);
        [dr * c - r * s, dr * s + r * c]
    }

    /// Outward unit normal N(θ).
    pub fn normal(&self, theta: f64) -> [f64; 2] {
        let [tx, ty] = self.boundary_tangent(theta);
        let len = tx.hypot(ty);
        [ty / len, -tx / len]
    }

    /// Curvature κ_Γ(θ) of the boundary (1/R on a disk of radius R).
    pub fn curvature(&self, theta: f64) -> f64 {
        let r = self.radius.value(theta);
        let dr = self.radius.derivative(theta);
        let ddr = self.radius.second_derivative(theta);
        (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
    }

    /// Cutoff μ(x): quintic smoothstep between `|x| = ρ` and the collar
    /// `R(θ) − |x| = σ`.
    pub fn cutoff(&self, x: f64, y: f64) -> f64 {
        let s = x.hypot(y);
        let outer = self.radius.value(y.atan2(x)) - self.collar;
        smoothstep((s - self.cutoff_inner) / (outer - self.cutoff_inner))
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_geometry() {
        let d = ReferenceDomain::unit_disk();
        for i in 0..16 {
            let th = i as f64 * 0.4;
            let n = d.normal(th);
            assert!((n[0] - th.cos()).abs() < 1e-15 && (n[1] - th.sin()).abs() < 1e-15);
            assert!((d.curvature(th) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cutoff_plateaus() {
        let d = ReferenceDomain::unit_disk();
        assert_eq!(d.cutoff(0.1, 0.2), 0.0);
        assert_eq!(d.cutoff(0.0, 0.3), 0.0);
        assert_eq!(d.cutoff(0.85, 0.0), 1.0);
        assert_eq!(d.cutoff(0.0, -0.8), 1.0);
        let mid = d.cutoff(0.55, 0.0);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn star_domain_normals_are_unit() {
        let radius = RadiusFunction {
            mean: 1.0,
            cos: vec![0.0, 0.1],
            sin: vec![0.0, 0.0, 0.0, 0.05],
        };
        let d = ReferenceDomain::new(radius, 0.25, 0.15).unwrap();
        for i in 0..32 {
            let n = d.normal(i as f64 * 0.2);
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_star_shaped() {
        let radius = RadiusFunction {
            mean: 0.5,
            cos: vec![0.0, 0.8],
            sin: vec![],
        };
        assert!(matches!(
            ReferenceDomain::new(radius, 0.1, 0.1),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn rejects_odd_harmonics() {
        let radius = RadiusFunction {
            mean: 1.0,
            cos: vec![0.0, 0.0, 0.05],
            sin: vec![],
        };
        assert!(ReferenceDomain::new(radius, 0.2, 0.2).is_err());
    }

    #[test]
    fn rejects_overlapping_plateaus() {
        assert!(ReferenceDomain::new(RadiusFunction::constant(1.0), 0.6, 0.5).is_err());
    }
}

//! Polar collocation grid on a star-shaped reference domain.
//!
//! Radial nodes are the positive half of an odd-order Chebyshev–Gauss–Lobatto
//! grid on `[-1, 1]`, so no node sits on the pole. A value at `-r` is read
//! from the antipodal node `(r, θ + π)`, which couples angular mode `m` to
//! radial parity `(-1)^m`. Angular nodes are equispaced and differentiated
//! with the FFT.

use ndarray::{Array1, Array2};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::domain::ReferenceDomain;
use crate::error::{Error, Result};

/// Inverse Jacobian of `(r, θ) ↦ x` and its derivatives at every node.
///
/// `g_ai = ∂ξ_a/∂x_i` and `h_a_ij = ∂²ξ_a/∂x_i∂x_j` with `ξ = (r, θ)`.
#[derive(Clone, Debug)]
pub(crate) struct Metric {
    pub g_rx: Array2<f64>,
    pub g_ry: Array2<f64>,
    pub g_tx: Array2<f64>,
    pub g_ty: Array2<f64>,
    pub h_rxx: Array2<f64>,
    pub h_rxy: Array2<f64>,
    pub h_ryy: Array2<f64>,
    pub h_txx: Array2<f64>,
    pub h_txy: Array2<f64>,
    pub h_tyy: Array2<f64>,
}

pub(crate) struct AngularFft {
    pub n: usize,
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for AngularFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularFft").field("n", &self.n).finish()
    }
}

#[derive(Debug)]
pub struct Grid {
    domain: ReferenceDomain,
    n_r: usize,
    n_theta: usize,
    r: Array1<f64>,
    theta: Array1<f64>,
    x: Array2<f64>,
    y: Array2<f64>,
    /// Folded Chebyshev differentiation blocks (`n_r × n_r`): `same` acts on
    /// the column itself, `mirror` on the antipodal column.
    pub(crate) d1_same: Array2<f64>,
    pub(crate) d1_mirror: Array2<f64>,
    pub(crate) d2_same: Array2<f64>,
    pub(crate) d2_mirror: Array2<f64>,
    pub(crate) metric: Metric,
    /// Chebyshev modal bases for even and odd radial parity.
    pub(crate) modal: [ParityBasis; 2],
    area_weights: Array2<f64>,
    boundary_weights: Array1<f64>,
    normals: [Array1<f64>; 2],
    curvature: Array1<f64>,
    cutoff: Array2<f64>,
    pub(crate) fft: AngularFft,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(domain: ReferenceDomain, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < Self::MIN_POINTS || n_theta < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} radial and angular points, got {n_r} x {n_theta}",
                Self::MIN_POINTS
            )));
        }
        if !n_theta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "angular point count must be even, got {n_theta}"
            )));
        }

        let order = 2 * n_r - 1;
        let cheb = ChebyshevOperators::new(order);
        // Positive node `p` (ascending r) is Chebyshev index `n_r - 1 - p`.
        let idx = |p: usize| n_r - 1 - p;
        let r = Array1::from_shape_fn(n_r, |p| cheb.nodes[idx(p)]);
        let fold = |d: &Array2<f64>, mirror: bool| {
            Array2::from_shape_fn((n_r, n_r), |(p, q)| {
                let col = if mirror { order - idx(q) } else { idx(q) };
                d[[idx(p), col]]
            })
        };
        let d1_same = fold(&cheb.d1, false);
        let d1_mirror = fold(&cheb.d1, true);
        let d2_same = fold(&cheb.d2, false);
        let d2_mirror = fold(&cheb.d2, true);
        let radial_weights = Array1::from_shape_fn(n_r, |p| cheb.abs_weights[idx(p)]);

        let theta = Array1::from_shape_fn(n_theta, |l| 2.0 * PI * l as f64 / n_theta as f64);
        let dtheta = 2.0 * PI / n_theta as f64;
        let radius = domain.radius();

        let shape = (n_r, n_theta);
        let mut x = Array2::zeros(shape);
        let mut y = Array2::zeros(shape);
        let mut area_weights = Array2::zeros(shape);
        let mut cutoff = Array2::zeros(shape);
        let mut metric = Metric {
            g_rx: Array2::zeros(shape),
            g_ry: Array2::zeros(shape),
            g_tx: Array2::zeros(shape),
            g_ty: Array2::zeros(shape),
            h_rxx: Array2::zeros(shape),
            h_rxy: Array2::zeros(shape),
            h_ryy: Array2::zeros(shape),
            h_txx: Array2::zeros(shape),
            h_txy: Array2::zeros(shape),
            h_tyy: Array2::zeros(shape),
        };

        for l in 0..n_theta {
            let th = theta[l];
            let (s, c) = th.sin_cos();
            let big_r = radius.value(th);
            let dr = radius.derivative(th);
            let ddr = radius.second_derivative(th);
            // e = (c, s), e⊥ = (-s, c)
            for p in 0..n_r {
                let rp = r[p];
                let xr = [big_r * c, big_r * s];
                let xt = [rp * (dr * c - big_r * s), rp * (dr * s + big_r * c)];
                let det = xr[0] * xt[1] - xt[0] * xr[1];
                // G = M⁻¹ with M = [X_r X_θ] (columns).
                let g = [[xt[1] / det, -xt[0] / det], [-xr[1] / det, xr[0] / det]];
                // Second derivatives of X: X_rr = 0.
                let xrt = [dr * c - big_r * s, dr * s + big_r * c];
                let xtt = [
                    rp * (ddr * c - 2.0 * dr * s - big_r * c),
                    rp * (ddr * s + 2.0 * dr * c - big_r * s),
                ];
                let second = |comp: usize, d: usize, e: usize| -> f64 {
                    match (d, e) {
                        (0, 0) => 0.0,
                        (1, 1) => xtt[comp],
                        _ => xrt[comp],
                    }
                };
                let mut h = [[[0.0; 2]; 2]; 2];
                for (a, ha) in h.iter_mut().enumerate() {
                    for (i, hai) in ha.iter_mut().enumerate() {
                        for (j, haij) in hai.iter_mut().enumerate() {
                            let mut acc = 0.0;
                            for comp in 0..2 {
                                for d in 0..2 {
                                    for e in 0..2 {
                                        acc += g[a][comp] * second(comp, d, e) * g[d][i] * g[e][j];
                                    }
                                }
                            }
                            *haij = -acc;
                        }
                    }
                }
                let node = [p, l];
                x[node] = rp * big_r * c;
                y[node] = rp * big_r * s;
                metric.g_rx[node] = g[0][0];
                metric.g_ry[node] = g[0][1];
                metric.g_tx[node] = g[1][0];
                metric.g_ty[node] = g[1][1];
                metric.h_rxx[node] = h[0][0][0];
                metric.h_rxy[node] = h[0][0][1];
                metric.h_ryy[node] = h[0][1][1];
                metric.h_txx[node] = h[1][0][0];
                metric.h_txy[node] = h[1][0][1];
                metric.h_tyy[node] = h[1][1][1];
                area_weights[node] = radial_weights[p] * big_r * big_r * dtheta;
                cutoff[node] = domain.cutoff(x[node], y[node]);
            }
        }

        let boundary_weights = theta.mapv(|th| {
            let [tx, ty] = domain.boundary_tangent(th);
            tx.hypot(ty) * dtheta
        });
        let normals = [
            theta.mapv(|th| domain.normal(th)[0]),
            theta.mapv(|th| domain.normal(th)[1]),
        ];
        let curvature = theta.mapv(|th| domain.curvature(th));

        let modal = [ParityBasis::new(&r, 0), ParityBasis::new(&r, 1)];

        let mut planner = FftPlanner::new();
        let fft = AngularFft {
            n: n_theta,
            forward: planner.plan_fft_forward(n_theta),
            inverse: planner.plan_fft_inverse(n_theta),
        };

        Ok(Grid {
            domain,
            n_r,
            n_theta,
            r,
            theta,
            x,
            y,
            d1_same,
            d1_mirror,
            d2_same,
            d2_mirror,
            metric,
            modal,
            area_weights,
            boundary_weights,
            normals,
            curvature,
            cutoff,
            fft,
        })
    }

    pub fn unit_disk(n_r: usize, n_theta: usize) -> Result<Self> {
        Self::new(ReferenceDomain::unit_disk(), n_r, n_theta)
    }

    pub fn domain(&self) -> &ReferenceDomain {
        &self.domain
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_r, self.n_theta)
    }

    /// Radial collocation coordinates in `(0, 1]`, ascending; the last is Γ.
    pub fn r(&self) -> &Array1<f64> {
        &self.r
    }

    pub fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    /// Row index of the boundary ring.
    pub fn boundary_row(&self) -> usize {
        self.n_r - 1
    }

    pub fn area_weights(&self) -> &Array2<f64> {
        &self.area_weights
    }

    pub fn boundary_weights(&self) -> &Array1<f64> {
        &self.boundary_weights
    }

    pub fn normal(&self) -> [&Array1<f64>; 2] {
        [&self.normals[0], &self.normals[1]]
    }

    pub fn curvature(&self) -> &Array1<f64> {
        &self.curvature
    }

    pub fn cutoff(&self) -> &Array2<f64> {
        &self.cutoff
    }

    pub fn is_boundary(&self, p: usize) -> bool {
        p == self.n_r - 1
    }
}

/// Chebyshev polynomials `T_{2i+parity}`, `i < n_r`, on the positive nodes.
/// A radial profile with `f(-r) = ±f(r)` is exactly represented by them.
#[derive(Clone, Debug)]
pub(crate) struct ParityBasis {
    /// Nodal values to coefficients.
    pub to_modal: Array2<f64>,
    /// Coefficients to values, first and second derivatives at the nodes.
    pub eval: [Array2<f64>; 3],
}

impl ParityBasis {
    fn new(r: &Array1<f64>, parity: usize) -> Self {
        let n_r = r.len();
        let order = 2 * n_r - 1;
        let mut eval = [
            Array2::zeros((n_r, n_r)),
            Array2::zeros((n_r, n_r)),
            Array2::zeros((n_r, n_r)),
        ];
        for (p, &x) in r.iter().enumerate() {
            let (mut t0, mut t1) = (1.0, x);
            let (mut d0, mut d1) = (0.0, 1.0);
            let (mut s0, mut s1) = (0.0, 0.0);
            for j in 0..=order {
                if j % 2 == parity {
                    let i = j / 2;
                    eval[0][[p, i]] = t0;
                    eval[1][[p, i]] = d0;
                    eval[2][[p, i]] = s0;
                }
                let t2 = 2.0 * x * t1 - t0;
                let d2 = 2.0 * t1 + 2.0 * x * d1 - d0;
                let s2 = 4.0 * d1 + 2.0 * x * s1 - s0;
                (t0, t1, d0, d1, s0, s1) = (t1, t2, d1, d2, s1, s2);
            }
        }
        // Discrete Chebyshev transform folded onto the positive nodes; node
        // p sits at Lobatto index n_r - 1 - p and the endpoint r = 1 is halved.
        let mut to_modal = Array2::zeros((n_r, n_r));
        for i in 0..n_r {
            let j = 2 * i + parity;
            let end = if j == 0 || j == order { 2.0 } else { 1.0 };
            for p in 0..n_r {
                let half = if p == n_r - 1 { 0.5 } else { 1.0 };
                to_modal[[i, p]] = 4.0 / (order as f64 * end) * half * eval[0][[p, i]];
            }
        }
        ParityBasis { to_modal, eval }
    }
}

/// Full Chebyshev–Gauss–Lobatto operators of odd order `n` (n + 1 nodes).
struct ChebyshevOperators {
    nodes: Vec<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    /// Weights of `∫_{-1}^{1} |x| f(x) dx` for the polynomial interpolant.
    abs_weights: Vec<f64>,
}

impl ChebyshevOperators {
    fn new(n: usize) -> Self {
        let nf = n as f64;
        let nodes: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / nf).cos()).collect();
        let c = |j: usize| {
            let base = if j == 0 || j == n { 2.0 } else { 1.0 };
            if j.is_multiple_of(2) {
                base
            } else {
                -base
            }
        };
        // x_i - x_j through the product formula avoids cancellation.
        let diff = |i: usize, j: usize| {
            2.0 * (PI * (i + j) as f64 / (2.0 * nf)).sin() * (PI * (j as f64 - i as f64) / (2.0 * nf)).sin()
        };
        let mut d1 = Array2::zeros((n + 1, n + 1));
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    d1[[i, j]] = c(i) / c(j) / diff(i, j);
                }
            }
            let row_sum: f64 = (0..=n).filter(|&j| j != i).map(|j| d1[[i, j]]).sum();
            d1[[i, i]] = -row_sum;
        }
        let mut d2 = Array2::zeros((n + 1, n + 1));
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    d2[[i, j]] = 2.0 * d1[[i, j]] * (d1[[i, i]] - 1.0 / diff(i, j));
                }
            }
            let row_sum: f64 = (0..=n).filter(|&j| j != i).map(|j| d2[[i, j]]).sum();
            d2[[i, i]] = -row_sum;
        }

        // Moments ∫_{-1}^{1} |x| T_k(x) dx, zero for odd k.
        let moment = |k: usize| -> f64 {
            if k % 2 == 1 {
                return 0.0;
            }
            let kf = k as f64;
            let part = |m: f64| {
                if m == 0.0 {
                    0.0
                } else {
                    (1.0 - (m * PI / 2.0).cos()) / m
                }
            };
            0.5 * (part(2.0 + kf) + part(2.0 - kf))
        };
        let half = |j: usize| if j == 0 || j == n { 0.5 } else { 1.0 };
        let abs_weights = (0..=n)
            .map(|j| {
                let s: f64 = (0..=n)
                    .map(|k| half(k) * moment(k) * (PI * (j * k) as f64 / nf).cos())
                    .sum();
                2.0 / nf * half(j) * s
            })
            .collect();

        ChebyshevOperators {
            nodes,
            d1,
            d2,
            abs_weights,
        }
    }
}

/// Forward FFT of every row; `out[p][k] = Σ_l u[p][l] e^{-ikθ_l}`.
pub(crate) fn rows_forward(fft: &AngularFft, u: &Array2<f64>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward.process(&mut buf);
    buf
}

/// Inverse of [`rows_forward`], keeping the real part.
pub(crate) fn rows_inverse(fft: &AngularFft, mut buf: Vec<Complex64>, shape: (usize, usize)) -> Array2<f64> {
    fft.inverse.process(&mut buf);
    let scale = 1.0 / fft.n as f64;
    Array2::from_shape_vec(shape, buf.into_iter().map(|z| z.re * scale).collect()).expect("shape matches buffer")
}

/// Signed angular frequency of FFT bin `k`.
pub(crate) fn frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modal_transform_inverts_evaluation() {
        let g = Grid::unit_disk(12, 8).unwrap();
        for basis in &g.modal {
            let id = basis.to_modal.dot(&basis.eval[0]);
            let err = (&id - &Array2::<f64>::eye(12)).fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(err < 1e-13, "{err}");
        }
    }

    #[test]
    fn rejects_odd_angular_count() {
        assert!(matches!(Grid::unit_disk(16, 7), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::unit_disk(6, 8), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn smallest_grid() {
        let g = Grid::unit_disk(8, 8).unwrap();
        assert_eq!(g.shape(), (8, 8));
        assert_eq!(g.r()[7], 1.0);
        assert!(g.r()[0] > 0.0);
        assert!(g.area_weights().iter().all(|&w| w >= 0.0));
        assert!((g.area_weights().sum() - PI).abs() < 1e-12);
    }

    #[test]
    fn disk_area_quadrature() {
        let g = Grid::unit_disk(64, 64).unwrap();
        assert!((g.area_weights().sum() - PI).abs() < 1e-6 * PI);
        assert!((g.boundary_weights().sum() - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn radial_nodes_ascend_without_pole() {
        let g = Grid::unit_disk(16, 8).unwrap();
        let r = g.r();
        assert!(r.windows(2).into_iter().all(|w| w[0] < w[1]));
        assert!(r[0] > 0.0);
    }

    #[test]
    fn metric_matches_polar_formulas_on_disk() {
        let g = Grid::unit_disk(12, 16).unwrap();
        for ((p, l), &gx) in g.metric.g_tx.indexed_iter() {
            let (r, th) = (g.r()[p], g.theta()[l]);
            assert!((gx + th.sin() / r).abs() < 1e-12);
            assert!((g.metric.g_rx[[p, l]] - th.cos()).abs() < 1e-12);
            // ∂²r/∂y² = cos²θ / r
            assert!((g.metric.h_ryy[[p, l]] - th.cos().powi(2) / r).abs() < 1e-10);
        }
    }
}

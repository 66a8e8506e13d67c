//! Differentiation and quadrature on the polar grid.
//!
//! Radial derivatives use the folded Chebyshev blocks, angular derivatives
//! are FFT multipliers, and Cartesian components come from the chain rule
//! through the grid metric.

use ndarray::{s, Array2, Zip};
use rustfft::num_complex::Complex64;

use super::grid::{frequency, rows_forward, rows_inverse, Grid};
use super::values::{BoundaryField, Field};
use crate::error::{Error, Result};

/// Cartesian multi-index `∂_x^x ∂_y^y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub x: usize,
    pub y: usize,
}

impl MultiIndex {
    pub const fn new(x: usize, y: usize) -> Self {
        MultiIndex { x, y }
    }

    pub fn order(&self) -> usize {
        self.x + self.y
    }

    /// All multi-indices with `order() ≤ max`, grouped by order.
    pub fn up_to(max: usize) -> Vec<MultiIndex> {
        (0..=max)
            .flat_map(|n| (0..=n).rev().map(move |x| MultiIndex::new(x, n - x)))
            .collect()
    }
}

/// First and second Cartesian derivatives of a field.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub dx: Field,
    pub dy: Field,
    pub dxx: Field,
    pub dxy: Field,
    pub dyy: Field,
}

/// Antipodal column swap: `out[p][l] = u[p][l + n/2]`.
fn mirror(u: &Array2<f64>) -> Array2<f64> {
    let n = u.ncols();
    let half = n / 2;
    let mut out = Array2::zeros(u.dim());
    out.slice_mut(s![.., ..n - half]).assign(&u.slice(s![.., half..]));
    out.slice_mut(s![.., n - half..]).assign(&u.slice(s![.., ..half]));
    out
}

fn radial(same: &Array2<f64>, mirror_block: &Array2<f64>, u: &Array2<f64>, um: &Array2<f64>) -> Array2<f64> {
    let mut out = same.dot(u);
    out += &mirror_block.dot(um);
    out
}

/// `(ik)^order` with the Nyquist bin dropped for odd orders.
fn multiplier(k: usize, n: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && k == n / 2 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, frequency(k, n) as f64).powu(order)
}

/// Angular derivatives of each ring for every requested order.
fn angular(grid: &Grid, u: &Array2<f64>, orders: &[u32]) -> Vec<Array2<f64>> {
    let n = grid.n_theta();
    let spectrum = rows_forward(&grid.fft, u);
    orders
        .iter()
        .map(|&order| {
            let scaled = spectrum
                .iter()
                .enumerate()
                .map(|(idx, z)| z * multiplier(idx % n, n, order))
                .collect();
            rows_inverse(&grid.fft, scaled, u.dim())
        })
        .collect()
}

/// Plain `∂_θ^order` of every ring (reference angular coordinate).
pub fn angular_derivative(grid: &Grid, u: &Field, order: u32) -> Field {
    Field::from_array(angular(grid, u.values(), &[order]).pop().unwrap())
}

/// Polar derivatives `u_r, u_θ` and optionally `u_rr, u_rθ, u_θθ`.
pub(crate) struct Polar {
    pub ur: Array2<f64>,
    pub ut: Array2<f64>,
    pub second: Option<[Array2<f64>; 3]>,
}

/// Tail coefficients count as roundoff only when they sit this far below the
/// largest coefficient; otherwise nothing is discarded.
const RESOLVED: f64 = 1e-9;
const PLATEAU_MARGIN: f64 = 2.0;

/// Polar derivatives computed in Chebyshev–Fourier space after discarding
/// the roundoff plateau of the radial coefficients.
pub(crate) fn polar(grid: &Grid, u: &Array2<f64>, second: bool) -> Polar {
    let (n_r, n) = u.dim();
    let spectrum = rows_forward(&grid.fft, u);
    let zero = Complex64::new(0.0, 0.0);

    // Modes of each radial parity, packed as [real parts | imaginary parts].
    let columns: [Vec<usize>; 2] = [0, 1].map(|par| {
        (0..n)
            .filter(|&k| (frequency(k, n).unsigned_abs() % 2) as usize == par)
            .collect()
    });
    let mut coeffs: Vec<Array2<f64>> = columns
        .iter()
        .enumerate()
        .map(|(par, ks)| {
            let m = ks.len();
            let packed = Array2::from_shape_fn((n_r, 2 * m), |(p, j)| {
                let z = spectrum[p * n + ks[j % m]];
                if j < m {
                    z.re
                } else {
                    z.im
                }
            });
            grid.modal[par].to_modal.dot(&packed)
        })
        .collect();

    let norm = |c: &Array2<f64>, i: usize, j: usize| {
        let m = c.ncols() / 2;
        c[[i, j]].hypot(c[[i, j + m]])
    };
    let mut cmax = 0.0f64;
    let mut plateau = 0.0f64;
    for c in &coeffs {
        for i in 0..n_r {
            for j in 0..c.ncols() / 2 {
                let v = norm(c, i, j);
                cmax = cmax.max(v);
                if i >= 3 * n_r / 4 {
                    plateau = plateau.max(v);
                }
            }
        }
    }
    if plateau <= RESOLVED * cmax {
        let threshold = PLATEAU_MARGIN * plateau;
        for c in coeffs.iter_mut() {
            let m = c.ncols() / 2;
            for j in 0..m {
                let keep = (0..n_r).rev().find(|&i| norm(c, i, j) > threshold).map_or(0, |i| i + 1);
                for i in keep..n_r {
                    c[[i, j]] = 0.0;
                    c[[i, j + m]] = 0.0;
                }
            }
        }
    }

    let orders = if second { 3 } else { 2 };
    let mut nodal: Vec<Vec<Complex64>> = vec![vec![zero; n_r * n]; orders];
    for (par, ks) in columns.iter().enumerate() {
        let m = ks.len();
        for (d, out) in nodal.iter_mut().enumerate() {
            let values = grid.modal[par].eval[d].dot(&coeffs[par]);
            for p in 0..n_r {
                for (j, &k) in ks.iter().enumerate() {
                    out[p * n + k] = Complex64::new(values[[p, j]], values[[p, j + m]]);
                }
            }
        }
    }
    let scaled = |values: &[Complex64], order: u32| -> Vec<Complex64> {
        values
            .iter()
            .enumerate()
            .map(|(idx, z)| z * multiplier(idx % n, n, order))
            .collect()
    };
    let shape = (n_r, n);
    let ut = rows_inverse(&grid.fft, scaled(&nodal[0], 1), shape);
    let ur = rows_inverse(&grid.fft, nodal[1].clone(), shape);
    let second = second.then(|| {
        [
            rows_inverse(&grid.fft, nodal[2].clone(), shape),
            rows_inverse(&grid.fft, scaled(&nodal[1], 1), shape),
            rows_inverse(&grid.fft, scaled(&nodal[0], 2), shape),
        ]
    });
    Polar { ur, ut, second }
}

/// Polar derivatives by plain collocation; linear in `u`.
pub(crate) fn collocation_polar(grid: &Grid, u: &Array2<f64>) -> Polar {
    let um = mirror(u);
    let ur = radial(&grid.d1_same, &grid.d1_mirror, u, &um);
    let urr = radial(&grid.d2_same, &grid.d2_mirror, u, &um);
    let mut ang = angular(grid, u, &[1, 2]);
    let utt = ang.pop().unwrap();
    let ut = ang.pop().unwrap();
    let urt = angular(grid, &ur, &[1]).pop().unwrap();
    Polar {
        ur,
        ut,
        second: Some([urr, urt, utt]),
    }
}

pub(crate) fn cartesian(grid: &Grid, polar: &Polar) -> Derivatives {
    let Polar { ur, ut, second } = polar;
    let [urr, urt, utt] = second.as_ref().expect("second polar derivatives");
    let m = &grid.metric;
    let dx = &m.g_rx * ur + &m.g_tx * ut;
    let dy = &m.g_ry * ur + &m.g_ty * ut;
    // ∂_i∂_j u with (gri, gti) and (grj, gtj) the metric rows for i and j
    let second = |gri: &Array2<f64>,
                  grj: &Array2<f64>,
                  gti: &Array2<f64>,
                  gtj: &Array2<f64>,
                  hr: &Array2<f64>,
                  ht: &Array2<f64>| {
        gri * grj * urr + (gri * gtj + gti * grj) * urt + gti * gtj * utt + hr * ur + ht * ut
    };
    let dxx = second(&m.g_rx, &m.g_rx, &m.g_tx, &m.g_tx, &m.h_rxx, &m.h_txx);
    let dxy = second(&m.g_rx, &m.g_ry, &m.g_tx, &m.g_ty, &m.h_rxy, &m.h_txy);
    let dyy = second(&m.g_ry, &m.g_ry, &m.g_ty, &m.g_ty, &m.h_ryy, &m.h_tyy);
    Derivatives {
        dx: Field::from_array(dx),
        dy: Field::from_array(dy),
        dxx: Field::from_array(dxx),
        dxy: Field::from_array(dxy),
        dyy: Field::from_array(dyy),
    }
}

/// All first and second Cartesian derivatives.
pub fn derivatives(grid: &Grid, u: &Field) -> Derivatives {
    cartesian(grid, &polar(grid, u.values(), true))
}

/// Cartesian gradient only.
pub fn gradient(grid: &Grid, u: &Field) -> [Field; 2] {
    let Polar { ur, ut, .. } = polar(grid, u.values(), false);
    let m = &grid.metric;
    [
        Field::from_array(&m.g_rx * &ur + &m.g_tx * &ut),
        Field::from_array(&m.g_ry * &ur + &m.g_ty * &ut),
    ]
}

/// `∂^α u` for a Cartesian multi-index of order ≤ 2.
pub fn differentiate(grid: &Grid, u: &Field, alpha: MultiIndex) -> Result<Field> {
    match (alpha.x, alpha.y) {
        (0, 0) => Ok(u.clone()),
        (1, 0) => Ok(gradient(grid, u).into_iter().next().unwrap()),
        (0, 1) => Ok(gradient(grid, u).into_iter().nth(1).unwrap()),
        (2, 0) => Ok(derivatives(grid, u).dxx),
        (1, 1) => Ok(derivatives(grid, u).dxy),
        (0, 2) => Ok(derivatives(grid, u).dyy),
        _ => Err(Error::DerivativeOrder {
            order: alpha.order(),
            max: 2,
        }),
    }
}

/// Every Cartesian derivative `∂^α u` with `|α| ≤ max_order` (at most 4),
/// in the order of [`MultiIndex::up_to`].
pub fn derivatives_up_to(grid: &Grid, u: &Field, max_order: usize) -> Result<Vec<(MultiIndex, Field)>> {
    if max_order > 4 {
        return Err(Error::DerivativeOrder {
            order: max_order,
            max: 4,
        });
    }
    let mut out = vec![(MultiIndex::new(0, 0), u.clone())];
    if max_order == 0 {
        return Ok(out);
    }
    let d = derivatives(grid, u);
    out.push((MultiIndex::new(1, 0), d.dx));
    out.push((MultiIndex::new(0, 1), d.dy));
    if max_order == 1 {
        return Ok(out);
    }
    out.push((MultiIndex::new(2, 0), d.dxx.clone()));
    out.push((MultiIndex::new(1, 1), d.dxy));
    out.push((MultiIndex::new(0, 2), d.dyy.clone()));
    if max_order == 2 {
        return Ok(out);
    }
    let xx = derivatives(grid, &d.dxx);
    let yy = derivatives(grid, &d.dyy);
    out.push((MultiIndex::new(3, 0), xx.dx));
    out.push((MultiIndex::new(2, 1), xx.dy));
    out.push((MultiIndex::new(1, 2), yy.dx));
    out.push((MultiIndex::new(0, 3), yy.dy));
    if max_order == 3 {
        return Ok(out);
    }
    out.push((MultiIndex::new(4, 0), xx.dxx));
    out.push((MultiIndex::new(3, 1), xx.dxy));
    out.push((MultiIndex::new(2, 2), xx.dyy));
    out.push((MultiIndex::new(1, 3), yy.dxy));
    out.push((MultiIndex::new(0, 4), yy.dyy));
    Ok(out)
}

/// Arclength derivative of a boundary field, `order ≤ 6`. Exact for
/// band-limited data on a disk; modes above `N_θ/2` alias.
pub fn tangential_derivative(grid: &Grid, phi: &BoundaryField, order: usize) -> Result<BoundaryField> {
    if order > 6 {
        return Err(Error::DerivativeOrder { order, max: 6 });
    }
    let speed = grid.boundary_weights() * (grid.n_theta() as f64 / (2.0 * std::f64::consts::PI));
    if grid.domain().is_disk() {
        let scale = speed[0].powi(-(order as i32));
        return Ok(&angular_boundary(grid, phi, order as u32) * scale);
    }
    let mut out = phi.clone();
    for _ in 0..order {
        out = angular_boundary(grid, &out, 1).zip_map(&BoundaryField::from_array(speed.clone()), |d, s| d / s);
    }
    Ok(out)
}

/// `∂_θ^order` of a boundary field.
pub fn angular_boundary(grid: &Grid, phi: &BoundaryField, order: u32) -> BoundaryField {
    let n = grid.n_theta();
    let modes: Vec<Complex64> = phi
        .modes(grid)
        .into_iter()
        .enumerate()
        .map(|(k, z)| z * multiplier(k, n, order))
        .collect();
    BoundaryField::from_modes(grid, &modes)
}

/// Cartesian gradient on the boundary ring only.
pub fn boundary_gradient(grid: &Grid, u: &Field) -> [BoundaryField; 2] {
    let [gx, gy] = gradient(grid, u);
    [gx.trace(), gy.trace()]
}

/// `∂_N u = N·∇u` on Γ.
pub fn normal_derivative(grid: &Grid, u: &Field) -> BoundaryField {
    let [gx, gy] = boundary_gradient(grid, u);
    let [nx, ny] = grid.normal();
    BoundaryField::from_array(gx.values() * nx + gy.values() * ny)
}

/// `∫_Ω u dx`.
pub fn integrate(grid: &Grid, u: &Field) -> f64 {
    (grid.area_weights() * u.values()).sum()
}

/// `∫_Γ φ dS`.
pub fn integrate_boundary(grid: &Grid, phi: &BoundaryField) -> f64 {
    (grid.boundary_weights() * phi.values()).sum()
}

/// `∫_Ω u v dx`.
pub fn inner(grid: &Grid, u: &Field, v: &Field) -> f64 {
    Zip::from(grid.area_weights())
        .and(u.values())
        .and(v.values())
        .fold(0.0, |acc, &w, &a, &b| acc + w * a * b)
}

/// `‖u‖_{L²(Ω)}`.
pub fn l2_norm(grid: &Grid, u: &Field) -> f64 {
    inner(grid, u, u).sqrt()
}

/// Squared Sobolev norm `Σ_{|α| ≤ s} ‖∂^α u‖²_{L²}` for `s ≤ 4`.
pub fn sobolev_norm_sq(grid: &Grid, u: &Field, s: usize) -> Result<f64> {
    Ok(derivatives_up_to(grid, u, s)?
        .iter()
        .map(|(_, d)| inner(grid, d, d))
        .sum())
}

/// Squared boundary Sobolev norm `Σ_m (1 + m²)^s |ĥ_m|² · |Γ|` through the
/// angular modes (exact `H^s(Γ)` norm on the unit circle).
pub fn boundary_sobolev_norm_sq(grid: &Grid, h: &BoundaryField, s: f64) -> f64 {
    let n = grid.n_theta();
    let length: f64 = grid.boundary_weights().sum();
    h.modes(grid)
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let m = frequency(k, n) as f64;
            (1.0 + m * m).powf(s) * z.norm_sqr()
        })
        .sum::<f64>()
        * length
}

/// `‖φ‖_{L²(Γ)}`.
pub fn boundary_l2_norm(grid: &Grid, phi: &BoundaryField) -> f64 {
    integrate_boundary(grid, &phi.map(|v| v * v)).sqrt()
}

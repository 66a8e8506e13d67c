use ndarray::{Array1, Array2, Zip};
use rustfft::num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use super::grid::Grid;

/// Nodal values on the polar grid, indexed `[radial, angular]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    values: Array2<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Field {
            values: Array2::zeros(grid.shape()),
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Field {
            values: Array2::from_elem(grid.shape(), value),
        }
    }

    pub fn from_array(values: Array2<f64>) -> Self {
        Field { values }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_cartesian(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        Field {
            values: Zip::from(grid.x()).and(grid.y()).map_collect(|&x, &y| f(x, y)),
        }
    }

    /// Samples `f(r, θ)` in reference polar coordinates.
    pub fn from_polar(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let (r, th) = (grid.r(), grid.theta());
        Field {
            values: Array2::from_shape_fn(grid.shape(), |(p, l)| f(r[p], th[l])),
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_array(self) -> Array2<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.values.mapv(f),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        Field {
            values: Zip::from(&self.values).and(&other.values).map_collect(|&a, &b| f(a, b)),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Largest value over nodes off the boundary ring.
    pub fn interior_max(&self) -> f64 {
        let n = self.values.nrows() - 1;
        self.values
            .slice(ndarray::s![..n, ..])
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn interior_min(&self) -> f64 {
        let n = self.values.nrows() - 1;
        self.values
            .slice(ndarray::s![..n, ..])
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Trace on Γ.
    pub fn trace(&self) -> BoundaryField {
        BoundaryField::from_array(self.values.row(self.values.nrows() - 1).to_owned())
    }

    /// Rotates by `shift` angular nodes: `out(θ_l) = self(θ_{l - shift})`.
    pub fn rotate(&self, shift: usize) -> Field {
        let n = self.values.ncols();
        Field {
            values: Array2::from_shape_fn(self.values.dim(), |(p, l)| self.values[[p, (l + n - shift % n) % n]]),
        }
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        Field {
            values: &self.values + &rhs.values,
        }
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        Field {
            values: &self.values - &rhs.values,
        }
    }
}

impl Mul<&Field> for &Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        Field {
            values: &self.values * &rhs.values,
        }
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        Field {
            values: &self.values * rhs,
        }
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field { values: -&self.values }
    }
}

/// Nodal values on Γ at the angular grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    values: Array1<f64>,
}

impl BoundaryField {
    pub fn zeros(grid: &Grid) -> Self {
        BoundaryField {
            values: Array1::zeros(grid.n_theta()),
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        BoundaryField {
            values: Array1::from_elem(grid.n_theta(), value),
        }
    }

    pub fn from_array(values: Array1<f64>) -> Self {
        BoundaryField { values }
    }

    pub fn from_angle(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        BoundaryField {
            values: grid.theta().mapv(f),
        }
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array1<f64> {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> BoundaryField {
        BoundaryField {
            values: self.values.mapv(f),
        }
    }

    pub fn zip_map(&self, other: &BoundaryField, f: impl Fn(f64, f64) -> f64) -> BoundaryField {
        BoundaryField {
            values: Zip::from(&self.values).and(&other.values).map_collect(|&a, &b| f(a, b)),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Angular-mode coefficients `c_k = (1/N) Σ_l u_l e^{-ikθ_l}` in FFT order.
    pub fn modes(&self, grid: &Grid) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft.forward.process(&mut buf);
        let scale = 1.0 / self.values.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Inverse of [`BoundaryField::modes`]; imaginary parts are dropped.
    pub fn from_modes(grid: &Grid, modes: &[Complex64]) -> Self {
        let mut buf = modes.to_vec();
        grid.fft.inverse.process(&mut buf);
        BoundaryField {
            values: buf.iter().map(|z| z.re).collect(),
        }
    }

    pub fn rotate(&self, shift: usize) -> BoundaryField {
        let n = self.values.len();
        BoundaryField {
            values: Array1::from_shape_fn(n, |l| self.values[(l + n - shift % n) % n]),
        }
    }
}

impl Add for &BoundaryField {
    type Output = BoundaryField;
    fn add(self, rhs: &BoundaryField) -> BoundaryField {
        BoundaryField {
            values: &self.values + &rhs.values,
        }
    }
}

impl Sub for &BoundaryField {
    type Output = BoundaryField;
    fn sub(self, rhs: &BoundaryField) -> BoundaryField {
        BoundaryField {
            values: &self.values - &rhs.values,
        }
    }
}

impl Mul<f64> for &BoundaryField {
    type Output = BoundaryField;
    fn mul(self, rhs: f64) -> BoundaryField {
        BoundaryField {
            values: &self.values * rhs,
        }
    }
}

/// Symmetric 2×2 tensor field (coefficients `a_kj`, Hessians).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensorField {
    pub xx: Field,
    pub xy: Field,
    pub yy: Field,
}

impl SymmetricTensorField {
    pub fn identity(grid: &Grid) -> Self {
        Self::scaled_identity(grid, 1.0)
    }

    pub fn scaled_identity(grid: &Grid, s: f64) -> Self {
        SymmetricTensorField {
            xx: Field::constant(grid, s),
            xy: Field::zeros(grid),
            yy: Field::constant(grid, s),
        }
    }

    /// Smallest eigenvalue at each node.
    pub fn min_eigenvalue(&self) -> Field {
        self.eigenvalues().1
    }

    /// Pointwise eigenvalues `(larger, smaller)`.
    pub fn eigenvalues(&self) -> (Field, Field) {
        let mut hi = Field::from_array(Array2::zeros(self.xx.values().dim()));
        let mut lo = hi.clone();
        Zip::from(hi.values_mut())
            .and(lo.values_mut())
            .and(self.xx.values())
            .and(self.xy.values())
            .and(self.yy.values())
            .for_each(|h, l, &a, &b, &c| {
                let (e1, e2) = sym2_eigenvalues(a, b, c);
                *h = e1;
                *l = e2;
            });
        (hi, lo)
    }

    /// `max_kj |a_kj − δ_kj|` over all nodes.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let dxx = self.xx.map(|v| (v - 1.0).abs()).max();
        let dyy = self.yy.map(|v| (v - 1.0).abs()).max();
        dxx.max(dyy).max(self.xy.max_abs())
    }
}

/// Eigenvalues `(e1 ≥ e2)` of `[[a, b], [b, c]]`.
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    (mean + rad, mean - rad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modal_round_trip_band_limited() {
        let g = Grid::unit_disk(8, 32).unwrap();
        let h = BoundaryField::from_angle(&g, |t| 0.3 + (2.0 * t).cos() - 0.25 * (7.0 * t).sin());
        let back = BoundaryField::from_modes(&g, &h.modes(&g));
        assert!((&back - &h).max_abs() < 1e-12);
        let modes = h.modes(&g);
        assert!((modes[0].re - 0.3).abs() < 1e-14);
        assert!((modes[2].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rotation_by_full_turn_is_identity() {
        let g = Grid::unit_disk(8, 16).unwrap();
        let u = Field::from_cartesian(&g, |x, y| x * y + x);
        assert_eq!(u.rotate(16), u);
        assert_eq!(u.rotate(3).rotate(13), u);
    }

    #[test]
    fn symmetric_eigenvalues() {
        let (e1, e2) = sym2_eigenvalues(2.0, 0.0, -3.0);
        assert_eq!((e1, e2), (2.0, -3.0));
        let (e1, e2) = sym2_eigenvalues(1.0, 1.0, 1.0);
        assert!((e1 - 2.0).abs() < 1e-15 && e2.abs() < 1e-15);
    }
}

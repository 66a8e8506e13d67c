//! Harmonic gauge of a wavy boundary: Jacobian, boundary factor and the
//! coefficients of the pulled-back heat operator.

use stefan_core::field::{BoundaryField, Field, Grid};
use stefan_core::gauge::{boundary_factor, deformation, harmonic_extension};
use stefan_core::sim::coefficients;

fn main() -> stefan_core::Result<()> {
    let grid = Grid::unit_disk(32, 32)?;
    for eps in [0.0, 0.02, 0.05, 0.1] {
        let h = BoundaryField::from_angle(&grid, |th| eps * (4.0 * th).cos());
        let psi = harmonic_extension(&grid, &h)?;
        let gauge = deformation(&grid, psi, [Field::zeros(&grid), Field::zeros(&grid)])?;
        let lambda = boundary_factor(&grid, &gauge.a);
        let c = coefficients(&grid, &gauge);
        let drift = c.b[0].zip_map(&c.b[1], f64::hypot).max();
        println!(
            "eps {eps:5.2}: J in [{:.4}, {:.4}], Lambda in [{:.4}, {:.4}], max|a - Id| {:.3e}, max|b| {:.3e}",
            gauge.j.min(),
            gauge.j.max(),
            lambda.min(),
            lambda.max(),
            c.a.max_deviation_from_identity(),
            drift
        );
    }
    Ok(())
}

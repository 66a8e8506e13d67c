//! Variable-coefficient Dirichlet problem against a manufactured solution,
//! at several resolutions.

use stefan_core::field::{
    solve_dirichlet_with, BoundaryField, EllipticProblem, Field, Grid, SolveOptions, SymmetricTensorField,
};

fn main() -> stefan_core::Result<()> {
    // u = e^x sin y, with a = [[2 + x, 0.3], [0.3, 1.5]], b = (y, 0), c = −1
    let exact = |x: f64, y: f64| x.exp() * y.sin();
    for n in [8, 12, 16, 24, 32] {
        let grid = Grid::unit_disk(n, n)?;
        let a = SymmetricTensorField {
            xx: Field::from_cartesian(&grid, |x, _| 2.0 + x),
            xy: Field::constant(&grid, 0.3),
            yy: Field::constant(&grid, 1.5),
        };
        let f = Field::from_cartesian(&grid, |x, y| {
            let (s, c, e) = (y.sin(), y.cos(), x.exp());
            (2.0 + x) * e * s + 0.6 * e * c - 1.5 * e * s + y * e * s - e * s
        });
        let problem = EllipticProblem {
            a,
            b: [Field::from_cartesian(&grid, |_, y| y), Field::zeros(&grid)],
            c: Field::constant(&grid, -1.0),
            f,
            g: BoundaryField::from_angle(&grid, |t| exact(t.cos(), t.sin())),
        };
        let report = solve_dirichlet_with(&grid, &problem, &SolveOptions::default(), None)?;
        let err = (&report.solution - &Field::from_cartesian(&grid, exact)).max_abs();
        println!("{n:3}x{n:<3} error {err:.3e}  ({} GMRES iterations)", report.iterations);
    }
    Ok(())
}

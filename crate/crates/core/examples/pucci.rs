//! Half-eigenvalues of the Pucci operators as the ellipticity class widens.

use stefan_core::eigen::dirichlet_eigenpair;
use stefan_core::field::Grid;
use stefan_core::pucci::{half_eigenpair, negative_half_eigenpair, PucciParams};

fn main() -> stefan_core::Result<()> {
    let grid = Grid::unit_disk(32, 32)?;
    let lambda = dirichlet_eigenpair(&grid)?.lambda;
    println!("lambda(Laplacian) = {lambda:.8}");
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "s", "lambda1", "(1+s)lambda", "lambda2", "(1-s)lambda"
    );
    for s in [0.0, 0.05, 0.1, 0.2, 0.3] {
        let p = PucciParams::new(1.0 - s, 1.0 + s)?;
        let pos = half_eigenpair(&grid, &p)?;
        let neg = negative_half_eigenpair(&grid, &p)?;
        println!(
            "{s:6.2} {:12.6} {:12.6} {:12.6} {:12.6}",
            pos.lambda,
            (1.0 + s) * lambda,
            neg.lambda,
            (1.0 - s) * lambda
        );
    }
    Ok(())
}

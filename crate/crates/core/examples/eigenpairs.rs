//! Dirichlet eigenvalues of the disk and of a perturbed star domain, with
//! the barrier `Δψ = −1` and the comparison threshold `κ₂*`.

use stefan_core::eigen::{
    barrier_psi, dirichlet_eigenpair, eigen_residual, hopf_margin, kappa2_threshold, second_eigenpair,
};
use stefan_core::field::{Grid, RadiusFunction, ReferenceDomain};
use stefan_core::verify::bessel_j0_first_root;

fn report(name: &str, grid: &Grid) -> stefan_core::Result<()> {
    let first = dirichlet_eigenpair(grid)?;
    let second = second_eigenpair(grid, &first)?;
    let psi = barrier_psi(grid)?;
    println!("{name}");
    println!(
        "  lambda1 = {:.10}  (residual {:.2e}, {} iterations)",
        first.lambda,
        eigen_residual(grid, &first),
        first.iterations
    );
    println!("  lambda2 = {:.10}", second.lambda);
    println!(
        "  Hopf margins: phi1 {:.4}, psi {:.4}",
        hopf_margin(grid, &first.phi),
        hopf_margin(grid, &psi)
    );
    println!("  kappa2* = {:.5}", kappa2_threshold(grid, &first.phi, &psi));
    Ok(())
}

fn main() -> stefan_core::Result<()> {
    let j = bessel_j0_first_root();
    println!("j0,1^2 = {:.10}", j * j);
    report("unit disk", &Grid::unit_disk(32, 32)?)?;

    let radius = RadiusFunction {
        mean: 1.0,
        cos: vec![0.0, 0.05],
        sin: Vec::new(),
    };
    let domain = ReferenceDomain::new(radius, 0.3, 0.2)?;
    report("R = 1 + 0.05 cos 2θ", &Grid::new(domain, 32, 32)?)
}

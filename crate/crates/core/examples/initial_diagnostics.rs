//! Energies, norms and the stability scalars for the default
//! initial data.

use stefan_core::diagnostics::{chi, k_ratio, measure, rayleigh_taylor_check, t_k, NormSpec};
use stefan_core::eigen::{c1, dirichlet_eigenpair};
use stefan_core::sim::{coefficients, make_initial_data, StefanState};
use stefan_core::SimConfig;

fn main() -> stefan_core::Result<()> {
    let cfg = SimConfig::default();
    let grid = cfg.grid()?;
    let q0 = make_initial_data(&cfg, &grid)?;
    let pair = dirichlet_eigenpair(&grid)?;
    let state = StefanState::start(&grid, q0.clone(), &cfg)?;
    let m = measure(&grid, &state, &coefficients(&grid, &state.gauge), &NormSpec::default())?;

    let k = k_ratio(&grid, &q0)?;
    println!("chi(0)        = {:.6}", chi(&grid, &q0));
    println!("c1            = {:.6}", c1(&grid, &q0, &pair.phi));
    println!("K, T_K        = {:.4}, {:.4}", k, t_k(k, cfg.constants.c_bar));
    let rt = rayleigh_taylor_check(&grid, &q0, &pair.phi, cfg.constants.c_star);
    println!("RT condition  = {} (margin {:.4})", rt.holds, rt.margin);
    println!("energy        = {:.6}", m.energy.total());
    println!("dissipation   = {:.6}", m.dissipation.total());
    println!("|q|_H4^2      = {:.6}", m.q_h4_sq);
    println!("|q_t|_H2^2    = {:.6}", m.qt_h2_sq);
    println!("conserved     = {:.12}", m.conserved);
    println!("inf dN q_t    = {:.6}", m.qt_sign_pde);
    Ok(())
}

//! Short coupled run from the default configuration, printed as a table.
//!
//! ```text
//! cargo run --release --example simulate -- 0.2
//! ```

use stefan_core::sim;
use stefan_core::SimConfig;

fn main() -> stefan_core::Result<()> {
    let mut cfg = SimConfig::default();
    cfg.grid.nr = 32;
    cfg.grid.ntheta = 32;
    cfg.time.t_end = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    cfg.output.snapshot_stride = 50;

    let out = sim::run(&cfg)?;
    println!(
        "lambda = {:.6}  K = {:.3}  T_K = {:.3}  c1 = {:.5}",
        out.lambda, out.k, out.t_k, out.c1
    );
    println!(
        "Rayleigh-Taylor margin {:.4} (holds: {})",
        out.rayleigh_taylor.margin, out.rayleigh_taylor.holds
    );
    println!(
        "{:>8} {:>12} {:>12} {:>14} {:>12}",
        "t", "chi", "max q", "conserved", "|h|"
    );
    let every = (out.rows.len() / 10).max(1);
    for r in out.rows.iter().step_by(every) {
        println!(
            "{:8.3} {:12.5e} {:12.5e} {:14.10} {:12.5e}",
            r.t, r.chi, r.max_q, r.conserved, r.h_l2
        );
    }
    if let Some(b) = &out.breakdown {
        println!("breakdown at t = {}: {}", b.t, b.reason);
    }
    println!(
        "{} snapshots, max |a - Id| = {:.3e}",
        out.snapshots.len(),
        out.coefficient_deviation
    );
    Ok(())
}

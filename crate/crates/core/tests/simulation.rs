use stefan_core::diagnostics::{conserved_heat, decay_fit};
use stefan_core::eigen::dirichlet_eigenpair;
use stefan_core::field::{boundary_l2_norm, integrate, Field};
use stefan_core::io::{csv_string, parse_snapshot, read_csv, write_outputs};
use stefan_core::sim::{self, make_initial_data, step, StefanState};
use stefan_core::{SimConfig, Stage};

fn small(nr: usize, ntheta: usize, dt: f64, t_end: f64) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.grid.nr = nr;
    cfg.grid.ntheta = ntheta;
    cfg.time.dt = dt;
    cfg.time.t_end = t_end;
    cfg
}

#[test]
fn identical_configs_give_identical_tables() {
    let mut cfg = small(24, 24, 1e-3, 0.05);
    cfg.output.snapshot_stride = 10;
    let a = sim::run(&cfg).unwrap();
    let b = sim::run(&cfg).unwrap();
    assert_eq!(csv_string(&a.rows), csv_string(&b.rows));

    let grid = cfg.grid().unwrap();
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_outputs(da.path(), &cfg, &grid, &a).unwrap();
    write_outputs(db.path(), &cfg, &grid, &b).unwrap();
    for name in ["diagnostics.csv", "summary.json", "snap_0.dat", "snap_5.dat"] {
        let x = std::fs::read(da.path().join(name)).unwrap();
        let y = std::fs::read(db.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn outputs_reproduce_the_run() {
    let mut cfg = small(16, 16, 2e-3, 0.04);
    cfg.output.snapshot_stride = 5;
    let grid = cfg.grid().unwrap();
    let out = sim::run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = write_outputs(dir.path(), &cfg, &grid, &out).unwrap();
    assert_eq!(summary.termination, "t_end_reached");
    assert_eq!(summary.steps, 20);

    let rows = read_csv(&dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(rows, out.rows);
    assert_eq!(rows.len(), 21);

    // The last snapshot alone recomputes the final conserved quantity.
    let last = out.snapshots.last().unwrap();
    let text = std::fs::read_to_string(dir.path().join(format!("snap_{}.dat", last.index))).unwrap();
    let data = parse_snapshot(&text).unwrap();
    assert_eq!(data.t, rows.last().unwrap().t);
    let q = Field::from_array(ndarray::Array2::from_shape_vec((16, 16), data.q).unwrap());
    let j = Field::from_array(ndarray::Array2::from_shape_vec((16, 16), data.j).unwrap());
    let conserved = integrate(&grid, &(&q * &j)) + integrate(&grid, &j);
    assert!((conserved - rows.last().unwrap().conserved).abs() < 1e-12);

    let drift = rows
        .iter()
        .map(|r| (r.conserved - rows[0].conserved).abs() / rows[0].conserved)
        .fold(0.0, f64::max);
    assert_eq!(drift, summary.conservation_drift);
}

#[test]
fn zero_end_time_returns_the_initial_state() {
    let cfg = small(16, 16, 1e-3, 0.0);
    let out = sim::run(&cfg).unwrap();
    assert_eq!(out.rows.len(), 1);
    assert_eq!(out.final_state.t, 0.0);
    assert_eq!(out.snapshots.len(), 1);
}

#[test]
fn conserved_quantity_drifts_little_per_step() {
    let cfg = small(32, 32, 1e-4, 0.01);
    let grid = cfg.grid().unwrap();
    let q0 = make_initial_data(&cfg, &grid).unwrap();
    let mut state = StefanState::start(&grid, q0, &cfg).unwrap();
    let mut previous = conserved_heat(&grid, &state);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.steps() {
        state = step(&grid, &state, &cfg).unwrap();
        let now = conserved_heat(&grid, &state);
        worst = worst.max((now - previous).abs() / previous);
        previous = now;
    }
    assert!(worst < 1e-6, "per-step drift {worst:e}");
}

#[test]
fn radial_data_stays_radial() {
    let mut cfg = small(24, 24, 1e-3, 0.1);
    cfg.initial.delta = 0.0;
    let out = sim::run(&cfg).unwrap();
    let s = &out.final_state;
    let h = s.h.values();
    let spread = h.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - h.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    assert!(spread < 1e-8, "h spread {spread:e}");
    for row in s.q.values().rows() {
        let mean = row.mean().unwrap();
        assert!(row.iter().all(|v| (v - mean).abs() < 1e-8));
    }
}

#[test]
fn rotated_data_gives_rotated_evolution() {
    let cfg = small(16, 24, 1e-3, 0.02);
    let grid = cfg.grid().unwrap();
    let q0 = make_initial_data(&cfg, &grid).unwrap();
    for shift in [1, 5, 13] {
        let mut plain = StefanState::start(&grid, q0.clone(), &cfg).unwrap();
        let mut turned = StefanState::start(&grid, q0.rotate(shift), &cfg).unwrap();
        for _ in 0..cfg.steps() {
            plain = step(&grid, &plain, &cfg).unwrap();
            turned = step(&grid, &turned, &cfg).unwrap();
        }
        let dq = (&plain.q.rotate(shift) - &turned.q).max_abs();
        let dh = (&plain.h.rotate(shift) - &turned.h).max_abs();
        assert!(dq < 1e-8 && dh < 1e-8, "shift {shift}: {dq:e} {dh:e}");
    }
}

/// One coarse run to `t = 1` shared by the trajectory properties below.
fn coarse_run() -> (SimConfig, sim::RunOutput) {
    let cfg = small(24, 24, 1e-3, 1.0);
    let out = sim::run(&cfg).unwrap();
    (cfg, out)
}

#[test]
fn coarse_trajectory_properties() {
    let (cfg, out) = coarse_run();
    assert!(out.breakdown.is_none());
    let grid = cfg.grid().unwrap();

    // Positivity and monotone maximum.
    assert!(out.measurements.iter().all(|m| m.min_q >= -1e-9));
    assert!(out.rows.windows(2).all(|w| w[1].max_q <= w[0].max_q + 1e-9));

    // χ stays positive and above the bootstrap rate e^{−(λ+η/2)t}, with the
    // constant read off at t = 0.1.
    let at = |t: f64| {
        out.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .unwrap()
    };
    let rate = out.lambda + 0.5 * out.eta;
    let c = at(0.1).chi * (rate * at(0.1).t).exp() / out.c1;
    assert!(out.rows.iter().all(|r| r.chi > 0.0));
    for r in out.rows.iter().filter(|r| r.t >= 0.1) {
        assert!(r.chi >= 0.99 * c * out.c1 * (-rate * r.t).exp(), "t = {}", r.t);
    }

    // Energy and its time-integrated proxy stay comparable.
    for r in &out.rows {
        let ratio = r.e_disc / r.s_proxy;
        assert!((1e-2..=1e2).contains(&ratio), "E/S = {ratio} at t = {}", r.t);
    }

    // The boundary approaches its final position monotonically late in the run.
    let end = &out.final_state.h;
    let late: Vec<f64> = out
        .snapshots
        .iter()
        .filter(|s| s.state.t >= 0.5 * cfg.time.t_end)
        .map(|s| boundary_l2_norm(&grid, &(&s.state.h - end)))
        .collect();
    assert!(late.len() >= 5);
    assert!(late.windows(2).all(|w| w[1] <= w[0]), "{late:?}");

    let series: Vec<(f64, f64)> = out
        .measurements
        .iter()
        .filter(|m| m.t >= 0.5)
        .map(|m| (m.t, m.q_l2))
        .collect();
    let slope = decay_fit(&series).unwrap();
    assert!((slope + out.lambda).abs() < 0.1 * out.lambda, "slope {slope}");
}

#[test]
fn radial_melt_reaches_the_predicted_area() {
    let mut cfg = small(24, 24, 2e-3, 2.0);
    cfg.initial.delta = 0.0;
    let grid = cfg.grid().unwrap();
    let q0 = make_initial_data(&cfg, &grid).unwrap();
    let expected = std::f64::consts::PI + integrate(&grid, &q0);
    let out = sim::run(&cfg).unwrap();
    let area = integrate(&grid, &out.final_state.gauge.j);
    assert!(
        (area - expected).abs() / expected < 1e-3,
        "area {area}, expected {expected}"
    );
}

#[test]
fn strong_disk_data_melts_without_folding() {
    let mut cfg = small(24, 24, 1e-3, 0.3);
    cfg.initial.a = 0.9;
    cfg.initial.delta = 0.5;
    let out = sim::run(&cfg).unwrap();
    assert!(out.breakdown.is_none());
    assert!(out.final_state.gauge.j.min() > 1.0);
    assert!(out.measurements.iter().all(|m| m.min_q >= -1e-9));
}

#[test]
fn folding_gauge_is_reported_with_partial_outputs() {
    let mut cfg = small(24, 32, 1e-3, 0.5);
    cfg.initial.a = 0.9;
    cfg.initial.delta = 0.5;
    cfg.domain.cos = vec![0.0, 0.0, 0.0, 0.3];
    cfg.output.snapshot_stride = 25;
    let grid = cfg.grid().unwrap();
    let out = sim::run(&cfg).unwrap();
    let b = out.breakdown.clone().expect("the neck of the domain folds");
    assert_eq!(b.stage, Some(Stage::GaugeRefresh));
    assert!(b.t > 0.0 && b.t < 0.2, "breakdown at {}", b.t);
    assert!(b.reason.contains("J ="));
    assert_eq!(out.rows.len(), b.step);

    let dir = tempfile::tempdir().unwrap();
    let summary = write_outputs(dir.path(), &cfg, &grid, &out).unwrap();
    assert_eq!(summary.termination, "breakdown");
    assert_eq!(read_csv(&dir.path().join("diagnostics.csv")).unwrap().len(), b.step);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["breakdown"]["stage"], "gauge_refresh");
    assert!(dir.path().join("snap_0.dat").exists());
}

#[test]
fn eigenvalue_scales_with_the_disk() {
    let mut cfg = small(24, 16, 1e-3, 0.0);
    let base = dirichlet_eigenpair(&cfg.grid().unwrap()).unwrap().lambda;
    cfg.domain.radius = 1.5;
    let scaled = dirichlet_eigenpair(&cfg.grid().unwrap()).unwrap().lambda;
    assert!((scaled - base / 2.25).abs() < 1e-8);
}

#[test]
fn default_data_ratio_is_pinned() {
    let cfg = SimConfig::default();
    let grid = cfg.grid().unwrap();
    let q0 = make_initial_data(&cfg, &grid).unwrap();
    let k = stefan_core::diagnostics::k_ratio(&grid, &q0).unwrap();
    assert!((k - 48.85787971914787).abs() < 1e-8 * k, "K = {k}");
}

//! Acceptance criteria A1–A9 on the default configuration.
//!
//! Prints one line per criterion and exits nonzero if any fails. Every
//! tolerance is pinned below, independently of the library, so a change to a
//! limit in `verify` shows up here as a failure.

use std::process::ExitCode;

use stefan_core::verify::{self, Baseline, Bound, Criterion};
use stefan_core::SimConfig;

const EPS: f64 = f64::EPSILON;

/// Expected `(bound, limit)` of each check, in order.
fn pinned(id: &str, base: Option<&Baseline>) -> Vec<(Bound, f64)> {
    use Bound::{AtLeast, AtMost};
    match id {
        "A1" => vec![(AtMost, 1e-3)],
        "A2" => vec![(AtMost, 1e-4), (AtMost, 1e-6)],
        "A3" => vec![(AtMost, 1e-3), (AtMost, 1e-3)],
        "A4" => vec![(AtMost, 0.10), (AtMost, 0.15)],
        "A5" => vec![(AtLeast, 0.1), (AtLeast, f64::MIN_POSITIVE)],
        "A6" => {
            let base = base.expect("A6 needs the run");
            let s0 = base.out.rows[0].s_proxy;
            let h_end = base.out.rows.last().unwrap().h_l2;
            vec![(AtMost, 5.0 * s0.sqrt()), (AtMost, 1e-3 * h_end + 1e-6)]
        }
        "A7" => vec![(AtLeast, -1e-9), (AtMost, 1e-9), (AtMost, 1e-9)],
        "A8" => vec![
            (AtMost, 1e-4),
            (AtMost, 1e-6),
            (AtMost, 1e-6),
            (AtLeast, -1e-4),
            (AtMost, 0.0),
            (AtMost, 8.0 * EPS),
        ],
        "A9" => {
            let base = base.expect("A9 needs the run");
            let mut v = Vec::new();
            if base.out.rows.iter().any(|r| r.t >= base.out.t_k) {
                v.push((AtLeast, f64::MIN_POSITIVE));
            }
            v.extend([(AtMost, 1e-4); 3]);
            v
        }
        _ => unreachable!("unknown criterion {id}"),
    }
}

/// Differences between the limits a criterion used and the pinned ones.
fn drift(c: &Criterion, expected: &[(Bound, f64)]) -> Vec<String> {
    if c.checks.len() != expected.len() {
        return vec![format!("{} checks, expected {}", c.checks.len(), expected.len())];
    }
    c.checks
        .iter()
        .zip(expected)
        .filter(|(check, (bound, limit))| {
            check.bound != *bound || (check.limit - limit).abs() > 1e-12 * limit.abs().max(f64::MIN_POSITIVE)
        })
        .map(|(check, (bound, limit))| {
            format!(
                "`{}` uses {:?} {:e}, pinned {:?} {:e}",
                check.name, check.bound, check.limit, bound, limit
            )
        })
        .collect()
}

fn main() -> ExitCode {
    let cfg = SimConfig::default();
    let base = Baseline::compute(&cfg);
    if let Err(e) = &base {
        println!("default run failed: {e}");
    }
    let base = base.ok();
    let with_base =
        |id: &'static str, title: &'static str, f: &dyn Fn(&Baseline) -> stefan_core::Result<Criterion>| match &base {
            Some(b) => f(b).unwrap_or_else(|e| Criterion::failed(id, title, e)),
            None => Criterion::failed(id, title, stefan_core::Error::InvalidProblem("no default run".into())),
        };
    let criteria = vec![
        verify::a1_fixed_gauge(&cfg).unwrap_or_else(|e| Criterion::failed("A1", "fixed-gauge heat sanity", e)),
        verify::a2_eigenvalue(&cfg).unwrap_or_else(|e| Criterion::failed("A2", "Dirichlet eigenvalue", e)),
        with_base("A3", "conservation", &|b| Ok(verify::a3_conservation(b))),
        with_base("A4", "temperature decay", &verify::a4_decay),
        with_base("A5", "boundary weight lower bound", &|b| Ok(verify::a5_chi(b))),
        with_base("A6", "boundary settling", &|b| Ok(verify::a6_settling(b))),
        with_base("A7", "maximum principles", &verify::a7_maximum_principles),
        verify::a8_pucci(&cfg).unwrap_or_else(|e| Criterion::failed("A8", "Pucci suite", e)),
        with_base("A9", "sign-definiteness", &verify::a9_sign_definiteness),
    ];

    let mut ok = true;
    for c in &criteria {
        println!("{}", c.line());
        ok &= c.pass();
        if !c.checks.is_empty() {
            for d in drift(c, &pinned(c.id, base.as_ref())) {
                println!("    tolerance mismatch in {}: {d}", c.id);
                ok = false;
            }
        }
    }
    let passed = criteria.iter().filter(|c| c.pass()).count();
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

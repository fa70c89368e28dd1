//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one `[PASS]`/`[FAIL]` line; exits nonzero if any fails.

use std::time::Instant;

use bec1d::{emit_figure_data, Figure};
use bec1d_core::dynamics::{propagate, stability_experiment, PropagatorOptions, StabilityConfig};
use bec1d_core::ground::{double_bump, fit_tail_decay, DECAY_RATE_MAX};
use bec1d_core::thomas_fermi::{solve_mu_tf, TfVariant};
use bec1d_core::variational::{approximate, solve_kappa_ode, solve_kappa_root, taylor_coefficient, KappaEquation};
use bec1d_core::{
    solve_ground_state, sweep_lambda, verify_mu_energy_relations, Grid, GroundStateResult, ModelParams,
    SolverOptions, SweepResult, Wavefunction,
};

type Outcome = Result<(bool, String), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn params(lambda: f64, c: f64) -> ModelParams {
    ModelParams::new(lambda, c).expect("valid parameters")
}

fn solve(lambda: f64, opts: &SolverOptions, init: Option<&Wavefunction>) -> Result<GroundStateResult, String> {
    solve_ground_state(&params(lambda, 1.0), opts, init).map_err(|e| e.to_string())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn is_monotone(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn linear_case() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(12.0, 4001).unwrap();
    let opts = SolverOptions::with_grid(grid);
    let exact = Wavefunction::harmonic_ground(grid).real_parts();
    let mut ok = true;
    let mut notes = Vec::new();
    for c in [1.0, 3.0] {
        // from the default start and from a state far from the answer
        for init in [None, Some(double_bump(grid, 3.0))] {
            let r = solve_ground_state(&params(0.0, c), &opts, init.as_ref()).map_err(|e| e.to_string())?;
            let de = (r.e_min - 1.0 - c).abs();
            let dmu = (r.mu - 1.0 - c).abs();
            let dphi = max_abs_diff(&r.phi.real_parts(), &exact);
            ok &= de < 1e-6 && dmu < 1e-6 && dphi < 1e-4;
            notes.push(format!("C={c}: |dE|={de:.1e} |dmu|={dmu:.1e} |dphi|={dphi:.1e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    Ok((ok, format!("{}; {secs:.1} s", notes.join(", "))))
}

fn coefficient_fidelity() -> Outcome {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let pi = std::f64::consts::PI;
    let closed = [
        1.0 / (2.0 * pi).sqrt(),
        -1.0 / (2.0 * 3f64.sqrt() * pi),
        1.0 / (4.0 * pi * sqrt_pi),
        -5f64.sqrt() / (8.0 * pi * pi),
        7.0 * 6f64.sqrt() / (48.0 * pi * pi * sqrt_pi),
    ];
    let mut worst = 0.0f64;
    for (i, c) in closed.iter().enumerate() {
        let a = taylor_coefficient(i + 2).map_err(|e| e.to_string())?;
        worst = worst.max(((a - c) / c).abs());
    }
    Ok((worst <= 1e-14, format!("max relative error {worst:.1e} over n=2..6")))
}

fn variational_bound() -> Outcome {
    let opts = SolverOptions::default();
    let eq = KappaEquation::default();
    let path = solve_kappa_ode(&eq, 2.0, 2000).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for lambda in [0.25, 0.5, 1.0, 2.0] {
        let exact = solve(lambda, &opts, None)?;
        let v = approximate(&params(lambda, 1.0), eq.order).map_err(|e| e.to_string())?;
        let gap = (v.e_app - exact.e_min) / exact.e_min;
        let idx = (lambda / 2.0 * 2000.0).round() as usize;
        let (l_ode, k_ode) = path[idx];
        let k_root = solve_kappa_root(&eq, l_ode).map_err(|e| e.to_string())?.kappa;
        let dk = (k_root - k_ode).abs();
        ok &= v.e_app >= exact.e_min && gap < 0.02 && dk < 1e-6;
        notes.push(format!("l={lambda}: gap {:.2}% dkappa {dk:.1e}", 100.0 * gap));
    }
    Ok((ok, notes.join(", ")))
}

/// Strict for `lambda > 0`. At `lambda = 0` the bound is attained, so the
/// discrete value may sit below it by the solver tolerance.
fn lemma_bound(sweep: &SweepResult) -> Outcome {
    let tol = SolverOptions::default().tol_residual;
    let margins = sweep.lambdas.iter().zip(&sweep.mu_min).map(|(l, mu)| (*l, mu - (1.0 + sweep.c_omega)));
    let (zero, positive): (Vec<_>, Vec<_>) = margins.partition(|(l, _)| *l == 0.0);
    let at_zero = zero.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let above = positive.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    Ok((
        above > 0.0 && at_zero >= -tol,
        format!(
            "min mu - (1+C) = {above:.3e} over {} points with lambda > 0, {at_zero:.1e} at lambda = 0 (tol {tol:.0e})",
            positive.len()
        ),
    ))
}

fn energy_relations(sweep: &SweepResult) -> Outcome {
    let r = verify_mu_energy_relations(sweep, 1e-3).map_err(|e| e.to_string())?;
    Ok((
        r.passed(),
        format!(
            "d(lE)/dl vs mu {:.1e}, mean mu vs E {:.1e}, increasing {}, max 2nd diff {:.1e}",
            r.max_derivative_rel_err, r.max_integral_rel_err, r.increasing, r.max_second_difference
        ),
    ))
}

fn symmetry_uniqueness() -> Outcome {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for lambda in [0.5, 2.0] {
        let a = solve(lambda, &opts, None)?;
        let b = solve(lambda, &opts, Some(&double_bump(opts.grid, 2.5)))?;
        let inv = a.invariants();
        let gap = max_abs_diff(&a.phi.real_parts(), &b.phi.real_parts());
        ok &= inv.symmetry_error <= 1e-8 && inv.monotonicity_violation <= 0.0 && gap < 1e-5;
        notes.push(format!(
            "l={lambda}: asym {:.1e} rise {:.1e} init gap {gap:.1e}",
            inv.symmetry_error, inv.monotonicity_violation
        ));
    }
    Ok((ok, notes.join(", ")))
}

fn decay() -> Outcome {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for lambda in [0.0, 1.0, 2.0] {
        let r = solve(lambda, &opts, None)?;
        let fit = fit_tail_decay(&r).map_err(|e| e.to_string())?;
        ok &= fit.k0 > 0.0 && fit.k0 <= DECAY_RATE_MAX;
        if lambda == 0.0 {
            ok &= (fit.k0 - 1.0).abs() <= 0.02;
        }
        notes.push(format!("l={lambda}: k0 {:.4}", fit.k0));
    }
    Ok((ok, notes.join(", ")))
}

fn conservation(ground: &GroundStateResult) -> Outcome {
    let prop = PropagatorOptions {
        dt: 1e-3,
        t_final: 10.0,
        record_every: 100,
        ..Default::default()
    };
    let cfg = StabilityConfig {
        delta: 1e-2,
        propagator: prop,
        ..Default::default()
    };
    let run = stability_experiment(ground, &cfg).map_err(|e| e.to_string())?;
    let q = run.trajectory.max_charge_drift() / prop.t_final;
    let e = run.trajectory.max_energy_drift();
    let standing = propagate(&ground.phi, &ground.params, &prop, None).map_err(|e| e.to_string())?;
    let d = standing.record.max_orbital_distance();
    Ok((
        q < 1e-10 && e < 1e-6 && d < 1e-6,
        format!("Q drift/time {q:.1e}, E drift {e:.1e}, standing-wave distance {d:.1e}"),
    ))
}

fn orbital_stability(ground: &GroundStateResult) -> Outcome {
    let run = |delta: f64| {
        let cfg = StabilityConfig {
            delta,
            propagator: PropagatorOptions {
                dt: 1e-3,
                t_final: 20.0,
                record_every: 100,
                ..Default::default()
            },
            ..Default::default()
        };
        stability_experiment(ground, &cfg).map(|r| r.max_orbital_distance).map_err(|e| e.to_string())
    };
    let big = run(1e-2)?;
    let small = run(5e-3)?;
    let ratio = big / small;
    Ok((
        big < 10.0 * 1e-2 && small < 10.0 * 5e-3 && (1.5..=3.0).contains(&ratio),
        format!("max distance {big:.3e} (d=1e-2), {small:.3e} (d=5e-3), ratio {ratio:.3}"),
    ))
}

fn thomas_fermi(sweep10: f64) -> Outcome {
    // independent bisection on the closed-form scalar equation
    let mut lo = 1.0;
    let mut hi = 20.0;
    for _ in 0..200 {
        let m: f64 = 0.5 * (lo + hi);
        if 32.0 / 135.0 * m.powf(2.5) - 2.0 / 3.0 * m.sqrt() - 10.0 < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let first = solve_mu_tf(10.0, 1.0, TfVariant::First).map_err(|e| e.to_string())?;
    let second = solve_mu_tf(10.0, 1.0, TfVariant::Second).map_err(|e| e.to_string())?;
    let e1 = (first - sweep10).abs() / sweep10;
    let e2 = (second - sweep10).abs() / sweep10;
    let ok = (first - 4.71).abs() <= 0.01
        && (first - lo).abs() < 1e-10
        && e1 < 0.05
        && e2 < 0.05
        && e2 <= e1;
    Ok((
        ok,
        format!(
            "mu_first {first:.5} (bisection {lo:.5}), mu_second {second:.5}, solver {sweep10:.5}; \
             rel. errors {:.2}% / {:.2}%",
            100.0 * e1,
            100.0 * e2
        ),
    ))
}

fn figures() -> Outcome {
    let opts = SolverOptions::default();
    let fig1 = emit_figure_data(Figure::Fig1, 1.0, 6, &opts).map_err(|e| e.to_string())?;
    let fig2 = emit_figure_data(Figure::Fig2, 1.0, 6, &opts).map_err(|e| e.to_string())?;
    let on_unit = |t: &bec1d::Table, col: &str| -> Vec<f64> {
        let l = t.column("lambda").unwrap();
        let v = t.column(col).unwrap();
        l.iter().zip(v).filter(|(l, _)| (0.0..=2.0).contains(*l)).map(|(_, v)| v).collect()
    };
    let kappa = on_unit(&fig1, "kappa");
    let e = on_unit(&fig2, "e_app");
    let mu = on_unit(&fig2, "mu_app");
    let ok = kappa.len() == 201
        && e.len() == 201
        && kappa[0] == 1.0
        && is_monotone(&kappa, false)
        && is_monotone(&e, true)
        && is_monotone(&mu, true)
        && e.iter().zip(&mu).all(|(e, m)| e <= m);
    Ok((
        ok,
        format!(
            "kappa {:.4} -> {:.4}, E_app {:.4} -> {:.4}, mu_app {:.4} -> {:.4}",
            kappa[0],
            kappa[kappa.len() - 1],
            e[0],
            e[e.len() - 1],
            mu[0],
            mu[mu.len() - 1]
        ),
    ))
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let opts = SolverOptions::default();
    let lambdas: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let sweep = sweep_lambda(&lambdas, 1.0, &opts);
    let ground_one = solve(1.0, &opts, None);
    let mu10 = solve(10.0, &opts, None).map(|r| r.mu);

    let with_sweep = |f: fn(&SweepResult) -> Outcome| match &sweep {
        Ok(s) => f(s),
        Err(e) => Err(e.to_string()),
    };
    let with_ground = |f: fn(&GroundStateResult) -> Outcome| match &ground_one {
        Ok(g) => f(g),
        Err(e) => Err(e.clone()),
    };
    let criteria: Vec<Criterion> = vec![
        ("exact linear case", Box::new(linear_case)),
        ("Taylor coefficient closed forms", Box::new(coefficient_fidelity)),
        ("variational upper bound and width routes", Box::new(variational_bound)),
        ("chemical potential lower bound", Box::new(move || with_sweep(lemma_bound))),
        ("energy and chemical potential relations", Box::new(move || with_sweep(energy_relations))),
        ("symmetry, monotonicity, uniqueness", Box::new(symmetry_uniqueness)),
        ("Gaussian tail decay", Box::new(decay)),
        ("charge and energy conservation", Box::new(move || with_ground(conservation))),
        ("empirical orbital stability", Box::new(move || with_ground(orbital_stability))),
        (
            "Thomas-Fermi chemical potentials",
            Box::new(move || match &mu10 {
                Ok(mu) => thomas_fermi(*mu),
                Err(e) => Err(e.clone()),
            }),
        ),
        ("figure data shape", Box::new(figures)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {:02} {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed, {} total",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

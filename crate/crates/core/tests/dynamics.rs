use bec1d_core::dynamics::{
    orbital_distance, perturbed_state, propagate, stability_experiment, PerturbationShape,
    PropagatorOptions, StabilityConfig,
};
use bec1d_core::{model, solve_ground_state, GroundStateResult, ModelParams, SolverOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ground(lambda: f64) -> GroundStateResult {
    let params = ModelParams::new(lambda, 1.0).unwrap();
    solve_ground_state(&params, &SolverOptions::default(), None).unwrap()
}

fn opts(dt: f64, t_final: f64) -> PropagatorOptions {
    PropagatorOptions {
        dt,
        t_final,
        record_every: 100,
        ..Default::default()
    }
}

#[test]
fn ground_state_is_a_standing_wave() {
    let g = ground(1.0);
    let run = propagate(&g.phi, &g.params, &opts(1e-3, 10.0), None).unwrap();
    let dist = run.record.max_orbital_distance();
    assert!(dist < 1e-6, "max orbital distance {dist:e}");

    let expected = g.phi.scaled(Complex64::from_polar(1.0, -g.mu * 10.0));
    let err = run
        .final_state
        .values()
        .iter()
        .zip(expected.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "phase-rotated state differs by {err:e}");
}

#[test]
fn perturbed_run_conserves_charge_and_energy() {
    let g = ground(1.0);
    let cfg = StabilityConfig {
        delta: 1e-2,
        propagator: opts(1e-3, 10.0),
        ..Default::default()
    };
    let report = stability_experiment(&g, &cfg).unwrap();
    let rec = &report.trajectory;
    // per unit time, over ten units
    assert!(rec.max_charge_drift() < 1e-10 * 10.0, "{:e}", rec.max_charge_drift());
    assert!(rec.max_energy_drift() < 1e-6, "{:e}", rec.max_energy_drift());
    assert!(rec.max_tail_mass < 1e-8);
    assert_eq!(rec.times.len(), rec.energy.len());
    assert_eq!(rec.times.len(), rec.orbital_distance.len());
}

#[test]
fn energy_drift_shrinks_with_time_step() {
    let g = ground(1.0);
    let drift = |dt: f64| {
        let cfg = StabilityConfig {
            delta: 0.1,
            propagator: opts(dt, 2.0),
            ..Default::default()
        };
        stability_experiment(&g, &cfg).unwrap().trajectory.max_energy_drift()
    };
    let coarse = drift(2e-2);
    let fine = drift(1e-2);
    let ratio = coarse / fine;
    assert!(ratio > 3.0 && ratio < 5.0, "{coarse:e} / {fine:e} = {ratio}");
}

#[test]
fn final_state_converges_at_second_order() {
    let g = ground(1.0);
    let v0 = perturbed_state(
        &g,
        &StabilityConfig {
            delta: 0.1,
            ..Default::default()
        },
    )
    .unwrap();
    let run = |dt: f64| {
        propagate(&v0, &g.params, &opts(dt, 1.0), None)
            .unwrap()
            .final_state
    };
    let (a, b, c) = (run(1e-2), run(5e-3), run(2.5e-3));
    let diff = |x: &model::Wavefunction, y: &model::Wavefunction| {
        let d: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(p, q)| (p - q).norm_sqr())
            .collect();
        x.grid().trapezoid(&d).sqrt()
    };
    let ratio = diff(&a, &b) / diff(&b, &c);
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn perturbation_stays_close_to_the_orbit() {
    let g = ground(1.0);
    let run = |delta: f64| {
        let cfg = StabilityConfig {
            delta,
            propagator: opts(1e-3, 20.0),
            ..Default::default()
        };
        stability_experiment(&g, &cfg).unwrap()
    };
    let big = run(1e-2);
    assert!((big.initial_distance - 1e-2).abs() < 1e-10);
    assert!(big.max_orbital_distance <= 10.0 * 1e-2, "{}", big.max_orbital_distance);
    let small = run(5e-3);
    let ratio = big.max_orbital_distance / small.max_orbital_distance;
    assert!((1.5..=3.0).contains(&ratio), "ratio {ratio}");

    let zero = run(0.0);
    assert!(zero.max_orbital_distance < 1e-6);
}

#[test]
fn renormalized_perturbation_has_unit_charge() {
    let g = ground(2.0);
    for shape in [PerturbationShape::Hermite1, PerturbationShape::Hermite2] {
        let cfg = StabilityConfig {
            delta: 0.05,
            shape,
            renormalize: true,
            ..Default::default()
        };
        let v = perturbed_state(&g, &cfg).unwrap();
        assert!((model::charge(&v) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_form_minimum_beats_sampled_phases() {
    let g = ground(1.0);
    let grid = *g.phi.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phi = &g.phi;
    for _ in 0..20 {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (w, shift): (f64, f64) = (rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
        let values = grid
            .nodes()
            .iter()
            .zip(phi.values())
            .map(|(&s, p)| {
                let bump = (-(s - shift).powi(2) / w).exp();
                p * Complex64::new(a, b) + Complex64::new(0.3 * bump, -0.2 * s * bump)
            })
            .collect();
        let v = model::Wavefunction::new(grid, values).unwrap();
        let best = orbital_distance(&v, phi).unwrap();
        for k in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let rot = phi.scaled(Complex64::from_polar(1.0, theta));
            let diff: Vec<Complex64> = v
                .values()
                .iter()
                .zip(rot.values())
                .map(|(x, y)| x - y)
                .collect();
            let probe = model::x_norm(&model::Wavefunction::new(grid, diff).unwrap());
            assert!(best <= probe + 1e-12, "{best} > {probe} at theta {theta}");
        }
    }
}

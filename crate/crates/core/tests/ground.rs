use bec1d_core::ground::{double_bump, fit_tail_decay, DECAY_RATE_MAX};
use bec1d_core::{
    model, solve_ground_state, sweep_lambda, verify_mu_energy_relations, Grid, ModelParams,
    SolverOptions, Stencil, Wavefunction,
};

fn opts(l: f64, n: usize) -> SolverOptions {
    SolverOptions::with_grid(Grid::new(l, n).unwrap())
}

#[test]
fn linear_case_matches_oscillator_on_fine_grid() {
    let grid = Grid::new(12.0, 4001).unwrap();
    let exact = Wavefunction::harmonic_ground(grid).real_parts();
    for c in [1.0, 3.0] {
        let p = ModelParams::new(0.0, c).unwrap();
        let r = solve_ground_state(&p, &SolverOptions::with_grid(grid), None).unwrap();
        assert!((r.e_min - (1.0 + c)).abs() < 1e-6, "{}", r.e_min);
        assert!((r.mu - (1.0 + c)).abs() < 1e-6, "{}", r.mu);
        let err = r
            .phi
            .real_parts()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }
}

#[test]
fn distinct_initial_states_reach_the_same_minimizer() {
    let p = ModelParams::new(1.0, 1.0).unwrap();
    let o = opts(12.0, 2001);
    let a = solve_ground_state(&p, &o, None).unwrap();
    let b = solve_ground_state(&p, &o, Some(&double_bump(o.grid, 2.5))).unwrap();
    let gap = a
        .phi
        .real_parts()
        .iter()
        .zip(b.phi.real_parts())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-5, "{gap}");
    assert!((a.e_min - b.e_min).abs() < 1e-10);
}

#[test]
fn converged_states_are_even_and_decreasing() {
    for lambda in [-0.3, 0.0, 0.5, 2.0, 10.0] {
        let p = ModelParams::new(lambda, 1.0).unwrap();
        let r = solve_ground_state(&p, &opts(12.0, 1001), None).unwrap();
        let inv = r.invariants();
        assert!(inv.holds(lambda, 1e-8), "lambda {lambda}: {inv:?}");
        if lambda < 0.0 {
            assert!(r.mu < 2.0);
        }
    }
}

#[test]
fn energy_converges_at_stencil_order() {
    let p = ModelParams::new(1.0, 1.0).unwrap();
    for (stencil, expected) in [(Stencil::Second, 4.0), (Stencil::Fourth, 16.0)] {
        let e: Vec<f64> = [251, 501, 1001]
            .iter()
            .map(|&n| {
                let grid = Grid::new(12.0, n).unwrap().with_stencil(stencil);
                solve_ground_state(&p, &SolverOptions::with_grid(grid), None)
                    .unwrap()
                    .e_min
            })
            .collect();
        let ratio = (e[0] - e[1]) / (e[1] - e[2]);
        assert!(
            (ratio / expected - 1.0).abs() < 0.1,
            "{stencil:?}: ratio {ratio}"
        );
    }
}

#[test]
fn doubling_the_domain_leaves_the_energy_unchanged() {
    let p = ModelParams::new(1.0, 1.0).unwrap();
    let narrow = solve_ground_state(&p, &opts(12.0, 1001), None).unwrap();
    let wide = solve_ground_state(&p, &opts(24.0, 2001), None).unwrap();
    assert!((narrow.e_min - wide.e_min).abs() < 1e-10);
    assert!((narrow.mu - wide.mu).abs() < 1e-8);
}

#[test]
fn chemical_potential_forms_agree() {
    let p = ModelParams::new(2.0, 1.0).unwrap();
    let r = solve_ground_state(&p, &opts(12.0, 2001), None).unwrap();
    let check = model::chemical_potential_check(&r.phi, &p).unwrap();
    assert!(check.discrepancy() < 1e-8, "{check:?}");
}

#[test]
fn sweep_satisfies_energy_relations() {
    let lambdas: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    let sweep = sweep_lambda(&lambdas, 1.0, &opts(12.0, 1001)).unwrap();
    assert!(sweep.mu_min.iter().all(|&mu| mu >= 2.0 - 1e-8));
    let report = verify_mu_energy_relations(&sweep, 1e-3).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn tail_decay_rate() {
    for (lambda, expect_one) in [(0.0, true), (1.0, false), (5.0, false)] {
        let p = ModelParams::new(lambda, 1.0).unwrap();
        let r = solve_ground_state(&p, &opts(12.0, 2001), None).unwrap();
        let fit = fit_tail_decay(&r).unwrap();
        assert!(fit.k0 > 0.0 && fit.k0 <= DECAY_RATE_MAX);
        if expect_one {
            assert!((fit.k0 - 1.0).abs() < 0.02, "{fit:?}");
        }
    }
}

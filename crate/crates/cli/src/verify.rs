//! Cross-method verification suite: every structural check on one report.

use std::f64::consts::PI;

use bec1d_core::dynamics::{propagate, stability_experiment, PropagatorOptions, StabilityConfig};
use bec1d_core::ground::{double_bump, fit_tail_decay, DECAY_RATE_MAX};
use bec1d_core::model::{chemical_potential_check, Wavefunction};
use bec1d_core::thomas_fermi::{
    h, h_inverse, profile_integral_by_quadrature, solve_mu_tf, tf_charge, TfVariant,
    PROFILE_INTEGRAL,
};
use bec1d_core::variational::{
    approximate_with, solve_kappa_ode, solve_kappa_root, taylor_coefficient, KappaEquation,
};
use bec1d_core::{
    solve_ground_state, verify_mu_energy_relations, ground::sweep_lambda_with, GroundStateResult,
    ModelParams,
};
use log::info;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Context};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            passed: value <= threshold,
            value,
            threshold,
        }
    }

    fn at_least(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            passed: value >= threshold,
            value,
            threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub c_omega: f64,
    pub lambdas: Vec<f64>,
    pub checks: Vec<Check>,
    /// Measured values that carry no pass/fail threshold.
    pub info: Map<String, Value>,
}

impl VerifyReport {
    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

type Group = Result<(Vec<Check>, Map<String, Value>), CliError>;

pub fn run(config: &RunConfig) -> Result<VerifyReport, CliError> {
    let c = config.c_omega()?;
    let lambdas = config.range().values();
    if lambdas.len() < 5 || lambdas[0] < 0.0 {
        return Err(CliError::config(
            "lambdas: verify needs at least five nonnegative values",
        ));
    }
    let ((a, b), (t, d)) = rayon::join(
        || rayon::join(|| ground_checks(config, c, &lambdas), || variational_checks(config, c, &lambdas)),
        || rayon::join(|| tf_checks(c), || dynamics_checks(config, c)),
    );
    let mut checks = Vec::new();
    let mut info = Map::new();
    for group in [a, b, t, d] {
        let (ch, inf) = group?;
        checks.extend(ch);
        info.extend(inf);
    }
    for ch in &checks {
        info!(
            "[{}] {}: {:e} (threshold {:e})",
            if ch.passed { "PASS" } else { "FAIL" },
            ch.name,
            ch.value,
            ch.threshold
        );
    }
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        c_omega: c,
        lambdas,
        checks,
        info,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ground_checks(config: &RunConfig, c: f64, lambdas: &[f64]) -> Group {
    let opts = &config.solver;
    let mut checks = Vec::new();
    let mut info = Map::new();

    let linear = solve_ground_state(&ModelParams::new(0.0, c).context("model")?, opts, None)
        .context("ground_solver")?;
    let exact = Wavefunction::harmonic_ground(opts.grid).real_parts();
    checks.push(Check::at_most("linear_energy", (linear.e_min - 1.0 - c).abs(), 1e-6));
    checks.push(Check::at_most("linear_mu", (linear.mu - 1.0 - c).abs(), 1e-6));
    checks.push(Check::at_most(
        "linear_profile",
        max_abs_diff(&linear.phi.real_parts(), &exact),
        1e-4,
    ));
    let tail = fit_tail_decay(&linear).context("ground_solver")?;
    checks.push(Check::at_most("linear_tail_decay_rate", (tail.k0 - 1.0).abs(), 0.02));

    let mut worst_charge = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let mut worst_monotone = 0.0f64;
    let mut min_interior = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    let mut worst_mu_forms = 0.0f64;
    let mut mu_form_error = None;
    let mut last: Option<GroundStateResult> = None;
    let sweep = sweep_lambda_with(lambdas, c, opts, |r| {
        let inv = r.invariants();
        worst_charge = worst_charge.max(inv.charge_error);
        worst_symmetry = worst_symmetry.max(inv.symmetry_error);
        worst_monotone = worst_monotone.max(inv.monotonicity_violation);
        min_interior = min_interior.min(inv.min_interior);
        min_margin = min_margin.min(inv.mu_margin);
        match chemical_potential_check(&r.phi, &r.params) {
            Ok(m) => worst_mu_forms = worst_mu_forms.max(m.discrepancy()),
            Err(e) => mu_form_error = Some(e),
        }
        last = Some(r.clone());
    })
    .context("ground_solver")?;
    if let Some(e) = mu_form_error {
        return Err(e).context("ground_solver");
    }
    let max_residual = sweep.residuals.iter().copied().fold(0.0, f64::max);
    checks.push(Check::at_most("sweep_residual", max_residual, opts.tol_residual));
    checks.push(Check::at_most("charge_error", worst_charge, 1e-10));
    checks.push(Check::at_most("symmetry_error", worst_symmetry, 1e-8));
    checks.push(Check::at_most("monotonicity_violation", worst_monotone, 1e-10));
    checks.push(Check::at_least("min_interior_value", min_interior, f64::MIN_POSITIVE));
    checks.push(Check::at_least("mu_minus_linear_bound", min_margin, -1e-8));
    checks.push(Check::at_most("mu_form_discrepancy", worst_mu_forms, 1e-8));

    let rel = verify_mu_energy_relations(&sweep, config.verify.relation_tolerance)
        .context("ground_solver")?;
    let tol = config.verify.relation_tolerance;
    checks.push(Check::at_most("d_lambda_e_vs_mu", rel.max_derivative_rel_err, tol));
    checks.push(Check::at_most("mean_mu_vs_e", rel.max_integral_rel_err, tol));
    checks.push(Check::at_least("mu_minus_e", rel.min_mu_minus_e, 0.0));
    checks.push(Check::at_most("e_second_difference", rel.max_second_difference, 1e-8));
    checks.push(Check {
        name: "e_increasing",
        passed: rel.increasing,
        value: f64::from(u8::from(rel.increasing)),
        threshold: 1.0,
    });

    let top = last.expect("sweep holds at least five points");
    let other = solve_ground_state(&top.params, opts, Some(&double_bump(opts.grid, 2.5)))
        .context("ground_solver")?;
    checks.push(Check::at_most(
        "uniqueness_gap",
        max_abs_diff(&top.phi.real_parts(), &other.phi.real_parts()),
        1e-5,
    ));
    let tail = fit_tail_decay(&top).context("ground_solver")?;
    checks.push(Check::at_most("tail_decay_rate", tail.k0, DECAY_RATE_MAX));
    checks.push(Check::at_least("tail_decay_rate_positive", tail.k0, f64::MIN_POSITIVE));
    // O(step^2) difference error relative to a small derivative; diagnostic only
    info.insert("de_dlambda_max_relative_error".into(), json!(rel.max_de_dlambda_rel_err));
    info.insert("tail_k0_top".into(), json!(tail.k0));
    info.insert("e_min".into(), json!(sweep.e_min));
    info.insert("mu_min".into(), json!(sweep.mu_min));
    Ok((checks, info))
}

fn variational_checks(config: &RunConfig, c: f64, lambdas: &[f64]) -> Group {
    let mut checks = Vec::new();
    let mut info = Map::new();

    let worst_coeff = (2..=30)
        .map(|n| {
            let k = n - 1;
            let binom: f64 = (0..k).map(|i| (0.5 - i as f64) / (i + 1) as f64).product();
            let oracle = binom * 2f64.powi(k as i32) * PI.powf(-(k as f64) / 2.0) / (n as f64).sqrt();
            taylor_coefficient(n).map(|a| ((a - oracle) / oracle).abs())
        })
        .collect::<bec1d_core::Result<Vec<_>>>()
        .context("variational")?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("taylor_coefficients", worst_coeff, 1e-13));

    let eq = KappaEquation::new(config.variational.order, c)
        .context("variational")?
        .with_legacy_lambda_cubed(config.variational.legacy_lambda_cubed);
    let top = *lambdas.last().expect("nonempty");
    let path = solve_kappa_ode(&eq, top, 2000).context("variational")?;
    let mut worst_ode = 0.0f64;
    for &(lambda, kappa) in path.iter().step_by(100) {
        let root = solve_kappa_root(&eq, lambda).context("variational")?;
        worst_ode = worst_ode.max((root.kappa - kappa).abs());
    }
    checks.push(Check::at_most("kappa_root_vs_ode", worst_ode, 1e-6));

    // upper bound against the solver at the sweep points with lambda > 0
    let positive: Vec<f64> = lambdas.iter().copied().filter(|&l| l > 0.0).collect();
    let sweep = bec1d_core::sweep_lambda(&positive, c, &config.solver).context("ground_solver")?;
    let mut min_gap = f64::INFINITY;
    let mut max_rel_gap = 0.0f64;
    for (lambda, e_min) in positive.iter().zip(&sweep.e_min) {
        let v = approximate_with(&eq, *lambda).context("variational")?;
        min_gap = min_gap.min(v.e_app - e_min);
        max_rel_gap = max_rel_gap.max((v.e_app - e_min) / e_min);
    }
    checks.push(Check::at_least("e_app_minus_e_min", min_gap, -1e-9));
    info.insert("e_app_max_relative_gap".into(), json!(max_rel_gap));
    Ok((checks, info))
}

fn tf_checks(c: f64) -> Group {
    let mut checks = Vec::new();
    let mut info = Map::new();
    let round_trip = (0..=1000)
        .map(|i| {
            let xi = -10.0 + 0.02 * i as f64;
            (h(h_inverse(xi)) - xi).abs() / xi.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    checks.push(Check::at_most("h_inverse_round_trip", round_trip, 1e-12));
    let integral = profile_integral_by_quadrature().context("thomas_fermi")?;
    checks.push(Check::at_most("profile_integral", (integral - PROFILE_INTEGRAL).abs(), 1e-14));

    let params = ModelParams::new(10.0, c).context("thomas_fermi")?;
    let mut worst_charge = 0.0f64;
    for v in [TfVariant::First, TfVariant::Second] {
        let mu = solve_mu_tf(10.0, c, v).context("thomas_fermi")?;
        let q = tf_charge(mu, &params, v, false).context("thomas_fermi")?;
        worst_charge = worst_charge.max((q - 1.0).abs());
        info.insert(
            format!("tf_mu_{}_lambda10", if v == TfVariant::First { "first" } else { "second" }),
            json!(mu),
        );
    }
    checks.push(Check::at_most("tf_charge", worst_charge, 1e-8));
    let first = solve_mu_tf(100.0, c, TfVariant::First).context("thomas_fermi")?;
    let second = solve_mu_tf(100.0, c, TfVariant::Second).context("thomas_fermi")?;
    checks.push(Check::at_most("tf_variant_ratio_lambda100", (first / second - 1.0).abs(), 0.01));
    Ok((checks, info))
}

fn dynamics_checks(config: &RunConfig, c: f64) -> Group {
    let mut checks = Vec::new();
    let mut info = Map::new();
    let params = ModelParams::new(1.0, c).context("model")?;
    let ground = solve_ground_state(&params, &config.solver, None).context("ground_solver")?;
    let t_final = config.verify.t_final;
    let prop = PropagatorOptions {
        t_final,
        ..config.stability.propagator
    };

    let standing = propagate(&ground.phi, &params, &prop, None).context("dynamics")?;
    checks.push(Check::at_most(
        "standing_wave_distance",
        standing.record.max_orbital_distance(),
        1e-6,
    ));

    let delta = config.verify.delta;
    let perturbed = stability_experiment(
        &ground,
        &StabilityConfig {
            delta,
            propagator: prop,
            ..config.stability
        },
    )
    .context("dynamics")?;
    let tr = &perturbed.trajectory;
    checks.push(Check::at_most(
        "charge_drift_per_time",
        tr.max_charge_drift() / t_final,
        1e-10,
    ));
    checks.push(Check::at_most("energy_drift", tr.max_energy_drift(), 1e-6));
    checks.push(Check::at_most(
        "orbital_distance_over_delta",
        perturbed.max_orbital_distance / delta.max(f64::MIN_POSITIVE),
        10.0,
    ));
    info.insert("tail_mass".into(), json!(tr.max_tail_mass));
    Ok((checks, info))
}

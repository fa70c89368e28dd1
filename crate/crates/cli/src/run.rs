//! One function per mode.

use bec1d_core::dynamics::stability_experiment;
use bec1d_core::ground::GroundStateInvariants;
use bec1d_core::model::chemical_potential_check;
use bec1d_core::thomas_fermi::thomas_fermi;
use bec1d_core::variational::{approximate_with, KappaEquation};
use bec1d_core::{solve_ground_state, sweep_lambda, Error, Grid, ModelParams};
use log::{debug, info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, Context};
use crate::output::{to_value, Artifact, Table};
use crate::verify;

/// Artifact plus, for `verify`, the reason the run should exit nonzero.
#[derive(Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub failure: Option<String>,
}

impl From<Artifact> for Outcome {
    fn from(artifact: Artifact) -> Self {
        Outcome {
            artifact,
            failure: None,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.mode {
        Mode::Ground => ground(config).map(Into::into),
        Mode::Sweep => sweep(config).map(Into::into),
        Mode::Variational => variational(config).map(Into::into),
        Mode::Tf => tf(config).map(Into::into),
        Mode::Evolve => evolve(config).map(Into::into),
        Mode::Verify => {
            let report = verify::run(config)?;
            let failure = (!report.passed).then(|| report.failed_names().join(", "));
            Ok(Outcome {
                artifact: Artifact::Report(to_value(&report)?),
                failure,
            })
        }
    }
}

#[derive(Debug, Serialize)]
struct GroundSummary {
    lambda: f64,
    c_omega: f64,
    e_min: f64,
    mu: f64,
    mu_via_energy: f64,
    residual_norm: f64,
    iterations: usize,
    dt_final: f64,
    de_dlambda: f64,
    grid: Grid,
    invariants: GroundStateInvariants,
}

fn ground(config: &RunConfig) -> Result<Artifact, CliError> {
    let params = config.model_params()?;
    let r = solve_ground_state(&params, &config.solver, None).context("ground_solver")?;
    let check = chemical_potential_check(&r.phi, &params).context("ground_solver")?;
    info!(
        "lambda = {}: E_min = {:.12}, mu = {:.12} after {} iterations",
        params.lambda, r.e_min, r.mu, r.iterations
    );
    let summary = GroundSummary {
        lambda: params.lambda,
        c_omega: params.c_omega,
        e_min: r.e_min,
        mu: r.mu,
        mu_via_energy: check.via_energy,
        residual_norm: r.residual_norm,
        iterations: r.iterations,
        dt_final: r.dt_final,
        de_dlambda: r.de_dlambda_formula(),
        grid: *r.phi.grid(),
        invariants: r.invariants(),
    };
    let mut profile = Table::new(vec!["s", "phi"]);
    for (s, phi) in r.phi.grid().nodes().into_iter().zip(r.phi.real_parts()) {
        profile.push(vec![s.into(), phi.into()]);
    }
    Ok(Artifact::Profile {
        summary: to_value(&summary)?,
        profile,
    })
}

fn sweep(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = config.c_omega()?;
    let lambdas = config.range().values();
    let s = sweep_lambda(&lambdas, c, &config.solver).context("ground_solver")?;
    let mut t = Table::new(vec!["lambda", "e_min", "mu_min", "residual"]);
    for i in 0..s.len() {
        t.push(vec![
            s.lambdas[i].into(),
            s.e_min[i].into(),
            s.mu_min[i].into(),
            s.residuals[i].into(),
        ]);
    }
    Ok(Artifact::Table(t))
}

/// Values of `lambda` with no width root, or whose trial state leaves the
/// model's domain, are left out (gaps in the curve).
pub(crate) fn skip_missing_root<T>(lambda: f64, r: bec1d_core::Result<T>) -> bec1d_core::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(
            e @ (Error::NoBracket { .. }
            | Error::DerivativeSingularity { .. }
            | Error::ModelValidity { .. }),
        ) => {
            debug!("lambda = {lambda}: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn report_gaps(requested: usize, kept: usize) {
    if kept < requested {
        warn!("{} of {requested} lambda values have no variational state", requested - kept);
    }
}

fn variational(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = config.c_omega()?;
    let eq = KappaEquation::new(config.variational.order, c)
        .map_err(|e| CliError::config(e.to_string()))?
        .with_legacy_lambda_cubed(config.variational.legacy_lambda_cubed);
    let lambdas = config.range().values();
    let requested = lambdas.len();
    let rows: Vec<_> = lambdas
        .into_par_iter()
        .map(|lambda| skip_missing_root(lambda, approximate_with(&eq, lambda)))
        .collect::<bec1d_core::Result<_>>()
        .context("variational")?;
    let mut t = Table::new(vec!["lambda", "kappa", "e_app", "mu_app", "in_domain"]);
    for r in rows.into_iter().flatten() {
        t.push(vec![
            r.lambda.into(),
            r.kappa.into(),
            r.e_app.into(),
            r.mu_app.into(),
            r.in_convergence_domain.into(),
        ]);
    }
    report_gaps(requested, t.rows.len());
    Ok(Artifact::Table(t))
}

fn tf(config: &RunConfig) -> Result<Artifact, CliError> {
    let c = config.c_omega()?;
    let range = config.range();
    if range.start <= 0.0 {
        return Err(CliError::config(format!(
            "lambdas: Thomas-Fermi mode needs lambda > 0, range starts at {}",
            range.start
        )));
    }
    let rows: Vec<_> = range
        .values()
        .into_par_iter()
        .map(|lambda| thomas_fermi(&ModelParams::new(lambda, c)?))
        .collect::<bec1d_core::Result<_>>()
        .context("thomas_fermi")?;
    let mut t = Table::new(vec!["lambda", "mu_first", "mu_second"]);
    for r in rows {
        t.push(vec![r.lambda.into(), r.mu_first.into(), r.mu_second.into()]);
    }
    Ok(Artifact::Table(t))
}

fn evolve(config: &RunConfig) -> Result<Artifact, CliError> {
    let params = config.model_params()?;
    let ground = solve_ground_state(&params, &config.solver, None).context("ground_solver")?;
    let report = stability_experiment(&ground, &config.stability).context("dynamics")?;
    let tr = &report.trajectory;
    info!(
        "delta = {}: charge drift {:e}, energy drift {:e}, max orbital distance {:e}",
        report.delta,
        tr.max_charge_drift(),
        tr.max_energy_drift(),
        report.max_orbital_distance
    );
    let mut t = Table::new(vec!["tau", "Q", "E", "orbital_distance"]);
    for i in 0..tr.len() {
        t.push(vec![
            tr.times[i].into(),
            tr.charge[i].into(),
            tr.energy[i].into(),
            tr.orbital_distance[i].into(),
        ]);
    }
    Ok(Artifact::Table(t))
}

//! Data behind the three published curves: the Gaussian width, the
//! approximate energy and chemical potential, and the Thomas-Fermi
//! chemical potentials against the solver.

use bec1d_core::thomas_fermi::thomas_fermi;
use bec1d_core::variational::{energy_app, mu_app, solve_kappa_root, KappaEquation};
use bec1d_core::{sweep_lambda, ModelParams, SolverOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context};
use crate::output::Table;
use crate::run::{report_gaps, skip_missing_root};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// kappa(lambda) on [-2, 2].
    Fig1,
    /// E_app and mu_app where the width root exists, up to lambda = 2.
    Fig2,
    /// Thomas-Fermi and solver chemical potentials on (0, 10].
    Fig3,
}

/// `[-2, 2]` in steps of 0.01, built from integers so the nodes are exact decimals.
fn width_grid() -> Vec<f64> {
    (-200..=200).map(|i| i as f64 / 100.0).collect()
}

/// `(0, 10]` in steps of 0.25.
pub fn tf_grid() -> Vec<f64> {
    (1..=40).map(|i| i as f64 * 0.25).collect()
}

pub fn emit_figure_data(
    which: Figure,
    c_omega: f64,
    order: usize,
    solver: &SolverOptions,
) -> Result<Table, CliError> {
    let eq = KappaEquation::new(order, c_omega).map_err(|e| CliError::config(e.to_string()))?;
    match which {
        Figure::Fig1 => {
            let rows: Vec<_> = width_grid()
                .into_par_iter()
                .map(|lambda| {
                    skip_missing_root(lambda, solve_kappa_root(&eq, lambda)).map(|r| r.map(|k| (lambda, k)))
                })
                .collect::<bec1d_core::Result<_>>()
                .context("variational")?;
            let mut t = Table::new(vec!["lambda", "kappa", "in_domain"]);
            for (lambda, root) in rows.into_iter().flatten() {
                t.push(vec![lambda.into(), root.kappa.into(), root.in_convergence_domain.into()]);
            }
            report_gaps(401, t.rows.len());
            Ok(t)
        }
        Figure::Fig2 => {
            let rows: Vec<_> = width_grid()
                .into_par_iter()
                .map(|lambda| {
                    let root = match skip_missing_root(lambda, solve_kappa_root(&eq, lambda))? {
                        Some(r) => r,
                        None => return Ok(None),
                    };
                    let values = energy_app(lambda, root.kappa, c_omega)
                        .and_then(|e| Ok((e, mu_app(lambda, root.kappa, c_omega)?)));
                    Ok(skip_missing_root(lambda, values)?
                        .map(|(e, mu)| (lambda, e, mu, root.in_convergence_domain)))
                })
                .collect::<bec1d_core::Result<_>>()
                .context("variational")?;
            let mut t = Table::new(vec!["lambda", "e_app", "mu_app", "in_domain"]);
            for (lambda, e, mu, dom) in rows.into_iter().flatten() {
                t.push(vec![lambda.into(), e.into(), mu.into(), dom.into()]);
            }
            report_gaps(401, t.rows.len());
            Ok(t)
        }
        Figure::Fig3 => {
            let lambdas = tf_grid();
            let sweep = sweep_lambda(&lambdas, c_omega, solver).context("ground_solver")?;
            let mut t = Table::new(vec!["lambda", "mu_first", "mu_second", "mu_solver"]);
            for (lambda, mu_solver) in lambdas.iter().zip(&sweep.mu_min) {
                let params = ModelParams::new(*lambda, c_omega).context("thomas_fermi")?;
                let r = thomas_fermi(&params).context("thomas_fermi")?;
                t.push(vec![
                    (*lambda).into(),
                    r.mu_first.into(),
                    r.mu_second.into(),
                    (*mu_solver).into(),
                ]);
            }
            Ok(t)
        }
    }
}

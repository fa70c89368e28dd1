//! Ground states by normalized gradient flow on the unit-charge sphere,
//! continuation sweeps in `lambda`, and the checks on `E_min(lambda)` and
//! `mu_min(lambda)` built on them.

use serde::{Deserialize, Serialize};

use crate::banded::BandedCholesky;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{self, ModelParams, Wavefunction};

/// Accepted energy increase per step before the pseudo-time step is halved.
const DESCENT_SLACK: f64 = 1e-12;
const MIN_DT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub dt: f64,
    pub tol_residual: f64,
    pub max_iters: usize,
    pub grid: Grid,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dt: 1e-3,
            tol_residual: 1e-8,
            max_iters: 200_000,
            grid: Grid::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_grid(grid: Grid) -> Self {
        SolverOptions {
            grid,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.tol_residual.is_finite() && self.tol_residual > 0.0) {
            return Err(Error::invalid(
                "tol_residual",
                format!("must be positive, got {}", self.tol_residual),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub params: ModelParams,
    /// Real, nonnegative, unit charge.
    pub phi: Wavefunction,
    pub e_min: f64,
    pub mu: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Pseudo-time step in use at convergence (smaller than requested if
    /// descent forced halving).
    pub dt_final: f64,
}

/// Measured values of the structural properties of a ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateInvariants {
    pub charge_error: f64,
    /// Smallest sample on `|s| < L - h`.
    pub min_interior: f64,
    /// `max |phi(s) - phi(-s)|`.
    pub symmetry_error: f64,
    /// Largest increase `phi(s_{j+1}) - phi(s_j)` on `[0, L]`.
    pub monotonicity_violation: f64,
    /// `mu - (1 + C_omega)`.
    pub mu_margin: f64,
}

impl GroundStateInvariants {
    pub fn holds(&self, lambda: f64, tol: f64) -> bool {
        self.charge_error <= 1e-10
            && self.min_interior > 0.0
            && self.symmetry_error <= 1e-8
            && self.monotonicity_violation <= 1e-10
            && (lambda < 0.0 || self.mu_margin >= -tol)
    }
}

impl GroundStateResult {
    pub fn invariants(&self) -> GroundStateInvariants {
        let phi = self.phi.real_parts();
        let n = phi.len();
        let centre = self.phi.grid().centre();
        let symmetry_error = (0..n)
            .map(|j| (phi[j] - phi[n - 1 - j]).abs())
            .fold(0.0, f64::max);
        let monotonicity_violation = (centre..n - 1)
            .map(|j| phi[j + 1] - phi[j])
            .fold(0.0, f64::max);
        let min_interior = phi[1..n - 1].iter().copied().fold(f64::INFINITY, f64::min);
        GroundStateInvariants {
            charge_error: (model::charge(&self.phi) - 1.0).abs(),
            min_interior,
            symmetry_error,
            monotonicity_violation,
            mu_margin: self.mu - (1.0 + self.params.c_omega),
        }
    }

    /// `C_omega \int phi^4 / sqrt(1 + 2 lambda phi^2)`, the formal `dE_min/dlambda`.
    pub fn de_dlambda_formula(&self) -> f64 {
        let lambda = self.params.lambda;
        let integrand: Vec<f64> = self
            .phi
            .density()
            .iter()
            .map(|&r| r * r / (1.0 + 2.0 * lambda * r).sqrt())
            .collect();
        self.params.c_omega * self.phi.grid().trapezoid(&integrand)
    }
}

/// Per-node quantities of a real iterate, computed in one pass.
struct Evaluation {
    /// `s^2 + C_omega f_lambda(|psi|)`
    potential: Vec<f64>,
    energy: f64,
    mu: f64,
    residual: f64,
}

struct Evaluator<'a> {
    grid: &'a Grid,
    nodes: Vec<f64>,
    params: ModelParams,
    lap: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(grid: &'a Grid, params: ModelParams) -> Self {
        Evaluator {
            grid,
            nodes: grid.nodes(),
            params,
            lap: vec![0.0; grid.n_points()],
        }
    }

    fn evaluate(&mut self, psi: &[f64]) -> Result<Evaluation> {
        let n = psi.len();
        let h = self.grid.spacing();
        let ModelParams { lambda, c_omega } = self.params;
        self.grid.apply_neg_laplacian(psi, &mut self.lap);
        let mut potential = vec![0.0; n];
        let mut local_e = 0.0;
        let mut local_mu = 0.0;
        for j in 0..n {
            let s = self.nodes[j];
            let rho_sq = psi[j] * psi[j];
            let rad = 1.0 + 2.0 * lambda * rho_sq;
            if rad < model::EPS_POS {
                return Err(Error::ModelValidity { s, value: rad });
            }
            let root = rad.sqrt();
            let f = (1.0 + 3.0 * lambda * rho_sq) / root;
            potential[j] = s * s + c_omega * f;
            let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
            local_e += w * (s * s + c_omega * root) * rho_sq;
            local_mu += w * potential[j] * rho_sq;
        }
        let kinetic = self.grid.dirichlet_form(psi, psi, |x| x);
        let mu = kinetic + local_mu;
        let mut res_sq = 0.0;
        for j in 1..n - 1 {
            let r = self.lap[j] + (potential[j] - mu) * psi[j];
            res_sq += h * r * r;
        }
        Ok(Evaluation {
            potential,
            energy: kinetic + local_e,
            mu,
            residual: res_sq.sqrt(),
        })
    }
}

fn implicit_factor(grid: &Grid, dt: f64) -> Result<BandedCholesky> {
    let m = grid.n_points() - 2;
    let [d, o1, o2] = grid.stencil().neg_laplacian_bands(grid.spacing());
    let diag = vec![1.0 + dt * d; m];
    let off: Vec<f64> = [o1, o2][..grid.stencil().bandwidth()]
        .iter()
        .map(|o| dt * o)
        .collect();
    BandedCholesky::factor(&diag, &off)
}

fn normalize(grid: &Grid, psi: &mut [f64]) -> Result<()> {
    let q = grid.trapezoid(&psi.iter().map(|v| v * v).collect::<Vec<_>>());
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Precondition(format!("cannot normalize state with charge {q}")));
    }
    let c = q.sqrt().recip();
    psi.iter_mut().for_each(|v| *v *= c);
    Ok(())
}

/// Minimizes the energy over unit-charge states.
///
/// Each step solves `(I + dt A) psi* = psi - dt (V(psi) - mu(psi)) psi`, where
/// `A` is the Dirichlet `-d^2/ds^2` and `V = s^2 + C_omega f_lambda(|psi|)`,
/// then takes `|psi*|` and renormalizes. Stops when the stationary residual
/// drops below `opts.tol_residual`.
pub fn solve_ground_state(
    params: &ModelParams,
    opts: &SolverOptions,
    init: Option<&Wavefunction>,
) -> Result<GroundStateResult> {
    opts.validate()?;
    let grid = opts.grid;
    let n = grid.n_points();
    let mut psi: Vec<f64> = match init {
        Some(w) => {
            if *w.grid() != grid {
                return Err(Error::GridMismatch);
            }
            w.values().iter().map(|v| v.norm()).collect()
        }
        None => Wavefunction::harmonic_ground(grid).real_parts(),
    };
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    normalize(&grid, &mut psi)?;

    let mut evaluator = Evaluator::new(&grid, *params);
    let mut current = evaluator.evaluate(&psi)?;
    let mut dt = opts.dt;
    let mut factor = implicit_factor(&grid, dt)?;
    let mut next = vec![0.0; n];
    let mut iterations = 0;

    while current.residual >= opts.tol_residual {
        if iterations >= opts.max_iters {
            return Err(Error::NonConvergence {
                iterations,
                residual: current.residual,
            });
        }
        loop {
            next[0] = 0.0;
            next[n - 1] = 0.0;
            for j in 1..n - 1 {
                next[j] = psi[j] - dt * (current.potential[j] - current.mu) * psi[j];
            }
            factor.solve_in_place(&mut next[1..n - 1]);
            next.iter_mut().for_each(|v| *v = v.abs());
            normalize(&grid, &mut next)?;
            let candidate = evaluator.evaluate(&next)?;
            if candidate.energy <= current.energy + DESCENT_SLACK {
                std::mem::swap(&mut psi, &mut next);
                current = candidate;
                break;
            }
            dt *= 0.5;
            if dt < MIN_DT {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: current.residual,
                });
            }
            log::debug!("energy increased at iteration {iterations}; dt -> {dt:e}");
            factor = implicit_factor(&grid, dt)?;
        }
        iterations += 1;
    }

    let phi = Wavefunction::from_real(grid, &psi)?;
    let e_min = model::energy(&phi, params)?;
    let mu = model::chemical_potential(&phi, params)?;
    let residual_norm = model::residual(&phi, mu, params)?.norm;
    Ok(GroundStateResult {
        params: *params,
        phi,
        e_min,
        mu,
        residual_norm,
        iterations,
        dt_final: dt,
    })
}

/// Normalized symmetric double bump `e^{-(s-d)^2/2} + e^{-(s+d)^2/2}`, used as
/// a second starting point for uniqueness probes.
pub fn double_bump(grid: Grid, offset: f64) -> Wavefunction {
    let raw = Wavefunction::from_fn(grid, |s| {
        (-0.5 * (s - offset).powi(2)).exp() + (-0.5 * (s + offset).powi(2)).exp()
    });
    let q = model::charge(&raw);
    raw.scaled(num_complex::Complex64::new(q.sqrt().recip(), 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub c_omega: f64,
    pub lambdas: Vec<f64>,
    pub e_min: Vec<f64>,
    pub mu_min: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// `C_omega \int phi^4 / sqrt(1 + 2 lambda phi^2)` at each point.
    pub de_dlambda_formula: Vec<f64>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Solves at each `lambda` in increasing order, seeding every solve with the
/// previous ground state.
pub fn sweep_lambda(lambdas: &[f64], c_omega: f64, opts: &SolverOptions) -> Result<SweepResult> {
    sweep_lambda_with(lambdas, c_omega, opts, |_| {})
}

/// [`sweep_lambda`] with a callback receiving every converged state.
pub fn sweep_lambda_with(
    lambdas: &[f64],
    c_omega: f64,
    opts: &SolverOptions,
    mut on_point: impl FnMut(&GroundStateResult),
) -> Result<SweepResult> {
    if lambdas.is_empty() {
        return Err(Error::Precondition("empty lambda list".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("lambdas must be strictly increasing".into()));
    }
    let mut out = SweepResult {
        c_omega,
        lambdas: lambdas.to_vec(),
        e_min: Vec::with_capacity(lambdas.len()),
        mu_min: Vec::with_capacity(lambdas.len()),
        residuals: Vec::with_capacity(lambdas.len()),
        iterations: Vec::with_capacity(lambdas.len()),
        de_dlambda_formula: Vec::with_capacity(lambdas.len()),
    };
    let mut previous: Option<Wavefunction> = None;
    for &lambda in lambdas {
        let wrap = |source: Error| Error::SweepPoint {
            lambda,
            source: Box::new(source),
        };
        let params = ModelParams::new(lambda, c_omega).map_err(wrap)?;
        let result = solve_ground_state(&params, opts, previous.as_ref()).map_err(wrap)?;
        log::debug!(
            "lambda = {lambda}: E = {}, mu = {}, {} iterations",
            result.e_min,
            result.mu,
            result.iterations
        );
        out.e_min.push(result.e_min);
        out.mu_min.push(result.mu);
        out.residuals.push(result.residual_norm);
        out.iterations.push(result.iterations);
        out.de_dlambda_formula.push(result.de_dlambda_formula());
        on_point(&result);
        previous = Some(result.phi);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationPoint {
    pub lambda: f64,
    pub e_min: f64,
    pub mu_min: f64,
    /// Central difference of `lambda E_min` (interior points only).
    pub d_lambda_e: Option<f64>,
    pub derivative_rel_err: Option<f64>,
    /// `(1/lambda) \int_0^lambda mu`, trapezoid over the sweep (lambda > 0 only).
    pub mean_mu: Option<f64>,
    pub integral_rel_err: Option<f64>,
    /// Central difference of `E_min` against the closed-form `dE/dlambda`.
    pub de_dlambda_rel_err: Option<f64>,
    pub mu_minus_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub tolerance: f64,
    pub points: Vec<RelationPoint>,
    pub max_derivative_rel_err: f64,
    pub max_integral_rel_err: f64,
    pub max_de_dlambda_rel_err: f64,
    pub min_mu_minus_e: f64,
    /// Worst normalized second difference of `E_min` (positive means convex).
    pub max_second_difference: f64,
    pub increasing: bool,
}

impl RelationReport {
    pub fn derivative_ok(&self) -> bool {
        self.max_derivative_rel_err < self.tolerance
    }

    pub fn integral_ok(&self) -> bool {
        self.max_integral_rel_err < self.tolerance
    }

    pub fn mu_dominates_energy(&self) -> bool {
        self.min_mu_minus_e >= -1e-10
    }

    pub fn concave(&self) -> bool {
        self.max_second_difference <= 1e-8
    }

    pub fn passed(&self) -> bool {
        self.derivative_ok()
            && self.integral_ok()
            && self.mu_dominates_energy()
            && self.concave()
            && self.increasing
    }
}

fn central_difference(x: &[f64], y: &[f64], i: usize) -> f64 {
    // three-point derivative on a possibly nonuniform mesh
    let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    (-h1 / (h0 * (h0 + h1))) * y[i - 1]
        + ((h1 - h0) / (h0 * h1)) * y[i]
        + (h0 / (h1 * (h0 + h1))) * y[i + 1]
}

/// Checks `mu = d(lambda E)/dlambda`, `E(lambda) = (1/lambda) \int_0^lambda mu`
/// and `mu >= E` on sweep data, plus monotonicity and concavity of `E_min`.
///
/// When the sweep does not start at zero, the integral relation is checked in
/// the form `lambda E = lambda_0 E_0 + \int_{lambda_0}^lambda mu`.
pub fn verify_mu_energy_relations(sweep: &SweepResult, tolerance: f64) -> Result<RelationReport> {
    let n = sweep.len();
    if n < 5 {
        return Err(Error::Precondition(format!(
            "relation checks need at least 5 sweep points, got {n}"
        )));
    }
    let lam = &sweep.lambdas;
    let e = &sweep.e_min;
    let mu = &sweep.mu_min;
    let lam_e: Vec<f64> = lam.iter().zip(e).map(|(l, e)| l * e).collect();

    let mut points = Vec::with_capacity(n);
    let mut integral = 0.0;
    let mean_spacing = (lam[n - 1] - lam[0]) / (n - 1) as f64;
    let mut max_second_difference = f64::NEG_INFINITY;
    for i in 0..n {
        if i > 0 {
            integral += 0.5 * (mu[i] + mu[i - 1]) * (lam[i] - lam[i - 1]);
        }
        let interior = i > 0 && i + 1 < n;
        let d_lambda_e = interior.then(|| central_difference(lam, &lam_e, i));
        let derivative_rel_err = d_lambda_e.map(|d| ((d - mu[i]) / mu[i]).abs());
        let de_dlambda_rel_err = interior.then(|| {
            let fd = central_difference(lam, e, i);
            let formula = sweep.de_dlambda_formula[i];
            (fd - formula).abs() / formula.abs().max(f64::MIN_POSITIVE)
        });
        if interior {
            let (h0, h1) = (lam[i] - lam[i - 1], lam[i + 1] - lam[i]);
            let second = 2.0 * ((e[i + 1] - e[i]) / h1 - (e[i] - e[i - 1]) / h0) / (h0 + h1);
            max_second_difference = max_second_difference.max(second * mean_spacing * mean_spacing);
        }
        let mean_mu = (lam[i] != 0.0).then(|| (lam_e[0] + integral) / lam[i]);
        let integral_rel_err = mean_mu.map(|m| ((m - e[i]) / e[i]).abs());
        points.push(RelationPoint {
            lambda: lam[i],
            e_min: e[i],
            mu_min: mu[i],
            d_lambda_e,
            derivative_rel_err,
            mean_mu,
            integral_rel_err,
            de_dlambda_rel_err,
            mu_minus_e: mu[i] - e[i],
        });
    }
    let max_of = |f: fn(&RelationPoint) -> Option<f64>| {
        points.iter().filter_map(f).fold(0.0, f64::max)
    };
    let report = RelationReport {
        tolerance,
        max_derivative_rel_err: max_of(|p| p.derivative_rel_err),
        max_integral_rel_err: max_of(|p| p.integral_rel_err),
        max_de_dlambda_rel_err: max_of(|p| p.de_dlambda_rel_err),
        min_mu_minus_e: points
            .iter()
            .filter(|p| p.lambda > 0.0)
            .map(|p| p.mu_minus_e)
            .fold(f64::INFINITY, f64::min),
        max_second_difference,
        increasing: e.windows(2).all(|w| w[1] > w[0]),
        points,
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    /// Gaussian decay rate in `phi ~ C exp(-k0 s^2 / 2)`.
    pub k0: f64,
    /// `ln C`.
    pub intercept: f64,
    /// RMS misfit of `ln phi`.
    pub fit_residual: f64,
}

/// Upper bound accepted for the fitted decay rate.
pub const DECAY_RATE_MAX: f64 = 1.05;

/// Least-squares fit of `ln phi(s)` against `-s^2/2` on `s in [0.6 L, 0.9 L]`.
pub fn fit_tail_decay(result: &GroundStateResult) -> Result<TailFit> {
    fit_tail_decay_window(result, 0.6, 0.9)
}

pub fn fit_tail_decay_window(result: &GroundStateResult, from: f64, to: f64) -> Result<TailFit> {
    let grid = result.phi.grid();
    let l = grid.half_width();
    let phi = result.phi.real_parts();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (j, &v) in phi.iter().enumerate().skip(grid.centre()) {
        let s = grid.node(j);
        if s < from * l || s > to * l {
            continue;
        }
        if !(v > 1e-300) {
            return Err(Error::TailUnderflow { s });
        }
        xs.push(-0.5 * s * s);
        ys.push(v.ln());
    }
    if xs.len() < 2 {
        return Err(Error::Precondition("tail window holds fewer than two nodes".into()));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let k0 = sxy / sxx;
    let intercept = my - k0 * mx;
    let fit_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - k0 * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    if !(k0 > 0.0 && k0 <= DECAY_RATE_MAX) {
        return Err(Error::DecayRate {
            k0,
            upper: DECAY_RATE_MAX,
        });
    }
    Ok(TailFit {
        k0,
        intercept,
        fit_residual,
    })
}

//! Time propagation of `i v_t = -v'' + s^2 v + C_omega f_lambda(|v|) v` and
//! orbital-stability experiments around a ground state.
//!
//! The integrator is Strang splitting: the potential part is a pointwise phase
//! (exact, since it leaves `|v|` unchanged) and the kinetic part is a Fourier
//! multiplier on the periodic extension of `[-L, L]`.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::ground::GroundStateResult;
use crate::model::{self, ModelParams, Wavefunction, EPS_POS};

/// Mass near the boundary above which the periodic extension is suspect.
pub const TAIL_MASS_WARN: f64 = 1e-8;

/// Fraction of the half width treated as "boundary" when measuring tail mass.
const TAIL_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    StrangSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagatorOptions {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Steps between recorded samples; the final time is always recorded.
    pub record_every: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            dt: 1e-3,
            t_final: 10.0,
            scheme: Scheme::StrangSplit,
            record_every: 100,
        }
    }
}

impl PropagatorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::invalid(
                "t_final",
                format!("must be positive, got {}", self.t_final),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be positive"));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken, so that they land on `t_final`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub charge: Vec<f64>,
    pub energy: Vec<f64>,
    /// Distance to the orbit `{e^{i theta} phi}` of the reference state.
    pub orbital_distance: Vec<f64>,
    /// Largest mass found within 5% of the half width from either end.
    pub max_tail_mass: f64,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_charge_drift(&self) -> f64 {
        max_relative_drift(&self.charge)
    }

    pub fn max_energy_drift(&self) -> f64 {
        max_relative_drift(&self.energy)
    }

    pub fn max_orbital_distance(&self) -> f64 {
        self.orbital_distance.iter().copied().fold(0.0, f64::max)
    }
}

fn max_relative_drift(series: &[f64]) -> f64 {
    match series.first() {
        Some(&first) => series
            .iter()
            .map(|v| ((v - first) / first).abs())
            .fold(0.0, f64::max),
        None => 0.0,
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub record: TrajectoryRecord,
    pub final_state: Wavefunction,
}

/// `inf_theta ||v - e^{i theta} phi||_X`, attained at `theta* = arg <v, phi>_X`.
pub fn orbital_distance(v: &Wavefunction, phi: &Wavefunction) -> Result<f64> {
    let overlap = model::x_inner(phi, v)?;
    let rotation = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    // evaluating the norm at theta* avoids the cancellation in
    // ||v||^2 + ||phi||^2 - 2 |<v, phi>|
    let diff: Vec<Complex64> = v
        .values()
        .iter()
        .zip(phi.values())
        .map(|(a, b)| a - rotation * b)
        .collect();
    Ok(model::x_norm(&Wavefunction::new(*v.grid(), diff)?).max(0.0))
}

struct SplitStep {
    dt: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    scratch: Vec<Complex64>,
    potential: Vec<f64>,
    nodes: Vec<f64>,
}

impl SplitStep {
    fn new(grid: &Grid, dt: f64) -> Self {
        // nodes 0..n-1 sample one period; the last node repeats the first
        let m = grid.n_points() - 1;
        let period = 2.0 * grid.half_width();
        let norm = 1.0 / m as f64;
        let kinetic = (0..m)
            .map(|j| {
                let idx = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
                let k = 2.0 * PI * idx / period;
                Complex64::from_polar(norm, -dt * k * k)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let nodes = grid.nodes();
        let potential = nodes.iter().map(|s| s * s).collect();
        SplitStep {
            dt,
            fft,
            ifft,
            kinetic,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            potential,
            nodes,
        }
    }

    fn potential_half(&self, v: &mut [Complex64], params: &ModelParams) -> Result<()> {
        let half = 0.5 * self.dt;
        let (lambda, c) = (params.lambda, params.c_omega);
        for (j, z) in v.iter_mut().enumerate() {
            let rho_sq = z.norm_sqr();
            let r = 1.0 + 2.0 * lambda * rho_sq;
            if !(r > EPS_POS) {
                return Err(Error::ModelValidity { s: self.nodes[j], value: r });
            }
            let f = (1.0 + 3.0 * lambda * rho_sq) / r.sqrt();
            *z *= Complex64::from_polar(1.0, -half * (self.potential[j] + c * f));
        }
        Ok(())
    }

    fn kinetic_full(&mut self, v: &mut [Complex64]) {
        let m = v.len() - 1;
        let period = &mut v[..m];
        self.fft.process_with_scratch(period, &mut self.scratch);
        for (z, k) in period.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.ifft.process_with_scratch(period, &mut self.scratch);
        v[m] = v[0];
    }

    fn step(&mut self, v: &mut [Complex64], params: &ModelParams) -> Result<()> {
        self.potential_half(v, params)?;
        self.kinetic_full(v);
        self.potential_half(v, params)
    }
}

fn tail_mass(psi: &Wavefunction) -> f64 {
    let grid = psi.grid();
    let edge = (1.0 - TAIL_FRACTION) * grid.half_width();
    let h = grid.spacing();
    psi.values()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.node(*j).abs() >= edge)
        .map(|(_, z)| z.norm_sqr() * h)
        .sum()
}

/// Propagates `v0` to `opts.t_final`, recording charge, energy and the orbital
/// distance to `reference` (to `v0` itself when `None`).
pub fn propagate(
    v0: &Wavefunction,
    params: &ModelParams,
    opts: &PropagatorOptions,
    reference: Option<&Wavefunction>,
) -> Result<Propagation> {
    opts.validate()?;
    let reference = reference.unwrap_or(v0);
    v0.same_grid(reference)?;
    let q0 = model::charge(v0);
    if !q0.is_finite() {
        return Err(Error::Precondition("initial charge is not finite".into()));
    }
    model::check_validity(v0, params)?;

    let (n_steps, dt) = opts.steps();
    let mut stepper = SplitStep::new(v0.grid(), dt);
    let mut state = v0.clone();
    {
        // periodic identification of the two end nodes
        let v = state.values_mut();
        let last = v.len() - 1;
        v[last] = v[0];
    }
    let mut record = TrajectoryRecord::default();
    let mut warned = false;
    let mut sample = |state: &Wavefunction, t: f64, record: &mut TrajectoryRecord| -> Result<()> {
        record.times.push(t);
        record.charge.push(model::charge(state));
        record.energy.push(model::energy(state, params)?);
        record.orbital_distance.push(orbital_distance(state, reference)?);
        let tail = tail_mass(state);
        record.max_tail_mass = record.max_tail_mass.max(tail);
        if tail > TAIL_MASS_WARN && !warned {
            warned = true;
            warn!("mass {tail:e} near the boundary at t = {t}; periodic wrap-around may alias");
        }
        Ok(())
    };
    sample(&state, 0.0, &mut record)?;
    for step in 1..=n_steps {
        stepper.step(state.values_mut(), params)?;
        if step % opts.record_every == 0 || step == n_steps {
            sample(&state, step as f64 * dt, &mut record)?;
        }
    }
    Ok(Propagation {
        record,
        final_state: state,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationShape {
    /// `s exp(-s^2/2)`, odd.
    #[default]
    Hermite1,
    /// `(2 s^2 - 1) exp(-s^2/2)`, even.
    Hermite2,
}

impl PerturbationShape {
    /// The mode scaled to unit X-norm on `grid`.
    pub fn mode(self, grid: Grid) -> Wavefunction {
        let raw = match self {
            PerturbationShape::Hermite1 => Wavefunction::from_fn(grid, |s| s * (-0.5 * s * s).exp()),
            PerturbationShape::Hermite2 => {
                Wavefunction::from_fn(grid, |s| (2.0 * s * s - 1.0) * (-0.5 * s * s).exp())
            }
        };
        let norm = model::x_norm(&raw);
        raw.scaled(Complex64::new(1.0 / norm, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityConfig {
    /// X-norm size of the perturbation.
    pub delta: f64,
    pub shape: PerturbationShape,
    /// Rescale the perturbed state back to unit charge.
    pub renormalize: bool,
    pub propagator: PropagatorOptions,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            delta: 1e-2,
            shape: PerturbationShape::Hermite1,
            renormalize: false,
            propagator: PropagatorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub delta: f64,
    pub initial_distance: f64,
    pub max_orbital_distance: f64,
    pub trajectory: TrajectoryRecord,
}

pub fn perturbed_state(ground: &GroundStateResult, config: &StabilityConfig) -> Result<Wavefunction> {
    if !(config.delta.is_finite() && config.delta >= 0.0) {
        return Err(Error::invalid(
            "delta",
            format!("must be nonnegative, got {}", config.delta),
        ));
    }
    let mode = config.shape.mode(*ground.phi.grid());
    let values = ground
        .phi
        .values()
        .iter()
        .zip(mode.values())
        .map(|(p, m)| p + config.delta * m)
        .collect();
    let mut v = Wavefunction::new(*ground.phi.grid(), values)?;
    if config.renormalize {
        let q = model::charge(&v);
        v = v.scaled(Complex64::new(1.0 / q.sqrt(), 0.0));
    }
    Ok(v)
}

/// Perturbs the ground state, propagates, and reports the largest recorded
/// distance to the ground-state orbit.
pub fn stability_experiment(
    ground: &GroundStateResult,
    config: &StabilityConfig,
) -> Result<StabilityReport> {
    let v0 = perturbed_state(ground, config)?;
    let run = propagate(&v0, &ground.params, &config.propagator, Some(&ground.phi))?;
    Ok(StabilityReport {
        delta: config.delta,
        initial_distance: run.record.orbital_distance[0],
        max_orbital_distance: run.record.max_orbital_distance(),
        trajectory: run.record,
    })
}

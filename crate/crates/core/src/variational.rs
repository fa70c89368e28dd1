//! Gaussian trial family `psi_k(s) = (k/pi)^{1/4} exp(-k s^2 / 2)`: Taylor
//! coefficients of the nonlinear energy, the truncated stationarity equation
//! for the width `k(lambda)`, and the approximate energy and chemical
//! potential evaluated by quadrature.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, EPS_POS};
use crate::quadrature;

/// Largest supported truncation order (factorials stay finite in `f64`).
pub const MAX_ORDER: usize = 60;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 6;

/// Upper end of the width scan in [`solve_kappa_root`].
pub const KAPPA_MAX: f64 = 10.0;

const QUAD_ABS_TOL: f64 = 1e-10;
const QUAD_REL_TOL: f64 = 1e-13;

/// `a_n = (-1)^n / n! * (2n-4)!/(n-2)! * sqrt(n) / 2^{n-2} * pi^{-(n-1)/2}`.
pub fn taylor_coefficient(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", format!("Taylor index must be at least 2, got {n}")));
    }
    if n > MAX_ORDER {
        return Err(Error::invalid("n", format!("Taylor index above {MAX_ORDER}")));
    }
    // (2n-4)!/(n-2)! = (n-1)(n)...(2n-4)
    let rising: f64 = (n - 1..=2 * n - 4).map(|k| k as f64).product();
    let factorial: f64 = (2..=n).map(|k| k as f64).product();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * rising / factorial * (n as f64).sqrt() / 2f64.powi(n as i32 - 2)
        * PI.powf(-((n - 1) as f64) / 2.0))
}

/// Normalized Gaussian trial state of width parameter `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTrial {
    kappa: f64,
}

impl GaussianTrial {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid("kappa", format!("must be positive, got {kappa}")));
        }
        Ok(GaussianTrial { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn value(&self, s: f64) -> f64 {
        (self.kappa / PI).powf(0.25) * (-0.5 * self.kappa * s * s).exp()
    }

    /// Peak density `psi_k(0)^2 = sqrt(k / pi)`.
    pub fn peak_density(&self) -> f64 {
        (self.kappa / PI).sqrt()
    }

    /// Kinetic plus potential energy, `(k + 1/k) / 2`.
    pub fn quadratic_energy(&self) -> f64 {
        0.5 * (self.kappa + 1.0 / self.kappa)
    }

    /// The Taylor expansion of the energy converges for `k < pi / (4 lambda^2)`.
    pub fn in_convergence_domain(&self, lambda: f64) -> bool {
        lambda == 0.0 || self.kappa < PI / (4.0 * lambda * lambda)
    }

    fn integrate(&self, lambda: f64, integrand: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let rad = 1.0 + 2.0 * lambda * self.peak_density();
        if rad < EPS_POS {
            return Err(Error::ModelValidity { s: 0.0, value: rad });
        }
        let half = 12.0 / self.kappa.sqrt();
        let r = quadrature::integrate(
            |s| {
                let rho_sq = self.value(s).powi(2);
                integrand(rho_sq, (1.0 + 2.0 * lambda * rho_sq).sqrt())
            },
            -half,
            half,
            QUAD_ABS_TOL,
            QUAD_REL_TOL,
        )?;
        Ok(r.value)
    }
}

/// Truncated stationarity condition `2 k^2 dE/dk = 0`, written as `f(lambda, k) = 1` with
///
/// ```text
/// f(lambda, k) = k^2 + C_omega sum_{n=2}^{order} (n-1) a_n lambda^{n-1} k^{(n+1)/2}
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaEquation {
    pub order: usize,
    pub c_omega: f64,
    /// Use `lambda^3` instead of `lambda^5` on the order-6 term, reproducing
    /// the printed form of the equation.
    pub legacy_lambda_cubed: bool,
    #[serde(skip)]
    coefficients: [f64; MAX_ORDER + 1],
}

impl Default for KappaEquation {
    fn default() -> Self {
        KappaEquation::new(DEFAULT_ORDER, 1.0).expect("default order is valid")
    }
}

impl KappaEquation {
    pub fn new(order: usize, c_omega: f64) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(Error::invalid("order", format!("must lie in 2..={MAX_ORDER}, got {order}")));
        }
        if !(c_omega.is_finite() && c_omega > 0.0) {
            return Err(Error::invalid("c_omega", format!("must be positive, got {c_omega}")));
        }
        let mut coefficients = [0.0; MAX_ORDER + 1];
        for (n, c) in coefficients.iter_mut().enumerate().take(order + 1).skip(2) {
            *c = taylor_coefficient(n)?;
        }
        Ok(KappaEquation {
            order,
            c_omega,
            legacy_lambda_cubed: false,
            coefficients,
        })
    }

    pub fn with_legacy_lambda_cubed(mut self, on: bool) -> Self {
        self.legacy_lambda_cubed = on;
        self
    }

    fn lambda_power(&self, n: usize) -> i32 {
        if self.legacy_lambda_cubed && n == 6 {
            3
        } else {
            n as i32 - 1
        }
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64, i32)> + '_ {
        (2..=self.order).map(move |n| (n, (n - 1) as f64 * self.coefficients[n], self.lambda_power(n)))
    }

    pub fn value(&self, lambda: f64, kappa: f64) -> f64 {
        let series: f64 = self
            .terms()
            .map(|(n, c, p)| c * lambda.powi(p) * kappa.powf((n + 1) as f64 / 2.0))
            .sum();
        kappa * kappa + self.c_omega * series
    }

    pub fn d_dkappa(&self, lambda: f64, kappa: f64) -> f64 {
        let series: f64 = self
            .terms()
            .map(|(n, c, p)| {
                c * lambda.powi(p) * (n + 1) as f64 / 2.0 * kappa.powf((n - 1) as f64 / 2.0)
            })
            .sum();
        2.0 * kappa + self.c_omega * series
    }

    pub fn d_dlambda(&self, lambda: f64, kappa: f64) -> f64 {
        let series: f64 = self
            .terms()
            .map(|(n, c, p)| c * p as f64 * lambda.powi(p - 1) * kappa.powf((n + 1) as f64 / 2.0))
            .sum();
        self.c_omega * series
    }

    /// Order-`order` Taylor value of the energy of `psi_kappa`,
    /// `(k + 1/k)/2 + C_omega (1 + sum a_n lambda^{n-1} k^{(n-1)/2})`.
    pub fn taylor_energy(&self, lambda: f64, kappa: f64) -> f64 {
        let series: f64 = (2..=self.order)
            .map(|n| {
                self.coefficients[n]
                    * lambda.powi(self.lambda_power(n))
                    * kappa.powf((n - 1) as f64 / 2.0)
            })
            .sum();
        0.5 * (kappa + 1.0 / kappa) + self.c_omega * (1.0 + series)
    }
}

/// Order-6 stationarity function at `C_omega = 1`.
pub fn root_function(lambda: f64, kappa: f64) -> f64 {
    KappaEquation::default().value(lambda, kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaRoot {
    pub kappa: f64,
    pub in_convergence_domain: bool,
}

/// Smallest root of `f(lambda, k) = 1` in `(0, KAPPA_MAX]`: a uniform scan
/// for the first sign change, bisection, then Newton polishing to `1e-12`.
pub fn solve_kappa_root(eq: &KappaEquation, lambda: f64) -> Result<KappaRoot> {
    const SCAN: usize = 10_000;
    let g = |k: f64| eq.value(lambda, k) - 1.0;
    let mut lo = 0.0;
    let mut g_lo: f64 = -1.0;
    let mut hi = None;
    let mut scan_max = f64::NEG_INFINITY;
    for i in 1..=SCAN {
        let k = KAPPA_MAX * i as f64 / SCAN as f64;
        let v = g(k);
        scan_max = scan_max.max(v + 1.0);
        if v == 0.0 {
            return Ok(root(k, lambda));
        }
        if v.signum() != g_lo.signum() {
            hi = Some(k);
            break;
        }
        lo = k;
        g_lo = v;
    }
    let mut hi = hi.ok_or(Error::NoBracket {
        lambda,
        kappa_max: KAPPA_MAX,
        scan_max,
    })?;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut k = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = g(k) / eq.d_dkappa(lambda, k);
        let next = k - step;
        // keep Newton inside the bracket; bisect otherwise
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if g(next).signum() == g_lo.signum() {
            lo = next;
        } else {
            hi = next;
        }
        let done = (next - k).abs() < 1e-14 * k.max(1.0);
        k = next;
        if done || hi - lo < 1e-12 {
            break;
        }
    }
    Ok(root(k, lambda))
}

fn root(kappa: f64, lambda: f64) -> KappaRoot {
    KappaRoot {
        kappa,
        in_convergence_domain: GaussianTrial { kappa }.in_convergence_domain(lambda),
    }
}

/// Integrates `dk/dlambda = -(df/dlambda) / (df/dk)`, `k(0) = 1`, with classic
/// RK4 from 0 to `lambda_max` (either sign) in `steps` steps.
pub fn solve_kappa_ode(eq: &KappaEquation, lambda_max: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    let mut path = vec![(0.0, 1.0)];
    if lambda_max == 0.0 || steps == 0 {
        return Ok(path);
    }
    let h = lambda_max / steps as f64;
    let rhs = |lambda: f64, kappa: f64| -> Result<f64> {
        let dk = eq.d_dkappa(lambda, kappa);
        if !(kappa > 0.0) || !dk.is_finite() || dk.abs() < 1e-12 {
            return Err(Error::DerivativeSingularity { lambda, kappa });
        }
        Ok(-eq.d_dlambda(lambda, kappa) / dk)
    };
    let (mut lambda, mut kappa) = (0.0, 1.0);
    for i in 0..steps {
        let k1 = rhs(lambda, kappa)?;
        let k2 = rhs(lambda + 0.5 * h, kappa + 0.5 * h * k1)?;
        let k3 = rhs(lambda + 0.5 * h, kappa + 0.5 * h * k2)?;
        let k4 = rhs(lambda + h, kappa + h * k3)?;
        kappa += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        lambda = (i + 1) as f64 * h;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::DerivativeSingularity { lambda, kappa });
        }
        path.push((lambda, kappa));
    }
    Ok(path)
}

/// `E(psi_k) = (k + 1/k)/2 + C_omega \int sqrt(1 + 2 lambda psi_k^2) psi_k^2` by adaptive quadrature.
pub fn energy_app(lambda: f64, kappa: f64, c_omega: f64) -> Result<f64> {
    let trial = GaussianTrial::new(kappa)?;
    let nonlinear = trial.integrate(lambda, |rho_sq, root| root * rho_sq)?;
    Ok(trial.quadratic_energy() + c_omega * nonlinear)
}

/// `E(psi_k) + C_omega lambda \int psi_k^4 / sqrt(1 + 2 lambda psi_k^2)`.
pub fn mu_app(lambda: f64, kappa: f64, c_omega: f64) -> Result<f64> {
    let trial = GaussianTrial::new(kappa)?;
    let correction = trial.integrate(lambda, |rho_sq, root| rho_sq * rho_sq / root)?;
    Ok(energy_app(lambda, kappa, c_omega)? + c_omega * lambda * correction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalResult {
    pub lambda: f64,
    pub kappa: f64,
    pub e_app: f64,
    pub mu_app: f64,
    pub order: usize,
    pub in_convergence_domain: bool,
}

/// Width from the truncated root equation, energy and chemical potential from
/// the exact Gaussian integrals at that width.
pub fn approximate(params: &ModelParams, order: usize) -> Result<VariationalResult> {
    let eq = KappaEquation::new(order, params.c_omega)?;
    approximate_with(&eq, params.lambda)
}

pub fn approximate_with(eq: &KappaEquation, lambda: f64) -> Result<VariationalResult> {
    let root = solve_kappa_root(eq, lambda)?;
    Ok(VariationalResult {
        lambda,
        kappa: root.kappa,
        e_app: energy_app(lambda, root.kappa, eq.c_omega)?,
        mu_app: mu_app(lambda, root.kappa, eq.c_omega)?,
        order: eq.order,
        in_convergence_domain: root.in_convergence_domain,
    })
}

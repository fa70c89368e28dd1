//! Generalized Thomas-Fermi approximation for large repulsive `lambda`.
//!
//! Dropping the kinetic term reduces the stationary equation to
//! `f_lambda(phi) = (mu - s^2) / C_omega`. Since `f_lambda(rho) = h(sqrt(1 + 2 lambda rho^2))`
//! with `h(eta) = (3 eta - 1/eta) / 2`, the density follows algebraically; two
//! simplifications of it give scalar equations for `mu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature;

/// `\int_0^1 (1 - u^2)^2 du`.
pub const PROFILE_INTEGRAL: f64 = 8.0 / 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TfVariant {
    /// `1 + 2 lambda phi^2 = (4 mu^2 / 9 C^2)(1 - s^2/mu)^2 + 1/3`
    First,
    /// Same with `+ 2/3`.
    Second,
}

impl TfVariant {
    /// Additive constant on the right-hand side of the density relation.
    pub fn offset(self) -> f64 {
        match self {
            TfVariant::First => 1.0 / 3.0,
            TfVariant::Second => 2.0 / 3.0,
        }
    }
}

/// `h(eta) = (3 eta - 1/eta) / 2`.
pub fn h(eta: f64) -> f64 {
    0.5 * (3.0 * eta - 1.0 / eta)
}

/// Inverse of [`h`] on `eta > 0`: `(xi + sqrt(xi^2 + 3)) / 3`.
pub fn h_inverse(xi: f64) -> f64 {
    if xi >= 0.0 {
        (xi + (xi * xi + 3.0).sqrt()) / 3.0
    } else {
        // rationalized to avoid cancellation for large negative xi
        1.0 / (xi.abs() + (xi * xi + 3.0).sqrt())
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("mu", format!("must be positive, got {mu}")))
    }
}

fn check_repulsive(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "lambda",
            format!("Thomas-Fermi regime needs lambda > 0, got {lambda}"),
        ))
    }
}

/// Density before clamping; negative near the edge of the support, zero outside it.
pub fn tf_density_unclamped(
    s: f64,
    mu: f64,
    params: &ModelParams,
    variant: TfVariant,
) -> Result<f64> {
    check_mu(mu)?;
    check_repulsive(params.lambda)?;
    if s * s > mu {
        return Ok(0.0);
    }
    let c = params.c_omega;
    let shape = 1.0 - s * s / mu;
    let rhs = 4.0 * mu * mu / (9.0 * c * c) * shape * shape + variant.offset();
    Ok((rhs - 1.0) / (2.0 * params.lambda))
}

/// Approximate density `phi(s)^2`, clamped at zero and vanishing for `|s| > sqrt(mu)`.
pub fn tf_density(s: f64, mu: f64, params: &ModelParams, variant: TfVariant) -> Result<f64> {
    tf_density_unclamped(s, mu, params, variant).map(|d| d.max(0.0))
}

fn scalar_equation(mu: f64, lambda: f64, c_omega: f64, variant: TfVariant) -> (f64, f64) {
    let a = 4.0 * PROFILE_INTEGRAL / (9.0 * c_omega * c_omega);
    let b = 1.0 - variant.offset();
    let root = mu.sqrt();
    let value = a * mu * mu * root - b * root - lambda;
    let slope = 2.5 * a * mu * root - 0.5 * b / root;
    (value, slope)
}

/// Solves `(4 mu^2 sqrt(mu) / 9 C^2)(8/15) - (1 - c) sqrt(mu) = lambda`, `c` the
/// variant offset, by bracketed Newton.
///
/// The left side dips below zero for small `mu` and is increasing past its
/// minimum, so the bracket starts there and only the physical root is reachable.
pub fn solve_mu_tf(lambda: f64, c_omega: f64, variant: TfVariant) -> Result<f64> {
    check_repulsive(lambda)?;
    if !(c_omega.is_finite() && c_omega > 0.0) {
        return Err(Error::invalid(
            "c_omega",
            format!("must be positive, got {c_omega}"),
        ));
    }
    let a = 4.0 * PROFILE_INTEGRAL / (9.0 * c_omega * c_omega);
    let b = 1.0 - variant.offset();
    let mut lo = (b / (5.0 * a)).sqrt();
    let mut hi = (0.5 * (lambda / a).powf(0.4)).max(1.0).max(lo);
    while scalar_equation(hi, lambda, c_omega, variant).0 <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (value, slope) = scalar_equation(mu, lambda, c_omega, variant);
        if value == 0.0 {
            return Ok(mu);
        }
        if value < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu - value / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let scale = 1e-12 * mu.max(1.0);
        if (next - mu).abs() <= scale || hi - lo <= scale {
            return Ok(next);
        }
        mu = next;
    }
    Ok(mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfResult {
    pub lambda: f64,
    pub c_omega: f64,
    pub mu_first: f64,
    pub mu_second: f64,
}

impl TfResult {
    pub fn mu(&self, variant: TfVariant) -> f64 {
        match variant {
            TfVariant::First => self.mu_first,
            TfVariant::Second => self.mu_second,
        }
    }
}

pub fn thomas_fermi(params: &ModelParams) -> Result<TfResult> {
    Ok(TfResult {
        lambda: params.lambda,
        c_omega: params.c_omega,
        mu_first: solve_mu_tf(params.lambda, params.c_omega, TfVariant::First)?,
        mu_second: solve_mu_tf(params.lambda, params.c_omega, TfVariant::Second)?,
    })
}

/// `\int phi^2 ds` over `[-sqrt(mu), sqrt(mu)]` of the clamped or unclamped density.
pub fn tf_charge(mu: f64, params: &ModelParams, variant: TfVariant, clamp: bool) -> Result<f64> {
    check_mu(mu)?;
    check_repulsive(params.lambda)?;
    let edge = mu.sqrt();
    let density = |s: f64| {
        let d = tf_density_unclamped(s, mu, params, variant).unwrap_or(0.0);
        if clamp {
            d.max(0.0)
        } else {
            d
        }
    };
    let mut breaks = vec![-edge, 0.0, edge];
    if clamp {
        // kinks where the clamped density reaches zero
        let c = params.c_omega;
        let shape = ((1.0 - variant.offset()) * 9.0 * c * c / (4.0 * mu * mu)).sqrt();
        if shape < 1.0 {
            let s = (mu * (1.0 - shape)).sqrt();
            breaks.extend([-s, s]);
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += quadrature::integrate(density, w[0], w[1], 1e-13, 1e-14)?.value;
        }
    }
    Ok(total)
}

/// Quadrature value of [`PROFILE_INTEGRAL`].
pub fn profile_integral_by_quadrature() -> Result<f64> {
    quadrature::integrate(|u| (1.0 - u * u).powi(2), 0.0, 1.0, 1e-15, 0.0).map(|r| r.value)
}

/// Densities at one point: both approximations next to the un-simplified
/// relation `sqrt(1 + 2 lambda phi^2) = h^{-1}((mu - s^2) / C_omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileComparison {
    pub s: f64,
    pub first: f64,
    pub second: f64,
    pub unsimplified: f64,
}

pub fn compare_profiles(s: f64, mu: f64, params: &ModelParams) -> Result<ProfileComparison> {
    let first = tf_density(s, mu, params, TfVariant::First)?;
    let second = tf_density(s, mu, params, TfVariant::Second)?;
    let unsimplified = if s * s > mu {
        0.0
    } else {
        let eta = h_inverse((mu - s * s) / params.c_omega);
        ((eta * eta - 1.0) / (2.0 * params.lambda)).max(0.0)
    };
    Ok(ProfileComparison {
        s,
        first,
        second,
        unsimplified,
    })
}

//! Functional forms of the dimensionless model: the nonlinearity `f_lambda`,
//! its primitive `G_lambda`, and the charge, energy, chemical potential and
//! stationary residual of grid-sampled wavefunctions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Lower bound enforced on `1 + 2 lambda rho^2` at every evaluation.
pub const EPS_POS: f64 = 1e-10;

/// Charge tolerance for formulas that assume a normalized state.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Deserialize)]
struct RawModelParams {
    lambda: f64,
    c_omega: f64,
}

/// Interaction strength `lambda` and transverse coupling `C_omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams")]
pub struct ModelParams {
    pub lambda: f64,
    pub c_omega: f64,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawModelParams) -> Result<Self> {
        ModelParams::new(raw.lambda, raw.c_omega)
    }
}

impl ModelParams {
    pub fn new(lambda: f64, c_omega: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda", "must be finite"));
        }
        if !(c_omega.is_finite() && c_omega > 0.0) {
            return Err(Error::invalid("c_omega", format!("must be positive, got {c_omega}")));
        }
        Ok(ModelParams { lambda, c_omega })
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        ModelParams::new(lambda, self.c_omega)
    }

    /// `1 + 2 lambda rho^2`, rejected when below [`EPS_POS`].
    #[inline]
    fn radicand(&self, rho_sq: f64) -> std::result::Result<f64, f64> {
        let v = 1.0 + 2.0 * self.lambda * rho_sq;
        if v >= EPS_POS {
            Ok(v)
        } else {
            Err(v)
        }
    }
}

/// Physical inputs in SI units. `alpha` and `gamma` are model constants
/// supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub m: f64,
    pub omega1: f64,
    pub omega_perp: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// s-wave scattering length in meters; negative for attractive interactions.
    pub a: f64,
    pub n_atoms: u64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hbar", self.hbar),
            ("m", self.m),
            ("omega1", self.omega1),
            ("omega_perp", self.omega_perp),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("must be positive, got {v}")));
            }
        }
        if !self.a.is_finite() {
            return Err(Error::invalid("a", "must be finite"));
        }
        if self.n_atoms == 0 {
            return Err(Error::invalid("n_atoms", "must be positive"));
        }
        Ok(())
    }

    /// Axial oscillator length `sqrt(hbar / (m omega1))`.
    pub fn oscillator_length(&self) -> f64 {
        (self.hbar / (self.m * self.omega1)).sqrt()
    }
}

/// Reduces physical parameters to `(lambda, C_omega)` with
/// `lambda = gamma a N / l0` and `C_omega = 2 omega_perp alpha / omega1`.
pub fn dimensionless_from_physical(p: &PhysicalParams) -> Result<ModelParams> {
    p.validate()?;
    let l0 = p.oscillator_length();
    let lambda = p.gamma * p.a * p.n_atoms as f64 / l0;
    let c_omega = 2.0 * p.omega_perp * p.alpha / p.omega1;
    ModelParams::new(lambda, c_omega)
}

// pointwise evaluations carry no grid position
fn domain_error(value: f64) -> Error {
    Error::ModelValidity { s: f64::NAN, value }
}

/// `f_lambda(rho) = (1 + 3 lambda rho^2) / sqrt(1 + 2 lambda rho^2)`.
pub fn f_lambda(rho: f64, params: &ModelParams) -> Result<f64> {
    let rho_sq = rho * rho;
    let r = params.radicand(rho_sq).map_err(domain_error)?;
    Ok((1.0 + 3.0 * params.lambda * rho_sq) / r.sqrt())
}

/// `G_lambda(rho) = sqrt(1 + 2 lambda rho^2) rho^2`, with `G' = 2 f_lambda rho`.
pub fn g_lambda(rho: f64, params: &ModelParams) -> Result<f64> {
    let rho_sq = rho * rho;
    let r = params.radicand(rho_sq).map_err(domain_error)?;
    Ok(r.sqrt() * rho_sq)
}

/// Samples on a [`Grid`]. Real states are stored with zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Wavefunction { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Wavefunction::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(|s| Complex64::new(f(s), 0.0)).collect();
        Wavefunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Wavefunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    /// Ground state of the harmonic oscillator, `pi^{-1/4} exp(-s^2/2)`.
    pub fn harmonic_ground(grid: Grid) -> Self {
        let c = std::f64::consts::PI.powf(-0.25);
        Wavefunction::from_fn(grid, |s| c * (-0.5 * s * s).exp())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Wavefunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub(crate) fn same_grid(&self, other: &Wavefunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// `Q = \int |psi|^2` by the trapezoidal rule.
pub fn charge(psi: &Wavefunction) -> f64 {
    psi.grid.trapezoid(&psi.density())
}

/// Discrete Dirichlet form `h sum conj(psi_j) (-D psi)_j`, the grid analogue
/// of `\int |psi'|^2`.
pub fn kinetic_energy(psi: &Wavefunction) -> f64 {
    x_form(psi.grid(), psi.values(), psi.values(), false).re
}

/// `<u, w>_X = \int (conj(u') w' + s^2 conj(u) w)` (conjugate-linear in `u`).
pub fn x_inner(u: &Wavefunction, w: &Wavefunction) -> Result<Complex64> {
    u.same_grid(w)?;
    Ok(x_form(u.grid(), u.values(), w.values(), true))
}

pub fn x_norm(psi: &Wavefunction) -> f64 {
    x_form(psi.grid(), psi.values(), psi.values(), true).re.max(0.0).sqrt()
}

fn x_form(grid: &Grid, u: &[Complex64], w: &[Complex64], with_potential: bool) -> Complex64 {
    let mut acc = grid.dirichlet_form(u, w, |z: Complex64| z.conj());
    if with_potential {
        let n = grid.n_points();
        let (re, im): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|j| {
                let s = grid.node(j);
                let z = u[j].conj() * w[j] * (s * s);
                (z.re, z.im)
            })
            .unzip();
        acc += Complex64::new(grid.trapezoid(&re), grid.trapezoid(&im));
    }
    acc
}

/// Evaluates `map(s_j, rho_j^2, sqrt(1 + 2 lambda rho_j^2))` at every node,
/// enforcing the positivity guard.
fn map_nodes(
    psi: &Wavefunction,
    params: &ModelParams,
    mut map: impl FnMut(f64, f64, f64) -> f64,
) -> Result<Vec<f64>> {
    let grid = psi.grid();
    psi.values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let rho_sq = v.norm_sqr();
            let s = grid.node(j);
            let r = params
                .radicand(rho_sq)
                .map_err(|value| Error::ModelValidity { s, value })?;
            Ok(map(s, rho_sq, r.sqrt()))
        })
        .collect()
}

/// Checks the positivity guard at every node.
pub fn check_validity(psi: &Wavefunction, params: &ModelParams) -> Result<()> {
    map_nodes(psi, params, |_, _, _| 0.0).map(|_| ())
}

/// `E(psi) = \int |psi'|^2 + s^2 |psi|^2 + C_omega G_lambda(|psi|)`.
pub fn energy(psi: &Wavefunction, params: &ModelParams) -> Result<f64> {
    let c = params.c_omega;
    let local = map_nodes(psi, params, |s, rho_sq, root| s * s * rho_sq + c * root * rho_sq)?;
    Ok(kinetic_energy(psi) + psi.grid.trapezoid(&local))
}

/// Gradient of [`energy`] for real states with respect to the trapezoid
/// inner product: `2(-psi'' + s^2 psi + C_omega f_lambda(|psi|) psi)`.
pub fn energy_gradient(psi: &[f64], grid: &Grid, params: &ModelParams) -> Result<Vec<f64>> {
    let n = grid.n_points();
    let mut lap = vec![0.0; n];
    grid.apply_neg_laplacian(psi, &mut lap);
    let wf = Wavefunction::from_real(*grid, psi)?;
    let c = params.c_omega;
    let lambda = params.lambda;
    let pot = map_nodes(&wf, params, |s, rho_sq, root| {
        s * s + c * (1.0 + 3.0 * lambda * rho_sq) / root
    })?;
    Ok((0..n).map(|j| 2.0 * (lap[j] + pot[j] * psi[j])).collect())
}

/// Chemical potential `\int |psi'|^2 + s^2 |psi|^2 + C_omega f_lambda(|psi|) |psi|^2`.
pub fn chemical_potential(psi: &Wavefunction, params: &ModelParams) -> Result<f64> {
    let c = params.c_omega;
    let lambda = params.lambda;
    let local = map_nodes(psi, params, |s, rho_sq, root| {
        s * s * rho_sq + c * (1.0 + 3.0 * lambda * rho_sq) / root * rho_sq
    })?;
    Ok(kinetic_energy(psi) + psi.grid.trapezoid(&local))
}

/// Chemical potential via `E + C_omega lambda \int |psi|^4 / sqrt(1 + 2 lambda |psi|^2)`;
/// requires a normalized state.
pub fn chemical_potential_via_energy(psi: &Wavefunction, params: &ModelParams) -> Result<f64> {
    let q = charge(psi);
    if (q - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Precondition(format!(
            "state must be normalized, charge = {q}"
        )));
    }
    let correction = map_nodes(psi, params, |_, rho_sq, root| rho_sq * rho_sq / root)?;
    Ok(energy(psi, params)? + params.c_omega * params.lambda * psi.grid.trapezoid(&correction))
}

/// Both chemical potential forms side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemicalPotentialCheck {
    pub direct: f64,
    pub via_energy: f64,
}

impl ChemicalPotentialCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.via_energy).abs()
    }
}

pub fn chemical_potential_check(
    psi: &Wavefunction,
    params: &ModelParams,
) -> Result<ChemicalPotentialCheck> {
    let check = ChemicalPotentialCheck {
        direct: chemical_potential(psi, params)?,
        via_energy: chemical_potential_via_energy(psi, params)?,
    };
    if check.discrepancy() > NORMALIZATION_TOL {
        log::warn!(
            "chemical potential forms disagree: {} vs {}",
            check.direct,
            check.via_energy
        );
    }
    Ok(check)
}

#[derive(Debug, Clone)]
pub struct Residual {
    pub values: Wavefunction,
    pub norm: f64,
}

/// `r = -psi'' + s^2 psi + C_omega f_lambda(|psi|) psi - mu psi` on interior
/// nodes, zero on the boundary, with its L2 norm.
pub fn residual(psi: &Wavefunction, mu: f64, params: &ModelParams) -> Result<Residual> {
    let grid = *psi.grid();
    let n = grid.n_points();
    let mut lap = vec![Complex64::new(0.0, 0.0); n];
    grid.apply_neg_laplacian(psi.values(), &mut lap);
    let c = params.c_omega;
    let lambda = params.lambda;
    let pot = map_nodes(psi, params, |s, rho_sq, root| {
        s * s + c * (1.0 + 3.0 * lambda * rho_sq) / root - mu
    })?;
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n - 1 {
        r[j] = lap[j] + psi.values[j] * pot[j];
    }
    let values = Wavefunction { grid, values: r };
    let norm = charge(&values).sqrt();
    Ok(Residual { values, norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(lambda: f64, c_omega: f64) -> ModelParams {
        ModelParams::new(lambda, c_omega).unwrap()
    }

    #[test]
    fn f_lambda_examples() {
        for lambda in [-0.3, 0.0, 1.0, 7.5] {
            assert_eq!(f_lambda(0.0, &params(lambda, 1.0)).unwrap(), 1.0);
        }
        assert_eq!(f_lambda(1.0, &params(0.0, 1.0)).unwrap(), 1.0);
        assert_relative_eq!(f_lambda(1.0, &params(4.0, 1.0)).unwrap(), 13.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn g_lambda_examples() {
        assert_eq!(g_lambda(0.0, &params(3.0, 1.0)).unwrap(), 0.0);
        assert_eq!(g_lambda(0.7, &params(0.0, 1.0)).unwrap(), 0.7 * 0.7);
        assert_relative_eq!(g_lambda(1.0, &params(4.0, 1.0)).unwrap(), 3.0, max_relative = 1e-15);
    }

    #[test]
    fn attractive_domain_error() {
        let p = params(-1.0, 1.0);
        assert!(matches!(f_lambda(1.0, &p), Err(Error::ModelValidity { .. })));
        assert!(matches!(g_lambda(0.8, &p), Err(Error::ModelValidity { .. })));
        assert!(f_lambda(0.5, &p).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.0).is_err());
        assert!(ModelParams::new(f64::INFINITY, 1.0).is_err());
        assert!(ModelParams::new(-2.0, 0.5).is_ok());
    }

    #[test]
    fn charge_examples() {
        let grid = Grid::new(12.0, 2001).unwrap();
        assert_eq!(charge(&Wavefunction::zeros(grid)), 0.0);
        let phi = Wavefunction::harmonic_ground(grid);
        assert!((charge(&phi) - 1.0).abs() < 1e-10);
        let scaled = phi.scaled(Complex64::new(0.0, 1.7));
        assert_relative_eq!(charge(&scaled), 1.7 * 1.7 * charge(&phi), max_relative = 1e-14);
    }

    #[test]
    fn energy_of_harmonic_ground_state() {
        let grid = Grid::new(12.0, 4001).unwrap();
        let phi = Wavefunction::harmonic_ground(grid);
        let e = energy(&phi, &params(0.0, 1.0)).unwrap();
        assert!((e - 2.0).abs() < 1e-6, "{e}");
        assert_eq!(energy(&Wavefunction::zeros(grid), &params(2.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn chemical_potential_linear_case() {
        let grid = Grid::new(12.0, 4001).unwrap();
        let phi = Wavefunction::harmonic_ground(grid);
        let p = params(0.0, 1.0);
        let mu = chemical_potential(&phi, &p).unwrap();
        assert!((mu - 2.0).abs() < 1e-6);
        // lambda = 0: mu equals E for any state
        let other = Wavefunction::from_fn(grid, |s| (-(s - 0.5).powi(2)).exp() * 0.3);
        assert_relative_eq!(
            chemical_potential(&other, &p).unwrap(),
            energy(&other, &p).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn via_energy_requires_normalization() {
        let grid = Grid::new(12.0, 401).unwrap();
        let phi = Wavefunction::harmonic_ground(grid).scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(
            chemical_potential_via_energy(&phi, &params(1.0, 1.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn residual_of_exact_eigenfunction() {
        let grid = Grid::new(12.0, 4001).unwrap();
        let phi = Wavefunction::harmonic_ground(grid);
        let r = residual(&phi, 2.0, &params(0.0, 1.0)).unwrap();
        assert!(r.norm < 1e-4, "{}", r.norm);
        let z = residual(&Wavefunction::zeros(grid), 3.3, &params(1.0, 1.0)).unwrap();
        assert_eq!(z.norm, 0.0);
        assert_eq!(z.values.values()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn physical_reduction() {
        let base = PhysicalParams {
            hbar: 1.0,
            m: 1.0,
            omega1: 1.0,
            omega_perp: 1.0,
            alpha: 0.5,
            gamma: 1.0,
            a: 2.0,
            n_atoms: 1,
        };
        let p = dimensionless_from_physical(&base).unwrap();
        assert_relative_eq!(base.oscillator_length(), 1.0);
        assert_relative_eq!(p.lambda, 2.0);
        assert_relative_eq!(p.c_omega, 1.0);

        let zero_a = PhysicalParams { a: 0.0, omega1: 3.0, ..base };
        assert_eq!(dimensionless_from_physical(&zero_a).unwrap().lambda, 0.0);

        let bad = PhysicalParams { omega1: 0.0, ..base };
        assert!(matches!(
            dimensionless_from_physical(&bad),
            Err(Error::InvalidParameter { field: "omega1", .. })
        ));
    }

    #[test]
    fn x_norm_of_harmonic_ground_is_one() {
        // ||phi_1||_X^2 = \int phi'^2 + s^2 phi^2 = 1
        let grid = Grid::new(12.0, 2001).unwrap();
        let phi = Wavefunction::harmonic_ground(grid);
        assert!((x_norm(&phi) - 1.0).abs() < 1e-9);
    }
}

//! Ground states of a one-dimensional effective Gross-Pitaevskii model for
//! cigar-shaped condensates,
//!
//! ```text
//! -phi'' + s^2 phi + C_omega (1 + 3 lambda phi^2) / sqrt(1 + 2 lambda phi^2) phi = mu phi,
//! ```
//!
//! computed by constrained energy minimization and cross-checked against a
//! Gaussian variational family, a generalized Thomas-Fermi reduction, and
//! time propagation of the dynamical equation.

pub mod banded;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod ground;
pub mod model;
pub mod quadrature;
pub mod thomas_fermi;
pub mod variational;

pub use error::{Error, Result};
pub use grid::{Grid, Stencil};
pub use ground::{
    solve_ground_state, sweep_lambda, verify_mu_energy_relations, GroundStateResult,
    SolverOptions, SweepResult,
};
pub use dynamics::{
    orbital_distance, propagate, stability_experiment, PropagatorOptions, StabilityConfig,
    TrajectoryRecord,
};
pub use model::{ModelParams, PhysicalParams, Wavefunction};
pub use thomas_fermi::{solve_mu_tf, thomas_fermi, TfResult, TfVariant};
pub use variational::{approximate, KappaEquation, VariationalResult};

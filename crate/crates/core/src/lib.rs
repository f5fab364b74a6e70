//! Landscape-law numerics for tight-binding Hamiltonians H = -Delta + V on
//! periodic lattices (Z/KZ)^d: the integrated density of states N(mu), the
//! landscape box-counting function N_u(mu), two-sided comparison checks,
//! Anderson-ensemble statistics with Lifschitz-tail fits, and an executable
//! oracle suite for the discrete elliptic estimates behind them.

pub mod boxcount;
pub mod curve;
pub mod elliptic;
pub mod ensemble;
pub mod error;
pub mod landscape;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod potential;
pub mod rng;
pub mod spectrum;
pub mod verify;

pub use boxcount::{
    box_counting, box_counting_shifted, fit_scaling, lifschitz_fit, lifschitz_fit_excluding,
    lower_bound_check, nu_curve, s_of_mu, upper_bound_check, LawReport, LawRow, LowerConstants,
};
pub use curve::{default_mu_grid, log_grid, CountingCurve, CurveKind, CurveMeta};
pub use ensemble::{run_ensemble, tail_window, EnsembleConfig, EnsembleResult};
pub use error::{Error, Result};
pub use landscape::{
    scaling_constant, solve_landscape, solve_landscape_with, uncertainty_residual, LandscapeField,
    SolveMethod, SolveOptions,
};
pub use lattice::{cutoff, gradient, make_torus, partition, Cube, Partition, Torus};
pub use operator::{assemble, dual_vector, Hamiltonian};
pub use potential::{DistributionSpec, PotentialField};
pub use spectrum::{
    count_leq, count_leq_with, count_lt, count_lt_with, dual_identity_check, ids_curve,
    inertia_count_below, spectrum, CountOptions, Spectrum,
};
pub use verify::{run_battery, OracleOutcome};

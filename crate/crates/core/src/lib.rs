//! Fractional quantum mechanics of a particle above a reflecting floor in a
//! uniform gravitational field: Levy-flight kinetic term `D p^(2a)`,
//! fractional quantum numbers, auxiliary solutions, spectrum classification
//! and the first-order minimal-length correction.

pub mod error;
pub mod gup;
pub mod operators;
pub mod quadrature;
pub mod quantum;
pub mod scales;
pub mod solutions;
pub mod spectrum;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use gup::{gup_beta, gup_scale, gup_spectrum, verify_root_invariance, GupFormula, GupParams, GupScale};
pub use operators::{gl_derivative, gl_weights, residual_of, FracOrder, GridFunction, OperatorKind};
pub use quantum::{enumerate_roots, root_count, FractionalQuantumNumber, LevyIndex};
pub use scales::{d2alpha, particle_catalog, scale_params, ConstantsConfig, ParticleSpec, PhysicalConstants, ScaleParameters};
pub use solutions::{eval_y, eval_y_grid, verify_residual, ResidualOptions, SolutionSample, SolutionSpec};
pub use spectrum::{
    assemble_wavefunction, build_constraints, null_space_dim, spread_diagnostic, Classification, ConstraintSystem,
    SpectrumReport, WaveFunction,
};

pub use num_complex::Complex64;

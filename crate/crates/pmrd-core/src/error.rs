//! Error type shared by all modules.
//!
//! Variants mirror the failure modes of the numerical pipeline: bad inputs
//! (`Domain`, `Geometry`, `Config`), quadrature or root-finding breakdowns
//! (`Quadrature`, `RootFind`, `NoSolution`), stepper failures (`Stiffness`,
//! `Newton`, `BackwardRegime`), and set-operation edge cases (`EmptySet`).

use thiserror::Error;

/// Unified error for the core library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument lies outside the mathematically admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive quadrature failed to reach its requested tolerance.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A bracketed root solve failed to converge.
    #[error("root-finding error: {0}")]
    RootFind(String),

    /// A geometric precondition on layer positions is violated. The message
    /// names the first violated constraint.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A solve-for-parameter problem has no solution in the searched range.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The implicit stepper was driven below its minimum time step.
    #[error("stiffness error: dt fell below dt_min = {dt_min:.3e} at t = {t:.6e}")]
    Stiffness {
        /// Simulation time at which stepping failed.
        t: f64,
        /// Configured minimum time step.
        dt_min: f64,
    },

    /// Newton iteration kept diverging after the allowed number of dt halvings.
    #[error("newton error: no convergence after {halvings} dt halvings at t = {t:.6e}")]
    Newton {
        /// Simulation time at which the solve failed.
        t: f64,
        /// Number of dt halvings attempted.
        halvings: u32,
    },

    /// A cell gradient entered the backward diffusion regime
    /// (`eps^2 |u_x| > kappa`) under the `Error` policy.
    #[error(
        "backward-regime error: eps^2 |du/dx| = {s:.6e} > kappa = {kappa:.6e} in cell {cell} at t = {t:.6e}"
    )]
    BackwardRegime {
        /// Simulation time of the offending step.
        t: f64,
        /// Cell index (between nodes `cell` and `cell + 1`).
        cell: usize,
        /// Scaled gradient magnitude that exceeded `kappa`.
        s: f64,
        /// Forward-regime threshold of the flux.
        kappa: f64,
    },

    /// A set operation that requires non-empty inputs received an empty set.
    #[error("empty set: {0}")]
    EmptySet(String),

    /// A configuration file could not be parsed or is missing required keys.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure while reading or writing run artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CoreError {
    /// Process exit code the CLI maps this error to (2 = config error,
    /// 3 = numerical failure).
    pub fn exit_code(&self) -> i32 {
        match self {
            CoreError::Config(_) | CoreError::Io(_) => 2,
            _ => 3,
        }
    }
}

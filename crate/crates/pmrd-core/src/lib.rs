//! Numerical laboratory for the one-dimensional Perona-Malik
//! reaction-diffusion model
//!
//! ```text
//!     u_t = Q(eps^2 u_x)_x - F'(u)      on (a, b),  u_x = 0 at a and b,
//! ```
//!
//! where `Q` is a non-monotone (forward-backward) Perona-Malik flux and `F`
//! is a double-well potential with wells at +-1. The crate builds exact
//! stationary solutions by quadrature, evolves initial data over very long
//! horizons with an energy-dissipating finite-volume scheme, and measures the
//! slow motion of layered states (collapse times, interface dynamics).
//!
//! # Modules
//!
//! - [`model`]: flux and potential families, derived constants
//!   (`kappa`, `ell`, `eps0`), admissibility checks.
//! - [`inversion`]: the even function `P_eps(s) = s Q(eps^2 s) -
//!   eps^-2 Qt(eps^2 s)` and its monotone inverse `J_eps` on `[0, kappa
//!   eps^-2]`, the kernel of every stationary construction.
//! - [`stationary`]: standing waves, compactons (`theta < 2`), glued
//!   transition-layer data, and periodic orbits (`theta >= 2`) sampled onto
//!   uniform grids.
//! - [`energy`]: the scaled free energy, the wave-energy constants `c_eps`
//!   and `c0`, the pointwise gradient-energy inequality, and L1 distances.
//! - [`evolution`]: conservative finite-volume semi-discretization with
//!   explicit and adaptive implicit (backward Euler + damped Newton)
//!   stepping, checkpointed diagnostics, and Lyapunov monitoring.
//! - [`layers`]: zero sets, interfaces, exact Hausdorff distances between
//!   finite point sets, collapse-time bisection, and interface exit times.
//! - [`harness`]: named experiment presets, flat key-value configs, CSV
//!   emission, run manifests, and timing-law fits. Everything the `pmrd`
//!   command-line tool exposes.
//!
//! # Determinism
//!
//! No randomness is used anywhere in this crate. All iteration orders are
//! fixed, so a given configuration produces bit-identical CSV output on a
//! given platform.

pub mod energy;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod inversion;
pub mod layers;
pub mod model;
mod numerics;
pub mod stationary;

pub use error::CoreError;
pub use model::{FluxKind, FluxSpec, ModelParams, PotentialSpec};
pub use stationary::{Grid, Profile};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

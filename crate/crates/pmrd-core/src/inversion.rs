//! The stationary first integral and its inverse.
//!
//! Every stationary profile of the model satisfies, cell by cell, the first
//! integral
//!
//! ```text
//!   P_eps(u_x) = F(u) + const,
//!   P_eps(s)   = s Q(eps^2 s) - eps^-2 Qt(eps^2 s),
//! ```
//!
//! where `Qt` is the primitive of `Q`. `P_eps` is even, vanishes to second
//! order at 0, and is strictly increasing on `[0, kappa / eps^2]` with
//!
//! ```text
//!   P_eps'(s) = eps^2 s Q'(eps^2 s),
//!   P_eps(kappa / eps^2) = ell / eps^2     (exactly, same closed forms).
//! ```
//!
//! [`InversionContext::j_eps`] inverts this increasing branch: given
//! `xi in [0, ell / eps^2]` it returns the unique `s in [0, kappa / eps^2]`
//! with `P_eps(s) = xi`. All stationary constructions reduce to quadratures
//! of `1 / j_eps(F(u) - c)`, so the inverse must hold *relative* accuracy
//! down to extremely small `xi` (the integrands are evaluated at `F(u)` with
//! `u` within rounding error of a well). The solver therefore terminates on
//! the residual tolerance *and* a relative bracket width, which is strictly
//! tighter than the residual rule alone (near 0 the residual rule would
//! admit answers with O(1) relative error because `P_eps` is quadratically
//! flat there).

use crate::error::CoreError;
use crate::model::{FluxSpec, ModelParams};
use crate::numerics::bracketed_root;
use crate::Result;

/// Absolute residual tolerance for the inverse: `|P_eps(s) - xi|` at the
/// returned `s` is below `J_RESIDUAL_ABS_TOL + J_RESIDUAL_REL_TOL * xi`.
pub const J_RESIDUAL_ABS_TOL: f64 = 1e-12;

/// Relative residual tolerance for the inverse (see [`J_RESIDUAL_ABS_TOL`]).
pub const J_RESIDUAL_REL_TOL: f64 = 1e-10;

/// Relative bracket-width termination for the inverse. Guarantees roughly
/// eleven correct digits of `s` itself at every scale, including the
/// quadratically flat region near 0 where the residual tolerances alone say
/// nothing about `s`.
const J_BRACKET_REL_WIDTH: f64 = 1e-11;

/// Evaluator for `P_eps` and its inverse at a fixed `eps` and flux.
#[derive(Debug, Clone)]
pub struct InversionContext {
    eps2: f64,
    flux: FluxSpec,
    s_max: f64,
    p_max: f64,
}

impl InversionContext {
    /// Build for a given layer width and flux. Requires `eps > 0`.
    pub fn new(eps: f64, flux: &FluxSpec) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CoreError::Domain(format!(
                "inversion context needs eps > 0, got {eps}"
            )));
        }
        let eps2 = eps * eps;
        let s_max = flux.kappa() / eps2;
        let mut ctx = Self {
            eps2,
            flux: flux.clone(),
            s_max,
            p_max: 0.0,
        };
        ctx.p_max = ctx.p_eps(s_max);
        Ok(ctx)
    }

    /// Build from a validated parameter bundle.
    pub fn for_model(params: &ModelParams) -> Self {
        Self::new(params.eps(), params.flux()).expect("params carry a validated eps")
    }

    /// `eps^2`, the argument scale of the flux inside `P_eps`.
    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    /// The flux this context inverts against.
    pub fn flux(&self) -> &FluxSpec {
        &self.flux
    }

    /// Right end of the increasing branch, `kappa / eps^2`.
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Top of the attainable range, `P_eps(s_max) = ell / eps^2`.
    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// The first-integral function `P_eps(s) = s Q(eps^2 s) - eps^-2 Qt(eps^2 s)`.
    ///
    /// Even in `s`. Near 0 the two terms are in ratio 2:1, so the
    /// subtraction loses at most a couple of bits; combined with the
    /// `ln_1p`/`exp_m1` forms of `Qt` the value keeps full relative accuracy
    /// down to underflow.
    pub fn p_eps(&self, s: f64) -> f64 {
        let z = self.eps2 * s;
        s * self.flux.q(z) - self.flux.q_tilde(z) / self.eps2
    }

    /// Derivative `P_eps'(s) = eps^2 s Q'(eps^2 s)`.
    pub fn p_eps_prime(&self, s: f64) -> f64 {
        self.eps2 * s * self.flux.q_prime(self.eps2 * s)
    }

    /// Small-`xi` closed form `sqrt(2 xi / (eps^2 Q'(0)))` of the inverse.
    ///
    /// Used to seed the solver and exposed for diagnostics; it is *not*
    /// substituted for the solve anywhere (the solver already delivers full
    /// relative accuracy at small `xi`, so switching forms would only create
    /// a seam).
    pub fn j_eps_asymptotic(&self, xi: f64) -> f64 {
        (2.0 * xi / (self.eps2 * self.flux.q_prime0())).sqrt()
    }

    /// Inverse of the increasing branch: the unique `s in [0, s_max]` with
    /// `P_eps(s) = xi`, for `xi in [0, p_max]`.
    ///
    /// Guarantees `|P_eps(s) - xi| <= J_RESIDUAL_ABS_TOL +
    /// J_RESIDUAL_REL_TOL * xi` *and* a relative bracket width below
    /// `1e-11`. Arguments within one part in `1e12` above `p_max` are
    /// clamped to `s_max` (they arise from rounding in `F(u)` at profile
    /// extrema); anything further out is a domain error.
    pub fn j_eps(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() || xi < 0.0 {
            return Err(CoreError::Domain(format!(
                "first-integral inverse needs xi in [0, {:.6e}], got {xi:.6e}",
                self.p_max
            )));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        if xi >= self.p_max {
            if xi <= self.p_max * (1.0 + 1e-12) {
                return Ok(self.s_max);
            }
            return Err(CoreError::Domain(format!(
                "first-integral inverse needs xi <= ell/eps^2 = {:.6e}, got {xi:.6e}",
                self.p_max
            )));
        }

        // Seed the bracket from the small-xi closed form; P_eps lies below
        // its parabolic osculant, so the true root is >= the seed and the
        // doubled seed usually caps it.
        let mut lo = 0.0;
        let mut f_lo = -xi;
        let mut hi = self.s_max;
        let mut f_hi = self.p_max - xi;
        let guess = self.j_eps_asymptotic(xi);
        if guess.is_finite() && guess > 0.0 {
            if guess < hi {
                let f_g = self.p_eps(guess) - xi;
                if f_g <= 0.0 {
                    lo = guess;
                    f_lo = f_g;
                } else {
                    hi = guess;
                    f_hi = f_g;
                }
            }
            let cap = (2.0 * guess).min(self.s_max);
            if cap > lo && cap < hi {
                let f_c = self.p_eps(cap) - xi;
                if f_c >= 0.0 {
                    hi = cap;
                    f_hi = f_c;
                }
            }
        }

        bracketed_root(
            &mut |s| self.p_eps(s) - xi,
            lo,
            hi,
            f_lo,
            f_hi,
            |_| J_RESIDUAL_ABS_TOL + J_RESIDUAL_REL_TOL * xi,
            |s| J_BRACKET_REL_WIDTH * s.abs(),
            200,
        )
    }
}

//! The energy functional, the transition constant, and the pointwise
//! inequality behind every lower bound.
//!
//! The continuum energy is
//!
//! ```text
//!   E[u] = integral_a^b [ Qt(eps^2 u_x) / eps^3 + F(u) / eps ] dx,
//! ```
//!
//! nonincreasing along solutions of the evolution equation. The discrete
//! form used here evaluates the gradient term with the one-sided difference
//! per cell — the *same* stencil as the finite-volume flux in the evolution
//! module — and the potential term with the trapezoid rule on nodes. That
//! pairing is deliberate: the semi-discrete evolution is then exactly the
//! gradient flow of this discrete energy, so the Lyapunov identity holds to
//! stepping accuracy rather than discretization accident.
//!
//! The transition constant
//!
//! ```text
//!   c_eps = eps^-1 integral_-1^1 Q(eps^2 j_eps(F(s))) ds
//! ```
//!
//! is the energy of one full -1 -> +1 transition; `N`-layer compactons have
//! energy exactly `N c_eps`, and the glued transition-layer datum has energy
//! at most `N c_eps`. Its `eps -> 0` limit is `c0 = sqrt(Q'(0))
//! integral sqrt(2 F)`.

use crate::error::CoreError;
use crate::inversion::InversionContext;
use crate::layers::StepFunctionV;
use crate::model::ModelParams;
use crate::numerics::adaptive_quad;
use crate::stationary::Profile;
use crate::Result;

/// Discrete energy split into its two integrand contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    /// `gradient_part + potential_part`, computed with exactly that single
    /// addition (so the identity holds bitwise).
    pub total: f64,
    /// Sum over cells of `h Qt(eps^2 (u_{i+1} - u_i)/h) / eps^3`.
    pub gradient_part: f64,
    /// Trapezoid sum of `F(u_i) / eps`.
    pub potential_part: f64,
    /// Optional per-cell energies (gradient of the cell plus the trapezoid
    /// share of its two nodes). Their sum equals `total` up to reordering
    /// roundoff — a few ulps, not bitwise.
    pub per_cell: Option<Vec<f64>>,
}

fn energy_impl(m: &ModelParams, u: &Profile, want_cells: bool) -> EnergyBreakdown {
    let eps = m.eps();
    let eps2 = eps * eps;
    let inv_eps3 = 1.0 / (eps2 * eps);
    let flux = m.flux();
    let pot = m.potential();
    let h = u.grid().h();
    let v = u.values();
    let n = u.grid().num_cells();

    let mut gradient_part = 0.0;
    for i in 0..n {
        let d = (v[i + 1] - v[i]) / h;
        gradient_part += h * flux.q_tilde(eps2 * d) * inv_eps3;
    }
    let mut potential_part = 0.0;
    for (i, &ui) in v.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        potential_part += w * h * pot.f(ui) / eps;
    }
    let per_cell = want_cells.then(|| {
        (0..n)
            .map(|i| {
                let d = (v[i + 1] - v[i]) / h;
                h * flux.q_tilde(eps2 * d) * inv_eps3
                    + 0.5 * h * (pot.f(v[i]) + pot.f(v[i + 1])) / eps
            })
            .collect()
    });

    EnergyBreakdown {
        total: gradient_part + potential_part,
        gradient_part,
        potential_part,
        per_cell,
    }
}

/// Discrete energy of a profile (totals only).
pub fn energy(m: &ModelParams, u: &Profile) -> EnergyBreakdown {
    energy_impl(m, u, false)
}

/// Discrete energy with the per-cell breakdown attached.
pub fn energy_detailed(m: &ModelParams, u: &Profile) -> EnergyBreakdown {
    energy_impl(m, u, true)
}

/// Allocation-free total energy on raw node values (same stencil as
/// [`energy`]); used by the time steppers inside their accept/reject loop.
pub(crate) fn energy_total_raw(m: &ModelParams, v: &[f64], h: f64) -> f64 {
    let eps = m.eps();
    let eps2 = eps * eps;
    let inv_eps3 = 1.0 / (eps2 * eps);
    let flux = m.flux();
    let pot = m.potential();
    let n = v.len() - 1;
    let mut gradient_part = 0.0;
    for i in 0..n {
        let d = (v[i + 1] - v[i]) / h;
        gradient_part += h * flux.q_tilde(eps2 * d) * inv_eps3;
    }
    let mut potential_part = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
        potential_part += wgt * h * pot.f(vi) / eps;
    }
    gradient_part + potential_part
}

/// The single-transition energy constant `c_eps`.
///
/// The integrand `Q(eps^2 j_eps(F(s)))` is continuous on `[-1, 1]` and
/// vanishes at the endpoints like `|1 -+ s|^(theta/2)`, so plain adaptive
/// quadrature (with evenness folding) is enough — no substitution needed.
pub fn c_eps(m: &ModelParams) -> Result<f64> {
    let ctx = InversionContext::for_model(m);
    let pot = m.potential();
    let flux = m.flux();
    let eps2 = m.eps() * m.eps();
    let mut first_err: Option<CoreError> = None;
    let half = adaptive_quad(
        &mut |s| match ctx.j_eps(pot.f(s)) {
            Ok(j) => flux.q(eps2 * j),
            Err(e) => {
                first_err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        1e-10,
        0.0,
    );
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(2.0 * half? / m.eps())
}

/// The small-`eps` limit `c0 = sqrt(Q'(0)) integral_-1^1 sqrt(2 F(s)) ds`.
pub fn c0(m: &ModelParams) -> Result<f64> {
    let pot = m.potential();
    let half = adaptive_quad(
        &mut |s| (2.0 * pot.f(s)).sqrt(),
        0.0,
        1.0,
        1e-12,
        0.0,
    )?;
    Ok(m.flux().q_prime0().sqrt() * 2.0 * half)
}

/// Outcome of sampling the two-variable inequality
/// `g(x, y) = Qt(eps^2 x) + eps^2 y - eps^2 |x| Q(eps^2 j_eps(y)) >= 0`
/// over `[-s_max, s_max] x [0, p_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    /// Smallest sampled value of `g` (theory: `>= 0`, so anything beyond
    /// rounding noise below zero falsifies the implementation).
    pub min_value: f64,
    /// First coordinate of the minimizing sample.
    pub arg_x: f64,
    /// Second coordinate of the minimizing sample.
    pub arg_y: f64,
    /// Grid resolution that was sampled (`samples x samples`).
    pub samples: usize,
}

/// Sample the pointwise inequality on a `samples x samples` grid.
///
/// `g` vanishes identically on the curve `x = j_eps(y)` and at the corners
/// `(0, 0)` and `(s_max, p_max)`; everywhere else it is strictly positive.
pub fn verify_pointwise_inequality(ctx: &InversionContext, samples: usize) -> Result<InequalityReport> {
    if samples < 2 {
        return Err(CoreError::Domain(format!(
            "inequality scan needs at least a 2x2 grid, got {samples}"
        )));
    }
    let mut report = InequalityReport {
        min_value: f64::INFINITY,
        arg_x: 0.0,
        arg_y: 0.0,
        samples,
    };
    for iy in 0..samples {
        let y = ctx.p_max() * iy as f64 / (samples - 1) as f64;
        let jy = ctx.j_eps(y)?;
        for ix in 0..samples {
            let x = ctx.s_max() * (2.0 * ix as f64 / (samples - 1) as f64 - 1.0);
            let g = pointwise_g(ctx, x, y, jy);
            if g < report.min_value {
                report.min_value = g;
                report.arg_x = x;
                report.arg_y = y;
            }
        }
    }
    Ok(report)
}

/// The inequality integrand with `j_eps(y)` precomputed by the caller.
pub fn pointwise_g(ctx: &InversionContext, x: f64, y: f64, j_of_y: f64) -> f64 {
    let eps2 = ctx.eps2();
    let flux = ctx.flux();
    flux.q_tilde(eps2 * x) + eps2 * y - eps2 * x.abs() * flux.q(eps2 * j_of_y)
}

/// Trapezoid `L^1` distance between two profiles on the same grid.
pub fn l1_distance(u: &Profile, w: &Profile) -> Result<f64> {
    if u.grid() != w.grid() {
        return Err(CoreError::Domain(
            "L1 distance needs identical grids".into(),
        ));
    }
    let h = u.grid().h();
    let n = u.grid().num_cells();
    let mut acc = 0.0;
    for i in 0..=n {
        let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += wgt * h * (u.values()[i] - w.values()[i]).abs();
    }
    Ok(acc)
}

/// Trapezoid `L^1` distance from a profile to a constant.
pub fn l1_distance_to_const(u: &Profile, c: f64) -> f64 {
    let h = u.grid().h();
    let n = u.grid().num_cells();
    let mut acc = 0.0;
    for i in 0..=n {
        let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += wgt * h * (u.values()[i] - c).abs();
    }
    acc
}

/// `L^1` distance from a (piecewise-linearly interpolated) profile to a step
/// function, with cells split exactly at the step's jump locations and at
/// interior sign changes of the difference — each piece then integrates in
/// closed form, so the only error source is the linear interpolation of `u`.
pub fn l1_distance_to_step(u: &Profile, v: &StepFunctionV) -> f64 {
    let g = u.grid();
    let n = g.num_cells();
    let vals = u.values();

    // |linear e0 -> e1 over width w| integrated exactly.
    fn seg(e0: f64, e1: f64, w: f64) -> f64 {
        if e0 * e1 >= 0.0 {
            0.5 * (e0.abs() + e1.abs()) * w
        } else {
            0.5 * w * (e0 * e0 + e1 * e1) / (e0.abs() + e1.abs())
        }
    }

    let mut acc = 0.0;
    for i in 0..n {
        let x0 = g.node(i);
        let x1 = g.node(i + 1);
        let u0 = vals[i];
        let u1 = vals[i + 1];
        // Breakpoints: cell ends plus any jumps inside.
        let mut cuts = vec![x0];
        for &j in v.jumps() {
            if j > x0 && j < x1 {
                cuts.push(j);
            }
        }
        cuts.push(x1);
        for pair in cuts.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            if q <= p {
                continue;
            }
            let up = u0 + (u1 - u0) * (p - x0) / (x1 - x0);
            let uq = u0 + (u1 - u0) * (q - x0) / (x1 - x0);
            let w_val = v.value(0.5 * (p + q));
            acc += seg(up - w_val, uq - w_val, q - p);
        }
    }
    acc
}

//! Stationary solutions by quadrature of the first-order reduction
//! `u' = j_eps(F(u) - c)`.
//!
//! Every construction here follows the same route: integrate
//!
//! ```text
//!   x(u) = integral du / j_eps(F(u) - c)
//! ```
//!
//! to tabulate the inverse map, then invert `x(u) -> u(x)` with a monotone
//! cubic interpolant whose node slopes are the *exact* analytic values
//! `du/dx = j_eps(F(u) - c)`. With exact slopes the interpolant is
//! fourth-order accurate, so the sampled profiles are limited by the
//! quadrature tolerance (~1e-10 relative), not by the table resolution —
//! which keeps discrete stationarity residuals clean under grid refinement.
//!
//! Three families:
//!
//! * **Standing wave** (`c = 0`): odd, increasing, connecting -1 to +1.
//!   For `theta < 2` it meets the wells at finite contact points `+-x1e`
//!   and continues constantly; for `theta = 2` the approach is exponential,
//!   for `theta > 2` algebraic.
//! * **Compactons** (`theta < 2` only): alternating translated copies of
//!   the standing wave glued along `+-1` plateaus — exact stationary
//!   solutions with any prescribed sign-change positions, provided the
//!   spacing leaves room for the contact layers.
//! * **Periodic orbits** (`theta >= 2`): oscillations between `-sbar` and
//!   `+sbar` with half-period `T(sbar) = integral_{-sbar}^{sbar} ds /
//!   j_eps(F(s) - F(sbar))`; [`solve_sbar`] matches the half-period to
//!   `(b-a)/N` so that `N` equidistant zeros land inside the interval.
//!
//! The transition-layer initial datum (standing-wave pieces glued at
//! midpoints between prescribed zeros) lives here too; for `theta >= 2` it
//! is *not* stationary — it is the canonical metastable initial condition
//! for the evolution experiments.

use std::io::{BufRead, Write as IoWrite};
use std::path::Path;

use crate::error::CoreError;
use crate::inversion::InversionContext;
use crate::model::ModelParams;
use crate::numerics::{adaptive_quad, bracketed_root, line_fit, MonotoneCubic};
use crate::Result;

/// Relative tolerance for all profile-construction quadratures. Increments
/// accumulate over a few hundred cells, so the summed relative error stays
/// near 1e-9 — far below the interpolation and sampling errors downstream.
const QUAD_REL: f64 = 1e-11;

/// Where the uniform-in-`u` table hands over to the well-resolved tail.
const REGION_A_TOP: f64 = 0.9;
/// Cells of the uniform table on `[0, REGION_A_TOP]`.
const REGION_A_CELLS: usize = 160;
/// Cells of the substituted tail table for `theta < 2`.
const REGION_B_CELLS: usize = 80;
/// Geometric ratio for the tail table when `theta >= 2`.
const TAIL_RATIO: f64 = 0.85;
/// The `theta >= 2` tail stops at this distance from the well: far below
/// any realistic grid's ability to distinguish the profile from +-1.
const DELTA_CUT: f64 = 1e-14;

/// Decay-fit window on `1 - u` (both edges inclusive).
const FIT_WINDOW: (f64, f64) = (1e-6, 1e-1);

// ---------------------------------------------------------------------------
// Grid and Profile
// ---------------------------------------------------------------------------

/// Uniform grid of `n` cells (`n + 1` nodes) over `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    /// Build a grid; requires finite `a < b` and at least 2 cells.
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(CoreError::Domain(format!(
                "grid needs finite a < b, got [{a}, {b}]"
            )));
        }
        if n < 2 {
            return Err(CoreError::Domain(format!(
                "grid needs at least 2 cells, got {n}"
            )));
        }
        Ok(Self { a, b, n })
    }

    /// Grid matching a model's interval.
    pub fn for_model(m: &ModelParams, n: usize) -> Result<Self> {
        Self::new(m.a(), m.b(), n)
    }

    /// Left endpoint.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Right endpoint.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    pub fn num_cells(&self) -> usize {
        self.n
    }

    /// Number of nodes (`cells + 1`).
    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// Node coordinate. The last node is exactly `b`, so round trips through
    /// serialized endpoints reproduce the grid bit-for-bit.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    /// All node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }
}

/// A sampled function on a uniform grid: stationary object or evolving state.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
    meta: String,
}

impl Profile {
    /// Wrap node values; the length must match `grid.num_nodes()` and all
    /// values must be finite.
    pub fn new(grid: Grid, values: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(CoreError::Domain(format!(
                "profile needs {} node values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::Domain(format!(
                "profile value at node {bad} is not finite: {}",
                values[bad]
            )));
        }
        Ok(Self {
            grid,
            values,
            meta: meta.into(),
        })
    }

    /// Sample a function at the grid nodes.
    pub fn sample(grid: Grid, meta: impl Into<String>, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = (0..grid.num_nodes()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values, meta)
    }

    /// The grid.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Node values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Construction descriptor.
    pub fn meta(&self) -> &str {
        &self.meta
    }

    /// Sup-norm distance to another profile on the identical grid.
    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(CoreError::Domain(
                "sup distance needs identical grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max))
    }

    /// Write as two-column CSV (`x,u` header; `.` decimal; one row per node).
    /// Values are printed with the shortest round-trip representation, so a
    /// reload reproduces them bit-for-bit.
    pub fn write_csv<W: IoWrite>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,u")?;
        for i in 0..self.grid.num_nodes() {
            writeln!(w, "{},{}", self.grid.node(i), self.values[i])?;
        }
        Ok(())
    }

    /// Read back what [`Profile::write_csv`] wrote. The grid is rebuilt from
    /// the first and last abscissae; non-uniform abscissae are rejected.
    pub fn read_csv<R: BufRead>(r: R, meta: impl Into<String>) -> Result<Self> {
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if line != "x,u" {
                    return Err(CoreError::Config(format!(
                        "profile CSV must start with header 'x,u', got {line:?}"
                    )));
                }
                continue;
            }
            let (xs_str, us_str) = line.split_once(',').ok_or_else(|| {
                CoreError::Config(format!("profile CSV line {} lacks a comma: {line:?}", lineno + 1))
            })?;
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| {
                    CoreError::Config(format!(
                        "profile CSV line {}: cannot parse {what} {s:?}",
                        lineno + 1
                    ))
                })
            };
            xs.push(parse(xs_str, "x")?);
            us.push(parse(us_str, "u")?);
        }
        if xs.len() < 3 {
            return Err(CoreError::Config(format!(
                "profile CSV needs at least 3 rows, got {}",
                xs.len()
            )));
        }
        let n = xs.len() - 1;
        let grid = Grid::new(xs[0], xs[n], n)?;
        let slack = 1e-6 * (grid.b - grid.a);
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.node(i)).abs() > slack {
                return Err(CoreError::Config(format!(
                    "profile CSV abscissae are not uniform: row {} has x = {x}, expected {}",
                    i + 1,
                    grid.node(i)
                )));
            }
        }
        Self::new(grid, us, meta)
    }

    /// Save to a CSV file (see [`Profile::write_csv`]).
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Load from a CSV file (see [`Profile::read_csv`]).
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_csv(
            std::io::BufReader::new(file),
            format!("loaded from {}", path.display()),
        )
    }
}

// ---------------------------------------------------------------------------
// Wave shape (internal table shared by all standing-wave-based constructions)
// ---------------------------------------------------------------------------

/// Qualitative approach of the standing wave to the wells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayRegime {
    /// `theta < 2`: the wave reaches +-1 at finite contact points.
    Contact,
    /// `theta = 2`: exponential approach.
    Exponential,
    /// `theta > 2`: algebraic approach.
    Algebraic,
}

/// Fitted tail law of the increasing wave: `1 - u ~ prefactor *
/// exp(-rate * x)` (exponential regime) or `1 - u ~ prefactor * x^-rate`
/// (algebraic regime). Diagnostic, fitted over `1 - u` in `[1e-6, 1e-1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Multiplicative constant of the fitted law.
    pub prefactor: f64,
    /// Decay rate (exponential) or power (algebraic); positive.
    pub rate: f64,
    /// Coefficient of determination of the underlying line fit.
    pub r2: f64,
}

/// Shape report accompanying a standing-wave construction. Always describes
/// the *increasing* wave; the decreasing wave is its reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveReport {
    /// Tail regime, decided by `theta`.
    pub regime: DecayRegime,
    /// Right contact point (`theta < 2` only): `u(x) = 1` for `x >= x1e`.
    pub x1e: Option<f64>,
    /// Left contact point (`theta < 2` only); equals `-x1e` for the even
    /// potential family.
    pub x2e: Option<f64>,
    /// Tail fit (`theta >= 2` only).
    pub decay: Option<DecayFit>,
}

/// Adapt a fallible integrand to the quadrature kernel: the first error is
/// captured and re-raised, with NaN poisoning the panel sums in between.
fn quad_checked(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
) -> Result<f64> {
    let mut first_err: Option<CoreError> = None;
    let v = adaptive_quad(
        &mut |x| match f(x) {
            Ok(y) => y,
            Err(e) => {
                first_err.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        QUAD_REL,
        0.0,
    );
    if let Some(e) = first_err {
        return Err(e);
    }
    v
}

/// Tabulated increasing standing wave, positive half (`u >= 0`, `x >= 0`),
/// extended by oddness and by the `+-1` tail.
#[derive(Debug, Clone)]
pub(crate) struct WaveShape {
    map: MonotoneCubic,
    x_end: f64,
    contact: Option<f64>,
    theta: f64,
}

impl WaveShape {
    /// Build the half-table for the model's wave `x(u) = integral_0^u ds /
    /// j_eps(F(s))`.
    pub(crate) fn build(m: &ModelParams) -> Result<Self> {
        let ctx = InversionContext::for_model(m);
        let pot = m.potential().clone();
        let theta = pot.theta();

        let mut xs = vec![0.0];
        let mut us = vec![0.0];
        let mut ds = vec![ctx.j_eps(pot.f(0.0))?];

        // Region A: uniform in u up to REGION_A_TOP; the integrand
        // 1 / j_eps(F(u)) is smooth and bounded here.
        for k in 1..=REGION_A_CELLS {
            let u0 = REGION_A_TOP * (k - 1) as f64 / REGION_A_CELLS as f64;
            let u1 = REGION_A_TOP * k as f64 / REGION_A_CELLS as f64;
            let dx = quad_checked(|u| Ok(1.0 / ctx.j_eps(pot.f(u))?), u0, u1)?;
            xs.push(xs.last().unwrap() + dx);
            us.push(u1);
            ds.push(ctx.j_eps(pot.f(u1))?);
        }

        let mut contact = None;
        if theta < 2.0 {
            // Region B, contact regime: substitute u = 1 - t^p with
            // p = 2 / (2 - theta). Near the well F ~ (1-u)^theta, so
            // 1 / j_eps(F) ~ (1-u)^(-theta/2) and the substituted integrand
            // p t^(p-1) / j_eps(F(1 - t^p)) tends to a positive constant at
            // t = 0: the improper integral becomes a proper one and the
            // contact point x1e = x(1) is reached by an ordinary table.
            let p = 2.0 / (2.0 - theta);
            let t_hi = (1.0 - REGION_A_TOP).powf(1.0 / p);
            for k in 1..=REGION_B_CELLS {
                let t1 = t_hi * (REGION_B_CELLS - k) as f64 / REGION_B_CELLS as f64;
                let t0 = t_hi * (REGION_B_CELLS - k + 1) as f64 / REGION_B_CELLS as f64;
                let dx = quad_checked(
                    |t| Ok(p * t.powf(p - 1.0) / ctx.j_eps(pot.f_from_delta(t.powf(p)))?),
                    t1,
                    t0,
                )?;
                let delta = t1.powf(p);
                xs.push(xs.last().unwrap() + dx);
                us.push(1.0 - delta);
                ds.push(ctx.j_eps(pot.f_from_delta(delta))?);
            }
            contact = Some(*xs.last().unwrap());
        } else {
            // Region B, asymptotic regime: geometric march of delta = 1 - u
            // down to DELTA_CUT. Each cell [1 - d0, 1 - d1] sees the
            // integrand vary by a mild bounded factor, so the adaptive
            // quadrature stays shallow. The floor keeps F(1 - delta) well
            // above underflow for large theta.
            let delta_floor = DELTA_CUT.max(0.5 * (2.0 * theta * 1e-280).powf(1.0 / theta));
            let mut d0 = 1.0 - REGION_A_TOP;
            loop {
                let mut d1 = d0 * TAIL_RATIO;
                if d1 < delta_floor * (1.0 + 1e-12) {
                    d1 = delta_floor;
                }
                let dx = quad_checked(|del| Ok(1.0 / ctx.j_eps(pot.f_from_delta(del))?), d1, d0)?;
                xs.push(xs.last().unwrap() + dx);
                us.push(1.0 - d1);
                ds.push(ctx.j_eps(pot.f_from_delta(d1))?);
                if d1 <= delta_floor {
                    break;
                }
                d0 = d1;
            }
        }

        let x_end = *xs.last().unwrap();
        let map = MonotoneCubic::new(xs, us, ds)?;
        Ok(Self {
            map,
            x_end,
            contact,
            theta,
        })
    }

    /// Wave value at any `x` (odd extension; `+-1` beyond the table, which
    /// for `theta >= 2` sits within `1e-14` of the wells — below grid
    /// resolution).
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let (sign, ax) = if x < 0.0 { (-1.0, -x) } else { (1.0, x) };
        if ax >= self.x_end {
            return sign;
        }
        sign * self.map.eval(ax)
    }

    /// Contact point `x1e` for `theta < 2`.
    pub(crate) fn x1e(&self) -> Option<f64> {
        self.contact
    }

    /// Shape report with the tail classification and fit.
    pub(crate) fn report(&self) -> WaveReport {
        if self.theta < 2.0 {
            return WaveReport {
                regime: DecayRegime::Contact,
                x1e: self.contact,
                x2e: self.contact.map(|x| -x),
                decay: None,
            };
        }
        let regime = if self.theta <= 2.0 {
            DecayRegime::Exponential
        } else {
            DecayRegime::Algebraic
        };
        let mut fit_x = Vec::new();
        let mut fit_y = Vec::new();
        for (x, u) in self.map.xs().iter().zip(self.map.ys()) {
            let delta = 1.0 - u;
            if delta >= FIT_WINDOW.0 && delta <= FIT_WINDOW.1 && *x > 0.0 {
                let abscissa = match regime {
                    DecayRegime::Exponential => *x,
                    _ => x.ln(),
                };
                fit_x.push(abscissa);
                fit_y.push(delta.ln());
            }
        }
        let decay = if fit_x.len() >= 3 {
            line_fit(&fit_x, &fit_y).ok().map(|f| DecayFit {
                prefactor: f.intercept.exp(),
                rate: -f.slope,
                r2: f.r2,
            })
        } else {
            None
        };
        WaveReport {
            regime,
            x1e: None,
            x2e: None,
            decay,
        }
    }
}

// ---------------------------------------------------------------------------
// Standing waves
// ---------------------------------------------------------------------------

/// The increasing standing wave sampled on `n_cells` cells over `[a, b]`,
/// centered at `x = 0` (so `u(0) = 0`), with its shape report.
pub fn standing_wave(m: &ModelParams, n_cells: usize) -> Result<(Profile, WaveReport)> {
    let shape = WaveShape::build(m)?;
    let report = shape.report();
    let grid = Grid::for_model(m, n_cells)?;
    let meta = format!(
        "standing-wave theta={} eps={}",
        m.potential().theta(),
        m.eps()
    );
    let profile = Profile::sample(grid, meta, |x| shape.eval(x))?;
    Ok((profile, report))
}

/// The decreasing standing wave `-wave(x)` (equal to `wave(-x)` since the
/// wave is odd, but computed as an exact negation so the node values are the
/// bitwise negatives of the increasing wave's). The report describes the
/// underlying increasing wave; its contact points mirror under reflection.
pub fn standing_wave_decreasing(m: &ModelParams, n_cells: usize) -> Result<(Profile, WaveReport)> {
    let shape = WaveShape::build(m)?;
    let report = shape.report();
    let grid = Grid::for_model(m, n_cells)?;
    let meta = format!(
        "standing-wave-decreasing theta={} eps={}",
        m.potential().theta(),
        m.eps()
    );
    let profile = Profile::sample(grid, meta, |x| -shape.eval(x))?;
    Ok((profile, report))
}

// ---------------------------------------------------------------------------
// Piecewise constructions: compactons and the transition-layer datum
// ---------------------------------------------------------------------------

fn check_zeros(m: &ModelParams, zeros: &[f64]) -> Result<()> {
    if zeros.is_empty() {
        return Err(CoreError::Domain(
            "at least one sign-change position is required".into(),
        ));
    }
    for pair in zeros.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(CoreError::Domain(format!(
                "sign-change positions must be strictly increasing: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if !(zeros[0] > m.a() && *zeros.last().unwrap() < m.b()) {
        return Err(CoreError::Geometry(format!(
            "sign-change positions must lie strictly inside ({}, {}): got [{}, {}]",
            m.a(),
            m.b(),
            zeros[0],
            zeros.last().unwrap()
        )));
    }
    Ok(())
}

/// Evaluate alternating wave pieces, each owned by the nearest prescribed
/// zero (cut at midpoints), with the first piece's sign `sigma1`.
fn piecewise_sample(
    grid: Grid,
    shape: &WaveShape,
    zeros: &[f64],
    sigma1: f64,
    meta: String,
) -> Result<Profile> {
    let mids: Vec<f64> = zeros.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let mut piece = 0usize;
    let values = (0..grid.num_nodes())
        .map(|i| {
            let x = grid.node(i);
            while piece < mids.len() && x > mids[piece] {
                piece += 1;
            }
            let sigma = if piece % 2 == 0 { sigma1 } else { -sigma1 };
            sigma * shape.eval(x - zeros[piece])
        })
        .collect();
    Profile::new(grid, values, meta)
}

/// Exact stationary compacton for `theta in (1, 2)`: `N = zeros.len()` sign
/// changes at the prescribed positions, `+-1` plateaus between the contact
/// layers, `u(a) = start_sign`.
///
/// Requires room for every layer: both wall gaps and all mutual gaps must
/// exceed the contact half-width (reported as a geometry error naming the
/// first violated constraint otherwise).
pub fn compacton(
    m: &ModelParams,
    zeros: &[f64],
    start_sign: i32,
    n_cells: usize,
) -> Result<Profile> {
    let theta = m.potential().theta();
    if !(theta > 1.0 && theta < 2.0) {
        return Err(CoreError::Domain(format!(
            "compactons exist only for well exponents in (1, 2), got theta = {theta}"
        )));
    }
    if start_sign != 1 && start_sign != -1 {
        return Err(CoreError::Domain(format!(
            "start_sign must be +1 or -1, got {start_sign}"
        )));
    }
    check_zeros(m, zeros)?;
    let shape = WaveShape::build(m)?;
    let x1e = shape.x1e().expect("theta < 2 always has a contact point");
    // F is even, so the left contact distance |x2e| equals x1e.
    let reach = x1e;
    if zeros[0] - reach <= m.a() {
        return Err(CoreError::Geometry(format!(
            "first layer at {} needs clearance {reach:.6} from the left wall a = {}",
            zeros[0],
            m.a()
        )));
    }
    let last = *zeros.last().unwrap();
    if last + reach >= m.b() {
        return Err(CoreError::Geometry(format!(
            "last layer at {last} needs clearance {reach:.6} from the right wall b = {}",
            m.b()
        )));
    }
    for pair in zeros.windows(2) {
        if pair[1] - pair[0] <= 2.0 * reach {
            return Err(CoreError::Geometry(format!(
                "layers at {} and {} are closer than the contact diameter {:.6}",
                pair[0],
                pair[1],
                2.0 * reach
            )));
        }
    }
    let sigma1 = -(start_sign as f64);
    let meta = format!(
        "compacton theta={theta} eps={} zeros={zeros:?} start={start_sign}",
        m.eps()
    );
    piecewise_sample(Grid::for_model(m, n_cells)?, &shape, zeros, sigma1, meta)
}

/// Transition-layer initial datum: standing-wave pieces with alternating
/// orientation, glued at the midpoints between consecutive zeros (and at the
/// walls for the outer pieces). Starts negative: `u(a) < 0`.
///
/// For `theta < 2` with well-separated zeros this coincides with the
/// compacton; for `theta >= 2` it is the near-minimal-energy layered datum
/// used to start the slow-motion experiments (not itself stationary).
pub fn transition_layer_datum(m: &ModelParams, zeros: &[f64], n_cells: usize) -> Result<Profile> {
    check_zeros(m, zeros)?;
    let shape = WaveShape::build(m)?;
    let meta = format!(
        "transition-layers theta={} eps={} zeros={zeros:?}",
        m.potential().theta(),
        m.eps()
    );
    piecewise_sample(Grid::for_model(m, n_cells)?, &shape, zeros, 1.0, meta)
}

// ---------------------------------------------------------------------------
// Periodic orbits
// ---------------------------------------------------------------------------

/// Half-period of the periodic orbit oscillating between `-sbar` and
/// `+sbar`:
///
/// ```text
///   T(sbar) = integral_{-sbar}^{sbar} ds / j_eps(F(s) - F(sbar)).
/// ```
///
/// The integrand has inverse-square-root endpoint singularities; the
/// substitution `s = sbar - t^2` (and evenness) turns the integral into a
/// proper one. Requires `theta >= 2` (below that the orbit family is
/// replaced by compactons) and `sbar in (0, 1)`.
pub fn period_t(m: &ModelParams, sbar: f64) -> Result<f64> {
    let theta = m.potential().theta();
    if theta < 2.0 {
        return Err(CoreError::Domain(format!(
            "periodic orbits need theta >= 2, got {theta}"
        )));
    }
    if !(sbar > 0.0 && sbar < 1.0) {
        return Err(CoreError::Domain(format!(
            "orbit amplitude must lie in (0, 1), got {sbar}"
        )));
    }
    let ctx = InversionContext::for_model(m);
    let pot = m.potential();
    let half = quad_checked(
        |t| Ok(2.0 * t / ctx.j_eps(pot.f_diff_shift(sbar, -t * t))?),
        0.0,
        sbar.sqrt(),
    )?;
    Ok(2.0 * half)
}

/// The amplitude `sbar` whose half-period matches `(b - a) / n_layers`, so
/// the orbit fits `n_layers` equidistant zeros inside the interval.
///
/// Probes bracket the target, then a safeguarded solve polishes to
/// `|T(sbar) - target| <= 1e-8 * target`. Fails with a no-solution error
/// when even the harmonic (small-amplitude) period exceeds the target —
/// i.e. `eps` is too large for that many layers — or when the required
/// amplitude is indistinguishable from 1 at machine precision.
pub fn solve_sbar(m: &ModelParams, n_layers: usize) -> Result<f64> {
    if n_layers == 0 {
        return Err(CoreError::Domain("need at least one layer".into()));
    }
    let target = (m.b() - m.a()) / n_layers as f64;
    let mut probes = vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    for k in 2..=13 {
        probes.push(1.0 - 10f64.powi(-k));
    }

    let mut lo = None;
    let mut bracket = None;
    for &s in &probes {
        let t = period_t(m, s)?;
        if t >= target {
            match lo {
                Some(prev) => {
                    bracket = Some((prev, s));
                }
                None => {
                    return Err(CoreError::NoSolution(format!(
                        "half-period at amplitude {s} is already {t:.6e} >= target {target:.6e}; \
                         eps is too large to fit {n_layers} layers on this interval"
                    )));
                }
            }
            break;
        }
        lo = Some((s, t));
    }
    let ((s_lo, t_lo), (s_hi, _)) = match (lo, bracket) {
        (Some(l), Some((_, hi))) => (l, (hi, 0.0)),
        _ => {
            return Err(CoreError::NoSolution(format!(
                "half-period stays below target {target:.6e} up to amplitude 1 - 1e-13; \
                 the required amplitude is beyond machine resolution"
            )));
        }
    };

    let f_hi = period_t(m, s_hi)? - target;
    let mut first_err: Option<CoreError> = None;
    let mut g = |s: f64| match period_t(m, s) {
        Ok(t) => t - target,
        Err(e) => {
            first_err.get_or_insert(e);
            f64::NAN
        }
    };
    let root = bracketed_root(
        &mut g,
        s_lo,
        s_hi,
        t_lo - target,
        f_hi,
        |_| 1e-8 * target,
        |s| 1e-13 * s.abs().max(0.1),
        200,
    );
    if let Some(e) = first_err {
        return Err(e);
    }
    root
}

/// The periodic stationary profile with `n_layers` equidistant zeros inside
/// `[a, b]`: zeros at `h_1 = a + T/2`, `h_i = h_{i-1} + T` with
/// `T = (b - a) / n_layers`; extrema `+-sbar`; zero one-sided slopes at both
/// walls.
pub fn periodic_profile(m: &ModelParams, n_layers: usize, n_cells: usize) -> Result<Profile> {
    let sbar = solve_sbar(m, n_layers)?;
    let ctx = InversionContext::for_model(m);
    let pot = m.potential();

    // Quarter-wave table on u in [0, sbar] via the same endpoint
    // substitution as the period integral: x(u) = integral_0^u ds /
    // j_eps(F(s) - F(sbar)), from the zero crossing (x = 0) to the crest
    // (x = quarter, u = sbar, du/dx = 0).
    const QUARTER_CELLS: usize = 120;
    let tq = sbar.sqrt();
    let mut xs = vec![0.0];
    let mut us = vec![0.0];
    let mut ds = vec![ctx.j_eps(pot.f(0.0) - pot.f(sbar))?];
    for k in 1..=QUARTER_CELLS {
        let t1 = tq * (QUARTER_CELLS - k) as f64 / QUARTER_CELLS as f64;
        let t0 = tq * (QUARTER_CELLS - k + 1) as f64 / QUARTER_CELLS as f64;
        let dx = quad_checked(
            |t| Ok(2.0 * t / ctx.j_eps(pot.f_diff_shift(sbar, -t * t))?),
            t1,
            t0,
        )?;
        let u1 = sbar - t1 * t1;
        xs.push(xs.last().unwrap() + dx);
        us.push(u1);
        ds.push(ctx.j_eps(pot.f_diff_shift(sbar, u1 - sbar))?);
    }
    let quarter = *xs.last().unwrap();
    let map = MonotoneCubic::new(xs, us, ds)?;

    // Fold the quarter wave over the full period 4 * quarter, phase-aligned
    // so the left wall sits at the trough: u(a) = -sbar, u'(a) = 0.
    let eval = |x: f64| -> f64 {
        let y = (x - m.a()).rem_euclid(4.0 * quarter);
        if y < quarter {
            -map.eval(quarter - y)
        } else if y < 2.0 * quarter {
            map.eval(y - quarter)
        } else if y < 3.0 * quarter {
            map.eval(3.0 * quarter - y)
        } else {
            -map.eval(y - 3.0 * quarter)
        }
    };

    let meta = format!(
        "periodic theta={} eps={} layers={n_layers} sbar={sbar}",
        m.potential().theta(),
        m.eps()
    );
    Profile::sample(Grid::for_model(m, n_cells)?, meta, eval)
}

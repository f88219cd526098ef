//! Long-horizon time integration of `u_t = Q(eps^2 u_x)_x - F'(u)` with
//! homogeneous Neumann boundary conditions.
//!
//! # Spatial discretization
//!
//! Node-centered finite volumes on a uniform grid: cell fluxes
//! `G_i = Q(eps^2 (u_{i+1} - u_i)/h)` and node rates
//!
//! ```text
//! rhs_j = (G_j - G_{j-1}) / (w_j h) - F'(u_j),     w_j = 1/2 at the walls, 1 inside,
//! ```
//!
//! with the ghost fluxes `G_{-1} = G_n = 0` (zero-flux walls). This is the
//! exact gradient flow of the discrete energy with respect to the
//! trapezoid-weighted inner product, so two structural identities hold at the
//! semi-discrete level, not just approximately:
//!
//! * **Lyapunov**: `d/dt E_h(u) = -eps^{-1} sum_j w_j h rhs_j^2`,
//! * **mass**: `d/dt sum_j w_j h u_j = -sum_j w_j h F'(u_j)` (fluxes telescope).
//!
//! # Time stepping
//!
//! Two adaptive schemes share one accept/reject driver:
//!
//! * [`Scheme::Explicit`] — forward Euler under the diffusive stability cap
//!   `0.4 h^2 / (eps^2 max|Q'|)` and the reaction cap `0.4 / max|F''|`;
//! * [`Scheme::Implicit`] — backward Euler solved by damped Newton on the
//!   tridiagonal linearization, with the step halved whenever Newton fails.
//!
//! Both cap the per-step state change at `du_max` in the sup norm (using the
//! current rate to predict the step), reject steps that move more than ten
//! times that or that increase the energy beyond `energy_drift_tol`, and grow
//! `dt` geometrically after a run of accepted steps. Once the instantaneous
//! rate becomes negligible (`||u_t||^2 < 1e-14`) the `dt` ceiling is relaxed
//! to `1e6` so that exponentially long metastable plateaus cost a bounded
//! number of steps.
//!
//! Cells whose scaled gradient `eps^2 |u_x|` exceeds `kappa` sit in the
//! backward (ill-posed) regime of the flux; [`BackwardRegimePolicy`] chooses
//! whether that is an error, a counted warning, or handled by clamping the
//! flux argument to `+-kappa`.

use crate::energy::{energy, energy_total_raw};
use crate::error::CoreError;
use crate::layers::zeros_of;
use crate::model::ModelParams;
use crate::stationary::{Grid, Profile};
use crate::Result;

/// Early exit when the trapezoid `L^1` distance to a well drops below this.
pub const CONVERGED_L1_TOL: f64 = 1e-6;
/// Quiescence threshold on the discrete `||u_t||_{L^2}^2`.
pub const QUIESCENT_UT_SQ: f64 = 1e-14;
/// Relaxed `dt` ceiling during quiescent plateaus.
pub const DT_MAX_QUIESCENT: f64 = 1e6;

const EXPLICIT_SAFETY: f64 = 0.4;
const REJECT_DU_FACTOR: f64 = 10.0;
const GROWTH_ACCEPTS: u32 = 5;
const GROWTH_FACTOR: f64 = 1.2;
const NEWTON_MIN_LAMBDA: f64 = 1.0 / 32.0;
const MAX_DT_HALVINGS: u32 = 60;
const MAX_CHECKPOINTS: usize = 200_000;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Time-integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler under explicit stability caps.
    Explicit,
    /// Backward Euler with damped Newton.
    Implicit,
}

impl Scheme {
    /// Parse a scheme name as used in configs and on the command line.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "explicit" => Ok(Self::Explicit),
            "implicit" => Ok(Self::Implicit),
            other => Err(CoreError::Config(format!(
                "unknown scheme '{other}' (expected 'explicit' or 'implicit')"
            ))),
        }
    }

    /// Canonical name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Explicit => "explicit",
            Self::Implicit => "implicit",
        }
    }
}

/// What to do when a cell enters the backward regime `eps^2 |u_x| > kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackwardRegimePolicy {
    /// Abort stepping with [`CoreError::BackwardRegime`].
    Error,
    /// Keep the true flux and count the offending cells in the step stats.
    Warn,
    /// Clamp the flux argument to `+-kappa` (monotone surrogate dynamics).
    Clamp,
}

impl BackwardRegimePolicy {
    /// Parse a policy name as used in configs.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "error" => Ok(Self::Error),
            "warn" => Ok(Self::Warn),
            "clamp" => Ok(Self::Clamp),
            other => Err(CoreError::Config(format!(
                "unknown backward-regime policy '{other}' (expected 'error', 'warn' or 'clamp')"
            ))),
        }
    }

    /// Canonical name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Error => "error",
            Self::Warn => "warn",
            Self::Clamp => "clamp",
        }
    }
}

/// Adaptive stepper settings. All limits are absolute simulation-time or
/// solution-amplitude quantities.
#[derive(Debug, Clone)]
pub struct StepperConfig {
    /// Scheme to run.
    pub scheme: Scheme,
    /// Initial `dt` (the driver immediately clips it to the active caps).
    pub dt_init: f64,
    /// Hard lower bound on `dt`; falling below it raises a stiffness error.
    pub dt_min: f64,
    /// Ceiling on `dt` while the solution is still moving.
    pub dt_max: f64,
    /// Sup-norm cap on the predicted per-step state change.
    pub du_max: f64,
    /// Newton convergence tolerance, relative to `1 + ||u||_inf`.
    pub newton_tol: f64,
    /// Newton iteration cap per solve.
    pub newton_max_iter: u32,
    /// Allowed per-step energy increase, relative to `1 + |E|`.
    pub energy_drift_tol: f64,
    /// Backward-regime handling.
    pub backward_policy: BackwardRegimePolicy,
}

impl StepperConfig {
    /// Forward Euler defaults: `dt` starts at the ceiling and is clipped to
    /// the stability caps each step.
    pub fn explicit() -> Self {
        Self {
            scheme: Scheme::Explicit,
            dt_init: 1e3,
            dt_min: 1e-15,
            dt_max: 1e3,
            du_max: 5e-3,
            newton_tol: 1e-12,
            newton_max_iter: 30,
            energy_drift_tol: 1e-9,
            backward_policy: BackwardRegimePolicy::Warn,
        }
    }

    /// Backward Euler defaults: a cautious initial `dt` that grows
    /// geometrically once steps keep being accepted.
    pub fn implicit() -> Self {
        Self {
            scheme: Scheme::Implicit,
            dt_init: 1e-6,
            dt_min: 1e-13,
            ..Self::explicit()
        }
    }

    /// Defaults for a given scheme.
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Explicit => Self::explicit(),
            Scheme::Implicit => Self::implicit(),
        }
    }

    /// Check internal consistency of the limits.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CoreError::Config(format!(
                    "stepper setting {name} must be positive and finite, got {v}"
                )))
            }
        };
        pos(self.dt_init, "dt_init")?;
        pos(self.dt_min, "dt_min")?;
        pos(self.dt_max, "dt_max")?;
        pos(self.du_max, "du_max")?;
        pos(self.newton_tol, "newton_tol")?;
        pos(self.energy_drift_tol, "energy_drift_tol")?;
        if self.dt_min > self.dt_max {
            return Err(CoreError::Config(format!(
                "dt_min = {} exceeds dt_max = {}",
                self.dt_min, self.dt_max
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(CoreError::Config("newton_max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// State, diagnostics, traces
// ---------------------------------------------------------------------------

/// Step counters carried along with an evolving state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    /// Accepted steps.
    pub steps: u64,
    /// Rejected attempts (Newton failures, overshoots, energy drift).
    pub rejected: u64,
    /// Total Newton iterations across all solves.
    pub newton_iters: u64,
    /// Backward-regime cells seen at the starts of accepted steps.
    pub backward_cells: u64,
    /// Size of the most recently accepted step (0 before the first step).
    pub last_dt: f64,
    /// Cumulative `int ||u_t||^2 dt` along the piecewise-linear numerical
    /// path, accumulated per accepted step (trapezoid pairing of the step
    /// rate with the endpoint right-hand sides). The energy identity reads
    /// `E(T) - E(0) = -dissipation / eps` up to time-stepping error.
    pub dissipation: f64,
}

/// A solution snapshot: time, profile, and the counters accumulated so far.
#[derive(Debug, Clone)]
pub struct State {
    /// Simulation time.
    pub t: f64,
    /// Node values on the run's grid.
    pub u: Profile,
    /// Stepper counters up to this time.
    pub stats: StepStats,
}

/// Scalar diagnostics recorded at each checkpoint.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    /// Checkpoint time.
    pub t: f64,
    /// Discrete energy.
    pub energy: f64,
    /// Trapezoid-weighted `||u_t||_{L^2}^2` of the instantaneous rate.
    pub ut_l2_sq: f64,
    /// Number of zeros of the profile.
    pub n_zeros: usize,
    /// Zero locations (interpolated sign changes).
    pub zero_positions: Vec<f64>,
    /// Largest scaled gradient `eps^2 |u_x|` over the cells (compare `kappa`).
    pub max_grad: f64,
}

/// Why an evolution run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitReason {
    /// Reached the requested horizon.
    HorizonReached,
    /// `L^1`-converged to the constant well `well` at checkpoint time `t`.
    Converged {
        /// The well reached (`+1` or `-1`).
        well: f64,
        /// Checkpoint time at which convergence was detected.
        t: f64,
    },
}

/// Checkpoint times at which diagnostics and snapshots are taken. The
/// horizon itself is always included; `t = 0` is always recorded separately.
#[derive(Debug, Clone)]
pub enum CheckpointSchedule {
    /// `first, first*factor, first*factor^2, ...` — the natural choice for
    /// dynamics spread over many decades of time.
    Geometric {
        /// First positive checkpoint.
        first: f64,
        /// Growth factor (`> 1`).
        factor: f64,
    },
    /// Evenly spaced checkpoints.
    Linear {
        /// Spacing between checkpoints.
        spacing: f64,
    },
    /// An explicit ascending list of times in `(0, horizon]`.
    Explicit(Vec<f64>),
}

impl CheckpointSchedule {
    /// Materialize the ascending checkpoint list for a horizon, ending
    /// exactly at the horizon.
    pub fn times(&self, horizon: f64) -> Result<Vec<f64>> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(CoreError::Domain(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let mut out = Vec::new();
        match self {
            Self::Geometric { first, factor } => {
                if !(*first > 0.0 && first.is_finite()) || !(*factor > 1.0 && factor.is_finite()) {
                    return Err(CoreError::Domain(format!(
                        "geometric schedule needs first > 0 and factor > 1, got {first}, {factor}"
                    )));
                }
                let mut t = *first;
                while t < horizon * (1.0 - 1e-12) {
                    out.push(t);
                    if out.len() > MAX_CHECKPOINTS {
                        return Err(CoreError::Domain(
                            "checkpoint schedule produces too many checkpoints".into(),
                        ));
                    }
                    t *= factor;
                }
            }
            Self::Linear { spacing } => {
                if !(*spacing > 0.0 && spacing.is_finite()) {
                    return Err(CoreError::Domain(format!(
                        "linear schedule needs positive spacing, got {spacing}"
                    )));
                }
                if horizon / spacing > MAX_CHECKPOINTS as f64 {
                    return Err(CoreError::Domain(
                        "checkpoint schedule produces too many checkpoints".into(),
                    ));
                }
                let mut k = 1u64;
                loop {
                    let t = spacing * k as f64;
                    if t >= horizon * (1.0 - 1e-12) {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
            }
            Self::Explicit(ts) => {
                for w in ts.windows(2) {
                    if !(w[1] > w[0]) {
                        return Err(CoreError::Domain(
                            "explicit checkpoint times must be strictly increasing".into(),
                        ));
                    }
                }
                for &t in ts {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(CoreError::Domain(format!(
                            "checkpoint times must be positive and finite, got {t}"
                        )));
                    }
                    if t < horizon * (1.0 - 1e-12) {
                        out.push(t);
                    }
                }
            }
        }
        out.push(horizon);
        Ok(out)
    }
}

/// Full output of an evolution run: one diagnostics record and one snapshot
/// per checkpoint (index 0 is `t = 0`), plus the exit reason.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    /// Diagnostics at each recorded checkpoint.
    pub records: Vec<DiagnosticsRecord>,
    /// Snapshots at the same checkpoints (same indexing as `records`).
    pub snapshots: Vec<State>,
    /// Why the run ended.
    pub exit: ExitReason,
}

impl EvolutionTrace {
    /// The state at the last recorded checkpoint.
    pub fn final_state(&self) -> &State {
        self.snapshots.last().expect("trace always has the t = 0 checkpoint")
    }
}

// ---------------------------------------------------------------------------
// Spatial operator
// ---------------------------------------------------------------------------

struct RhsScan {
    max_grad: f64,
    max_qp: f64,
    backward: u64,
}

/// Policy-aware rate evaluation: fills the cell fluxes `g` and node rates
/// `out`, and reports the gradient extremes needed by the dt caps.
fn scan_rhs(
    m: &ModelParams,
    policy: BackwardRegimePolicy,
    t: f64,
    h: f64,
    u: &[f64],
    g: &mut [f64],
    out: &mut [f64],
) -> Result<RhsScan> {
    let eps = m.eps();
    let eps2 = eps * eps;
    let flux = m.flux();
    let pot = m.potential();
    let kappa = flux.kappa();
    let n = u.len() - 1;
    let mut max_grad = 0.0f64;
    let mut max_qp = 0.0f64;
    let mut backward = 0u64;
    for i in 0..n {
        let s = eps2 * (u[i + 1] - u[i]) / h;
        let a = s.abs();
        max_grad = max_grad.max(a);
        let s_used = if a > kappa {
            backward += 1;
            match policy {
                BackwardRegimePolicy::Error => {
                    return Err(CoreError::BackwardRegime {
                        t,
                        cell: i,
                        s: a,
                        kappa,
                    });
                }
                BackwardRegimePolicy::Warn => s,
                BackwardRegimePolicy::Clamp => s.clamp(-kappa, kappa),
            }
        } else {
            s
        };
        g[i] = flux.q(s_used);
        max_qp = max_qp.max(flux.q_prime(s_used).abs());
    }
    out[0] = 2.0 * g[0] / h - pot.f_prime(u[0]);
    for j in 1..n {
        out[j] = (g[j] - g[j - 1]) / h - pot.f_prime(u[j]);
    }
    out[n] = -2.0 * g[n - 1] / h - pot.f_prime(u[n]);
    Ok(RhsScan {
        max_grad,
        max_qp,
        backward,
    })
}

/// Node rates `rhs_j` of the semi-discrete system for raw node values (true
/// fluxes, no backward-regime policy applied).
pub fn rhs(m: &ModelParams, u: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; u.len() - 1];
    let mut out = vec![0.0; u.len()];
    scan_rhs(m, BackwardRegimePolicy::Warn, 0.0, h, u, &mut g, &mut out)
        .expect("warn policy never fails");
    out
}

/// Trapezoid-weighted squared `L^2` norm of node values on a uniform grid.
pub fn trapezoid_l2_sq(h: f64, v: &[f64]) -> f64 {
    let n = v.len() - 1;
    let mut acc = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += w * h * x * x;
    }
    acc
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn trapezoid_l1_to_const(h: f64, v: &[f64], c: f64) -> f64 {
    let n = v.len() - 1;
    let mut acc = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += w * h * (x - c).abs();
    }
    acc
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct Engine<'a> {
    m: &'a ModelParams,
    cfg: &'a StepperConfig,
    h: f64,
    ncells: usize,
    dt: f64,
    accepts: u32,
    quiescent: bool,
    last_energy: f64,
    // Scratch buffers, allocated once.
    g: Vec<f64>,
    rhs0: Vec<f64>,
    v: Vec<f64>,
    vtry: Vec<f64>,
    rhs_try: Vec<f64>,
    gres: Vec<f64>,
    gres_try: Vec<f64>,
    delta: Vec<f64>,
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    scratch: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Attempt {
    Accepted,
    RejectNewton,
    RejectOvershoot,
    RejectEnergy,
}

impl<'a> Engine<'a> {
    fn new(m: &'a ModelParams, cfg: &'a StepperConfig, grid: &Grid, u0: &[f64], dt0: f64) -> Self {
        let n = grid.num_cells();
        let nn = grid.num_nodes();
        Engine {
            m,
            cfg,
            h: grid.h(),
            ncells: n,
            dt: dt0,
            accepts: 0,
            quiescent: false,
            last_energy: energy_total_raw(m, u0, grid.h()),
            g: vec![0.0; n],
            rhs0: vec![0.0; nn],
            v: vec![0.0; nn],
            vtry: vec![0.0; nn],
            rhs_try: vec![0.0; nn],
            gres: vec![0.0; nn],
            gres_try: vec![0.0; nn],
            delta: vec![0.0; nn],
            lo: vec![0.0; nn],
            di: vec![0.0; nn],
            up: vec![0.0; nn],
            scratch: Vec::new(),
        }
    }

    /// Fill `lo/di/up` with the rows of `I - dt * J(rhs)` at the iterate in
    /// `self.v`, applying the same flux-argument clamping as the residual.
    fn build_jacobian(&mut self, dt: f64) {
        let eps2 = self.m.eps() * self.m.eps();
        let flux = self.m.flux();
        let pot = self.m.potential();
        let kappa = flux.kappa();
        let clamping = self.cfg.backward_policy == BackwardRegimePolicy::Clamp;
        let h = self.h;
        let n = self.ncells;
        // b_i = eps^2 Q'(s_i) / h for each cell, stored in self.g.
        for i in 0..n {
            let mut s = eps2 * (self.v[i + 1] - self.v[i]) / h;
            if clamping {
                s = s.clamp(-kappa, kappa);
            }
            self.g[i] = eps2 * flux.q_prime(s) / h;
        }
        let f2 = |u: f64| pot.f_second_clamped(u);
        self.di[0] = 1.0 + dt * (2.0 * self.g[0] / h + f2(self.v[0]));
        self.up[0] = -dt * 2.0 * self.g[0] / h;
        self.lo[0] = 0.0;
        for j in 1..n {
            self.lo[j] = -dt * self.g[j - 1] / h;
            self.up[j] = -dt * self.g[j] / h;
            self.di[j] = 1.0 + dt * ((self.g[j] + self.g[j - 1]) / h + f2(self.v[j]));
        }
        self.lo[n] = -dt * 2.0 * self.g[n - 1] / h;
        self.di[n] = 1.0 + dt * (2.0 * self.g[n - 1] / h + f2(self.v[n]));
        self.up[n] = 0.0;
    }

    /// Damped Newton for the backward-Euler equation
    /// `v - u_old - dt rhs(v) = 0`, starting from `v = u_old`. On success the
    /// solution is left in `self.v`. Returns the iterations used, or `None`
    /// if the iteration failed to converge.
    fn newton_solve(&mut self, u_old: &[f64], t: f64, dt: f64) -> Result<Option<u32>> {
        let tol = self.cfg.newton_tol * (1.0 + sup_norm(u_old));
        self.v.copy_from_slice(u_old);
        // Iterate 0 sits at u_old, so G = -dt * rhs(u_old).
        for j in 0..self.gres.len() {
            self.gres[j] = -dt * self.rhs0[j];
        }
        let mut gnorm = sup_norm(&self.gres);
        let mut iters = 0u32;
        loop {
            if gnorm <= tol {
                return Ok(Some(iters));
            }
            if iters >= self.cfg.newton_max_iter {
                return Ok(None);
            }
            self.build_jacobian(dt);
            for j in 0..self.delta.len() {
                self.delta[j] = -self.gres[j];
            }
            if solve_tridiag_wrapper(
                &self.lo,
                &self.di,
                &self.up,
                &mut self.delta,
                &mut self.scratch,
            )
            .is_none()
            {
                return Ok(None);
            }
            // Correction-based convergence: when the Newton step itself is
            // below tolerance the iterate is as close to the backward-Euler
            // solution as the linearization can resolve, even if the raw
            // residual cannot reach `tol`. That happens at degenerate-well
            // plateaus (`theta < 2`), where nodes a few ulps away from the
            // wells see `F'` of order sqrt(ulp) and a clamped `F''` of order
            // `1e8`: the residual has an irreducible floor while the
            // correction is sub-ulp. Judging the residual alone would report
            // a spurious failure and pin `dt` permanently small.
            if sup_norm(&self.delta) <= tol {
                for j in 0..self.v.len() {
                    self.v[j] += self.delta[j];
                }
                return Ok(Some(iters + 1));
            }
            let mut lambda = 1.0f64;
            let mut accepted = false;
            while lambda >= NEWTON_MIN_LAMBDA * 0.999 {
                for j in 0..self.vtry.len() {
                    self.vtry[j] = self.v[j] + lambda * self.delta[j];
                }
                scan_rhs(
                    self.m,
                    self.cfg.backward_policy,
                    t,
                    self.h,
                    &self.vtry,
                    &mut self.g,
                    &mut self.rhs_try,
                )?;
                let mut gn_try = 0.0f64;
                for j in 0..self.gres_try.len() {
                    let gj = self.vtry[j] - u_old[j] - dt * self.rhs_try[j];
                    self.gres_try[j] = gj;
                    gn_try = gn_try.max(gj.abs());
                }
                if gn_try.is_finite() && gn_try <= (1.0 - 0.25 * lambda) * gnorm {
                    std::mem::swap(&mut self.v, &mut self.vtry);
                    std::mem::swap(&mut self.gres, &mut self.gres_try);
                    gnorm = gn_try;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Ok(None);
            }
            iters += 1;
        }
    }

    /// One accepted step, not advancing past `t_limit`. Updates `t`, `u`,
    /// and the counters in place.
    fn advance(
        &mut self,
        t: &mut f64,
        u: &mut Vec<f64>,
        stats: &mut StepStats,
        t_limit: f64,
    ) -> Result<()> {
        let pot = self.m.potential();
        let eps2 = self.m.eps() * self.m.eps();
        let scan = scan_rhs(
            self.m,
            self.cfg.backward_policy,
            *t,
            self.h,
            u,
            &mut self.g,
            &mut self.rhs0,
        )?;
        let rhs_sup = sup_norm(&self.rhs0);

        let mut cap = if self.quiescent {
            self.cfg.dt_max.max(DT_MAX_QUIESCENT)
        } else {
            self.cfg.dt_max
        };
        cap = cap.min(self.cfg.du_max / rhs_sup.max(1e-300));
        if self.cfg.scheme == Scheme::Explicit {
            let diffusive = EXPLICIT_SAFETY * self.h * self.h / (eps2 * scan.max_qp.max(1e-12));
            let f2max = u
                .iter()
                .fold(0.0f64, |m, &x| m.max(pot.f_second_clamped(x).abs()));
            let reactive = EXPLICIT_SAFETY / f2max.max(1e-12);
            cap = cap.min(diffusive).min(reactive);
        }
        self.dt = self.dt.min(cap);

        let mut halvings = 0u32;
        loop {
            let mut dt = self.dt;
            let to_limit = t_limit - *t;
            let landing = dt >= to_limit;
            if landing {
                dt = to_limit;
            }
            if dt < self.cfg.dt_min {
                return Err(CoreError::Stiffness {
                    t: *t,
                    dt_min: self.cfg.dt_min,
                });
            }
            if *t + dt == *t {
                return Err(CoreError::Stiffness {
                    t: *t,
                    dt_min: self.cfg.dt_min,
                });
            }

            let outcome = match self.cfg.scheme {
                Scheme::Explicit => {
                    for j in 0..self.v.len() {
                        self.v[j] = u[j] + dt * self.rhs0[j];
                    }
                    self.check_candidate(u, dt)
                }
                Scheme::Implicit => match self.newton_solve(u, *t, dt)? {
                    Some(iters) => {
                        stats.newton_iters += u64::from(iters);
                        self.check_candidate(u, dt)
                    }
                    None => Attempt::RejectNewton,
                },
            };

            match outcome {
                Attempt::Accepted => {
                    let mut ut_sq = 0.0;
                    let mut cross = 0.0;
                    let n = self.ncells;
                    for j in 0..self.v.len() {
                        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                        let rate = (self.v[j] - u[j]) / dt;
                        ut_sq += w * self.h * rate * rate;
                        cross += w * self.h * rate * self.rhs0[j];
                    }
                    // Energy change along the linear path from `u` to `v` is
                    // `-eps^{-1} int <rhs(u(s)), u_t> ds`; the trapezoid ends
                    // are `<rhs(u_old), rate>` and — for backward Euler,
                    // where `rate = rhs(v)` exactly — `||rate||^2`. (For the
                    // explicit scheme the two coincide at the left endpoint.)
                    stats.dissipation += dt * 0.5 * (cross + ut_sq);
                    self.quiescent = ut_sq < QUIESCENT_UT_SQ;
                    *t = if landing { t_limit } else { *t + dt };
                    std::mem::swap(u, &mut self.v);
                    self.last_energy = energy_total_raw(self.m, u, self.h);
                    stats.steps += 1;
                    stats.last_dt = dt;
                    stats.backward_cells += scan.backward;
                    self.accepts += 1;
                    if self.accepts >= GROWTH_ACCEPTS {
                        self.dt = (self.dt * GROWTH_FACTOR).min(self.cfg.dt_max.max(
                            if self.quiescent { DT_MAX_QUIESCENT } else { self.cfg.dt_max },
                        ));
                    }
                    return Ok(());
                }
                Attempt::RejectNewton
                | Attempt::RejectOvershoot
                | Attempt::RejectEnergy => {
                    stats.rejected += 1;
                    self.accepts = 0;
                    halvings += 1;
                    if halvings > MAX_DT_HALVINGS {
                        return Err(if outcome == Attempt::RejectNewton {
                            CoreError::Newton { t: *t, halvings }
                        } else {
                            CoreError::Stiffness {
                                t: *t,
                                dt_min: self.cfg.dt_min,
                            }
                        });
                    }
                    self.dt = dt * 0.5;
                }
            }
        }
    }

    /// Accept/reject checks for the candidate state in `self.v`.
    fn check_candidate(&mut self, u_old: &[f64], _dt: f64) -> Attempt {
        let mut du_sup = 0.0f64;
        let mut finite = true;
        for j in 0..self.v.len() {
            let d = self.v[j] - u_old[j];
            if !d.is_finite() {
                finite = false;
                break;
            }
            du_sup = du_sup.max(d.abs());
        }
        if !finite || du_sup > REJECT_DU_FACTOR * self.cfg.du_max {
            return Attempt::RejectOvershoot;
        }
        let e_new = energy_total_raw(self.m, &self.v, self.h);
        if !e_new.is_finite()
            || e_new > self.last_energy + self.cfg.energy_drift_tol * (1.0 + self.last_energy.abs())
        {
            return Attempt::RejectEnergy;
        }
        Attempt::Accepted
    }

    /// Diagnostics at the current state: instantaneous `||u_t||^2` and the
    /// largest scaled gradient.
    fn diagnostics(&mut self, t: f64, u: &[f64]) -> Result<(f64, f64)> {
        let scan = scan_rhs(
            self.m,
            self.cfg.backward_policy,
            t,
            self.h,
            u,
            &mut self.g,
            &mut self.rhs0,
        )?;
        let n = self.ncells;
        let mut ut_sq = 0.0;
        for (j, &r) in self.rhs0.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            ut_sq += w * self.h * r * r;
        }
        Ok((ut_sq, scan.max_grad))
    }
}

fn solve_tridiag_wrapper(
    lo: &[f64],
    di: &[f64],
    up: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Option<()> {
    crate::numerics::solve_tridiag(lo, di, up, rhs, scratch)
}

// ---------------------------------------------------------------------------
// Public driver
// ---------------------------------------------------------------------------

fn check_grid(m: &ModelParams, u0: &Profile) -> Result<()> {
    if u0.grid().a() != m.a() || u0.grid().b() != m.b() {
        return Err(CoreError::Domain(format!(
            "initial datum lives on [{}, {}] but the model interval is [{}, {}]",
            u0.grid().a(),
            u0.grid().b(),
            m.a(),
            m.b()
        )));
    }
    Ok(())
}

fn converged_well(h: f64, u: &[f64]) -> Option<f64> {
    for well in [1.0, -1.0] {
        if trapezoid_l1_to_const(h, u, well) < CONVERGED_L1_TOL {
            return Some(well);
        }
    }
    None
}

/// Advance a state by exactly one accepted step (a debugging-grade entry
/// point; [`evolve`] runs whole horizons without per-step overhead).
pub fn step(m: &ModelParams, cfg: &StepperConfig, state: &State) -> Result<State> {
    cfg.validate()?;
    check_grid(m, &state.u)?;
    let grid = state.u.grid().clone();
    let dt0 = if state.stats.last_dt > 0.0 {
        state.stats.last_dt
    } else {
        cfg.dt_init
    };
    let mut u = state.u.values().to_vec();
    let mut t = state.t;
    let mut stats = state.stats;
    let mut engine = Engine::new(m, cfg, &grid, &u, dt0);
    engine.advance(&mut t, &mut u, &mut stats, f64::INFINITY)?;
    let u = Profile::new(grid, u, state.u.meta())?;
    Ok(State { t, u, stats })
}

/// Evolve from an arbitrary starting state through an ascending list of
/// absolute checkpoint times (all beyond `start.t`), recording diagnostics
/// and snapshots at the starting time and at every checkpoint. Exits early
/// (at a checkpoint) once the solution is `L^1`-close to a constant well.
///
/// This is the restart primitive: collapse-time refinement re-runs short
/// spans from stored snapshots instead of repeating whole horizons. The
/// stepper resumes with the snapshot's last accepted `dt`.
pub fn evolve_span(
    m: &ModelParams,
    cfg: &StepperConfig,
    start: &State,
    checkpoints: &[f64],
) -> Result<EvolutionTrace> {
    cfg.validate()?;
    check_grid(m, &start.u)?;
    if checkpoints.is_empty() {
        return Err(CoreError::Domain("at least one checkpoint time is required".into()));
    }
    for w in checkpoints.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::Domain(
                "checkpoint times must be strictly increasing".into(),
            ));
        }
    }
    if !(checkpoints[0] > start.t) || !checkpoints.iter().all(|t| t.is_finite()) {
        return Err(CoreError::Domain(format!(
            "checkpoint times must be finite and beyond the start time {}",
            start.t
        )));
    }

    let grid = start.u.grid().clone();
    let h = grid.h();
    let mut u = start.u.values().to_vec();
    let mut t = start.t;
    let mut stats = start.stats;
    let dt0 = if stats.last_dt > 0.0 {
        stats.last_dt
    } else {
        cfg.dt_init
    };
    let mut engine = Engine::new(m, cfg, &grid, &u, dt0);

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut snapshots: Vec<State> = Vec::new();
    let mut exit = ExitReason::HorizonReached;
    let meta = start.u.meta().to_string();

    let record = |engine: &mut Engine,
                  t: f64,
                  u: &[f64],
                  stats: StepStats,
                  records: &mut Vec<DiagnosticsRecord>,
                  snapshots: &mut Vec<State>|
     -> Result<Option<f64>> {
        let prof = Profile::new(grid.clone(), u.to_vec(), meta.as_str())?;
        let (ut_sq, max_grad) = engine.diagnostics(t, u)?;
        let zeros = zeros_of(&prof);
        records.push(DiagnosticsRecord {
            t,
            energy: energy(m, &prof).total,
            ut_l2_sq: ut_sq,
            n_zeros: zeros.len(),
            zero_positions: zeros,
            max_grad,
        });
        snapshots.push(State { t, u: prof, stats });
        Ok(converged_well(h, u))
    };

    let well0 = record(&mut engine, t, &u, stats, &mut records, &mut snapshots)?;
    if let Some(well) = well0 {
        return Ok(EvolutionTrace {
            records,
            snapshots,
            exit: ExitReason::Converged { well, t },
        });
    }

    'outer: for &tc in checkpoints {
        while t < tc {
            engine.advance(&mut t, &mut u, &mut stats, tc)?;
        }
        let well = record(&mut engine, t, &u, stats, &mut records, &mut snapshots)?;
        if let Some(well) = well {
            exit = ExitReason::Converged { well, t };
            break 'outer;
        }
    }

    Ok(EvolutionTrace {
        records,
        snapshots,
        exit,
    })
}

/// Evolve an initial datum from `t = 0` to `horizon` under a checkpoint
/// schedule. See [`evolve_span`] for the recording and early-exit rules.
pub fn evolve(
    m: &ModelParams,
    cfg: &StepperConfig,
    u0: &Profile,
    horizon: f64,
    schedule: &CheckpointSchedule,
) -> Result<EvolutionTrace> {
    let times = schedule.times(horizon)?;
    let start = State {
        t: 0.0,
        u: u0.clone(),
        stats: StepStats::default(),
    };
    evolve_span(m, cfg, &start, &times)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

//! Model data: the forward-backward flux family, the double-well potential
//! family, and the parameter bundle tying them to an interval and a layer
//! width `eps`.
//!
//! # Flux
//!
//! A flux `Q` is odd, vanishes at infinity, and has a single forward regime:
//! `Q' > 0` on `(-kappa, kappa)` and `Q' < 0` beyond. Two prototypes are
//! provided, optionally scaled by `alpha > 0`:
//!
//! ```text
//!   rational:  Q(s) = alpha s / (1 + s^2),        kappa = 1
//!   gaussian:  Q(s) = alpha s exp(-s^2),          kappa = 1/sqrt(2)
//! ```
//!
//! `Qt` denotes the primitive of `Q` with `Qt(0) = 0`. Derived constants:
//!
//! ```text
//!   ell = kappa Q(kappa) - Qt(kappa) > 0,
//!   q_max_slope = max of Q' over [-kappa, kappa]  (attained at 0 here).
//! ```
//!
//! # Potential
//!
//! The double-well family is `F(u) = |1 - u^2|^theta / (2 theta)` with
//! `theta > 1`: wells at +-1 with `F = F' = 0` there, `F > 0` elsewhere, and
//! near each well the two-sided sandwich
//!
//! ```text
//!   (lambda1 / theta) |1 -+ u|^theta <= F(u) <= (lambda2 / theta) |1 -+ u|^theta
//! ```
//!
//! on a window `|1 -+ u| <= eta`. The window constants are measured
//! numerically at construction; the potential is even, so one well suffices.
//!
//! # Admissibility
//!
//! Stationary constructions need `eps^2 max F <= ell` so that `J_eps` is
//! defined on all attained values; the threshold is `eps0 = sqrt(ell / max
//! F)`. The [`ModelParams`] constructor enforces `eps < 0.95 eps0` and an
//! explicit override constructor relaxes that to `eps < eps0` for
//! experiments near the threshold.

use crate::error::CoreError;
use crate::numerics::golden_max;
use crate::Result;

/// Magnitude clamp applied to `F''` wherever solver machinery needs a finite
/// second derivative (`theta < 2` makes `F''` blow up at the wells). Only
/// Jacobians and stability bounds see the clamp; residuals never do.
pub const F_SECOND_CLAMP: f64 = 1e8;

/// Prototype shape of the forward-backward flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// `Q(s) = s / (1 + s^2)`.
    Rational,
    /// `Q(s) = s exp(-s^2)`.
    Gaussian,
}

impl FluxKind {
    /// Parse from the names used in config files.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "rational" => Ok(FluxKind::Rational),
            "gaussian" => Ok(FluxKind::Gaussian),
            other => Err(CoreError::Config(format!(
                "unknown flux kind {other:?} (expected \"rational\" or \"gaussian\")"
            ))),
        }
    }

    /// Name used in config files.
    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Rational => "rational",
            FluxKind::Gaussian => "gaussian",
        }
    }
}

/// A flux `alpha * Q_kind`, with its derived constants cached.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSpec {
    kind: FluxKind,
    alpha: f64,
    kappa: f64,
    ell: f64,
    q_max_slope: f64,
}

impl FluxSpec {
    /// The rational prototype with `alpha = 1`.
    pub fn rational() -> Self {
        Self::scaled(FluxKind::Rational, 1.0).expect("alpha = 1 is valid")
    }

    /// The gaussian prototype with `alpha = 1`.
    pub fn gaussian() -> Self {
        Self::scaled(FluxKind::Gaussian, 1.0).expect("alpha = 1 is valid")
    }

    /// A prototype scaled by `alpha > 0` (multiplies `Q`, `Q'` and `Qt`;
    /// leaves `kappa` unchanged; scales `ell` and `q_max_slope` linearly).
    pub fn scaled(kind: FluxKind, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(CoreError::Domain(format!(
                "flux scale alpha must be positive and finite, got {alpha}"
            )));
        }
        let kappa = match kind {
            FluxKind::Rational => 1.0,
            FluxKind::Gaussian => std::f64::consts::FRAC_1_SQRT_2,
        };
        let mut spec = Self {
            kind,
            alpha,
            kappa,
            ell: 0.0,
            q_max_slope: 0.0,
        };
        // ell = kappa Q(kappa) - Qt(kappa), evaluated with the same closed
        // forms as q/q_tilde so endpoint identities hold to rounding error.
        spec.ell = kappa * spec.q(kappa) - spec.q_tilde(kappa);
        // Q' is even and unimodal on the forward interval for both
        // prototypes; measure its maximum rather than assuming it sits at 0.
        let (_, m) = golden_max(&mut |s| spec.q_prime(s), 0.0, kappa, 1e-13);
        spec.q_max_slope = m.max(spec.q_prime(0.0));
        Ok(spec)
    }

    /// Prototype of this flux.
    pub fn kind(&self) -> FluxKind {
        self.kind
    }

    /// Scale factor `alpha`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Edge of the forward-diffusion regime.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `kappa Q(kappa) - Qt(kappa)`, the range constant of the stationary
    /// first integral.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Maximum of `Q'` over the forward interval `[-kappa, kappa]`.
    pub fn q_max_slope(&self) -> f64 {
        self.q_max_slope
    }

    /// `Q'(0)` (equals `alpha` for both prototypes).
    pub fn q_prime0(&self) -> f64 {
        self.q_prime(0.0)
    }

    /// Flux value `Q(s)`.
    pub fn q(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::Rational => self.alpha * s / (1.0 + s * s),
            FluxKind::Gaussian => self.alpha * s * (-s * s).exp(),
        }
    }

    /// Flux slope `Q'(s)`.
    pub fn q_prime(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::Rational => {
                let d = 1.0 + s * s;
                self.alpha * (1.0 - s * s) / (d * d)
            }
            FluxKind::Gaussian => self.alpha * (1.0 - 2.0 * s * s) * (-s * s).exp(),
        }
    }

    /// Primitive `Qt(s)` with `Qt(0) = 0`. Uses `ln_1p`/`exp_m1` so small
    /// arguments keep full relative accuracy.
    pub fn q_tilde(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::Rational => self.alpha * 0.5 * (s * s).ln_1p(),
            FluxKind::Gaussian => self.alpha * (-0.5) * (-s * s).exp_m1(),
        }
    }
}

/// Double-well potential `F(u) = |1 - u^2|^theta / (2 theta)`, `theta > 1`,
/// with numerically measured well-window constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    theta: f64,
    eta: f64,
    lambda1: f64,
    lambda2: f64,
    f_max: f64,
}

impl PotentialSpec {
    /// Default well-window half-width for the sandwich constants.
    pub const DEFAULT_ETA: f64 = 0.1;

    /// Build with the default window `eta = 0.1`.
    pub fn new(theta: f64) -> Result<Self> {
        Self::with_window(theta, Self::DEFAULT_ETA)
    }

    /// Build with an explicit window half-width `eta` in `(0, 1)`.
    pub fn with_window(theta: f64, eta: f64) -> Result<Self> {
        if !(theta > 1.0 && theta.is_finite()) {
            return Err(CoreError::Domain(format!(
                "well exponent theta must be finite and > 1, got {theta}"
            )));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(CoreError::Domain(format!(
                "well window eta must lie in (0, 1), got {eta}"
            )));
        }
        let mut spec = Self {
            theta,
            eta,
            lambda1: 0.0,
            lambda2: 0.0,
            f_max: 0.0,
        };
        // Window ratio R(u) = theta F(u) / |1 - u|^theta around the +1 well
        // (F is even, so the -1 well gives the same constants). Dense
        // sampling brackets the extrema; golden search polishes them. The
        // exact u = 1 point is excluded (0/0); its limit is interior to the
        // sampled range of values.
        let ratio = |u: f64| theta * spec.f(u) / (1.0 - u).abs().powf(theta);
        const SAMPLES: usize = 1024;
        let mut best_min = (f64::INFINITY, 0.0);
        let mut best_max = (f64::NEG_INFINITY, 0.0);
        for k in 0..=SAMPLES {
            if k == SAMPLES / 2 {
                continue; // u == 1 exactly
            }
            let u = 1.0 - eta + 2.0 * eta * k as f64 / SAMPLES as f64;
            let r = ratio(u);
            if r < best_min.0 {
                best_min = (r, u);
            }
            if r > best_max.0 {
                best_max = (r, u);
            }
        }
        let du = 2.0 * eta / SAMPLES as f64;
        let refine = |u0: f64, sign: f64| {
            let lo = (u0 - du).max(1.0 - eta);
            let hi = (u0 + du).min(1.0 + eta);
            let (_, v) = golden_max(&mut |u| sign * ratio(u), lo, hi, 1e-12);
            sign * v
        };
        let lambda1 = refine(best_min.1, -1.0).min(best_min.0);
        let lambda2 = refine(best_max.1, 1.0).max(best_max.0);
        spec.lambda1 = lambda1;
        spec.lambda2 = lambda2;
        let (_, fm) = golden_max(&mut |u| spec.f(u), -1.0, 1.0, 1e-13);
        spec.f_max = fm.max(spec.f(0.0));
        Ok(spec)
    }

    /// Well exponent.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Well window half-width used for the sandwich constants.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Lower sandwich constant on the well window.
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// Upper sandwich constant on the well window.
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Maximum of `F` over `[-1, 1]` (attained at 0 for this family).
    pub fn f_max_between_wells(&self) -> f64 {
        self.f_max
    }

    /// Potential value `F(u)`.
    pub fn f(&self, u: f64) -> f64 {
        let w = (1.0 - u * u).abs();
        w.powf(self.theta) / (2.0 * self.theta)
    }

    /// Derivative `F'(u) = -u (1 - u^2) |1 - u^2|^(theta - 2)`, continuous
    /// across the wells (0 there) and sign-correct for `|u| > 1`.
    pub fn f_prime(&self, u: f64) -> f64 {
        let w = 1.0 - u * u;
        if w == 0.0 {
            return 0.0; // theta > 1 makes the limit 0 even where theta < 2.
        }
        -u * w.signum() * w.abs().powf(self.theta - 1.0)
    }

    /// Second derivative `F''(u) = |1 - u^2|^(theta-2) ((2 theta - 1) u^2 - 1)`.
    /// Unbounded at the wells for `theta < 2` (returns +-infinity there).
    pub fn f_second(&self, u: f64) -> f64 {
        let w = (1.0 - u * u).abs();
        let shape = (2.0 * self.theta - 1.0) * u * u - 1.0;
        if w == 0.0 {
            return match self.theta {
                t if t > 2.0 => 0.0,
                t if t == 2.0 => shape,
                _ => f64::INFINITY * shape.signum(),
            };
        }
        w.powf(self.theta - 2.0) * shape
    }

    /// `F''` with magnitude clamped to [`F_SECOND_CLAMP`]; finite everywhere.
    pub fn f_second_clamped(&self, u: f64) -> f64 {
        self.f_second(u).clamp(-F_SECOND_CLAMP, F_SECOND_CLAMP)
    }

    /// `F(1 - delta)` evaluated through `1 - u^2 = delta (2 - delta)`.
    ///
    /// For `delta` below ~1e-8 the direct `1 - u*u` subtraction loses most
    /// of its digits; this form is exact to rounding at any `delta`. By
    /// evenness it also covers `F(-1 + delta)`.
    pub fn f_from_delta(&self, delta: f64) -> f64 {
        let w = (delta * (2.0 - delta)).abs();
        w.powf(self.theta) / (2.0 * self.theta)
    }

    /// Stable `F(v + dv) - F(v)` for `v`, `v + dv` in `[-1, 1]`.
    ///
    /// Written through `w = 1 - u^2` so nearby arguments do not cancel:
    /// `w(v + dv) - w(v) = -dv (2 v + dv)` is exact to rounding, and the
    /// power difference goes through `exp_m1(theta ln_1p(...))`.
    pub fn f_diff_shift(&self, v: f64, dv: f64) -> f64 {
        let wv = (1.0 - v) * (1.0 + v);
        if wv <= 0.0 {
            return self.f(v + dv) - self.f(v);
        }
        let dw = -dv * (2.0 * v + dv);
        let r = dw / wv;
        if r <= -1.0 {
            return self.f(v + dv) - self.f(v);
        }
        wv.powf(self.theta) / (2.0 * self.theta) * (self.theta * r.ln_1p()).exp_m1()
    }
}

/// Full parameter bundle: interval `[a, b]`, layer width `eps`, flux, and
/// potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    eps: f64,
    a: f64,
    b: f64,
    flux: FluxSpec,
    potential: PotentialSpec,
    eps0: f64,
}

/// Default fraction of `eps0` below which `eps` must stay (guards the
/// stationary constructions away from the degenerate threshold).
pub const EPS_SAFETY_FRACTION: f64 = 0.95;

impl ModelParams {
    /// Build and validate; requires `a < b`, `0 < eps < 0.95 eps0`.
    pub fn new(eps: f64, a: f64, b: f64, flux: FluxSpec, potential: PotentialSpec) -> Result<Self> {
        let m = Self::build(eps, a, b, flux, potential)?;
        if m.eps >= EPS_SAFETY_FRACTION * m.eps0 {
            return Err(CoreError::Domain(format!(
                "eps = {} is not below {} * eps0 = {:.6} (eps0 = {:.6}); use \
                 new_near_threshold to run closer to the admissibility limit",
                m.eps,
                EPS_SAFETY_FRACTION,
                EPS_SAFETY_FRACTION * m.eps0,
                m.eps0
            )));
        }
        Ok(m)
    }

    /// Build with the safety margin relaxed: any `0 < eps < eps0` is
    /// accepted. Intended for experiments probing the threshold.
    pub fn new_near_threshold(
        eps: f64,
        a: f64,
        b: f64,
        flux: FluxSpec,
        potential: PotentialSpec,
    ) -> Result<Self> {
        let m = Self::build(eps, a, b, flux, potential)?;
        if m.eps >= m.eps0 {
            return Err(CoreError::Domain(format!(
                "eps = {} reaches eps0 = {:.6}; the stationary first integral \
                 is not invertible on the attained range",
                m.eps, m.eps0
            )));
        }
        Ok(m)
    }

    fn build(eps: f64, a: f64, b: f64, flux: FluxSpec, potential: PotentialSpec) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CoreError::Domain(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(CoreError::Domain(format!(
                "interval must satisfy a < b with finite endpoints, got [{a}, {b}]"
            )));
        }
        let eps0 = (flux.ell() / potential.f_max_between_wells()).sqrt();
        Ok(Self {
            eps,
            a,
            b,
            flux,
            potential,
            eps0,
        })
    }

    /// Layer width parameter.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Left endpoint.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Right endpoint.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// The flux.
    pub fn flux(&self) -> &FluxSpec {
        &self.flux
    }

    /// The potential.
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    /// Admissibility threshold `sqrt(ell / max F)`.
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// Same model on a different interval (used by harness overrides).
    pub fn with_interval(&self, a: f64, b: f64) -> Result<Self> {
        Self::build(self.eps, a, b, self.flux.clone(), self.potential.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_2: f64 = std::f64::consts::LN_2;

    #[test]
    fn rational_flux_constants() {
        let q = FluxSpec::rational();
        assert_eq!(q.kappa(), 1.0);
        // ell = 1/2 - ln(2)/2.
        assert!((q.ell() - (0.5 - 0.5 * LN_2)).abs() < 1e-15);
        assert!((q.ell() - 0.153426).abs() < 1e-6);
        // max slope sits at 0 and equals 1.
        assert!((q.q_max_slope() - 1.0).abs() < 1e-12);
        assert!((q.q_prime0() - 1.0).abs() < 1e-15);
        // Q(1) = 1/2 is the global max; Q odd; Q -> 0 at infinity.
        assert!((q.q(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(q.q(-2.0), -q.q(2.0));
        assert!(q.q(1e8).abs() < 1e-7);
    }

    #[test]
    fn gaussian_flux_constants() {
        let q = FluxSpec::gaussian();
        assert!((q.kappa() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        // ell = exp(-1/2) - 1/2.
        assert!((q.ell() - ((-0.5f64).exp() - 0.5)).abs() < 1e-15);
        assert!((q.ell() - 0.106531).abs() < 1e-6);
        assert!((q.q_max_slope() - 1.0).abs() < 1e-12);
        // Q'(kappa) = 0 at the regime edge.
        assert!(q.q_prime(q.kappa()).abs() < 1e-15);
    }

    #[test]
    fn scaled_flux_scales_linearly() {
        for kind in [FluxKind::Rational, FluxKind::Gaussian] {
            let base = FluxSpec::scaled(kind, 1.0).unwrap();
            let four = FluxSpec::scaled(kind, 4.0).unwrap();
            assert_eq!(four.kappa(), base.kappa());
            assert!((four.ell() - 4.0 * base.ell()).abs() < 1e-14);
            assert!((four.q_max_slope() - 4.0 * base.q_max_slope()).abs() < 1e-11);
            assert!((four.q(0.3) - 4.0 * base.q(0.3)).abs() < 1e-15);
            assert!((four.q_tilde(0.3) - 4.0 * base.q_tilde(0.3)).abs() < 1e-15);
        }
        assert!(FluxSpec::scaled(FluxKind::Rational, 0.0).is_err());
        assert!(FluxSpec::scaled(FluxKind::Rational, -1.0).is_err());
    }

    #[test]
    fn q_tilde_small_argument_accuracy() {
        // Qt(s) ~ Q'(0) s^2 / 2 for small s; naive formulas lose all digits.
        for q in [FluxSpec::rational(), FluxSpec::gaussian()] {
            for s in [1e-6, 1e-8, 1e-10] {
                let expect = 0.5 * s * s;
                let got = q.q_tilde(s);
                assert!(
                    ((got - expect) / expect).abs() < 1e-10,
                    "{:?} s={s}: {got} vs {expect}",
                    q.kind()
                );
            }
        }
    }

    #[test]
    fn potential_well_basics() {
        let p = PotentialSpec::new(2.0).unwrap();
        assert_eq!(p.f(1.0), 0.0);
        assert_eq!(p.f(-1.0), 0.0);
        assert_eq!(p.f_prime(1.0), 0.0);
        assert!((p.f(0.0) - 0.25).abs() < 1e-16);
        assert!((p.f_max_between_wells() - 0.25).abs() < 1e-12);
        // theta = 2: F'(u) = u^3 - u, F''(u) = 3u^2 - 1.
        for u in [-1.5, -0.7, 0.0, 0.3, 0.9, 1.2] {
            assert!((p.f_prime(u) - (u * u * u - u)).abs() < 1e-14, "u = {u}");
            assert!((p.f_second(u) - (3.0 * u * u - 1.0)).abs() < 1e-13, "u = {u}");
        }
    }

    #[test]
    fn potential_forces_point_back_to_wells() {
        // -F' must push u toward +-1 from either side of each well.
        for theta in [1.5, 2.0, 3.0, 4.0] {
            let p = PotentialSpec::new(theta).unwrap();
            assert!(-p.f_prime(0.9) > 0.0, "theta {theta}: push up below +1");
            assert!(-p.f_prime(1.1) < 0.0, "theta {theta}: push down above +1");
            assert!(-p.f_prime(-0.9) < 0.0, "theta {theta}: push down above -1");
            assert!(-p.f_prime(-1.1) > 0.0, "theta {theta}: push up below -1");
        }
    }

    #[test]
    fn potential_second_derivative_at_wells_by_exponent() {
        assert_eq!(PotentialSpec::new(3.0).unwrap().f_second(1.0), 0.0);
        assert_eq!(PotentialSpec::new(2.0).unwrap().f_second(1.0), 2.0);
        assert_eq!(PotentialSpec::new(1.5).unwrap().f_second(1.0), f64::INFINITY);
        let clamped = PotentialSpec::new(1.5).unwrap().f_second_clamped(1.0);
        assert_eq!(clamped, F_SECOND_CLAMP);
    }

    #[test]
    fn window_constants_match_closed_form() {
        // For this family the ratio is |1 + u|^theta / 2, monotone on the
        // window, so lambda1 = (2 - eta)^theta / 2, lambda2 = (2 + eta)^theta / 2.
        for theta in [1.5, 2.0, 4.0] {
            let p = PotentialSpec::new(theta).unwrap();
            let eta = PotentialSpec::DEFAULT_ETA;
            let l1 = (2.0 - eta).powf(theta) / 2.0;
            let l2 = (2.0 + eta).powf(theta) / 2.0;
            assert!(
                (p.lambda1() - l1).abs() < 1e-6 * l1,
                "theta {theta}: lambda1 {} vs {l1}",
                p.lambda1()
            );
            assert!(
                (p.lambda2() - l2).abs() < 1e-6 * l2,
                "theta {theta}: lambda2 {} vs {l2}",
                p.lambda2()
            );
            assert!(p.lambda1() < p.lambda2());
        }
    }

    #[test]
    fn f_from_delta_matches_direct_and_extends_below_rounding() {
        let p = PotentialSpec::new(2.0).unwrap();
        // Moderate delta: agrees with the direct form.
        for delta in [0.5, 0.1, 1e-4] {
            let direct = p.f(1.0 - delta);
            let stable = p.f_from_delta(delta);
            assert!(((stable - direct) / direct).abs() < 1e-16 + 1e-12);
        }
        // Tiny delta: theta = 2 gives F = (delta (2 - delta))^2 / 4 exactly.
        let delta = 1e-13f64;
        let expect = (delta * (2.0 - delta)).powi(2) / 4.0;
        let got = p.f_from_delta(delta);
        assert!(((got - expect) / expect).abs() < 1e-14);
    }

    #[test]
    fn f_diff_shift_matches_direct_when_safe_and_beats_it_when_not() {
        let p = PotentialSpec::new(2.0).unwrap();
        // Safe region: direct difference is accurate; both must agree.
        let d = p.f_diff_shift(0.3, 0.2);
        assert!((d - (p.f(0.5) - p.f(0.3))).abs() < 1e-15);
        // Tiny shift: direct difference cancels; stable path must match the
        // first-order expansion F'(v) dv.
        let v = 0.7;
        let dv = 1e-12;
        let d = p.f_diff_shift(v, dv);
        let expect = p.f_prime(v) * dv;
        assert!(
            ((d - expect) / expect).abs() < 1e-6,
            "stable diff {d} vs linearization {expect}"
        );
    }

    #[test]
    fn eps0_reference_values() {
        let rat = ModelParams::new(
            0.1,
            -4.0,
            4.0,
            FluxSpec::rational(),
            PotentialSpec::new(2.0).unwrap(),
        )
        .unwrap();
        assert!((rat.eps0() - 0.78339).abs() < 1e-3);
        let gau = ModelParams::new(
            0.1,
            -4.0,
            4.0,
            FluxSpec::gaussian(),
            PotentialSpec::new(2.0).unwrap(),
        )
        .unwrap();
        assert!((gau.eps0() - 0.65279).abs() < 1e-3);
    }

    #[test]
    fn eps_guard_and_override() {
        let flux = FluxSpec::rational;
        let pot = || PotentialSpec::new(2.0).unwrap();
        // 0.77 < eps0 ~ 0.7834 but above the 95% guard.
        assert!(ModelParams::new(0.77, -1.0, 1.0, flux(), pot()).is_err());
        assert!(ModelParams::new_near_threshold(0.77, -1.0, 1.0, flux(), pot()).is_ok());
        // At or above eps0 even the override refuses.
        assert!(ModelParams::new_near_threshold(0.79, -1.0, 1.0, flux(), pot()).is_err());
        // Bad intervals and eps values.
        assert!(ModelParams::new(0.1, 1.0, -1.0, flux(), pot()).is_err());
        assert!(ModelParams::new(0.0, -1.0, 1.0, flux(), pot()).is_err());
        assert!(ModelParams::new(-0.1, -1.0, 1.0, flux(), pot()).is_err());
    }
}

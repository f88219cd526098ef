//! Internal numerical kernels: adaptive Gauss-Kronrod quadrature, safeguarded
//! bracketed root finding, golden-section maximization, monotone cubic Hermite
//! interpolation, a tridiagonal solver, and least-squares line fits.
//!
//! Everything here is deterministic and allocation-light. The quadrature uses
//! interior nodes only (Gauss-Kronrod 7-15), so integrands with integrable
//! endpoint singularities can be integrated without evaluating the endpoints.

use crate::error::CoreError;

/// Kronrod abscissae for the 7-15 pair (positive half; last entry is 0).
/// Standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// 7-point Gauss weights matching the odd-indexed entries of `XGK`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// One Gauss-Kronrod 7-15 panel over `[a, b]`.
///
/// Returns `(kronrod_value, error_estimate)`. The error estimate is the
/// usual `|K15 - G7|` magnitude; it is conservative for smooth integrands.
pub(crate) fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let sum = f1 + f2;
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }

    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive quadrature of `f` over `[a, b]` with the Gauss-Kronrod 7-15 rule
/// under a global error budget: the panel with the worst error estimate is
/// bisected until the summed estimates satisfy
/// `err <= abs_tol + rel_tol * |integral|`.
///
/// Endpoints are never evaluated, so integrable endpoint singularities (and
/// 0/0 limits at interval ends) are handled; worst-first refinement puts the
/// whole budget on the singular cascade. Panels whose error estimate sits at
/// the integrand's roundoff floor are frozen instead of split forever; if
/// every panel is frozen the leftover error must itself be at roundoff scale
/// or the quadrature reports failure.
pub(crate) fn adaptive_quad<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64, CoreError> {
    const MAX_PANELS: usize = 4096;
    // Error estimates below this fraction of a panel's value are roundoff
    // noise of the integrand evaluation, not discretization error.
    const NOISE_REL: f64 = 5.0e-14;

    if a == b {
        return Ok(0.0);
    }

    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
        frozen: bool,
    }

    let (v0, e0) = gk15(f, a, b);
    let mut panels = vec![Panel {
        a,
        b,
        value: v0,
        err: e0,
        frozen: false,
    }];

    loop {
        let mut total = 0.0;
        let mut total_abs = 0.0;
        let mut toterr = 0.0;
        let mut worst: Option<usize> = None;
        let mut worst_err = 0.0;
        for (i, p) in panels.iter().enumerate() {
            total += p.value;
            total_abs += p.value.abs();
            toterr += p.err;
            if !p.frozen && p.err > worst_err {
                worst_err = p.err;
                worst = Some(i);
            }
        }
        if !total.is_finite() {
            return Err(CoreError::Quadrature(
                "integrand produced a non-finite value".into(),
            ));
        }
        let tol = abs_tol + rel_tol * total.abs();
        if toterr <= tol {
            return Ok(total);
        }
        let Some(i) = worst else {
            // Everything is at the noise floor; accept if the leftover error
            // is roundoff-scale relative to the mass of the integrand.
            if toterr <= abs_tol + 1e-12 * total_abs {
                return Ok(total);
            }
            return Err(CoreError::Quadrature(format!(
                "quadrature stalled at roundoff: error estimate {toterr:.3e} \
                 exceeds tolerance {tol:.3e} with all panels frozen"
            )));
        };
        if panels.len() >= MAX_PANELS {
            return Err(CoreError::Quadrature(format!(
                "quadrature used {MAX_PANELS} panels without reaching \
                 tolerance {tol:.3e} (error estimate {toterr:.3e})"
            )));
        }
        let (pa, pb) = (panels[i].a, panels[i].b);
        let mid = 0.5 * (pa + pb);
        let at_noise = panels[i].err <= NOISE_REL * panels[i].value.abs() + 1e-305;
        if at_noise || !(pa < mid && mid < pb) {
            panels[i].frozen = true;
            continue;
        }
        let (v1, e1) = gk15(f, pa, mid);
        let (v2, e2) = gk15(f, mid, pb);
        panels[i] = Panel {
            a: pa,
            b: mid,
            value: v1,
            err: e1,
            frozen: false,
        };
        panels.push(Panel {
            a: mid,
            b: pb,
            value: v2,
            err: e2,
            frozen: false,
        });
    }
}

/// Safeguarded root solve of a continuous function on a sign-changing
/// bracket `[lo, hi]` (requires `f(lo) <= 0 <= f(hi)` up to sign swap).
///
/// Secant proposals accelerated convergence; any proposal that leaves the
/// bracket, or fails to shrink it fast enough, falls back to bisection, so
/// the bracket width is guaranteed to at least halve every two iterations.
///
/// Termination: `|f| <= f_tol(x)` *and* bracket width `<= x_tol(x)`, or
/// `max_iter` iterations (then the bracket midpoint is returned). `f_tol`
/// and `x_tol` receive the current abscissa so callers can mix absolute and
/// relative criteria.
pub(crate) fn bracketed_root<F, Ft, Xt>(
    f: &mut F,
    lo0: f64,
    hi0: f64,
    f_lo0: f64,
    f_hi0: f64,
    f_tol: Ft,
    x_tol: Xt,
    max_iter: u32,
) -> Result<f64, CoreError>
where
    F: FnMut(f64) -> f64,
    Ft: Fn(f64) -> f64,
    Xt: Fn(f64) -> f64,
{
    let (mut lo, mut hi, mut f_lo, mut f_hi) = if f_lo0 <= 0.0 {
        (lo0, hi0, f_lo0, f_hi0)
    } else {
        (hi0, lo0, f_hi0, f_lo0)
    };
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(CoreError::RootFind(format!(
            "no sign change on bracket [{lo0:.6e}, {hi0:.6e}]: f = ({f_lo0:.3e}, {f_hi0:.3e})"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let mut use_secant = true;
    let mut best = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let width = (hi - lo).abs();
        let mid = 0.5 * (lo + hi);
        let x = if use_secant && f_hi != f_lo {
            let s = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            // Keep strictly inside the bracket; degenerate proposals bisect.
            if (s - lo.min(hi)) * (lo.max(hi) - s) > 0.0 {
                s
            } else {
                mid
            }
        } else {
            mid
        };
        // Alternate secant and bisection so the bracket shrinks geometrically
        // even when secant stalls on one side.
        use_secant = !use_secant;

        let fx = f(x);
        best = x;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if fx.abs() <= f_tol(x) && width <= x_tol(x) {
            return Ok(x);
        }
    }
    // The alternating safeguard halves the bracket at least every second
    // iteration, so after max_iter >= 120 the width is at machine scale and
    // the midpoint is the best available answer.
    let _ = best;
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
///
/// Returns `(argmax, max)`. Tolerance is on the abscissa.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Monotone piecewise-cubic Hermite interpolant on a strictly increasing
/// abscissa table.
///
/// Slopes are supplied by the caller (typically known analytically) and then
/// clamped Fritsch-Carlson style so the interpolant cannot overshoot the data
/// on any interval: for each cell, `d_i` and `d_{i+1}` are projected into the
/// disc of radius `3 * secant` that guarantees monotonicity. With exact
/// slopes of a monotone function the clamp is almost never active and the
/// interpolant is fourth-order accurate.
#[derive(Debug, Clone)]
pub(crate) struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Build the interpolant. `x` must be strictly increasing and the three
    /// slices equally long with at least two entries.
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Result<Self, CoreError> {
        if x.len() != y.len() || x.len() != d.len() || x.len() < 2 {
            return Err(CoreError::Domain(format!(
                "interpolation table needs matching x/y/slope lengths >= 2, got {}, {}, {}",
                x.len(),
                y.len(),
                d.len()
            )));
        }
        for i in 1..x.len() {
            if !(x[i] > x[i - 1]) {
                return Err(CoreError::Domain(format!(
                    "interpolation abscissae must be strictly increasing: x[{}] = {:.6e} \
                     followed by {:.6e}",
                    i - 1,
                    x[i - 1],
                    x[i]
                )));
            }
        }
        // Fritsch-Carlson safety clamp against overshoot.
        for i in 0..x.len() - 1 {
            let secant = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if secant == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            for k in [i, i + 1] {
                if d[k] / secant < 0.0 {
                    d[k] = 0.0;
                } else if d[k].abs() > 3.0 * secant.abs() {
                    d[k] = 3.0 * secant;
                }
            }
        }
        Ok(Self { x, y, d })
    }

    /// Table abscissae.
    pub(crate) fn xs(&self) -> &[f64] {
        &self.x
    }

    /// Table ordinates.
    pub(crate) fn ys(&self) -> &[f64] {
        &self.y
    }

    /// Evaluate at `x`, clamping to the table range (callers handle
    /// out-of-range behavior explicitly before calling).
    pub(crate) fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq <= self.x[0] {
            return self.y[0];
        }
        if xq >= self.x[n - 1] {
            return self.y[n - 1];
        }
        // partition_point returns the first index with x[i] > xq.
        let i = self.x.partition_point(|&v| v <= xq) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }
}

/// Solve a tridiagonal system in place (Thomas algorithm, no pivoting).
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (entry 0 unused), `upper[i]`
/// multiplies `x[i+1]` (last entry unused). Returns `None` on a vanishing
/// pivot; callers treat that as a failed Newton step. No pivoting is
/// acceptable because the systems solved here are `I - dt J` with `J`
/// tridiagonal and dt shrinks on failure.
pub(crate) fn solve_tridiag(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Option<()> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    scratch.clear();
    scratch.resize(n, 0.0);

    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return None;
    }
    rhs[0] /= piv;
    for i in 1..n {
        scratch[i] = upper[i - 1] / piv;
        piv = diag[i] - lower[i] * scratch[i];
        if piv.abs() < 1e-300 {
            return None;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Some(())
}

/// Ordinary least-squares line fit `y ~ slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Coefficient of determination (1 for a perfect fit; 0 when the data
    /// have no variance explained; may be negative only for degenerate input).
    pub r2: f64,
}

/// Fit a line through `(x, y)` pairs. Requires at least two points.
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit, CoreError> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(CoreError::Domain(format!(
            "line fit needs >= 2 points with matching lengths, got {} and {}",
            n,
            ys.len()
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(CoreError::Domain(
            "line fit abscissae are all identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit { slope, intercept, r2 })
}

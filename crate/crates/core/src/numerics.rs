//! Scalar special functions and root finding used by the allocators.
//!
//! - Gaussian tail probability `q_function`
//! - principal-branch Lambert W on nonnegative arguments
//! - quantile of the quarter-circle singular-value law
//! - plain bisection with a shared [`Tolerance`] policy
//!
//! Everything here is pure, reentrant, and free of domain knowledge; the
//! channel and power modules build on these primitives.

use crate::error::{Error, Result};

/// Stopping policy for iterative solvers.
///
/// A solve finishes once its residual (or bracket half-width) drops below
/// `abs_tol + rel_tol * scale`, where `scale` is the solver's natural
/// magnitude (the current midpoint for `bisect`, the power budget for the
/// allocator loops). `max_iter` bounds the work; exceeding it is an error,
/// never a silent best-effort return.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: u32,
}

impl Tolerance {
    /// Builds a tolerance, rejecting non-positive bounds and a zero
    /// iteration budget.
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: u32) -> Result<Self> {
        let tol = Tolerance {
            abs_tol,
            rel_tol,
            max_iter,
        };
        tol.validate()?;
        Ok(tol)
    }

    /// Checks the invariants `abs_tol > 0`, `rel_tol > 0`, `max_iter >= 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::domain(format!(
                "abs_tol must be positive and finite, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::domain(format!(
                "rel_tol must be positive and finite, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be at least 1".to_string()));
        }
        Ok(())
    }
}

impl Default for Tolerance {
    /// Residual within `1e-12 + 1e-10 * scale` in at most 200 iterations.
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
///
/// Evaluated as `erfc(x / sqrt(2)) / 2`; the underlying `erfc` is a
/// rational-approximation implementation accurate to a few ulp, so the
/// absolute error is far below 1e-12 on [-8, 8].
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("q_function needs finite x, got {x}")));
    }
    Ok(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}

/// Principal-branch Lambert W for nonnegative arguments: the unique
/// w >= 0 with `w * exp(w) = x`.
///
/// Negative arguments are refused; no caller in this crate needs the
/// secondary branch and guessing one silently would corrupt allocations.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "lambert_w0 needs finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(lambert_w0_exp(x.ln()))
}

/// Evaluates W(exp(t)) without forming exp(t).
///
/// The error-waterfilling bisection probes multipliers whose transformed
/// argument exp(t) overflows f64, so the solve runs in log space. For
/// t > 0 the iterate satisfies w + ln w = t exactly at the root; Halley
/// steps on that form stay finite for every representable t.
pub(crate) fn lambert_w0_exp(t: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        return 0.0;
    }
    if t < -36.0 {
        // W(x) = x - x^2 + 1.5 x^3 - ... ; with x < 3e-16 the cubic term
        // is below 1e-46 relative, far past f64 resolution.
        let x = t.exp();
        return x * (1.0 - x * (1.0 - 1.5 * x));
    }
    let mut w = if t <= 1.0 {
        // ln(1 + x) >= W(x) on x >= 0 and is tight as x -> 0.
        t.exp().ln_1p()
    } else {
        // Asymptotic seed W ~ t - ln t for large arguments.
        t - t.ln()
    };
    for _ in 0..60 {
        // Halley on g(w) = w + ln w - t, monotone increasing for w > 0.
        let g = w + w.ln() - t;
        let gp = 1.0 + 1.0 / w;
        let gpp = -1.0 / (w * w);
        let step = g / (gp - g * gpp / (2.0 * gp));
        let mut next = w - step;
        if next <= 0.0 {
            next = 0.5 * w;
        }
        let converged = (next - w).abs() <= 2e-15 * (1.0 + next.abs());
        w = next;
        if converged {
            break;
        }
    }
    w
}

/// CDF of the quarter-circle law on [0, 2]:
/// F(x) = (x sqrt(4 - x^2) + 4 asin(x / 2)) / (2 pi).
///
/// Total over the reals with the usual CDF conventions (0 below the
/// support, 1 above it).
pub fn quarter_circle_cdf(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("quarter_circle_cdf needs a number".to_string()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 2.0 {
        return Ok(1.0);
    }
    Ok((x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (2.0 * std::f64::consts::PI))
}

/// Quantile of the quarter-circle law: the x in (0, 2) with F(x) = u.
///
/// Inverted by bisection on the closed-form CDF; the result satisfies
/// |F(x) - u| <= 1e-10.
pub fn quarter_circle_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "quarter_circle_quantile needs u in (0, 1), got {u}"
        )));
    }
    // Density peaks at 2/pi, so a bracket width of 1e-13 forces
    // |F - u| < 1e-13, comfortably inside the 1e-10 contract.
    let tol = Tolerance {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_iter: 200,
    };
    bisect(
        |x| {
            (x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (2.0 * std::f64::consts::PI) - u
        },
        0.0,
        2.0,
        &tol,
    )
}

/// Bisection root finder for a function with a sign change on [lo, hi].
///
/// Returns the midpoint once the bracket half-width falls below
/// `abs_tol + rel_tol * |mid|`, or the exact point if an evaluation hits
/// zero. The function must be finite on the bracket; monotonicity is the
/// caller's promise and is what makes the returned root unique.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    tol.validate()?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::domain(format!(
            "bisect needs a finite bracket with lo < hi, got [{lo}, {hi}]"
        )));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_sign_positive() == fhi.is_sign_positive() {
        return Err(Error::Bracketing { lo, hi });
    }
    let (mut lo, mut hi, mut flo) = (lo, hi, flo);
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if 0.5 * (hi - lo) <= tol.abs_tol + tol.rel_tol * mid.abs() {
            return Ok(mid);
        }
        if fm.is_sign_positive() == flo.is_sign_positive() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: format!("bisect on [{lo}, {hi}]"),
        iters: tol.max_iter,
    })
}

//! Derivative-free scalar search: unimodal maximization and bracketed roots.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Relative bracket width at which golden section hands over to the
/// dichotomous polish. Below roughly sqrt(eps) golden section can no longer
/// tell function values apart.
const GOLDEN_HANDOFF: f64 = 1e-4;

/// Relative offset of the paired probes in the dichotomous polish.
const PROBE_STEP: f64 = 1e-5;

/// Maximum number of bracket doublings before giving up.
pub(crate) const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Maximum {
    pub x: f64,
    pub iterations: usize,
    /// Final bracket width relative to 1 + |x|.
    pub width: f64,
}

/// Golden-section search on `[lo, hi]`; returns the final bracket.
fn golden(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, max_iter: usize) -> (f64, f64, usize) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iters = 0;
    while iters < max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= GOLDEN_HANDOFF * mid || hi <= f64::MIN_POSITIVE {
            break;
        }
        iters += 1;
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    (lo, hi, iters)
}

/// Bisection on the sign of `f(x(1+s)) - f(x(1-s))`.
///
/// Unlike golden section the probes stay a fixed relative distance apart, so
/// the comparison keeps its resolution as the bracket collapses.
fn dichotomous(
    f: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    max_iter: usize,
) -> (f64, f64, usize) {
    let mut iters = 0;
    while iters < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * mid {
            break;
        }
        iters += 1;
        if f(mid * (1.0 + PROBE_STEP)) > f(mid * (1.0 - PROBE_STEP)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi, iters)
}

/// Maximizes a unimodal `f` over `[0, hi]`, doubling `hi` while the maximum
/// sits against the upper bound.
pub(crate) fn maximize_unimodal(
    f: impl Fn(f64) -> f64,
    initial_hi: f64,
    max_iter: usize,
    context: &'static str,
) -> Result<Maximum> {
    let mut hi = initial_hi;
    let mut total = 0;
    for _ in 0..=MAX_EXPANSIONS {
        let (a, b, gi) = golden(&f, 0.0, hi, max_iter);
        let (a, b, pi) = dichotomous(&f, a, b, max_iter);
        total += gi + pi;
        let x = 0.5 * (a + b);
        if hi - x > 1e-3 * hi {
            return Ok(Maximum {
                x,
                iterations: total,
                width: (b - a) / (1.0 + x.abs()),
            });
        }
        hi *= 2.0;
    }
    Err(Error::BracketExpansion { context, bound: hi })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Root {
    pub x: f64,
    pub iterations: usize,
    pub width: f64,
}

/// Bisection for a sign change of `g` on `[lo, hi]`, stopping once the
/// bracket is narrower than `abs_tol`.
pub(crate) fn bisect(
    mut g: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    abs_tol: f64,
    max_iter: usize,
    context: &'static str,
) -> Result<Root> {
    let g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == 0.0 {
        return Ok(Root {
            x: lo,
            iterations: 0,
            width: 0.0,
        });
    }
    if g_hi == 0.0 {
        return Ok(Root {
            x: hi,
            iterations: 0,
            width: 0.0,
        });
    }
    if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::NoSignChange {
            context,
            lo,
            hi,
            g_lo,
            g_hi,
        });
    }
    let lo_negative = g_lo < 0.0;
    let mut iters = 0;
    while hi - lo > abs_tol {
        if iters >= max_iter {
            return Err(Error::NoConvergence {
                context,
                iterations: iters,
                residual: hi - lo,
            });
        }
        iters += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(Root {
                x: mid,
                iterations: iters,
                width: 0.0,
            });
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations: iters,
        width: hi - lo,
    })
}

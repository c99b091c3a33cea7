use crate::error::{Error, Result};

pub const DEFAULT_SEARCH_RANGE: (f64, f64) = (-1e3, 1e3);
pub const BETA_EFF_RESIDUAL_TOL: f64 = 1e-10;

const NORMALIZATION_TOL: f64 = 1e-9;
const DERIVATIVE_STEP: f64 = 1e-5;
const DEGENERATE_SLOPE: f64 = 1e-8;
const FIRST_PROBE: f64 = 1e-6;
const ABOVE_ONE: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaEffResult {
    /// Zero when `degenerate`.
    pub value: f64,
    /// `G'(0)` vanished, so `ε = 0` is a double root.
    pub degenerate: bool,
    pub bracket: Option<(f64, f64)>,
    pub residual: f64,
    pub slope_at_zero: f64,
}

/// Nonzero root of `g(ε) = 1` with the default residual tolerance.
pub fn beta_eff(g: impl Fn(f64) -> f64, search_range: (f64, f64)) -> Result<BetaEffResult> {
    beta_eff_with_tolerance(g, search_range, BETA_EFF_RESIDUAL_TOL)
}

/// `g` must be a characteristic function: convex with `g(0) = 1`. The root
/// lies on the side where `g` first dips below one, i.e. opposite the sign
/// of `g'(0)`. It is bracketed by doubling steps from `1e-6` and then
/// bisected.
pub fn beta_eff_with_tolerance(
    g: impl Fn(f64) -> f64,
    search_range: (f64, f64),
    residual_tol: f64,
) -> Result<BetaEffResult> {
    let (lo_bound, hi_bound) = search_range;
    if !(lo_bound < 0.0 && hi_bound > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "search range {search_range:?} must contain zero"
        )));
    }
    let g0 = g(0.0);
    if !g0.is_finite() || (g0 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { g0 });
    }
    let slope = (g(DERIVATIVE_STEP) - g(-DERIVATIVE_STEP)) / (2.0 * DERIVATIVE_STEP);
    if !slope.is_finite() {
        return Err(Error::NonFinite("G'(0)".into()));
    }
    if slope.abs() < DEGENERATE_SLOPE {
        return Ok(BetaEffResult {
            value: 0.0,
            degenerate: true,
            bracket: None,
            residual: (g0 - 1.0).abs(),
            slope_at_zero: slope,
        });
    }

    let dir = -slope.signum();
    let limit = if dir > 0.0 { hi_bound } else { -lo_bound };
    let above = |x: f64| g(dir * x) > 1.0 + ABOVE_ONE;
    let mut inner = 0.0;
    let mut outer = FIRST_PROBE.min(limit);
    loop {
        if above(outer) {
            break;
        }
        if outer >= limit {
            let boundary = dir * limit;
            return Err(Error::BracketNotFound {
                boundary,
                g_at_boundary: g(boundary),
            });
        }
        inner = outer;
        outer = (2.0 * outer).min(limit);
    }

    let f = |x: f64| g(dir * x) - 1.0;
    let (mut a, mut b) = (inner, outer);
    while b - a > ROOT_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let (fa, fb) = (f(a).abs(), f(b).abs());
    let root = if fa <= fb { a } else { b };
    let residual = fa.min(fb);
    if residual.is_nan() || residual > residual_tol {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: residual_tol,
        });
    }
    let bracket = if dir > 0.0 {
        (inner, outer)
    } else {
        (-outer, -inner)
    };
    Ok(BetaEffResult {
        value: dir * root,
        degenerate: false,
        bracket: Some(bracket),
        residual,
        slope_at_zero: slope,
    })
}

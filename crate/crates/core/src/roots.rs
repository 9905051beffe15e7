//! Root finding for monotone scalar equations: outward bracketing by
//! doubling, bisection down to a relative width of 1e-8, then a
//! safeguarded Newton polish.

use crate::error::{Error, Result};

/// Largest abscissa the outward bracket search will try.
pub const SEARCH_HORIZON: f64 = 1e200;

const BISECT_WIDTH: f64 = 1e-8;

/// Solves `f(s) = target` for an increasing function `f` on `[start, ∞)`.
///
/// `df` is used for the Newton polish when given; otherwise a secant
/// slope from the current bracket is used.
pub fn solve_increasing(
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    target: f64,
    start: f64,
) -> Result<f64> {
    let f0 = f(start);
    if f0.is_nan() {
        return Err(Error::NoBracket(format!("function undefined at {start}")));
    }
    if f0 == target {
        return Ok(start);
    }
    if f0 > target {
        return Err(Error::NoBracket(format!(
            "value {f0} at the search start {start} already exceeds {target}"
        )));
    }

    let (mut lo, mut flo) = (start, f0);
    let mut hi = if start > 0.0 { 2.0 * start } else { 1.0 };
    loop {
        let fhi = f(hi);
        if fhi.is_nan() {
            return Err(Error::NoBracket(format!("function undefined at {hi}")));
        }
        if fhi < flo {
            return Err(Error::NotMonotone { at: hi });
        }
        if fhi >= target {
            break;
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        if hi > SEARCH_HORIZON {
            return Err(Error::NoBracket(format!(
                "function stays below {target} up to {SEARCH_HORIZON:e}"
            )));
        }
    }

    while hi - lo > BISECT_WIDTH * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::NoBracket(format!("function undefined at {mid}")));
        }
        if fm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(polish(f, df, target, lo, hi))
}

/// Safeguarded Newton iteration inside a bracket `f(lo) < target <= f(hi)`.
fn polish(
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let scale = target.abs().max(f64::MIN_POSITIVE);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let r = f(x) - target;
        if r.abs() <= 4.0 * f64::EPSILON * scale {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return x;
        }
        let slope = match df {
            Some(d) => d(x),
            None => (f(hi) - f(lo)) / (hi - lo),
        };
        let newton = x - r / slope;
        x = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// Bisection for a sign change of `g` on `[lo, hi]`, to absolute width `tol`.
pub fn bisect(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() || glo.is_nan() || ghi.is_nan() {
        return Err(Error::NoBracket(format!("no sign change on [{lo}, {hi}]")));
    }
    let lo_negative = glo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_by_bracketing() {
        let f = |x: f64| x * x;
        let d = |x: f64| 2.0 * x;
        let x = solve_increasing(&f, Some(&d), 100.0, 0.0).unwrap();
        assert!((x - 10.0).abs() < 1e-13);
        let x = solve_increasing(&f, None, 2.0, 0.0).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn large_roots_of_slow_functions() {
        let f = |x: f64| (1.0 + x * x).ln() / 2.0;
        let x = solve_increasing(&f, None, 50.0, 0.0).unwrap();
        assert!((f(x) - 50.0).abs() < 1e-12 * 50.0);
    }

    #[test]
    fn non_monotone_is_reported() {
        let f = |x: f64| 2.0 + x.sin();
        let err = solve_increasing(&f, None, 10.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::NotMonotone { .. }));
    }

    #[test]
    fn bounded_function_has_no_bracket() {
        let f = |x: f64| x.atan();
        let err = solve_increasing(&f, None, 2.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::NoBracket(_)));
    }

    #[test]
    fn overflowing_function_still_brackets() {
        let f = |x: f64| (x * x).exp();
        let x = solve_increasing(&f, None, 1e6, 0.0).unwrap();
        assert!((x - (1e6f64).ln().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bisection_sign_change() {
        let r = bisect(&|x: f64| x.cos(), 0.0, 3.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }
}

//! Principal branch of the Lambert W function by Halley iteration, and
//! the elementary bounds used to bracket it for `x ≥ e`.

use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        // expansion around the branch point
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 0.5 {
        x - x * x + 1.5 * x * x * x
    } else if x < 3.0 {
        0.5 * (1.0 + x).ln()
    } else {
        let l = x.ln();
        l - l.ln()
    }
}

/// `W₀(x)`: the solution `w ≥ -1` of `w e^w = x`, defined for `x ≥ -1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(Error::OutOfDomain(x));
    }
    if x <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = initial_guess(x);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
    }
    Ok(w)
}

/// Lower and upper bounds on `W₀(x)` for `x ≥ e`:
/// `L - LL + LL/(2L) ≤ W₀(x) ≤ L - LL + (e/(e-1)) LL/L`, `L = ln x`, `LL = ln ln x`.
pub fn w0_bounds(x: f64) -> Result<(f64, f64)> {
    if !(x >= E) {
        return Err(Error::OutOfDomain(x));
    }
    let l = x.ln();
    let ll = l.ln();
    Ok((l - ll + 0.5 * ll / l, l - ll + E / (E - 1.0) * ll / l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert_eq!(lambert_w0(BRANCH_POINT).unwrap(), -1.0);
        assert!(lambert_w0(-0.5).is_err());
        let w = lambert_w0(-0.3).unwrap();
        assert!((w * w.exp() + 0.3).abs() < 1e-15);
    }

    #[test]
    fn bounds_are_tight_at_e() {
        let (lo, hi) = w0_bounds(E).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert!(w0_bounds(2.0).is_err());
    }
}

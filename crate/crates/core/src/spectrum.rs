//! Point spectrum of first-order operators `-d/dx + W` on the line.
//!
//! `λ` is an eigenvalue exactly when `u(x) = exp(∫₀ˣ W - λx)` lies in
//! `L²(ℝ)`; only `Re W` and `Re λ` affect the modulus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Side;
use crate::quad::simpson;

/// A tail whose `log ∫|u|²` exceeds this while `|u|` is still growing at a
/// non-decreasing rate is divergent.
const LOG_GUARD: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrumCertificate {
    /// `λ` is not an eigenvalue: the candidate eigenfunction is not square
    /// integrable on some tail.
    pub empty: bool,
    pub divergent_tail: Option<Side>,
    /// `Re W` increases toward the horizon on the positive side, the
    /// sampled form of `ess inf_{x≥N} Re W → ∞`, under which no `λ` at
    /// all is an eigenvalue.
    pub growth_condition: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TailVerdict {
    Divergent,
    Convergent,
    Undecided,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn tail(w_real: &dyn Fn(f64) -> f64, re_lambda: f64, side: Side, horizon: f64) -> Result<TailVerdict> {
    let sigma = side.sign();
    // log|u(σs)|² = 2σ∫₀^{σs}... written in terms of s ≥ 0
    let g = |s: f64| sigma * (w_real(sigma * s) - re_lambda);
    let (mut s, mut phi, mut log_int) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    while s < horizon {
        let rate = g(s).abs().max(1.0);
        let step = (0.05 / rate).min(0.05 * s.max(1.0)).min(horizon - s);
        let inc = simpson(&g, s, s + step, 1e-10 * step)?;
        let next = phi + inc;
        let g_prev = g(s);
        let panel = (0.5 * step).ln() + log_add(2.0 * phi, 2.0 * next);
        log_int = log_add(log_int, panel);
        phi = next;
        s += step;
        let g_now = g(s);
        if log_int > LOG_GUARD && g_now > 0.0 && g_now >= g_prev {
            return Ok(TailVerdict::Divergent);
        }
        if g_now < 0.0 && g_now <= g_prev && 2.0 * phi < log_int - 80.0 && s > 1.0 {
            return Ok(TailVerdict::Convergent);
        }
    }
    Ok(TailVerdict::Undecided)
}

/// Decides whether `λ` fails to be an eigenvalue of `-d/dx + W`.
pub fn point_spectrum_empty(
    w_real: &dyn Fn(f64) -> f64,
    lambda: Complex64,
    horizon: f64,
) -> Result<PointSpectrumCertificate> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    let right = tail(w_real, lambda.re, Side::Plus, horizon)?;
    let left = tail(w_real, lambda.re, Side::Minus, horizon)?;
    let samples = [horizon / 100.0, horizon / 10.0, horizon].map(w_real);
    let growth_condition = samples[0] < samples[1] && samples[1] < samples[2] && samples[2] > lambda.re.abs() + 1.0;
    let divergent_tail = match (right, left) {
        (TailVerdict::Divergent, _) => Some(Side::Plus),
        (_, TailVerdict::Divergent) => Some(Side::Minus),
        (TailVerdict::Convergent, TailVerdict::Convergent) => None,
        _ => {
            return Err(Error::Inconclusive(format!(
                "tail behaviour of the candidate eigenfunction undecided up to horizon {horizon}"
            )))
        }
    };
    Ok(PointSpectrumCertificate { empty: divergent_tail.is_some(), divergent_tail, growth_condition })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_first_order_operator() {
        let c = point_spectrum_empty(&|_| 0.0, Complex64::new(-1.0, 0.0), 1e3).unwrap();
        assert!(c.empty);
        assert!(!c.growth_condition);
    }

    #[test]
    fn power_weight_has_no_eigenvalues() {
        let c = point_spectrum_empty(&|x: f64| x.abs().powf(0.5), Complex64::new(10.0, 3.0), 1e4).unwrap();
        assert!(c.empty);
        assert_eq!(c.divergent_tail, Some(Side::Plus));
        assert!(c.growth_condition);
    }

    #[test]
    fn decreasing_weight_has_eigenvalues() {
        let c = point_spectrum_empty(&|x: f64| -x, Complex64::new(2.0, 0.0), 1e3).unwrap();
        assert!(!c.empty);
    }
}

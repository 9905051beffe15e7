//! Shape-preserving piecewise cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Monotone cubic interpolant through `(x_k, y_k)`.
///
/// Outside the data range the interpolant continues linearly with the
/// end slope.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

fn check_nodes(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} abscissae but {} values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput("at least two nodes are needed".into()));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("values must be finite".into()));
    }
    Ok(())
}

impl Pchip {
    /// Builds the interpolant with Fritsch–Butland slopes.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
            return Ok(Self { x, y, d });
        }
        for k in 1..n - 1 {
            let (a, b) = (delta[k - 1], delta[k]);
            if a * b > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / a + w2 / b);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Ok(Self { x, y, d })
    }

    /// Builds the interpolant from known slopes, limiting them where they
    /// would break monotonicity of the data.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        if d.len() != x.len() {
            return Err(Error::InvalidInput("one slope per node is needed".into()));
        }
        for k in 0..x.len() - 1 {
            let delta = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
            if delta == 0.0 {
                d[k] = 0.0;
                d[k + 1] = 0.0;
                continue;
            }
            let mut a = d[k] / delta;
            let mut b = d[k + 1] / delta;
            if a < 0.0 {
                a = 0.0;
            }
            if b < 0.0 {
                b = 0.0;
            }
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                a *= tau;
                b *= tau;
            }
            d[k] = a * delta;
            d[k + 1] = b * delta;
        }
        Ok(Self { x, y, d })
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        let n = self.x.len();
        if t < lo {
            return self.y[0] + self.d[0] * (t - lo);
        }
        if t > hi {
            return self.y[n - 1] + self.d[n - 1] * (t - hi);
        }
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[k]
            + (s3 - 2.0 * s2 + s) * h * self.d[k]
            + (-2.0 * s3 + 3.0 * s2) * self.y[k + 1]
            + (s3 - s2) * h * self.d[k + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        let n = self.x.len();
        if t < lo {
            return self.d[0];
        }
        if t > hi {
            return self.d[n - 1];
        }
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * self.y[k]
            + (3.0 * s2 - 4.0 * s + 1.0) * h * self.d[k]
            + (-6.0 * s2 + 6.0 * s) * self.y[k + 1]
            + (3.0 * s2 - 2.0 * s) * h * self.d[k + 1])
            / h
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        if t < lo || t > hi {
            return 0.0;
        }
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        ((12.0 * s - 6.0) * self.y[k]
            + (6.0 * s - 4.0) * h * self.d[k]
            + (-12.0 * s + 6.0) * self.y[k + 1]
            + (6.0 * s - 2.0) * h * self.d[k + 1])
            / (h * h)
    }

    /// Solves `eval(t) = v` for increasing data inside the node range.
    pub fn invert(&self, v: f64) -> Result<f64> {
        let n = self.y.len();
        let (ylo, yhi) = (self.y[0], self.y[n - 1]);
        if !(v >= ylo && v <= yhi) {
            return Err(Error::OutOfTable { value: v, lo: ylo, hi: yhi });
        }
        let k = match self.y.partition_point(|&w| w <= v) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (a, b) = (self.x[k], self.x[k + 1]);
        let tol = 4.0 * f64::EPSILON * a.abs().max(b.abs());
        crate::roots::bisect(&|t| self.eval(t) - v, a, b, tol)
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

//! Finite-difference discretizations of `H - λ` with Dirichlet walls and
//! the numeric resolvent norm `1/σ_min`, refined until stable in both
//! the mesh width and the truncation length.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{smallest_singular_value_with, BandedMatrix, SigmaMinOptions};
use crate::potential::{Domain, PotentialModel, Side};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Three-point second difference / two-point central first difference.
    Fd2,
    /// Five-point stencils, fourth order.
    Fd4,
}

impl FromStr for Stencil {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd2" => Ok(Self::Fd2),
            "fd4" => Ok(Self::Fd4),
            o => Err(Error::Parse(format!("unknown stencil `{o}` (fd2 or fd4)"))),
        }
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fd2 => "fd2",
            Self::Fd4 => "fd4",
        })
    }
}

/// Truncated interval and grid. On the half-line the interval is
/// `(0, length)`, on the line `(-length, length)`; `n` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub length: f64,
    pub n: usize,
    pub stencil: Stencil,
}

/// The operator whose resolvent is discretized.
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    /// `-d²/dx² + V`.
    Schrodinger(&'a PotentialModel),
    /// `-d/dx + |x|^β` on the line.
    GeneralizedAiry { beta: f64 },
}

impl<'a> From<&'a PotentialModel> for Operator<'a> {
    fn from(v: &'a PotentialModel) -> Self {
        Operator::Schrodinger(v)
    }
}

impl Operator<'_> {
    pub fn domain(&self) -> Domain {
        match self {
            Operator::Schrodinger(v) => v.domain,
            Operator::GeneralizedAiry { .. } => Domain::FullLine,
        }
    }

    fn potential(&self, x: f64) -> C {
        match self {
            Operator::Schrodinger(v) => v.value(x),
            Operator::GeneralizedAiry { beta } => C::new(x.abs().powf(*beta), 0.0),
        }
    }
}

impl Discretization {
    fn span(&self, domain: Domain) -> f64 {
        match domain {
            Domain::HalfLine => self.length,
            Domain::FullLine => 2.0 * self.length,
        }
    }

    pub fn spacing(&self, domain: Domain) -> f64 {
        self.span(domain) / (self.n + 1) as f64
    }

    pub fn grid(&self, domain: Domain) -> Vec<f64> {
        let h = self.spacing(domain);
        let start = match domain {
            Domain::HalfLine => 0.0,
            Domain::FullLine => -self.length,
        };
        (1..=self.n).map(|i| start + i as f64 * h).collect()
    }

    fn with_mesh(&self, domain: Domain, h: f64, length: f64) -> Self {
        let probe = Self { length, ..*self };
        let n = ((probe.span(domain) / h).round() as usize).saturating_sub(1).max(3);
        Self { length, n, stencil: self.stencil }
    }
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: BandedMatrix,
    pub grid: Vec<f64>,
    pub h: f64,
    pub lambda: C,
}

pub fn assemble(op: Operator<'_>, lambda: C, disc: &Discretization) -> Result<OperatorMatrix> {
    if disc.n == 0 || !(disc.length > 0.0) {
        return Err(Error::InvalidInput("discretization needs n > 0 and length > 0".into()));
    }
    let domain = op.domain();
    let grid = disc.grid(domain);
    let h = disc.spacing(domain);
    let n = disc.n;
    let bw = match disc.stencil {
        Stencil::Fd2 => 1,
        Stencil::Fd4 => 2,
    };
    let mut m = BandedMatrix::zeros(n, bw, bw);
    for (i, &x) in grid.iter().enumerate() {
        let v = op.potential(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidInput(format!("potential is not finite at x = {x}")));
        }
        m.set(i, i, v - lambda);
    }
    let put = |m: &mut BandedMatrix, i: usize, off: isize, c: f64| {
        let j = i as isize + off;
        if j >= 0 && (j as usize) < n {
            m.add(i, j as usize, C::new(c, 0.0));
        }
    };
    match (op, disc.stencil) {
        (Operator::Schrodinger(_), Stencil::Fd2) => {
            let c = 1.0 / (h * h);
            for i in 0..n {
                put(&mut m, i, 0, 2.0 * c);
                put(&mut m, i, -1, -c);
                put(&mut m, i, 1, -c);
            }
        }
        (Operator::Schrodinger(_), Stencil::Fd4) => {
            let c = 1.0 / (12.0 * h * h);
            for i in 0..n {
                // odd reflection across the walls: u(-2h) = -u(0) etc.
                let edge = i == 0 || i + 1 == n;
                let diag = if edge && n > 1 { 29.0 } else { 30.0 };
                put(&mut m, i, 0, diag * c);
                put(&mut m, i, -1, -16.0 * c);
                put(&mut m, i, 1, -16.0 * c);
                put(&mut m, i, -2, c);
                put(&mut m, i, 2, c);
            }
        }
        (Operator::GeneralizedAiry { .. }, Stencil::Fd2) => {
            let c = 1.0 / (2.0 * h);
            for i in 0..n {
                put(&mut m, i, 1, -c);
                put(&mut m, i, -1, c);
            }
        }
        (Operator::GeneralizedAiry { .. }, Stencil::Fd4) => {
            let c = 1.0 / (12.0 * h);
            for i in 0..n {
                put(&mut m, i, 2, c);
                put(&mut m, i, 1, -8.0 * c);
                put(&mut m, i, -1, 8.0 * c);
                put(&mut m, i, -2, -c);
            }
        }
    }
    Ok(OperatorMatrix { matrix: m, grid, h, lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub length: f64,
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub lambda: C,
    pub converged: bool,
    /// Largest relative change over the final refinement in each direction.
    pub est_rel_error: f64,
    pub discretization: Discretization,
    pub history: Vec<RefinementStep>,
}

impl NormResult {
    /// Turns a non-converged result into `Error::NotConverged`.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { best: self.value, last_change: self.est_rel_error })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub tol: f64,
    pub stencil: Stencil,
    pub initial: Option<Discretization>,
    pub max_n: usize,
    /// Truncation may grow to this multiple of the initial length.
    pub max_length_factor: f64,
    /// WKB decay `∫ Re√(V-λ)` required between the turning region and the wall.
    pub decay_target: f64,
    pub sigma: SigmaMinOptions,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            stencil: Stencil::Fd2,
            initial: None,
            max_n: 1 << 21,
            max_length_factor: 64.0,
            decay_target: 40.0,
            sigma: SigmaMinOptions::default(),
        }
    }
}

/// `‖(H - λ)⁻¹‖` by discretization, refined to relative tolerance `tol`.
pub fn resolvent_norm_numeric(
    op: Operator<'_>,
    lambda: C,
    tol: f64,
    disc0: Option<Discretization>,
) -> Result<NormResult> {
    let stencil = disc0.map_or(Stencil::Fd2, |d| d.stencil);
    resolvent_norm_with(op, lambda, &NormOptions { tol, stencil, initial: disc0, ..Default::default() })
}

fn norm_at(op: Operator<'_>, lambda: C, disc: &Discretization, opts: &NormOptions) -> Result<f64> {
    let m = assemble(op, lambda, disc)?;
    let mut sigma = opts.sigma;
    if disc.n > 300_000 {
        sigma.krylov_dim = sigma.krylov_dim.min(12);
    }
    let s = smallest_singular_value_with(&m.matrix, &sigma)?;
    Ok(if s == 0.0 { f64::INFINITY } else { 1.0 / s })
}

fn rel_change(new: f64, old: f64) -> f64 {
    if new == old {
        0.0
    } else {
        ((new - old) / new).abs()
    }
}

pub fn resolvent_norm_with(op: Operator<'_>, lambda: C, opts: &NormOptions) -> Result<NormResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let domain = op.domain();
    let mut disc = match opts.initial {
        Some(d) => d,
        None => auto_discretization(op, lambda, opts.stencil)?,
    };
    let max_length = disc.length * opts.max_length_factor;
    let mut value = norm_at(op, lambda, &disc, opts)?;
    let mut history = vec![RefinementStep { length: disc.length, n: disc.n, value }];
    let (mut l_change, mut n_change) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    loop {
        if l_change > opts.tol {
            let h = disc.spacing(domain);
            let next = disc.with_mesh(domain, h, disc.length * 1.5);
            if next.length > max_length || next.n > opts.max_n {
                break;
            }
            let v = norm_at(op, lambda, &next, opts)?;
            l_change = rel_change(v, value);
            value = v;
            disc = next;
            history.push(RefinementStep { length: disc.length, n: disc.n, value });
        }
        if n_change > opts.tol {
            let next = Discretization { n: 2 * disc.n + 1, ..disc };
            if next.n > opts.max_n {
                break;
            }
            let v = norm_at(op, lambda, &next, opts)?;
            n_change = rel_change(v, value);
            value = v;
            disc = next;
            history.push(RefinementStep { length: disc.length, n: disc.n, value });
        }
        if l_change <= opts.tol && n_change <= opts.tol {
            converged = true;
            break;
        }
    }
    Ok(NormResult {
        value,
        lambda,
        converged,
        est_rel_error: l_change.max(n_change),
        discretization: disc,
        history,
    })
}

/// Point of closest approach of `V(σs)` to `λ` along one side.
fn closest_approach(v: &PotentialModel, lambda: C, side: Side) -> f64 {
    let sigma = side.sign();
    let mut best = (0.0, (v.value(0.0) - lambda).norm());
    let mut s = 1e-3;
    let cap = 1e3 * (1.0 + lambda.norm());
    while s < 1e7 {
        let d = (v.value(sigma * s) - lambda).norm();
        if d < best.1 {
            best = (s, d);
        }
        if d > cap && s > 2.0 * best.0 {
            break;
        }
        s *= 1.02;
    }
    best.0
}

/// Distance from the closest approach at which the WKB decay reaches `target`.
fn decay_length(v: &PotentialModel, lambda: C, side: Side, target: f64) -> f64 {
    let sigma = side.sign();
    let start = closest_approach(v, lambda, side);
    let fallback = 50.0 * (1.0 + lambda.norm().sqrt()) + start;
    let k = |s: f64| (v.value(sigma * s) - lambda).sqrt().re;
    let (mut s, mut acc) = (start, 0.0);
    let mut ks = k(s);
    while acc < target {
        if s > fallback {
            return fallback;
        }
        let step = (0.05 / ks.max(1e-3)).min(0.1 * s.max(1.0));
        let k_next = k(s + step);
        if !k_next.is_finite() {
            break;
        }
        acc += 0.5 * step * (ks + k_next);
        s += step;
        ks = k_next;
    }
    s + 1.0
}

/// Initial truncation and mesh for a resolvent computation.
pub fn auto_discretization(op: Operator<'_>, lambda: C, stencil: Stencil) -> Result<Discretization> {
    let (length, scale) = match op {
        Operator::Schrodinger(v) => {
            let target = NormOptions::default().decay_target;
            let mut length = decay_length(v, lambda, Side::Plus, target);
            let mut slope = v.dv(closest_approach(v, lambda, Side::Plus)).norm();
            if v.domain == Domain::FullLine {
                length = length.max(decay_length(v, lambda, Side::Minus, target));
                slope = slope.max(v.dv(-closest_approach(v, lambda, Side::Minus)).norm());
            }
            let scale = 1f64.max(lambda.norm().sqrt()).max(slope.cbrt());
            (length.max(2.0), scale)
        }
        Operator::GeneralizedAiry { beta } => {
            let mu = lambda.re.max(0.0);
            (30f64.max(10.0 * (1.0 + mu).powf(1.0 / beta + 1.0)), 1f64.max(lambda.norm()))
        }
    };
    let h = 0.25 / scale;
    let probe = Discretization { length, n: 1, stencil };
    Ok(probe.with_mesh(op.domain(), h, length).clamp_min(32))
}

impl Discretization {
    fn clamp_min(self, n: usize) -> Self {
        Self { n: self.n.max(n), ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse_potential;

    #[test]
    fn free_laplacian_matrix() {
        let v = parse_potential("free").unwrap();
        // length 2 on the line with N = 3 gives h = 1
        let d = Discretization { length: 2.0, n: 3, stencil: Stencil::Fd2 };
        let m = assemble((&v).into(), C::new(0.0, 0.0), &d).unwrap();
        assert_eq!(m.h, 1.0);
        assert_eq!(m.grid, vec![-1.0, 0.0, 1.0]);
        let dense = m.matrix.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let want = match (i as i32 - j as i32).abs() {
                    0 => 2.0,
                    1 => -1.0,
                    _ => 0.0,
                };
                assert_eq!(dense[(i, j)], C::new(want, 0.0));
            }
        }
    }

    #[test]
    fn first_order_matrix() {
        let d = Discretization { length: 2.0, n: 3, stencil: Stencil::Fd2 };
        let m = assemble(Operator::GeneralizedAiry { beta: 2.0 }, C::new(0.0, 0.0), &d).unwrap();
        let a = m.matrix.to_dense();
        assert_eq!(a[(0, 0)], C::new(1.0, 0.0));
        assert_eq!(a[(1, 1)], C::new(0.0, 0.0));
        assert_eq!(a[(0, 1)], C::new(-0.5, 0.0));
        assert_eq!(a[(1, 0)], C::new(0.5, 0.0));
    }

    #[test]
    fn harmonic_oscillator_at_zero() {
        let v = parse_potential("harmonic").unwrap();
        let r = resolvent_norm_numeric((&v).into(), C::new(0.0, 0.0), 1e-6, None).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-5, "{}", r.value);
    }
}

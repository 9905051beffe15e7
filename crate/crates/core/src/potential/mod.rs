//! Complex potentials `V = V1 + i V2` and the scale functions built from
//! them: turning points, the rotation mismatch κ, the ratio Υ, the Fourier
//! scale `t_a` and the regular-variation discrepancy ι.

mod assumptions;
mod registry;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::solve_increasing;

pub use assumptions::{
    check_assumptions, check_assumptions_with, AssumptionItem, AssumptionMode, AssumptionReport,
    CheckOptions, ItemStatus,
};
pub use registry::{builtin_names, load_table, parse_potential};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `(0, ∞)` with a Dirichlet condition at 0.
    HalfLine,
    FullLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Limiting behaviour of `V2(±s)` as `s → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    ToPlusInfinity,
    ToMinusInfinity,
    Bounded,
}

/// A potential with optional closed-form derivatives; missing derivatives
/// are taken by central differences.
#[derive(Clone)]
pub struct PotentialModel {
    label: String,
    v1: Option<RealFn>,
    v2: RealFn,
    d_v1: Option<RealFn>,
    d_v2: Option<RealFn>,
    dd_v1: Option<RealFn>,
    dd_v2: Option<RealFn>,
    pub domain: Domain,
    /// `V2` is increasing on `(x0, ∞)`.
    pub x0: f64,
    /// Growth exponent ν in `V2' ≲ V2 x^ν`.
    pub nu: f64,
    /// Index of regular variation of `V2`, when known.
    pub beta: Option<f64>,
    pub symmetry: Symmetry,
}

impl fmt::Debug for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialModel")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("x0", &self.x0)
            .field("nu", &self.nu)
            .field("beta", &self.beta)
            .field("symmetry", &self.symmetry)
            .field("real_part", &self.v1.is_some())
            .finish()
    }
}

fn fd_step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

fn central_first(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let h = fd_step(x, 6e-6);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn central_second(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let h = fd_step(x, 1e-4);
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

impl PotentialModel {
    /// Purely imaginary potential `i V2`.
    pub fn imaginary(label: impl Into<String>, v2: RealFn, domain: Domain) -> Self {
        Self {
            label: label.into(),
            v1: None,
            v2,
            d_v1: None,
            d_v2: None,
            dd_v1: None,
            dd_v2: None,
            domain,
            x0: 0.0,
            nu: -1.0,
            beta: None,
            symmetry: Symmetry::None,
        }
    }

    pub fn with_real_part(mut self, v1: RealFn) -> Self {
        self.v1 = Some(v1);
        self
    }

    pub fn with_v1_derivatives(mut self, d: RealFn, dd: Option<RealFn>) -> Self {
        self.d_v1 = Some(d);
        self.dd_v1 = dd;
        self
    }

    pub fn with_v2_derivatives(mut self, d: RealFn, dd: Option<RealFn>) -> Self {
        self.d_v2 = Some(d);
        self.dd_v2 = dd;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        self.symmetry = s;
        self
    }

    pub fn with_domain(mut self, d: Domain) -> Self {
        self.domain = d;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `V(x) = e^{iθ} r x` on the line: the rotated Airy potential.
    pub fn rotated_airy(r: f64, theta: f64) -> Self {
        let (c, s) = (r * theta.cos(), r * theta.sin());
        Self::imaginary(format!("airy:r={r},theta={theta}"), Arc::new(move |x| s * x), Domain::FullLine)
            .with_real_part(Arc::new(move |x| c * x))
            .with_v1_derivatives(Arc::new(move |_| c), Some(Arc::new(|_| 0.0)))
            .with_v2_derivatives(Arc::new(move |_| s), Some(Arc::new(|_| 0.0)))
            .with_symmetry(Symmetry::Odd)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_real_part(&self) -> bool {
        self.v1.is_some()
    }

    pub fn v1(&self, x: f64) -> f64 {
        self.v1.as_ref().map_or(0.0, |f| f(x))
    }

    pub fn v2(&self, x: f64) -> f64 {
        (self.v2)(x)
    }

    pub fn value(&self, x: f64) -> Complex64 {
        Complex64::new(self.v1(x), self.v2(x))
    }

    pub fn dv1(&self, x: f64) -> f64 {
        match (&self.d_v1, &self.v1) {
            (Some(d), _) => d(x),
            (None, Some(f)) => central_first(f.as_ref(), x),
            (None, None) => 0.0,
        }
    }

    pub fn dv2(&self, x: f64) -> f64 {
        match &self.d_v2 {
            Some(d) => d(x),
            None => central_first(self.v2.as_ref(), x),
        }
    }

    pub fn ddv1(&self, x: f64) -> f64 {
        match (&self.dd_v1, &self.d_v1, &self.v1) {
            (Some(dd), _, _) => dd(x),
            (None, Some(d), _) => central_first(d.as_ref(), x),
            (None, None, Some(f)) => central_second(f.as_ref(), x),
            _ => 0.0,
        }
    }

    pub fn ddv2(&self, x: f64) -> f64 {
        match (&self.dd_v2, &self.d_v2) {
            (Some(dd), _) => dd(x),
            (None, Some(d)) => central_first(d.as_ref(), x),
            (None, None) => central_second(self.v2.as_ref(), x),
        }
    }

    pub fn dv(&self, x: f64) -> Complex64 {
        Complex64::new(self.dv1(x), self.dv2(x))
    }

    pub fn ddv(&self, x: f64) -> Complex64 {
        Complex64::new(self.ddv1(x), self.ddv2(x))
    }

    /// Same potential with `V2` replaced by `-V2(x)`; conjugates the operator.
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        let v2 = self.v2.clone();
        out.v2 = Arc::new(move |x| -v2(x));
        out.d_v2 = self.d_v2.clone().map(|d| -> RealFn { Arc::new(move |x| -d(x)) });
        out.dd_v2 = self.dd_v2.clone().map(|d| -> RealFn { Arc::new(move |x| -d(x)) });
        out.label = format!("conj({})", self.label);
        out
    }

    /// Mirror image `x ↦ V(-x)`.
    pub fn reflected(&self) -> Self {
        if self.symmetry == Symmetry::Even {
            return self.clone();
        }
        fn flip(f: &RealFn) -> RealFn {
            let f = f.clone();
            Arc::new(move |x| f(-x))
        }
        fn flip_neg(f: &RealFn) -> RealFn {
            let f = f.clone();
            Arc::new(move |x| -f(-x))
        }
        let mut out = self.clone();
        out.v1 = self.v1.as_ref().map(flip);
        out.v2 = flip(&self.v2);
        out.d_v1 = self.d_v1.as_ref().map(flip_neg);
        out.d_v2 = self.d_v2.as_ref().map(flip_neg);
        out.dd_v1 = self.dd_v1.as_ref().map(flip);
        out.dd_v2 = self.dd_v2.as_ref().map(flip);
        out.label = format!("reflect({})", self.label);
        out
    }

    /// Classifies the growth of `V2(±s)` for large `s`.
    pub fn tail(&self, side: Side) -> Tail {
        if side == Side::Minus && self.domain == Domain::HalfLine {
            return Tail::Bounded;
        }
        let start = (self.x0.abs() + 1.0).max(1.0);
        let mut vals = Vec::new();
        let mut s = start;
        while s <= 1e12 * start {
            let v = self.v2(side.sign() * s);
            if v.is_nan() {
                break;
            }
            vals.push(v);
            if v.is_infinite() {
                break;
            }
            s *= 10.0;
        }
        let grows = |vals: &[f64]| -> bool {
            if vals.len() < 3 {
                return false;
            }
            if let Some(&last) = vals.last() {
                if last == f64::INFINITY {
                    return vals.windows(2).all(|w| w[1] > w[0]);
                }
            }
            let k = vals.len();
            let d1 = vals[k - 1] - vals[k - 2];
            let d0 = vals[k - 2] - vals[k - 3];
            d1 > 0.0 && d0 > 0.0 && d1 >= 0.5 * d0
        };
        if grows(&vals) {
            return Tail::ToPlusInfinity;
        }
        let neg: Vec<f64> = vals.iter().map(|v| -v).collect();
        if grows(&neg) {
            return Tail::ToMinusInfinity;
        }
        Tail::Bounded
    }
}

/// Position where `|V2|` reaches `b` on the given side; negative on the
/// minus side.
pub fn turning_point(v: &PotentialModel, b: f64, side: Side) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidInput(format!("level must be positive, got {b}")));
    }
    match side {
        Side::Plus => {
            let start = v.x0.max(0.0);
            let f = |s: f64| v.v2(s);
            let df = |s: f64| v.dv2(s);
            let x = solve_increasing(&f, Some(&df), b, start)?;
            let d = v.dv2(x);
            if !(d > 0.0) {
                return Err(Error::DerivativeNonpositive { x, value: d });
            }
            Ok(x)
        }
        Side::Minus => {
            if v.domain == Domain::HalfLine {
                return Err(Error::InvalidInput("half-line potential has no minus side".into()));
            }
            let sigma = match v.tail(Side::Minus) {
                Tail::ToPlusInfinity => 1.0,
                Tail::ToMinusInfinity => -1.0,
                Tail::Bounded => {
                    return Err(Error::NoBracket(
                        "Im V stays bounded on the negative half-line".into(),
                    ))
                }
            };
            if v.symmetry == Symmetry::Even || (v.symmetry == Symmetry::Odd && sigma < 0.0) {
                return Ok(-turning_point(v, b, Side::Plus)?);
            }
            let start = v.x0.max(0.0);
            let f = |s: f64| sigma * v.v2(-s);
            let df = |s: f64| -sigma * v.dv2(-s);
            let s = solve_increasing(&f, Some(&df), b, start)?;
            let d = -sigma * v.dv2(-s);
            if !(d > 0.0) {
                return Err(Error::DerivativeNonpositive { x: -s, value: d });
            }
            Ok(-s)
        }
    }
}

/// Rotation data at a turning point: the limit `l` of `V1'/V2'`, the
/// parameters `(r, θ)` of the limiting Airy operator, the local ones
/// `(r_b, θ_b)` and their mismatch κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kappa: f64,
    pub l: f64,
    pub r: f64,
    pub theta: f64,
    pub r_b: f64,
    pub theta_b: f64,
    pub x_b: f64,
}

fn rotation_of(q: f64) -> (f64, f64) {
    let z = Complex64::new(q, 1.0);
    (z.norm(), z.arg())
}

/// Estimates `l = lim V1'/V2'` by sampling toward a horizon.
pub fn rotation_limit(v: &PotentialModel, from: f64) -> Result<f64> {
    if !v.has_real_part() {
        return Ok(0.0);
    }
    let start = from.max(1.0);
    let horizon = start * 1e8;
    let mut samples = Vec::new();
    let mut x = start;
    while x <= horizon {
        let q = v.dv1(x) / v.dv2(x);
        if !q.is_finite() {
            break;
        }
        samples.push((x, q));
        x *= 10f64.powf(0.25);
    }
    let Some(&(x_last, l)) = samples.last() else {
        return Err(Error::LimitUnavailable { oscillation: f64::INFINITY });
    };
    let tail: Vec<f64> = samples.iter().filter(|(x, _)| *x >= x_last / 10.0).map(|s| s.1).collect();
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let osc = hi - lo;
    if osc > 1e-3 * l.abs().max(1.0) || samples.len() < 5 {
        return Err(Error::LimitUnavailable { oscillation: osc });
    }
    Ok(l)
}

pub fn kappa(v: &PotentialModel, b: f64, l: Option<f64>) -> Result<Kappa> {
    let x_b = turning_point(v, b, Side::Plus)?;
    let l = match l {
        Some(l) => l,
        None => rotation_limit(v, x_b)?,
    };
    let q = if v.has_real_part() { v.dv1(x_b) / v.dv2(x_b) } else { 0.0 };
    let (r, theta) = rotation_of(l);
    let (r_b, theta_b) = rotation_of(q);
    Ok(Kappa {
        kappa: (l - q).abs(),
        l,
        r,
        theta,
        r_b,
        theta_b,
        x_b,
    })
}

/// `Υ(x) = |x|^ν |V2'(x)|^{-1/3}`.
pub fn upsilon(v: &PotentialModel, x: f64) -> f64 {
    x.abs().powf(v.nu) * v.dv2(x).abs().powf(-1.0 / 3.0)
}

/// Solution `t_a` of `t V2(t) = 2√a` for even `V2`.
pub fn fourier_scale(v: &PotentialModel, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    if v.symmetry != Symmetry::Even {
        return Err(Error::InvalidInput(format!("{} is not even", v.label())));
    }
    let f = |t: f64| t * v.v2(t);
    let df = |t: f64| v.v2(t) + t * v.dv2(t);
    solve_increasing(&f, Some(&df), 2.0 * a.sqrt(), 0.0)
}

/// Sup of `|(1+W_t)^{-1} - (1+x^β)^{-1}|` over `x ≥ 0`, `W_t(x) = V2(tx)/V2(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IotaEstimate {
    pub grid_sup: f64,
    pub tail_bound: f64,
    pub grid_end: f64,
}

impl IotaEstimate {
    pub fn value(&self) -> f64 {
        self.grid_sup.max(self.tail_bound)
    }
}

pub fn iota(v: &PotentialModel, t: f64) -> Result<f64> {
    iota_detail(v, t).map(|e| e.value())
}

pub fn iota_detail(v: &PotentialModel, t: f64) -> Result<IotaEstimate> {
    let beta = v.beta.ok_or(Error::BetaMissing)?;
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    let vt = v.v2(t);
    let gap = |x: f64| -> f64 {
        let w = v.v2(t * x) / vt;
        let lhs = if w.is_infinite() { 0.0 } else { 1.0 / (1.0 + w) };
        (lhs - 1.0 / (1.0 + x.powf(beta))).abs()
    };
    let end = 1e14f64.powf(1.0 / beta).clamp(1e4, 1e100);
    let decades = (end.log10() + 8.0).ceil() as usize;
    let per_decade = 40;
    let mut sup = gap(0.0);
    for k in 0..=decades * per_decade {
        let x = 10f64.powf(-8.0 + k as f64 / per_decade as f64);
        if x > end {
            break;
        }
        sup = sup.max(gap(x));
    }
    let w_end = v.v2(t * end) / vt;
    let tail = (1.0 / (1.0 + w_end)).max(1.0 / (1.0 + end.powf(beta)));
    Ok(IotaEstimate {
        grid_sup: sup,
        tail_bound: if tail.is_nan() { 1.0 } else { tail },
        grid_end: end,
    })
}

/// Exponent `l_{β,ε}` of the real-axis remainder.
pub fn remainder_exponent(beta: f64, eps: f64) -> f64 {
    if beta > 0.5 {
        1.0 - eps
    } else {
        0.5 + beta - eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn davies() -> PotentialModel {
        parse_potential("monomial:n=2").unwrap()
    }

    #[test]
    fn davies_turning_point() {
        let v = davies();
        for b in [1.0, 100.0, 1e6] {
            let x = turning_point(&v, b, Side::Plus).unwrap();
            assert!((x - b.sqrt()).abs() <= 1e-12 * b.sqrt());
        }
        assert!((turning_point(&v, 100.0, Side::Minus).unwrap() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn odd_potential_minus_side() {
        let v = parse_potential("monomial:n=3").unwrap();
        assert_eq!(v.tail(Side::Minus), Tail::ToMinusInfinity);
        let x = turning_point(&v, 8.0, Side::Minus).unwrap();
        assert!((x + 2.0).abs() < 1e-12);
    }

    #[test]
    fn davies_fourier_scale() {
        let v = davies();
        let t = fourier_scale(&v, 1e6).unwrap();
        assert!((t - 2000f64.powf(1.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn kappa_vanishes_for_imaginary_potentials() {
        let k = kappa(&davies(), 50.0, None).unwrap();
        assert_eq!(k.kappa, 0.0);
        assert!((k.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn kappa_with_real_part() {
        // V = x^2 + i x^2: the ratio is constant 1
        let v = davies()
            .with_real_part(Arc::new(|x| x * x))
            .with_v1_derivatives(Arc::new(|x| 2.0 * x), None);
        let k = kappa(&v, 100.0, None).unwrap();
        assert!(k.kappa < 1e-12);
        assert!((k.l - 1.0).abs() < 1e-12);
        assert!((k.r - 2f64.sqrt()).abs() < 1e-12);
        assert!((k.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn oscillating_ratio_has_no_limit() {
        let v = davies().with_real_part(Arc::new(|x| x * x * (2.0 + x.ln().sin())));
        assert!(matches!(kappa(&v, 100.0, None), Err(Error::LimitUnavailable { .. })));
    }

    #[test]
    fn iota_examples() {
        let v = davies();
        assert!(iota(&v, 3.7).unwrap() <= 1e-12);
        let p = parse_potential("power:p=2").unwrap();
        let i100 = iota(&p, 100.0).unwrap();
        assert!(i100 <= 1e-3);
        assert!(iota(&p, 1000.0).unwrap() < i100);
        assert_eq!(iota(&parse_potential("log").unwrap(), 10.0), Err(Error::BetaMissing));
    }

    #[test]
    fn remainder_exponent_cases() {
        assert_eq!(remainder_exponent(2.0, 0.1), 0.9);
        assert!((remainder_exponent(0.25, 0.05) - 0.7).abs() < 1e-15);
    }
}

//! Large-parameter asymptotics of `‖(H - λ)⁻¹‖`: along the imaginary and
//! real axes, along curves leaving the axes, on the whole line and for
//! radial operators; level curves of the resolvent norm and the boundary
//! of the region where the norm stays controlled.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy::{log_airy_norm_asym, AiryKind, AiryNormTable, AiryQuery};
use crate::error::{Error, Result};
use crate::lambert::lambert_w0;
use crate::potential::{
    check_assumptions, fourier_scale, iota, kappa, remainder_exponent, turning_point, upsilon, AssumptionMode,
    Domain, PotentialModel, Side, Symmetry, Tail,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Imag,
    Real,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imag" | "iR" => Ok(Self::Imag),
            "real" | "R" => Ok(Self::Real),
            o => Err(Error::Parse(format!("unknown axis `{o}` (imag or real)"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Imag => "imag",
            Self::Real => "real",
        })
    }
}

/// Offset of a curve from its axis as a function of the axis parameter:
/// `c · p^q · (ln p)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offset {
    pub c: f64,
    pub q: f64,
    pub s: f64,
}

impl Offset {
    pub const ZERO: Offset = Offset { c: 0.0, q: 0.0, s: 0.0 };

    pub fn eval(&self, p: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let mut v = self.c;
        if self.q != 0.0 {
            v *= p.powf(self.q);
        }
        if self.s != 0.0 {
            v *= p.ln().powf(self.s);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0
    }
}

impl FromStr for Offset {
    type Err = Error;

    /// Parses products of a constant, `param^q` and `(log(param))^s`, e.g.
    /// `0.5*param^0.3333*(log(param))^0.6667`; `0` is the zero offset.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("curve expression `{s}`: {what}"));
        let mut out = Offset { c: 1.0, q: 0.0, s: 0.0 };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (factor, tail) = split_factor(rest);
            rest = tail;
            if let Some(e) = factor.strip_prefix("param") {
                out.q += parse_exponent(e).ok_or_else(|| bad("bad exponent on param"))?;
            } else if let Some(e) = factor
                .strip_prefix("(log(param))")
                .or_else(|| factor.strip_prefix("log(param)"))
            {
                out.s += parse_exponent(e).ok_or_else(|| bad("bad exponent on log(param)"))?;
            } else {
                out.c *= factor.parse::<f64>().map_err(|_| bad(&format!("unknown factor `{factor}`")))?;
            }
        }
        Ok(out)
    }
}

/// Splits off the first `*`-separated factor, ignoring `*` inside parentheses.
fn split_factor(s: &str) -> (&str, &str) {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => return (&s[..i], &s[i + 1..]),
            _ => {}
        }
    }
    (s, "")
}

fn parse_exponent(e: &str) -> Option<f64> {
    if e.is_empty() {
        return Some(1.0);
    }
    let e = e.strip_prefix('^')?;
    let e = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(e);
    e.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub axis: Axis,
    pub offset: Offset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityStatus {
    Valid,
    /// The remainder scale is too large for the formula to be trusted.
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub status: ValidityStatus,
    pub assumptions_pass: bool,
    pub forced: bool,
    pub note: Option<String>,
}

impl Validity {
    fn valid(assumptions_pass: bool, forced: bool) -> Self {
        Self { status: ValidityStatus::Valid, assumptions_pass, forced, note: None }
    }

    fn downgrade(&mut self, status: ValidityStatus, note: impl Into<String>) {
        if self.status == ValidityStatus::Valid || status == ValidityStatus::Violated {
            self.status = status;
        }
        self.note = Some(note.into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymEstimate {
    pub value: f64,
    pub lambda: Complex64,
    /// Norm of the model operator (possibly shifted).
    pub leading_constant: f64,
    /// Factor multiplying the model norm.
    pub scale_factor: f64,
    /// Size of the relative remainder.
    pub remainder_scale: f64,
    pub validity: Validity,
}

/// Shared state for asymptotic evaluations: the Airy norm table and the
/// tolerance used to fill it.
#[derive(Debug, Clone)]
pub struct AsymContext {
    pub airy: Arc<AiryNormTable>,
    pub airy_tol: f64,
    /// Evaluate even when the standing assumptions fail.
    pub force: bool,
}

impl Default for AsymContext {
    fn default() -> Self {
        Self { airy: Arc::new(AiryNormTable::new()), airy_tol: 1e-8, force: false }
    }
}

impl AsymContext {
    pub fn with_table(airy: Arc<AiryNormTable>) -> Self {
        Self { airy, ..Default::default() }
    }

    /// Numeric `‖(A - μ)⁻¹‖` from the table. Generalized operators with
    /// `β < 1` converge slowly in the mesh width, so their tolerance is
    /// capped at 1e-5.
    pub fn airy_norm(&self, kind: AiryKind, mu: f64) -> Result<f64> {
        let tol = match kind {
            AiryKind::Generalized { beta } if beta < 1.0 => self.airy_tol.max(1e-5),
            _ => self.airy_tol,
        };
        self.airy.norm(&AiryQuery { kind, mu, tol })
    }

    fn assumptions(&self, v: &PotentialModel, mode: AssumptionMode) -> Result<bool> {
        let report = check_assumptions(v, mode);
        let ok = report.all_pass();
        if !ok && !self.force {
            return Err(Error::AssumptionsFailed(report.summary()));
        }
        Ok(ok)
    }
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

fn require_even(v: &PotentialModel) -> Result<()> {
    if v.symmetry != Symmetry::Even || v.domain != Domain::FullLine || v.has_real_part() {
        return Err(Error::InvalidInput(format!(
            "{} must be purely imaginary and even on the line",
            v.label()
        )));
    }
    Ok(())
}

/// Along `λ = V(x_b)` with `Im λ = b → ∞`.
pub fn resnorm_imag(ctx: &AsymContext, v: &PotentialModel, b: f64) -> Result<AsymEstimate> {
    let ok = ctx.assumptions(v, AssumptionMode::ImaginaryAxis)?;
    let k = kappa(v, b, None)?;
    let airy = ctx.airy_norm(AiryKind::Rotated { r: k.r, theta: k.theta }, 0.0)?;
    let scale = v.dv2(k.x_b).powf(-2.0 / 3.0);
    Ok(AsymEstimate {
        value: airy * scale,
        lambda: v.value(k.x_b),
        leading_constant: airy,
        scale_factor: scale,
        remainder_scale: k.kappa + upsilon(v, k.x_b),
        validity: Validity::valid(ok, ctx.force),
    })
}

/// Along `λ = a → +∞` for even `V2`.
pub fn resnorm_real(ctx: &AsymContext, v: &PotentialModel, a: f64, eps: Option<f64>) -> Result<AsymEstimate> {
    require_even(v)?;
    let beta = v.beta.ok_or(Error::BetaMissing)?;
    let ok = ctx.assumptions(v, AssumptionMode::RealAxis)?;
    let eps = eps.unwrap_or(beta.min(1.0) / 10.0);
    let t = fourier_scale(v, a)?;
    let airy = ctx.airy_norm(AiryKind::Generalized { beta }, 0.0)?;
    let scale = 1.0 / v.v2(t);
    let rem = iota(v, t)? + (a.sqrt() * t).powf(-remainder_exponent(beta, eps));
    Ok(AsymEstimate {
        value: airy * scale,
        lambda: Complex64::new(a, 0.0),
        leading_constant: airy,
        scale_factor: scale,
        remainder_scale: rem,
        validity: Validity::valid(ok, ctx.force),
    })
}

/// Along a curve leaving an axis; `param` is the axis coordinate.
pub fn resnorm_curve(ctx: &AsymContext, v: &PotentialModel, curve: &CurveSpec, param: f64) -> Result<AsymEstimate> {
    match curve.axis {
        Axis::Imag => {
            if v.has_real_part() {
                return Err(Error::Unsupported("curves off the imaginary axis need Re V = 0".into()));
            }
            if curve.offset.is_zero() {
                return resnorm_imag(ctx, v, param);
            }
            let ok = ctx.assumptions(v, AssumptionMode::ImaginaryAxis)?;
            let mu_at = |p: f64| -> Result<(f64, f64)> {
                let x = turning_point(v, p, Side::Plus)?;
                let rho2 = v.dv2(x).powf(-2.0 / 3.0);
                Ok((rho2 * curve.offset.eval(p), x))
            };
            let (mu, x_b) = mu_at(param)?;
            let rho2 = v.dv2(x_b).powf(-2.0 / 3.0);
            let shifted = ctx.airy_norm(AiryKind::imaginary(), mu)?;
            let phi = japanese(mu).powi(2) * shifted * upsilon(v, x_b);
            let mut validity = Validity::valid(ok, ctx.force);
            if phi > 0.5 {
                validity.downgrade(ValidityStatus::Violated, format!("remainder scale {phi:.3e} exceeds 1/2"));
            }
            if let Some(note) = classify_trend(&|p| mu_at(p).map(|m| m.0), param) {
                validity.downgrade(ValidityStatus::Inconclusive, note);
            }
            Ok(AsymEstimate {
                value: shifted * rho2,
                lambda: Complex64::new(curve.offset.eval(param), param),
                leading_constant: shifted,
                scale_factor: rho2,
                remainder_scale: phi,
                validity,
            })
        }
        Axis::Real => {
            if curve.offset.is_zero() {
                return resnorm_real(ctx, v, param, None);
            }
            require_even(v)?;
            let beta = v.beta.ok_or(Error::BetaMissing)?;
            let ok = ctx.assumptions(v, AssumptionMode::RealAxis)?;
            let mu_at = |p: f64| -> Result<(f64, f64)> {
                let t = fourier_scale(v, p)?;
                Ok((curve.offset.eval(p) / v.v2(t), t))
            };
            let (mu, t) = mu_at(param)?;
            let shifted = ctx.airy_norm(AiryKind::Generalized { beta }, mu)?;
            let eps = beta.min(1.0) / 10.0;
            let rem = iota(v, t)? + (param.sqrt() * t).powf(-remainder_exponent(beta, eps));
            let phi = japanese(mu).powi(2) * shifted * rem;
            let mut validity = Validity::valid(ok, ctx.force);
            if phi > 0.5 {
                validity.downgrade(ValidityStatus::Violated, format!("remainder scale {phi:.3e} exceeds 1/2"));
            }
            let ratios: Vec<f64> = [1.0, 10.0, 100.0]
                .iter()
                .map(|m| curve.offset.eval(param * m).abs() / (param * m))
                .collect();
            if !(ratios[2] < ratios[1] && ratios[1] < ratios[0]) {
                validity.downgrade(ValidityStatus::Inconclusive, "offset/param does not decrease");
            } else if let Some(note) = classify_trend(&|p| mu_at(p).map(|m| m.0), param) {
                validity.downgrade(ValidityStatus::Inconclusive, note);
            }
            Ok(AsymEstimate {
                value: shifted / v.v2(t),
                lambda: Complex64::new(param, curve.offset.eval(param)),
                leading_constant: shifted,
                scale_factor: 1.0 / v.v2(t),
                remainder_scale: phi,
                validity,
            })
        }
    }
}

/// Flags a rescaled shift that neither settles nor grows monotonically.
fn classify_trend(mu_at: &dyn Fn(f64) -> Result<f64>, param: f64) -> Option<String> {
    let mus: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().filter_map(|m| mu_at(param * m).ok()).collect();
    if mus.len() < 4 {
        return Some("rescaled shift could not be sampled".into());
    }
    let increasing = mus.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = mus.windows(2).all(|w| w[1] <= w[0]);
    if increasing || decreasing {
        None
    } else {
        Some(format!("rescaled shift oscillates: {mus:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// Along `λ = ±ib` for potentials on the whole line: the larger of the two
/// turning-point contributions.
pub fn resnorm_wholeline(ctx: &AsymContext, v: &PotentialModel, b: f64, sign: Sign) -> Result<AsymEstimate> {
    if v.domain != Domain::FullLine {
        return Err(Error::InvalidInput("whole-line asymptotics need a potential on the line".into()));
    }
    if v.has_real_part() {
        return Err(Error::Unsupported("whole-line asymptotics are implemented for Re V = 0".into()));
    }
    let w = match sign {
        Sign::Plus => v.clone(),
        Sign::Minus => v.conjugate(),
    };
    let tails = [w.tail(Side::Plus), w.tail(Side::Minus)];
    if tails.contains(&Tail::Bounded) {
        return Err(Error::NoBracket("Im V is bounded on one side; use the half-line formula".into()));
    }
    let mut ok = true;
    let mut slope = f64::INFINITY;
    let mut rem: f64 = 0.0;
    for (side, tail) in [Side::Plus, Side::Minus].into_iter().zip(tails) {
        if tail != Tail::ToPlusInfinity {
            continue;
        }
        let mirrored = match side {
            Side::Plus => w.clone(),
            Side::Minus => w.reflected(),
        };
        ok &= ctx.assumptions(&mirrored, AssumptionMode::ImaginaryAxis)?;
        let x = turning_point(&w, b, side)?;
        let d = w.dv2(x).abs();
        slope = slope.min(d);
        rem = rem.max(upsilon(&w, x));
    }
    if !slope.is_finite() {
        return Err(Error::NoBracket(format!("Im V never reaches {b} with the requested sign")));
    }
    let airy = ctx.airy_norm(AiryKind::imaginary(), 0.0)?;
    let scale = slope.powf(-2.0 / 3.0);
    let im = match sign {
        Sign::Plus => b,
        Sign::Minus => -b,
    };
    Ok(AsymEstimate {
        value: airy * scale,
        lambda: Complex64::new(0.0, im),
        leading_constant: airy,
        scale_factor: scale,
        remainder_scale: rem,
        validity: Validity::valid(ok, ctx.force),
    })
}

/// Radial operator `-Δ + i v(|x|)` in dimension `d ≥ 2` along `λ = ib`;
/// the answer coincides with the one-dimensional half-line formula.
pub fn resnorm_radial(ctx: &AsymContext, v: &PotentialModel, d: u32, b: f64) -> Result<AsymEstimate> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension must be at least 2, got {d}")));
    }
    if v.has_real_part() {
        return Err(Error::InvalidInput("radial profile must be real (potential i v)".into()));
    }
    resnorm_imag(ctx, &v.clone().with_domain(Domain::HalfLine), b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LevelOrder {
    /// Closed form from the leading logarithmic balance.
    #[default]
    Leading,
    /// Fixed point through `W₀` with the full Airy asymptotics.
    Lambert,
}

impl FromStr for LevelOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(Self::Leading),
            "lambert" => Ok(Self::Lambert),
            o => Err(Error::Parse(format!("unknown level-curve order `{o}` (leading or lambert)"))),
        }
    }
}

/// Rescaling data at a parameter: `(ρ⁻², kind)` with the level offset
/// equal to `μ · scale`.
fn level_scale(v: &PotentialModel, axis: Axis, param: f64) -> Result<(f64, AiryKind)> {
    match axis {
        Axis::Imag => {
            if v.has_real_part() {
                return Err(Error::Unsupported("level curves off the imaginary axis need Re V = 0".into()));
            }
            let x = turning_point(v, param, Side::Plus)?;
            Ok((v.dv2(x).powf(2.0 / 3.0), AiryKind::imaginary()))
        }
        Axis::Real => {
            require_even(v)?;
            let beta = v.beta.ok_or(Error::BetaMissing)?;
            let t = fourier_scale(v, param)?;
            Ok((v.v2(t), AiryKind::Generalized { beta }))
        }
    }
}

/// Offset of the curve on which `‖(H - λ)⁻¹‖ ≈ 1/ε`: `a_b` (imaginary
/// axis, `λ = a_b + ib`) or `b_a` (real axis, `λ = a + i b_a`).
pub fn level_curve(v: &PotentialModel, axis: Axis, eps: f64, param: f64, order: LevelOrder) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let (scale, kind) = level_scale(v, axis, param)?;
    let k = scale / eps;
    let (c, p, mu_exp) = match kind {
        AiryKind::Rotated { .. } => (4.0 / 3.0, 1.5, 2.0 / 3.0),
        AiryKind::Generalized { beta } => {
            let c = 2.0 * beta / (beta + 1.0);
            (c, (beta + 1.0) / beta, beta / (beta + 1.0))
        }
    };
    let leading = || -> Result<f64> {
        if !(k > std::f64::consts::E) {
            return Err(Error::LogDomain { argument: k });
        }
        Ok((k.ln() / c).powf(mu_exp))
    };
    let mu = match order {
        LevelOrder::Leading => leading()?,
        LevelOrder::Lambert => {
            // y = c μ^p satisfies y e^y = c · μ^p · K / prefactor(μ)
            let prefactor = |m: f64| -> Result<f64> { Ok(log_airy_norm_asym(kind, m)? - c * m.powf(p)) };
            let mut mu = leading()?;
            let mut converged = false;
            for _ in 0..200 {
                let log_arg = c.ln() + p * mu.ln() + k.ln() - prefactor(mu)?;
                let y = lambert_w0(log_arg.exp())?;
                let next = (y / c).powf(1.0 / p);
                if (next - mu).abs() <= 1e-14 * mu {
                    mu = next;
                    converged = true;
                    break;
                }
                mu = next;
            }
            if !converged {
                return Err(Error::NoConvergence { iterations: 200 });
            }
            mu
        }
    };
    Ok(mu * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalBoundary {
    pub offset: f64,
    /// The formula gave a negative offset and was clamped to zero.
    pub clamped: bool,
}

/// Largest offset for which the resolvent norm stays comparable to its
/// on-axis value: `‖A⁻¹‖⁻¹ · scale · (1 - ε') - ε`.
pub fn critical_boundary(
    ctx: &AsymContext,
    v: &PotentialModel,
    axis: Axis,
    eps: f64,
    eps_prime: f64,
    param: f64,
) -> Result<CriticalBoundary> {
    if !(eps > 0.0) || !(eps_prime > 0.0 && eps_prime <= 1.0) {
        return Err(Error::InvalidInput("need eps > 0 and 0 < eps' <= 1".into()));
    }
    let (scale, kind) = level_scale(v, axis, param)?;
    let airy = ctx.airy_norm(kind, 0.0)?;
    let raw = scale * (1.0 - eps_prime) / airy - eps;
    Ok(CriticalBoundary { offset: raw.max(0.0), clamped: raw < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse_potential;

    #[test]
    fn offset_expressions() {
        let o: Offset = "0.5*param^0.3333*(log(param))^0.6667".parse().unwrap();
        assert_eq!(o, Offset { c: 0.5, q: 0.3333, s: 0.6667 });
        let z: Offset = "0".parse().unwrap();
        assert!(z.is_zero());
        let p: Offset = "2*param".parse().unwrap();
        assert_eq!(p.eval(3.0), 6.0);
        assert!("foo*param".parse::<Offset>().is_err());
    }

    #[test]
    fn davies_level_curve_general_formula() {
        let v = parse_potential("monomial:n=2").unwrap();
        let a = level_curve(&v, Axis::Imag, 0.1, 1e6, LevelOrder::Leading).unwrap();
        let rho_inv2 = 2000f64.powf(2.0 / 3.0);
        let expect = 0.75f64.powf(2.0 / 3.0) * rho_inv2 * (rho_inv2 / 0.1).ln().powf(2.0 / 3.0);
        assert!((a - expect).abs() < 1e-9 * expect);
        // the specialization with the constant dropped inside the logarithm
        let special = 1.5f64.powf(2.0 / 3.0) * 100.0 * 1000f64.ln().powf(2.0 / 3.0);
        assert!((a / special - 1.0).abs() < 0.05);
    }

    #[test]
    fn level_curve_log_domain() {
        let v = parse_potential("power:p=0.6666666666666666").unwrap();
        let e = level_curve(&v, Axis::Imag, 0.1, 1e4, LevelOrder::Leading).unwrap_err();
        assert!(matches!(e, Error::LogDomain { .. }));
    }

    #[test]
    fn wholeline_rejects_bounded_side() {
        let v = PotentialModel::imaginary("atan", Arc::new(|x: f64| x.atan() + x.max(0.0).powi(2)), Domain::FullLine);
        let ctx = AsymContext::default();
        assert!(matches!(resnorm_wholeline(&ctx, &v, 100.0, Sign::Plus), Err(Error::NoBracket(_))));
    }
}

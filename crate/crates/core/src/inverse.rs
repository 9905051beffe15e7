//! Inverse problem: from a prescribed rate `r(b)` build a potential `V2`
//! whose leading resolvent-norm term on the imaginary axis,
//! `A V2'(x_b)^{-2/3}`, equals `r(b)`.
//!
//! `V2 = F⁻¹` with `F(y) = A^{-3/2} ∫₀^y r^{3/2}`, `A = ‖A_{1,π/2}⁻¹‖`, so
//! that `V2'(x) = A^{3/2} r(V2(x))^{-3/2}`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::airy::AiryKind;
use crate::asymptotics::AsymContext;
use crate::error::{Error, Result};
use crate::pchip::Pchip;
use crate::potential::{AssumptionItem, Domain, ItemStatus, PotentialModel, RealFn};
use crate::quad::integrate;

/// A positive rate function with optional closed-form derivative.
#[derive(Clone)]
pub struct RateFunction {
    label: String,
    r: RealFn,
    dr: Option<RealFn>,
}

impl std::fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateFunction").field("label", &self.label).finish()
    }
}

impl RateFunction {
    pub fn new(label: impl Into<String>, r: RealFn, dr: Option<RealFn>) -> Self {
        Self { label: label.into(), r, dr }
    }

    /// `japanese:alpha=<a>` (`⟨y⟩^a`), `exp:alpha=<a>` (`e^{y^a}`),
    /// `const:c=<c>`, `inv1p` (`1/(1+y)`).
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let get = |key: &str| -> Result<f64> {
            rest.split(',')
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .ok_or_else(|| Error::Parse(format!("rate `{spec}`: missing `{key}`")))?
                .1
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("rate `{spec}`: bad `{key}`")))
        };
        let rate = match name {
            "japanese" => {
                let a = get("alpha")?;
                Self::new(
                    spec,
                    Arc::new(move |y| (1.0 + y * y).powf(0.5 * a)),
                    Some(Arc::new(move |y| a * y * (1.0 + y * y).powf(0.5 * a - 1.0))),
                )
            }
            "exp" => {
                let a = get("alpha")?;
                Self::new(
                    spec,
                    Arc::new(move |y: f64| y.powf(a).exp()),
                    Some(Arc::new(move |y: f64| {
                        if y == 0.0 {
                            if a == 1.0 { 1.0 } else { 0.0 }
                        } else {
                            a * y.powf(a - 1.0) * y.powf(a).exp()
                        }
                    })),
                )
            }
            "const" => {
                let c = get("c")?;
                if !(c > 0.0) {
                    return Err(Error::Parse(format!("rate constant must be positive, got {c}")));
                }
                Self::new(spec, Arc::new(move |_| c), Some(Arc::new(|_| 0.0)))
            }
            "inv1p" => Self::new(spec, Arc::new(|y| 1.0 / (1.0 + y)), Some(Arc::new(|y| -1.0 / ((1.0 + y) * (1.0 + y))))),
            o => return Err(Error::Parse(format!("unknown rate `{o}` (japanese, exp, const, inv1p)"))),
        };
        Ok(rate)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, y: f64) -> f64 {
        (self.r)(y)
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match &self.dr {
            Some(d) => d(y),
            None => {
                let h = 1e-6 * y.abs().max(1.0);
                (self.value(y + h) - self.value(y - h)) / (2.0 * h)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rate: String,
    pub horizon: f64,
    pub items: Vec<AssumptionItem>,
}

impl RateReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.status != ItemStatus::Fail)
    }

    pub fn item(&self, id: &str) -> Option<&AssumptionItem> {
        self.items.iter().find(|i| i.id == id)
    }
}

fn status(ok: bool) -> ItemStatus {
    if ok {
        ItemStatus::Pass
    } else {
        ItemStatus::Fail
    }
}

/// Samples the admissibility conditions on a log grid over `[1, horizon]`:
/// `r → ∞`, `∫₀^y r^{3/2} ≲ y r^{3/2}(y)`, `|r'| r^{-5/2} ∫₀^y r^{3/2} ≲ 1`
/// and `r^{1/2}/∫₀^y r^{3/2} → 0`.
pub fn check_rate_conditions(r: &RateFunction, horizon: f64) -> Result<RateReport> {
    if !(horizon > 10.0) {
        return Err(Error::InvalidInput(format!("horizon must exceed 10, got {horizon}")));
    }
    let n = 200;
    let step = horizon.ln() / (n - 1) as f64;
    let f = |y: f64| r.value(y).powf(1.5);
    let mut ys = Vec::with_capacity(n);
    let mut ints = Vec::with_capacity(n);
    let mut acc = integrate(&f, 0.0, 1.0, 1e-14, 1e-10)?;
    let mut prev = 1.0;
    for k in 0..n {
        let y = (step * k as f64).exp();
        if k > 0 {
            acc += match integrate(&f, prev, y, 0.0, 1e-10) {
                Ok(v) => v,
                Err(_) => break,
            };
        }
        if !acc.is_finite() || !f(y).is_finite() || acc > 1e300 {
            break;
        }
        ys.push(y);
        ints.push(acc);
        prev = y;
    }
    if ys.len() < 40 {
        return Err(Error::HorizonTooSmall { reached: prev, target: horizon });
    }
    let end = *ys.last().unwrap();
    let split = |decades: f64| ys.partition_point(|&y| y < end / 10f64.powf(decades)).clamp(ys.len() / 4, ys.len() - ys.len() / 4);
    let bounded = |id: &str, desc: &str, vals: Vec<f64>| {
        let k = split(2.0);
        let early = vals[..k].iter().cloned().fold(0.0, f64::max);
        let (late, at) = vals[k..]
            .iter()
            .zip(&ys[k..])
            .fold((f64::NEG_INFINITY, None), |acc, (v, y)| if *v > acc.0 { (*v, Some(*y)) } else { acc });
        AssumptionItem {
            id: id.into(),
            description: desc.into(),
            status: status(vals.iter().all(|v| v.is_finite()) && late <= 2.0 * early.max(f64::MIN_POSITIVE)),
            worst_violation: late,
            witness: at,
            fitted_constant: Some(early.max(late)),
        }
    };

    let (ra, rb, rc) = (r.value(end / 100.0), r.value(end / 10.0), r.value(end));
    let unbounded = AssumptionItem {
        id: "rate-unbounded".into(),
        description: "r(y) grows without bound".into(),
        status: status(rb > ra && rc > rb && (rc - rb) >= 0.5 * (rb - ra)),
        worst_violation: rc,
        witness: Some(end),
        fitted_constant: None,
    };
    let c1 = ys.iter().zip(&ints).map(|(&y, &i)| i / (y * f(y))).collect();
    let c2 = ys
        .iter()
        .zip(&ints)
        .map(|(&y, &i)| r.derivative(y).abs() * r.value(y).powf(-2.5) * i)
        .collect();
    let c3: Vec<f64> = ys.iter().zip(&ints).map(|(&y, &i)| r.value(y).sqrt() / i).collect();
    let k = split(1.0);
    let vanishing = AssumptionItem {
        id: "rate-small-ratio".into(),
        description: "r^{1/2} / ∫ r^{3/2} tends to 0".into(),
        status: status(c3.iter().all(|v| v.is_finite()) && c3[c3.len() - 1] <= 0.5 * c3[k.saturating_sub(1)]),
        worst_violation: c3[c3.len() - 1],
        witness: Some(end),
        fitted_constant: None,
    };
    Ok(RateReport {
        rate: r.label().into(),
        horizon: end,
        items: vec![
            unbounded,
            bounded("rate-integral", "∫ r^{3/2} ≲ y r^{3/2}(y)", c1),
            bounded("rate-derivative", "|r'| r^{-5/2} ∫ r^{3/2} ≲ 1", c2),
            vanishing,
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    pub points_per_decade: usize,
    /// Horizon for the admissibility check run before construction.
    pub check_horizon: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { points_per_decade: 50, check_horizon: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseResult {
    pub rate: String,
    pub x: Vec<f64>,
    pub v2: Vec<f64>,
    pub dv2: Vec<f64>,
    pub airy_constant: f64,
    /// Relative tolerance the Airy constant was computed to.
    pub airy_tolerance: f64,
    pub conditions: RateReport,
}

impl InverseResult {
    /// Monotone interpolant of `V2` through the tabulated points.
    pub fn interpolant(&self) -> Result<Pchip> {
        Pchip::new(self.x.clone(), self.v2.clone())
    }

    /// Purely imaginary half-line potential `i V2` built from the table.
    pub fn to_potential(&self) -> Result<PotentialModel> {
        let p = Arc::new(self.interpolant()?);
        let (a, b, c) = (p.clone(), p.clone(), p);
        Ok(PotentialModel::imaginary(format!("inverse:{}", self.rate), Arc::new(move |x| a.eval(x)), Domain::HalfLine)
            .with_v2_derivatives(
                Arc::new(move |x| b.derivative(x)),
                Some(Arc::new(move |x| c.second_derivative(x))),
            )
            .with_x0(self.x[0]))
    }

    /// Writes `x,v2,dv2` rows with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# rate={} airy_constant={:.16e}", self.rate, self.airy_constant)?;
        writeln!(out, "x,v2,dv2")?;
        for ((x, v), d) in self.x.iter().zip(&self.v2).zip(&self.dv2) {
            writeln!(out, "{x:.16e},{v:.16e},{d:.16e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Beyond this `y` the integral is taken to stay below `x_max` for good.
const MAX_Y: f64 = 1e100;

pub fn potential_from_rate(ctx: &AsymContext, r: &RateFunction, x_max: f64) -> Result<InverseResult> {
    potential_from_rate_with(ctx, r, x_max, &InverseOptions::default())
}

pub fn potential_from_rate_with(
    ctx: &AsymContext,
    r: &RateFunction,
    x_max: f64,
    opts: &InverseOptions,
) -> Result<InverseResult> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidInput(format!("x_max must be positive, got {x_max}")));
    }
    let conditions = check_rate_conditions(r, opts.check_horizon)?;
    if !conditions.all_pass() && !ctx.force {
        let failed: Vec<&str> =
            conditions.items.iter().filter(|i| i.status == ItemStatus::Fail).map(|i| i.id.as_str()).collect();
        return Err(Error::AssumptionsFailed(format!("rate {}: {}", r.label(), failed.join(", "))));
    }
    let a = ctx.airy_norm(AiryKind::imaginary(), 0.0)?;
    let norm = a.powf(-1.5);
    let f = |y: f64| r.value(y).powf(1.5);
    let growth = 1.0 / opts.points_per_decade.max(5) as f64;

    let (mut ys, mut fs, mut slopes) = (vec![0.0], vec![0.0], vec![1.0 / (norm * f(0.0))]);
    let (mut y, mut acc) = (0.0f64, 0.0f64);
    while acc < x_max {
        let mut dy = (growth * y).max(1e-3);
        let piece = loop {
            let p = norm * integrate(&f, y, y + dy, 0.0, 1e-12)?;
            if acc == 0.0 || p <= growth * acc || dy < 1e-12 {
                break p;
            }
            dy *= 0.5;
        };
        if !piece.is_finite() || piece <= 0.0 {
            return Err(Error::QuadratureFailure(format!("rate integral not positive near y = {y}")));
        }
        if y > MAX_Y || (acc > 0.0 && piece <= f64::EPSILON * acc) {
            return Err(Error::HorizonTooSmall { reached: acc, target: x_max });
        }
        y += dy;
        acc += piece;
        ys.push(y);
        fs.push(acc);
        slopes.push(1.0 / (norm * f(y)));
    }
    let inverse = Pchip::with_slopes(fs.clone(), ys, slopes)?;

    let lo = fs[1];
    let decades = (x_max / lo).log10();
    let count = ((decades * opts.points_per_decade as f64).ceil() as usize).max(2);
    let mut x = Vec::with_capacity(count + 1);
    let mut v2 = Vec::with_capacity(count + 1);
    let mut dv2 = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let xk = if k == count { x_max } else { lo * 10f64.powf(decades * k as f64 / count as f64) };
        let v = inverse.eval(xk);
        x.push(xk);
        v2.push(v);
        dv2.push(1.0 / (norm * f(v)));
    }
    let airy_tolerance = ctx.airy_tol;
    Ok(InverseResult {
        rate: r.label().into(),
        x,
        v2,
        dv2,
        airy_constant: a,
        airy_tolerance,
        conditions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub b: f64,
    pub x_b: f64,
    /// `A V2'(x_b)^{-2/3} / r(b)`.
    pub ratio: f64,
}

/// Compares the asymptotic norm of the reconstructed potential with `1/r(b)`,
/// differentiating the table interpolant.
pub fn verify_rate(inv: &InverseResult, r: &RateFunction, bs: &[f64]) -> Result<Vec<RateCheck>> {
    let p = inv.interpolant()?;
    bs.iter()
        .map(|&b| {
            let x_b = p.invert(b)?;
            let d = p.derivative(x_b);
            let asym = inv.airy_constant * d.powf(-2.0 / 3.0);
            Ok(RateCheck { b, x_b, ratio: asym / r.value(b) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_parsing() {
        assert!((RateFunction::parse("japanese:alpha=1").unwrap().value(0.0) - 1.0).abs() < 1e-15);
        assert!(RateFunction::parse("const:c=0").is_err());
        assert!(RateFunction::parse("bogus").is_err());
    }

    #[test]
    fn constant_rate_gives_linear_potential() {
        let ctx = AsymContext { force: true, ..Default::default() };
        let r = RateFunction::parse("const:c=2").unwrap();
        assert!(matches!(
            potential_from_rate(&AsymContext::default(), &r, 1e4),
            Err(Error::AssumptionsFailed(_))
        ));
        let inv = potential_from_rate(&ctx, &r, 1e4).unwrap();
        let a = inv.airy_constant;
        for (x, v) in inv.x.iter().zip(&inv.v2) {
            let want = a.powf(1.5) * x / 2f64.powf(1.5);
            assert!((v - want).abs() <= 1e-9 * want.max(1e-12), "{x}: {v} vs {want}");
        }
        for c in verify_rate(&inv, &r, &[1.0, 10.0, 100.0]).unwrap() {
            assert!((c.ratio - 1.0).abs() < 1e-3);
        }
    }
}

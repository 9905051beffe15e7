//! Sampled checks of the standing hypotheses behind the asymptotic
//! formulas. Every item is judged on a logarithmic grid toward a horizon;
//! "bounded" items pass when the sampled ratio shows no growth over the
//! last two decades, "vanishing" items when the last decade sits well
//! below the first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{rotation_limit, upsilon, Domain, PotentialModel};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssumptionMode {
    /// Large imaginary spectral parameter.
    #[serde(rename = "iR")]
    ImaginaryAxis,
    /// Large real spectral parameter, even `V2`.
    #[serde(rename = "R")]
    RealAxis,
}

impl FromStr for AssumptionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "iR" | "ir" | "imag" => Ok(Self::ImaginaryAxis),
            "R" | "r" | "real" => Ok(Self::RealAxis),
            other => Err(Error::Parse(format!("unknown assumption mode `{other}` (iR or R)"))),
        }
    }
}

impl fmt::Display for AssumptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ImaginaryAxis => "iR",
            Self::RealAxis => "R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Pass,
    Fail,
    Untested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionItem {
    pub id: String,
    pub description: String,
    pub status: ItemStatus,
    /// Largest sampled value of the quantity the item bounds.
    pub worst_violation: f64,
    /// Abscissa where `worst_violation` was attained.
    pub witness: Option<f64>,
    pub fitted_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub mode: AssumptionMode,
    pub potential: String,
    pub horizon: f64,
    pub points: usize,
    pub items: Vec<AssumptionItem>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.status != ItemStatus::Fail)
    }

    pub fn failures(&self) -> Vec<&AssumptionItem> {
        self.items.iter().filter(|i| i.status == ItemStatus::Fail).collect()
    }

    pub fn summary(&self) -> String {
        let f: Vec<String> = self
            .failures()
            .iter()
            .map(|i| match i.witness {
                Some(x) => format!("{} (at x = {x:.4e})", i.id),
                None => i.id.clone(),
            })
            .collect();
        if f.is_empty() {
            format!("{}: all {} items pass", self.potential, self.items.len())
        } else {
            format!("{}: failing {}", self.potential, f.join(", "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub horizon: f64,
    pub points: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { horizon: 1e8, points: 400 }
    }
}

pub fn check_assumptions(v: &PotentialModel, mode: AssumptionMode) -> AssumptionReport {
    check_assumptions_with(v, mode, &CheckOptions::default())
}

struct Grid {
    xs: Vec<f64>,
}

impl Grid {
    fn new(v: &PotentialModel, opts: &CheckOptions) -> Self {
        let lo = v.x0.max(0.0) + 1.0;
        let hi = opts.horizon.max(lo * 10.0);
        let n = opts.points.max(20);
        let step = (hi / lo).ln() / (n - 1) as f64;
        let xs = (0..n)
            .map(|k| lo * (step * k as f64).exp())
            .take_while(|&x| {
                let (a, b, c) = (v.v2(x), v.dv2(x), v.ddv2(x));
                a.is_finite() && b.is_finite() && c.is_finite() && a.abs() < 1e300
            })
            .collect();
        Self { xs }
    }

    fn end(&self) -> f64 {
        self.xs.last().copied().unwrap_or(f64::NAN)
    }

    /// Index splitting off the last `decades` decades, keeping at least
    /// a quarter of the samples on each side.
    fn split(&self, decades: f64) -> usize {
        let n = self.xs.len();
        let cut = self.end() / 10f64.powf(decades);
        let k = self.xs.partition_point(|&x| x < cut);
        k.clamp(n / 4, n - n / 4)
    }
}

fn argmax(xs: &[f64], vals: &[f64]) -> (f64, Option<f64>) {
    let mut best = (f64::NEG_INFINITY, None);
    for (x, v) in xs.iter().zip(vals) {
        if v.is_nan() || *v > best.0 {
            best = (*v, Some(*x));
            if v.is_nan() {
                break;
            }
        }
    }
    best
}

fn item(id: &str, description: &str, status: ItemStatus, worst: f64, witness: Option<f64>, fitted: Option<f64>) -> AssumptionItem {
    AssumptionItem {
        id: id.into(),
        description: description.into(),
        status,
        worst_violation: worst,
        witness,
        fitted_constant: fitted,
    }
}

fn pass_if(ok: bool) -> ItemStatus {
    if ok {
        ItemStatus::Pass
    } else {
        ItemStatus::Fail
    }
}

/// Sampled ratio stays below a constant: no growth over the last two decades.
fn bounded_item(id: &str, description: &str, grid: &Grid, vals: Vec<f64>) -> AssumptionItem {
    let k = grid.split(2.0);
    let early = vals[..k].iter().cloned().fold(0.0, f64::max);
    let (late, witness) = argmax(&grid.xs[k..], &vals[k..]);
    let finite = vals.iter().all(|v| v.is_finite());
    let ok = finite && late <= 2.0 * early.max(f64::MIN_POSITIVE);
    item(id, description, pass_if(ok), late.max(early), witness, Some(early.max(late)))
}

/// Sampled quantity decays: last decade at most half of the first.
fn vanishing_item(id: &str, description: &str, grid: &Grid, vals: Vec<f64>) -> AssumptionItem {
    let n = vals.len();
    let first_cut = grid.xs[0] * 10.0;
    let k0 = grid.xs.partition_point(|&x| x < first_cut).clamp(1, n / 2);
    let k1 = grid.split(1.0);
    let first = vals[..k0].iter().cloned().fold(0.0, f64::max);
    let (last, witness) = argmax(&grid.xs[k1..], &vals[k1..]);
    let ok = vals.iter().all(|v| v.is_finite()) && last <= 0.5 * first;
    item(id, description, pass_if(ok), last, witness, None)
}

fn monotone_item(id: &str, v: &PotentialModel, grid: &Grid) -> AssumptionItem {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &x in &grid.xs {
        let d = v.dv2(x);
        if d < worst {
            worst = d;
            witness = Some(x);
        }
    }
    let increasing = grid.xs.windows(2).all(|w| v.v2(w[1]) > v.v2(w[0]));
    let ok = worst > 0.0 && increasing;
    item(id, "Im V is increasing beyond x0", pass_if(ok), worst, witness, None)
}

fn unbounded_item(id: &str, v: &PotentialModel, grid: &Grid) -> AssumptionItem {
    let end = grid.end();
    let (a, b, c) = (v.v2(end / 100.0), v.v2(end / 10.0), v.v2(end));
    let (d0, d1) = (b - a, c - b);
    let ok = d0 > 0.0 && d1 > 0.0 && d1 >= 0.5 * d0;
    item(id, "Im V grows without bound", pass_if(ok), d1 / d0, Some(end), None)
}

pub fn check_assumptions_with(v: &PotentialModel, mode: AssumptionMode, opts: &CheckOptions) -> AssumptionReport {
    let grid = Grid::new(v, opts);
    let mut items = Vec::new();
    if grid.xs.len() < 20 {
        items.push(item(
            "grid",
            "potential is finite on enough of the sampling grid",
            ItemStatus::Fail,
            grid.xs.len() as f64,
            None,
            None,
        ));
        return AssumptionReport {
            mode,
            potential: v.label().into(),
            horizon: grid.end(),
            points: grid.xs.len(),
            items,
        };
    }
    let xs = &grid.xs;
    match mode {
        AssumptionMode::ImaginaryAxis => {
            let mut neg = xs.iter().map(|&x| (x, v.v1(x))).collect::<Vec<_>>();
            if v.domain == Domain::FullLine {
                neg.extend(xs.iter().map(|&x| (-x, v.v1(-x))));
            }
            let (worst_x, worst) = neg
                .iter()
                .cloned()
                .fold((None, f64::INFINITY), |acc, (x, y)| if y < acc.1 { (Some(x), y) } else { acc });
            items.push(item("iR-v1", "Re V is non-negative", pass_if(worst >= 0.0), worst, worst_x, None));
            items.push(monotone_item("iR-i-monotone", v, &grid));
            items.push(unbounded_item("iR-i-unbounded", v, &grid));
            let r1 = xs.iter().map(|&x| v.dv2(x) / (v.v2(x).abs() * x.powf(v.nu))).collect();
            items.push(bounded_item("iR-ii-first", "|V2'| ≲ V2 x^nu", &grid, r1));
            let r2 = xs.iter().map(|&x| v.ddv(x).norm() / (v.dv2(x) * x.powf(v.nu))).collect();
            items.push(bounded_item("iR-ii-second", "|V''| ≲ V2' x^nu", &grid, r2));
            let ups = xs.iter().map(|&x| upsilon(v, x)).collect();
            items.push(vanishing_item("iR-iii-upsilon", "x^nu V2'^{-1/3} tends to 0", &grid, ups));
            let lim = rotation_limit(v, xs[0]);
            items.push(match lim {
                Ok(l) => item("iR-iv-ratio", "V1'/V2' has a limit", ItemStatus::Pass, 0.0, None, Some(l)),
                Err(Error::LimitUnavailable { oscillation }) => item(
                    "iR-iv-ratio",
                    "V1'/V2' has a limit",
                    ItemStatus::Fail,
                    oscillation,
                    None,
                    None,
                ),
                Err(_) => item("iR-iv-ratio", "V1'/V2' has a limit", ItemStatus::Fail, f64::NAN, None, None),
            });
        }
        AssumptionMode::RealAxis => {
            items.push(item(
                "R-imaginary",
                "potential is purely imaginary",
                pass_if(!v.has_real_part()),
                0.0,
                None,
                None,
            ));
            let (mut worst, mut witness) = (0.0f64, None);
            for &x in xs {
                let d = (v.v2(-x) - v.v2(x)).abs() / v.v2(x).abs().max(1.0);
                if d > worst {
                    worst = d;
                    witness = Some(x);
                }
            }
            let even = v.domain == Domain::FullLine && worst <= 1e-12;
            items.push(item("R-i-even", "Im V is even on the line", pass_if(even), worst, witness, None));
            items.push(monotone_item("R-ii-monotone", v, &grid));
            items.push(unbounded_item("R-ii-unbounded", v, &grid));
            match v.beta {
                Some(beta) if beta > 0.0 => {
                    let dev: Vec<f64> = xs
                        .iter()
                        .map(|&t| (v.v2(2.0 * t) / v.v2(t) / 2f64.powf(beta) - 1.0).abs())
                        .collect();
                    let exact = dev.iter().all(|d| *d <= 1e-10);
                    let mut it = vanishing_item(
                        "R-iii-regular-variation",
                        "V2(2t)/V2(t) tends to 2^beta",
                        &grid,
                        dev,
                    );
                    if exact {
                        it.status = ItemStatus::Pass;
                    }
                    it.fitted_constant = Some(beta);
                    items.push(it);
                }
                _ => items.push(item(
                    "R-iii-regular-variation",
                    "V2 is regularly varying with a positive index",
                    ItemStatus::Fail,
                    f64::NAN,
                    None,
                    None,
                )),
            }
            let jap = |x: f64| (1.0 + x * x).sqrt();
            let d1 = xs.iter().map(|&x| v.dv2(x).abs() * jap(x) / (1.0 + v.v2(x))).collect();
            items.push(bounded_item("R-iv-derivative-1", "|V2'| ≲ (1+V2)<x>^-1", &grid, d1));
            let d2 = xs
                .iter()
                .map(|&x| v.ddv2(x).abs() * jap(x).powi(2) / (1.0 + v.v2(x)))
                .collect();
            items.push(bounded_item("R-iv-derivative-2", "|V2''| ≲ (1+V2)<x>^-2", &grid, d2));
            items.push(item(
                "R-iv-higher",
                "derivative control of order 3 and above",
                ItemStatus::Untested,
                f64::NAN,
                None,
                None,
            ));
        }
    }
    AssumptionReport {
        mode,
        potential: v.label().into(),
        horizon: grid.end(),
        points: xs.len(),
        items,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse_potential;
    use std::sync::Arc;

    #[test]
    fn standard_examples_pass_on_imaginary_axis() {
        for name in ["monomial:n=2", "monomial:n=3", "power:p=0.6666666666666666", "power:p=3", "log", "expsq"] {
            let v = parse_potential(name).unwrap();
            let r = check_assumptions(&v, AssumptionMode::ImaginaryAxis);
            assert!(r.all_pass(), "{}", r.summary());
        }
    }

    #[test]
    fn oscillating_potential_fails_monotonicity() {
        let v = PotentialModel::imaginary("2+sin", Arc::new(|x: f64| 2.0 + x.sin()), Domain::HalfLine);
        let r = check_assumptions(&v, AssumptionMode::ImaginaryAxis);
        let mono = r.items.iter().find(|i| i.id == "iR-i-monotone").unwrap();
        assert_eq!(mono.status, ItemStatus::Fail);
        assert!(mono.witness.is_some());
    }

    #[test]
    fn bounded_potential_fails_unboundedness() {
        let v = PotentialModel::imaginary("atan", Arc::new(|x: f64| x.atan()), Domain::HalfLine);
        let r = check_assumptions(&v, AssumptionMode::ImaginaryAxis);
        assert!(r.failures().iter().any(|i| i.id == "iR-i-unbounded"));
    }

    #[test]
    fn real_axis_examples() {
        for name in ["monomial:n=2", "power:p=0.6666666666666666", "power:p=2", "monomial:n=4"] {
            let r = check_assumptions(&parse_potential(name).unwrap(), AssumptionMode::RealAxis);
            assert!(r.all_pass(), "{}", r.summary());
        }
        for name in ["monomial:n=3", "log"] {
            let r = check_assumptions(&parse_potential(name).unwrap(), AssumptionMode::RealAxis);
            assert!(!r.all_pass(), "{name} should fail");
        }
    }
}

//! Named potentials: `power:p=<real>`, `monomial:n=<int>`, `log`, `expsq`,
//! `harmonic`, `free` and `table:<path>`. A trailing `@half` or `@full`
//! overrides the domain.

use std::path::Path;
use std::sync::Arc;

use super::{Domain, PotentialModel, Symmetry};
use crate::error::{Error, Result};
use crate::pchip::Pchip;

pub fn builtin_names() -> &'static [&'static str] {
    &["power:p=<real>", "monomial:n=<int>", "log", "expsq", "harmonic", "free", "table:<path>"]
}

fn param(params: &[(String, String)], key: &str) -> Result<f64> {
    let raw = params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("missing parameter `{key}`")))?;
    raw.parse::<f64>()
        .map_err(|_| Error::Parse(format!("parameter `{key}`: cannot parse `{raw}`")))
}

fn split_params(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{p}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Parses a potential specification string.
pub fn parse_potential(spec: &str) -> Result<PotentialModel> {
    let spec = spec.trim();
    let (body, domain) = match spec.rsplit_once('@') {
        Some((b, "half")) => (b, Some(Domain::HalfLine)),
        Some((b, "full")) => (b, Some(Domain::FullLine)),
        Some((_, other)) if !spec.starts_with("table:") => {
            return Err(Error::Parse(format!("unknown domain suffix `@{other}`")))
        }
        _ => (spec, None),
    };
    let (name, rest) = body.split_once(':').unwrap_or((body, ""));
    let model = match name {
        "power" => power(param(&split_params(rest)?, "p")?)?,
        "monomial" => {
            let n = param(&split_params(rest)?, "n")?;
            if n < 1.0 || n.fract() != 0.0 || n > 64.0 {
                return Err(Error::Parse(format!("monomial degree must be an integer in 1..=64, got {n}")));
            }
            monomial(n as i32)
        }
        "log" => log_japanese(),
        "expsq" => expsq(),
        "harmonic" => PotentialModel::imaginary("harmonic", Arc::new(|_| 0.0), Domain::FullLine)
            .with_real_part(Arc::new(|x| x * x))
            .with_v1_derivatives(Arc::new(|x| 2.0 * x), Some(Arc::new(|_| 2.0)))
            .with_v2_derivatives(Arc::new(|_| 0.0), Some(Arc::new(|_| 0.0)))
            .with_symmetry(Symmetry::Even),
        "free" => PotentialModel::imaginary("free", Arc::new(|_| 0.0), Domain::FullLine)
            .with_v2_derivatives(Arc::new(|_| 0.0), Some(Arc::new(|_| 0.0)))
            .with_symmetry(Symmetry::Even),
        "table" => {
            if rest.is_empty() {
                return Err(Error::Parse("table potential needs a path".into()));
            }
            load_table(Path::new(rest))?
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown potential `{other}`; known: {}",
                builtin_names().join(", ")
            )))
        }
    };
    let model = model.with_label(spec);
    Ok(match domain {
        Some(d) => model.with_domain(d),
        None => model,
    })
}

/// `i ⟨x⟩^p` on the line.
fn power(p: f64) -> Result<PotentialModel> {
    if !(p > 0.0) {
        return Err(Error::Parse(format!("power exponent must be positive, got {p}")));
    }
    let h = 0.5 * p;
    Ok(PotentialModel::imaginary("power", Arc::new(move |x| (1.0 + x * x).powf(h)), Domain::FullLine)
        .with_v2_derivatives(
            Arc::new(move |x| p * x * (1.0 + x * x).powf(h - 1.0)),
            Some(Arc::new(move |x| {
                let j = 1.0 + x * x;
                p * j.powf(h - 1.0) + p * (p - 2.0) * x * x * j.powf(h - 2.0)
            })),
        )
        .with_beta(p)
        .with_symmetry(Symmetry::Even))
}

/// `i x^n` on the line.
fn monomial(n: i32) -> PotentialModel {
    let nf = n as f64;
    let m = PotentialModel::imaginary("monomial", Arc::new(move |x| x.powi(n)), Domain::FullLine)
        .with_v2_derivatives(
            Arc::new(move |x| nf * x.powi(n - 1)),
            Some(Arc::new(move |x| if n >= 2 { nf * (nf - 1.0) * x.powi(n - 2) } else { 0.0 })),
        );
    if n % 2 == 0 {
        m.with_beta(nf).with_symmetry(Symmetry::Even)
    } else {
        m.with_symmetry(Symmetry::Odd)
    }
}

/// `i log⟨x⟩`.
fn log_japanese() -> PotentialModel {
    PotentialModel::imaginary("log", Arc::new(|x| 0.5 * (x * x).ln_1p()), Domain::FullLine)
        .with_v2_derivatives(
            Arc::new(|x| x / (1.0 + x * x)),
            Some(Arc::new(|x| {
                let j = 1.0 + x * x;
                (1.0 - x * x) / (j * j)
            })),
        )
        .with_symmetry(Symmetry::Even)
}

/// `i e^{x²}`.
fn expsq() -> PotentialModel {
    PotentialModel::imaginary("expsq", Arc::new(|x| (x * x).exp()), Domain::FullLine)
        .with_v2_derivatives(
            Arc::new(|x| 2.0 * x * (x * x).exp()),
            Some(Arc::new(|x| (2.0 + 4.0 * x * x) * (x * x).exp())),
        )
        .with_nu(1.0)
        .with_symmetry(Symmetry::Even)
}

fn parse_cell(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse `{s}` as a number")))
}

/// Loads a tabulated potential on the half-line.
///
/// Accepts headerless rows `x, V1, V2` (or `x, V2`), or a header naming
/// columns `x`, `v2` and optionally `v1`; other columns are ignored.
pub fn load_table(path: &Path) -> Result<PotentialModel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for r in reader.records() {
        rows.push(r.map_err(|e| Error::Parse(e.to_string()))?);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty table", path.display())));
    }
    let headed = rows[0].iter().any(|c| c.parse::<f64>().is_err());
    let (ix, i1, i2, body) = if headed {
        let names: Vec<String> = rows[0].iter().map(|c| c.to_ascii_lowercase()).collect();
        let find = |n: &str| names.iter().position(|c| c == n);
        let ix = find("x").ok_or_else(|| Error::Parse("table header lacks an `x` column".into()))?;
        let i2 = find("v2").ok_or_else(|| Error::Parse("table header lacks a `v2` column".into()))?;
        (ix, find("v1"), i2, &rows[1..])
    } else {
        match rows[0].len() {
            2 => (0, None, 1, &rows[..]),
            3 => (0, Some(1), 2, &rows[..]),
            k => return Err(Error::Parse(format!("expected 2 or 3 columns, found {k}"))),
        }
    };
    let mut xs = Vec::with_capacity(body.len());
    let mut v1s = Vec::with_capacity(body.len());
    let mut v2s = Vec::with_capacity(body.len());
    let offset = if headed { 2 } else { 1 };
    for (k, r) in body.iter().enumerate() {
        let line = k + offset;
        let cell = |i: usize| r.get(i).ok_or_else(|| Error::Parse(format!("line {line}: missing column {}", i + 1)));
        xs.push(parse_cell(cell(ix)?, line)?);
        v2s.push(parse_cell(cell(i2)?, line)?);
        if let Some(i) = i1 {
            v1s.push(parse_cell(cell(i)?, line)?);
        }
    }
    let x0 = xs[0];
    let v2 = Arc::new(Pchip::new(xs.clone(), v2s)?);
    let (a, b, c) = (v2.clone(), v2.clone(), v2.clone());
    let mut model = PotentialModel::imaginary(
        format!("table:{}", path.display()),
        Arc::new(move |x| a.eval(x)),
        Domain::HalfLine,
    )
    .with_v2_derivatives(
        Arc::new(move |x| b.derivative(x)),
        Some(Arc::new(move |x| c.second_derivative(x))),
    )
    .with_x0(x0);
    if i1.is_some() && v1s.iter().any(|v| *v != 0.0) {
        let v1 = Arc::new(Pchip::new(xs, v1s)?);
        let (a, b, c) = (v1.clone(), v1.clone(), v1);
        model = model
            .with_real_part(Arc::new(move |x| a.eval(x)))
            .with_v1_derivatives(
                Arc::new(move |x| b.derivative(x)),
                Some(Arc::new(move |x| c.second_derivative(x))),
            );
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_builtins() {
        let p = parse_potential("power:p=0.6667").unwrap();
        assert_eq!(p.beta, Some(0.6667));
        assert!((p.v2(0.0) - 1.0).abs() < 1e-15);
        let m = parse_potential("monomial:n=3@half").unwrap();
        assert_eq!(m.domain, Domain::HalfLine);
        assert_eq!(m.symmetry, Symmetry::Odd);
        assert!(parse_potential("nonsense").is_err());
        assert!(parse_potential("monomial:n=2.5").is_err());
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        for name in ["power:p=0.6666666666666666", "power:p=3", "log", "expsq", "monomial:n=4"] {
            let v = parse_potential(name).unwrap();
            for x in [0.3, 1.1, 2.5] {
                let h = 1e-5;
                let fd = (v.v2(x + h) - v.v2(x - h)) / (2.0 * h);
                assert!((fd - v.dv2(x)).abs() <= 1e-6 * (1.0 + fd.abs()), "{name} at {x}");
                let fdd = (v.dv2(x + h) - v.dv2(x - h)) / (2.0 * h);
                assert!((fdd - v.ddv2(x)).abs() <= 1e-5 * (1.0 + fdd.abs()), "{name} at {x}");
            }
        }
    }

    #[test]
    fn headerless_and_headed_tables() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for k in 0..50 {
            let x = k as f64 * 0.2;
            writeln!(f, "{x},0,{}", x * x).unwrap();
        }
        let v = load_table(f.path()).unwrap();
        assert!(!v.has_real_part());
        assert!((v.v2(3.05) - 3.05f64.powi(2)).abs() < 1e-3);

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "# exported").unwrap();
        writeln!(g, "x,v2,dv2").unwrap();
        for k in 1..50 {
            let x = k as f64 * 0.2;
            writeln!(g, "{x},{},{}", x * x, 2.0 * x).unwrap();
        }
        let v = load_table(g.path()).unwrap();
        assert!((v.dv2(3.05) - 6.1).abs() < 2e-2);
    }
}

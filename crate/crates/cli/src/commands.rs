use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use num_complex::Complex64;
use rayon::prelude::*;

use pseudonorm::airy::{airy_norm_asym, AiryKind, AiryNormTable, AiryQuery};
use pseudonorm::asymptotics::{
    critical_boundary, level_curve, resnorm_curve, AsymContext, AsymEstimate, Axis, CurveSpec, LevelOrder, Offset,
};
use pseudonorm::inverse::{check_rate_conditions, potential_from_rate_with, verify_rate, InverseOptions, RateFunction};
use pseudonorm::operator_lab::{resolvent_norm_with, NormOptions, NormResult, Stencil};
use pseudonorm::potential::{check_assumptions_with, parse_potential, AssumptionItem, CheckOptions, ItemStatus, PotentialModel};

use crate::config::{FileConfig, Problem, DEFAULT_GRID, DEFAULT_TOL};
use crate::grid::Grid;
use crate::output::{Cell, Format, Table};
use crate::{verify, AiryKindArg, Cli, Command, ProblemArgs, SweepMode};

/// Resolved global settings shared by every command.
pub struct Session {
    pub file: FileConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub cache: Option<PathBuf>,
    pub ctx: AsymContext,
    pub command: &'static str,
}

impl Session {
    fn new(cli: &Cli, command: &'static str) -> anyhow::Result<Self> {
        let file = match &cli.global.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let cache = cli.global.cache.clone().or_else(|| file.cache.clone());
        let table = match &cache {
            Some(p) => AiryNormTable::with_file(p).with_context(|| format!("opening Airy cache {}", p.display()))?,
            None => AiryNormTable::new(),
        };
        let mut ctx = AsymContext::with_table(Arc::new(table));
        ctx.force = cli.global.force || file.force.unwrap_or(false);
        Ok(Self {
            format: cli.global.format.or(file.format).unwrap_or_default(),
            out: cli.global.out.clone().or_else(|| file.out.clone()),
            jobs: cli.global.jobs.or(file.jobs),
            cache,
            ctx,
            file,
            command,
        })
    }

    fn problem(&self, args: &ProblemArgs) -> anyhow::Result<Problem> {
        let f = &self.file;
        let potential = args
            .potential
            .clone()
            .or_else(|| f.potential.clone())
            .context("no potential given (use --potential or the config file)")?;
        let axis: Axis = args.axis.clone().or_else(|| f.axis.clone()).unwrap_or_else(|| "imag".into()).parse()?;
        let grid: Grid = args.grid.clone().or_else(|| f.grid.clone()).unwrap_or_else(|| DEFAULT_GRID.into()).parse()?;
        let stencil: Stencil = args.stencil.clone().or_else(|| f.stencil.clone()).unwrap_or_else(|| "fd4".into()).parse()?;
        let tol = args.tol.or(f.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) {
            bail!("tolerance must be positive, got {tol}");
        }
        Ok(Problem { potential, axis, curve: args.curve.clone().or_else(|| f.curve.clone()), grid, tol, stencil })
    }

    pub(crate) fn table(&self, columns: &[&str]) -> Table {
        let mut t = Table::new(columns);
        t.meta("tool", format!("pseudonorm {}", env!("CARGO_PKG_VERSION")));
        t.meta("command", self.command);
        t
    }

    pub(crate) fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            if j == 0 {
                bail!("--jobs must be at least 1");
            }
            b = b.num_threads(j);
        }
        Ok(b.build()?)
    }

    pub(crate) fn finish(&self, table: &Table) -> anyhow::Result<()> {
        table.emit(self.format, self.out.as_deref())?;
        if self.cache.is_some() {
            self.ctx.airy.save().context("saving Airy cache")?;
        }
        Ok(())
    }
}

fn echo(t: &mut Table, p: &Problem) {
    for (k, v) in p.echo() {
        t.meta(k, v);
    }
}

fn parse_lambda(s: &str) -> anyhow::Result<Complex64> {
    let (re, im) = s.split_once(',').with_context(|| format!("lambda `{s}` must be `re,im`"))?;
    Ok(Complex64::new(
        re.trim().parse().with_context(|| format!("bad real part `{re}`"))?,
        im.trim().parse().with_context(|| format!("bad imaginary part `{im}`"))?,
    ))
}

fn curve_spec(p: &Problem) -> anyhow::Result<CurveSpec> {
    let offset: Offset = match &p.curve {
        Some(c) => c.parse()?,
        None => Offset::ZERO,
    };
    Ok(CurveSpec { axis: p.axis, offset })
}

fn curve_lambda(curve: &CurveSpec, param: f64) -> Complex64 {
    let off = curve.offset.eval(param);
    match curve.axis {
        Axis::Imag => Complex64::new(off, param),
        Axis::Real => Complex64::new(param, off),
    }
}

fn numeric(v: &PotentialModel, lambda: Complex64, p: &Problem) -> pseudonorm::Result<NormResult> {
    resolvent_norm_with(v.into(), lambda, &NormOptions { tol: p.tol, stencil: p.stencil, ..Default::default() })
}

fn validity_text(e: &AsymEstimate) -> String {
    format!("{:?}", e.validity.status).to_lowercase()
}

pub fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    let name = match &cli.command {
        Command::Norm { .. } => "norm",
        Command::Asym { .. } => "asym",
        Command::Sweep { .. } => "sweep",
        Command::Levels { .. } => "levels",
        Command::Airy { .. } => "airy",
        Command::Inverse { .. } => "inverse",
        Command::Verify { .. } => "verify",
        Command::Check { .. } => "check",
    };
    let s = Session::new(&cli, name)?;
    match &cli.command {
        Command::Norm { problem, lambda } => norm(&s, problem, lambda),
        Command::Asym { problem, eps } => asym(&s, problem, *eps),
        Command::Sweep { problem, mode } => sweep(&s, problem, *mode),
        Command::Levels { problem, eps, eps_prime, order } => levels(&s, problem, eps, *eps_prime, *order),
        Command::Airy { kind, r, theta, beta, grid, tol } => airy(&s, *kind, *r, *theta, *beta, grid, *tol),
        Command::Inverse { rate, x_max, points_per_decade, verify } => inverse(&s, rate, *x_max, *points_per_decade, verify),
        Command::Verify { scenario } => verify::run(&s, *scenario),
        Command::Check { problem, mode, horizon, rate } => check(&s, problem, *mode, *horizon, rate.as_deref()),
    }
}

fn norm(s: &Session, args: &ProblemArgs, lambdas: &[String]) -> anyhow::Result<u8> {
    let p = s.problem(args)?;
    let v = parse_potential(&p.potential)?;
    let lambdas: Vec<Complex64> = lambdas.iter().map(|l| parse_lambda(l)).collect::<anyhow::Result<_>>()?;
    let mut t = s.table(&["lambda_re", "lambda_im", "value", "converged", "est_rel_error", "length", "n", "error"]);
    t.meta("potential", &p.potential).meta("tol", format!("{:e}", p.tol)).meta("stencil", p.stencil);
    let rows: Vec<Vec<Cell>> = s.pool()?.install(|| {
        lambdas
            .par_iter()
            .map(|&l| match numeric(&v, l, &p) {
                Ok(r) => vec![
                    l.re.into(),
                    l.im.into(),
                    r.value.into(),
                    r.converged.into(),
                    r.est_rel_error.into(),
                    r.discretization.length.into(),
                    r.discretization.n.into(),
                    Cell::Empty,
                ],
                Err(e) => vec![l.re.into(), l.im.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()],
            })
            .collect()
    });
    rows.into_iter().for_each(|r| t.push(r));
    s.finish(&t)?;
    Ok(0)
}

fn estimate(s: &Session, v: &PotentialModel, curve: &CurveSpec, param: f64, eps: Option<f64>) -> pseudonorm::Result<AsymEstimate> {
    match (curve.axis, eps) {
        (Axis::Real, Some(e)) if curve.offset.is_zero() => pseudonorm::asymptotics::resnorm_real(&s.ctx, v, param, Some(e)),
        _ => resnorm_curve(&s.ctx, v, curve, param),
    }
}

fn asym(s: &Session, args: &ProblemArgs, eps: Option<f64>) -> anyhow::Result<u8> {
    let p = s.problem(args)?;
    let v = parse_potential(&p.potential)?;
    let curve = curve_spec(&p)?;
    let mut t = s.table(&[
        "param",
        "lambda_re",
        "lambda_im",
        "value",
        "leading_constant",
        "scale_factor",
        "remainder_scale",
        "validity",
        "assumptions_pass",
        "note",
        "error",
    ]);
    echo(&mut t, &p);
    let rows: Vec<Vec<Cell>> = s.pool()?.install(|| {
        p.grid
            .points()
            .par_iter()
            .map(|&param| match estimate(s, &v, &curve, param, eps) {
                Ok(e) => vec![
                    param.into(),
                    e.lambda.re.into(),
                    e.lambda.im.into(),
                    e.value.into(),
                    e.leading_constant.into(),
                    e.scale_factor.into(),
                    e.remainder_scale.into(),
                    validity_text(&e).into(),
                    e.validity.assumptions_pass.into(),
                    e.validity.note.clone().into(),
                    Cell::Empty,
                ],
                Err(err) => {
                    let mut row = vec![param.into()];
                    row.extend(std::iter::repeat_n(Cell::Empty, 9));
                    row.push(err.to_string().into());
                    row
                }
            })
            .collect()
    });
    rows.into_iter().for_each(|r| t.push(r));
    s.finish(&t)?;
    Ok(0)
}

fn sweep(s: &Session, args: &ProblemArgs, mode: SweepMode) -> anyhow::Result<u8> {
    let p = s.problem(args)?;
    let v = parse_potential(&p.potential)?;
    let curve = curve_spec(&p)?;
    let (with_num, with_asym) = (mode != SweepMode::Asym, mode != SweepMode::Norm);
    let mut columns = vec!["param", "lambda_re", "lambda_im"];
    if with_num {
        columns.extend(["numeric", "converged", "est_rel_error", "n"]);
    }
    if with_asym {
        columns.extend(["asymptotic", "remainder_scale", "validity"]);
    }
    if mode == SweepMode::Both {
        columns.push("ratio");
    }
    columns.push("error");
    let mut t = s.table(&columns);
    echo(&mut t, &p);
    t.meta("mode", mode);
    let rows: Vec<Vec<Cell>> = s.pool()?.install(|| {
        p.grid
            .points()
            .par_iter()
            .map(|&param| {
                let mut errors = Vec::new();
                let est = with_asym.then(|| estimate(s, &v, &curve, param, None));
                // the numeric norm is taken where the asymptotic formula was evaluated
                let lambda = match &est {
                    Some(Ok(e)) => e.lambda,
                    _ => curve_lambda(&curve, param),
                };
                let mut row = vec![param.into(), lambda.re.into(), lambda.im.into()];
                let num = with_num.then(|| numeric(&v, lambda, &p));
                match &num {
                    Some(Ok(r)) => row.extend([r.value.into(), r.converged.into(), r.est_rel_error.into(), r.discretization.n.into()]),
                    Some(Err(e)) => {
                        errors.push(format!("numeric: {e}"));
                        row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                    }
                    None => {}
                }
                match &est {
                    Some(Ok(e)) => row.extend([e.value.into(), e.remainder_scale.into(), validity_text(e).into()]),
                    Some(Err(e)) => {
                        errors.push(format!("asymptotic: {e}"));
                        row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
                    }
                    None => {}
                }
                if mode == SweepMode::Both {
                    let ratio = match (&num, &est) {
                        (Some(Ok(n)), Some(Ok(e))) => Some(n.value / e.value),
                        _ => None,
                    };
                    row.push(ratio.into());
                }
                row.push(if errors.is_empty() { Cell::Empty } else { errors.join("; ").into() });
                row
            })
            .collect()
    });
    rows.into_iter().for_each(|r| t.push(r));
    s.finish(&t)?;
    Ok(0)
}

fn levels(s: &Session, args: &ProblemArgs, eps: &[f64], eps_prime: Option<f64>, order: Option<LevelOrder>) -> anyhow::Result<u8> {
    let p = s.problem(args)?;
    let v = parse_potential(&p.potential)?;
    let eps: Vec<f64> = if eps.is_empty() { s.file.eps.clone().unwrap_or_else(|| vec![0.1]) } else { eps.to_vec() };
    let eps_prime = eps_prime.or(s.file.eps_prime).unwrap_or(0.1);
    let order = order.or(s.file.order).unwrap_or_default();
    let mut t = s.table(&["param", "eps", "level_offset", "level_status", "critical_offset", "critical_clamped", "error"]);
    echo(&mut t, &p);
    t.meta("eps_prime", eps_prime).meta("order", format!("{order:?}").to_lowercase());
    for param in p.grid.points() {
        for &e in &eps {
            let (level, status, mut error) = match level_curve(&v, p.axis, e, param, order) {
                Ok(l) => (Cell::Num(l), "ok", None),
                Err(pseudonorm::Error::LogDomain { .. }) => (Cell::Empty, "log_domain", None),
                Err(err) => (Cell::Empty, "error", Some(err.to_string())),
            };
            let (off, clamped) = match critical_boundary(&s.ctx, &v, p.axis, e, eps_prime, param) {
                Ok(c) => (Cell::Num(c.offset), Cell::Bool(c.clamped)),
                Err(err) => {
                    error = Some(error.map_or(err.to_string(), |x| format!("{x}; {err}")));
                    (Cell::Empty, Cell::Empty)
                }
            };
            t.push(vec![param.into(), e.into(), level, status.into(), off, clamped, error.into()]);
        }
    }
    s.finish(&t)?;
    Ok(0)
}

fn airy(s: &Session, kind: AiryKindArg, r: f64, theta: Option<f64>, beta: Option<f64>, grid: &Grid, tol: f64) -> anyhow::Result<u8> {
    let kind = match kind {
        AiryKindArg::Rotated => AiryKind::Rotated { r, theta: theta.unwrap_or(FRAC_PI_2) },
        AiryKindArg::Generalized => AiryKind::Generalized { beta: beta.context("--beta is required for the generalized kind")? },
    };
    let mut t = s.table(&["mu", "value", "asymptotic", "ratio", "error"]);
    t.meta("kind", serde_json::to_string(&kind)?).meta("tol", format!("{tol:e}"));
    let mus = grid.points();
    let rows: Vec<Vec<Cell>> = s.pool()?.install(|| {
        mus.par_iter()
            .map(|&mu| match s.ctx.airy.norm(&AiryQuery { kind, mu, tol }) {
                Ok(value) => {
                    let asym = airy_norm_asym(kind, mu).ok();
                    vec![mu.into(), value.into(), asym.into(), asym.map(|a| value / a).into(), Cell::Empty]
                }
                Err(e) => vec![mu.into(), Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()],
            })
            .collect()
    });
    rows.into_iter().for_each(|r| t.push(r));
    s.finish(&t)?;
    Ok(0)
}

fn inverse(s: &Session, rate: &str, x_max: f64, points_per_decade: usize, bs: &[f64]) -> anyhow::Result<u8> {
    let r = RateFunction::parse(rate)?;
    let opts = InverseOptions { points_per_decade, ..Default::default() };
    let inv = potential_from_rate_with(&s.ctx, &r, x_max, &opts)?;
    let mut t = s.table(&["x", "v2", "dv2"]);
    t.meta("rate", rate)
        .meta("x_max", format!("{x_max:e}"))
        .meta("airy_constant", format!("{:.16e}", inv.airy_constant))
        .meta("airy_tolerance", format!("{:e}", inv.airy_tolerance));
    for item in &inv.conditions.items {
        t.meta(&format!("condition {}", item.id), format!("{:?}", item.status).to_lowercase());
    }
    for &b in bs {
        let text = match verify_rate(&inv, &r, &[b]) {
            Ok(c) => format!("ratio {:.16e} at x_b {:.16e}", c[0].ratio, c[0].x_b),
            Err(e) => format!("error: {e}"),
        };
        t.meta(&format!("verify b={b:e}"), text);
    }
    for ((x, v), d) in inv.x.iter().zip(&inv.v2).zip(&inv.dv2) {
        t.push(vec![(*x).into(), (*v).into(), (*d).into()]);
    }
    s.finish(&t)?;
    Ok(0)
}

fn item_row(i: &AssumptionItem) -> Vec<Cell> {
    vec![
        i.id.clone().into(),
        format!("{:?}", i.status).to_lowercase().into(),
        i.worst_violation.into(),
        i.witness.into(),
        i.fitted_constant.into(),
        i.description.clone().into(),
    ]
}

fn check(s: &Session, args: &ProblemArgs, mode: pseudonorm::potential::AssumptionMode, horizon: f64, rate: Option<&str>) -> anyhow::Result<u8> {
    let mut t = s.table(&["id", "status", "worst_violation", "witness", "fitted_constant", "description"]);
    let failed = if let Some(rate) = rate {
        let r = RateFunction::parse(rate)?;
        let rep = check_rate_conditions(&r, horizon)?;
        t.meta("rate", rate).meta("horizon", format!("{:e}", rep.horizon));
        rep.items.iter().for_each(|i| t.push(item_row(i)));
        rep.items.iter().filter(|i| i.status == ItemStatus::Fail).count()
    } else {
        let potential = args
            .potential
            .clone()
            .or_else(|| s.file.potential.clone())
            .context("no potential given (use --potential, --rate or the config file)")?;
        let v = parse_potential(&potential)?;
        let rep = check_assumptions_with(&v, mode, &CheckOptions { horizon, ..Default::default() });
        t.meta("potential", &potential).meta("mode", mode).meta("horizon", format!("{:e}", rep.horizon));
        rep.items.iter().for_each(|i| t.push(item_row(i)));
        rep.failures().len()
    };
    t.meta("failed", failed);
    s.finish(&t)?;
    Ok(0)
}

use std::sync::{Arc, OnceLock};

use approx::assert_relative_eq;
use num_complex::Complex64 as C;

use pseudonorm::airy::AiryNormTable;
use pseudonorm::asymptotics::{
    critical_boundary, level_curve, resnorm_curve, resnorm_imag, resnorm_radial, resnorm_real, resnorm_wholeline, AsymContext, Axis, CurveSpec,
    LevelOrder, Offset, Sign, ValidityStatus,
};
use pseudonorm::operator_lab::{resolvent_norm_with, NormOptions, Stencil};
use pseudonorm::potential::parse_potential;
use pseudonorm::Error;

fn ctx() -> AsymContext {
    static TABLE: OnceLock<Arc<AiryNormTable>> = OnceLock::new();
    AsymContext::with_table(TABLE.get_or_init(|| Arc::new(AiryNormTable::new())).clone())
}

fn airy() -> f64 {
    ctx().airy_norm(pseudonorm::airy::AiryKind::imaginary(), 0.0).unwrap()
}

#[test]
fn estimates_factor_exactly() {
    let c = ctx();
    let davies = parse_potential("monomial:n=2").unwrap();
    let power = parse_potential("power:p=3").unwrap();
    let curve = CurveSpec { axis: Axis::Imag, offset: "1*param^0.3333".parse().unwrap() };
    let all = [
        resnorm_imag(&c, &davies, 1e3).unwrap(),
        resnorm_real(&c, &davies, 1e3, None).unwrap(),
        resnorm_real(&c, &power, 1e3, None).unwrap(),
        resnorm_curve(&c, &davies, &curve, 1e4).unwrap(),
        resnorm_wholeline(&c, &parse_potential("monomial:n=3").unwrap(), 1e3, Sign::Minus).unwrap(),
    ];
    for e in all {
        assert_eq!(e.value, e.leading_constant * e.scale_factor);
    }
}

#[test]
fn zero_offset_reduces_to_axis_formulas() {
    let c = ctx();
    let v = parse_potential("power:p=2").unwrap();
    for (axis, p) in [(Axis::Imag, 500.0), (Axis::Real, 500.0)] {
        let curve = CurveSpec { axis, offset: Offset::ZERO };
        let a = resnorm_curve(&c, &v, &curve, p).unwrap();
        let b = match axis {
            Axis::Imag => resnorm_imag(&c, &v, p).unwrap(),
            Axis::Real => resnorm_real(&c, &v, p, None).unwrap(),
        };
        assert_eq!(a.value, b.value);
    }
}

#[test]
fn monomials_follow_exact_power_laws() {
    let c = ctx();
    for n in [2, 3, 4, 6] {
        let v = parse_potential(&format!("monomial:n={n}@half")).unwrap();
        let e = 2.0 / 3.0 * (1.0 - 1.0 / n as f64);
        let base = resnorm_imag(&c, &v, 10.0).unwrap().value * 10f64.powf(e);
        for b in [1e2, 1e4, 1e7] {
            let s = resnorm_imag(&c, &v, b).unwrap().value * b.powf(e);
            assert_relative_eq!(s, base, max_relative = 1e-12);
        }
    }
}

#[test]
fn davies_shift_is_constant_along_cube_root_curve() {
    let c = ctx();
    let v = parse_potential("monomial:n=2").unwrap();
    let curve = CurveSpec { axis: Axis::Imag, offset: "1*param^0.333333333333333333".parse().unwrap() };
    let shifted = c.airy_norm(pseudonorm::airy::AiryKind::imaginary(), 2f64.powf(-2.0 / 3.0)).unwrap();
    for b in [1e3, 1e5] {
        let e = resnorm_curve(&c, &v, &curve, b).unwrap();
        assert_relative_eq!(e.leading_constant, shifted, max_relative = 1e-12);
        assert_relative_eq!(e.scale_factor, (2.0 * b.sqrt()).powf(-2.0 / 3.0), max_relative = 1e-10);
    }
}

#[test]
fn whole_line_even_equals_half_line() {
    let c = ctx();
    for spec in ["monomial:n=2", "power:p=0.6667", "expsq"] {
        let full = parse_potential(spec).unwrap();
        let half = parse_potential(&format!("{spec}@half")).unwrap();
        for b in [50.0, 1e4] {
            let w = resnorm_wholeline(&c, &full, b, Sign::Plus).unwrap();
            let h = resnorm_imag(&c, &half, b).unwrap();
            assert_eq!(w.value, h.value, "{spec} {b}");
            // Im V ≥ 0, so -ib has no turning point
            assert!(matches!(resnorm_wholeline(&c, &full, b, Sign::Minus), Err(Error::NoBracket(_))));
        }
    }
}

#[test]
fn odd_cubic_on_the_line() {
    let c = ctx();
    let v = parse_potential("monomial:n=3").unwrap();
    // x_b = 2 on both sides, |V2'| = 12
    let e = resnorm_wholeline(&c, &v, 8.0, Sign::Plus).unwrap();
    assert_relative_eq!(e.value, airy() * 12f64.powf(-2.0 / 3.0), max_relative = 1e-12);
    assert_relative_eq!(e.value, airy() * 3f64.powf(-2.0 / 3.0) * 8f64.powf(-4.0 / 9.0), max_relative = 1e-12);
    assert_eq!(resnorm_wholeline(&c, &v, 8.0, Sign::Minus).unwrap().value, e.value);
}

#[test]
fn radial_matches_one_dimensional() {
    let c = ctx();
    for spec in ["monomial:n=2@half", "expsq@half"] {
        let v = parse_potential(spec).unwrap();
        for b in [100.0, 9f64.exp()] {
            let one = resnorm_imag(&c, &v, b).unwrap();
            for d in [2, 3, 7] {
                assert_eq!(resnorm_radial(&c, &v, d, b).unwrap(), one);
            }
        }
    }
}

#[test]
fn davies_imaginary_axis_against_discretization() {
    let v = parse_potential("monomial:n=2").unwrap();
    let e = resnorm_imag(&ctx(), &v, 100.0).unwrap();
    assert_relative_eq!(e.value, airy() * 2f64.powf(-2.0 / 3.0) * 100f64.powf(-1.0 / 3.0), max_relative = 1e-12);
    let opts = NormOptions { tol: 1e-4, stencil: Stencil::Fd4, ..Default::default() };
    let n = resolvent_norm_with((&v).into(), C::new(0.0, 100.0), &opts).unwrap().value;
    assert!((n / e.value - 1.0).abs() < 0.1, "{n} vs {}", e.value);
}

#[test]
fn davies_levels_are_symmetric_between_axes() {
    let v = parse_potential("monomial:n=2").unwrap();
    for t in [1e4, 1e6] {
        for order in [LevelOrder::Leading, LevelOrder::Lambert] {
            let a = level_curve(&v, Axis::Imag, 0.1, t, order).unwrap();
            let b = level_curve(&v, Axis::Real, 0.1, t, order).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }
}

#[test]
fn level_curve_is_monotone_in_eps() {
    let v = parse_potential("monomial:n=2").unwrap();
    let levels: Vec<f64> = [0.3, 0.1, 0.01, 1e-4].iter().map(|e| level_curve(&v, Axis::Imag, *e, 1e5, LevelOrder::Lambert).unwrap()).collect();
    assert!(levels.windows(2).all(|w| w[1] > w[0]), "{levels:?}");
}

#[test]
fn level_curve_log_domain() {
    let v = parse_potential("monomial:n=2").unwrap();
    assert!(matches!(level_curve(&v, Axis::Imag, 100.0, 10.0, LevelOrder::Leading), Err(Error::LogDomain { .. })));
}

#[test]
fn critical_boundary_values() {
    let c = ctx();
    let v = parse_potential("monomial:n=2").unwrap();
    let cb = critical_boundary(&c, &v, Axis::Imag, 0.1, 0.1, 1e6).unwrap();
    assert_relative_eq!(cb.offset, 0.9 * 2000f64.powf(2.0 / 3.0) / airy() - 0.1, max_relative = 1e-9);
    assert!((cb.offset - 107.0).abs() < 0.2);
    assert!(!cb.clamped);
    let degenerate = critical_boundary(&c, &v, Axis::Imag, 0.1, 1.0, 1e6).unwrap();
    assert!(degenerate.clamped && degenerate.offset == 0.0);
    let slow = parse_potential("log").unwrap();
    let cb = critical_boundary(&c, &slow, Axis::Imag, 0.5, 0.1, 1e3).unwrap();
    assert!(cb.clamped);
}

#[test]
fn assumption_gate_and_force() {
    let v = parse_potential("free").unwrap();
    assert!(matches!(resnorm_imag(&ctx(), &v, 10.0), Err(Error::AssumptionsFailed(_)) | Err(Error::NoBracket(_))));
    let p = parse_potential("power:p=1.5").unwrap();
    let e = resnorm_imag(&ctx(), &p, 10.0).unwrap();
    assert!(e.validity.assumptions_pass && !e.validity.forced);
    assert_eq!(e.validity.status, ValidityStatus::Valid);
}

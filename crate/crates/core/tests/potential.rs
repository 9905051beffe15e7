use std::io::Write;
use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use pseudonorm::potential::{
    check_assumptions, fourier_scale, iota, kappa, load_table, parse_potential, turning_point, upsilon, AssumptionMode, Domain, ItemStatus,
    PotentialModel, Side, Symmetry,
};
use pseudonorm::Error;

fn abs_potential() -> PotentialModel {
    PotentialModel::imaginary("abs", Arc::new(|x: f64| x.abs()), Domain::FullLine)
        .with_symmetry(Symmetry::Even)
        .with_beta(1.0)
}

#[test]
fn turning_points_closed_forms() {
    let davies = parse_potential("monomial:n=2").unwrap();
    assert_relative_eq!(turning_point(&davies, 4.0, Side::Plus).unwrap(), 2.0, max_relative = 1e-12);
    assert_relative_eq!(turning_point(&davies, 4.0, Side::Minus).unwrap(), -2.0, max_relative = 1e-12);
    let shifted = parse_potential("power:p=2").unwrap();
    assert_relative_eq!(turning_point(&shifted, 5.0, Side::Plus).unwrap(), 2.0, max_relative = 1e-12);
    let e = parse_potential("expsq").unwrap();
    assert_relative_eq!(turning_point(&e, 9f64.exp(), Side::Plus).unwrap(), 3.0, max_relative = 1e-12);
}

#[test]
fn fourier_scale_closed_forms() {
    let davies = parse_potential("monomial:n=2").unwrap();
    assert_relative_eq!(fourier_scale(&davies, 1.0).unwrap(), 2f64.powf(1.0 / 3.0), max_relative = 1e-10);
    assert_relative_eq!(fourier_scale(&davies, 1e6).unwrap(), 2f64.powf(1.0 / 3.0) * 10.0, max_relative = 1e-10);
    assert_relative_eq!(fourier_scale(&abs_potential(), 4.0).unwrap(), 2.0, max_relative = 1e-10);
}

#[test]
fn upsilon_closed_forms() {
    let davies = parse_potential("monomial:n=2@half").unwrap();
    assert_relative_eq!(upsilon(&davies, 8.0), 1.0 / 8.0 * 16f64.powf(-1.0 / 3.0), max_relative = 1e-12);
    let linear = parse_potential("monomial:n=1@half").unwrap();
    for x in [0.5, 3.0, 100.0] {
        assert_relative_eq!(upsilon(&linear, x), 1.0 / x, max_relative = 1e-12);
    }
    let exp = PotentialModel::imaginary("exp", Arc::new(f64::exp), Domain::HalfLine)
        .with_v2_derivatives(Arc::new(f64::exp), Some(Arc::new(f64::exp)))
        .with_nu(0.0);
    assert_relative_eq!(upsilon(&exp, 3.0), (-1f64).exp(), max_relative = 1e-12);
}

#[test]
fn kappa_examples() {
    let imaginary = parse_potential("power:p=1.5").unwrap();
    for b in [10.0, 1e4] {
        let k = kappa(&imaginary, b, None).unwrap();
        assert_eq!(k.kappa, 0.0);
        assert_eq!((k.r, k.theta), (1.0, std::f64::consts::FRAC_PI_2));
    }
    let tilted = PotentialModel::imaginary("tilted", Arc::new(|x| x), Domain::HalfLine).with_real_part(Arc::new(|x| x));
    let k = kappa(&tilted, 10.0, None).unwrap();
    assert!(k.kappa.abs() < 1e-9);
    assert_relative_eq!(k.r, 2f64.sqrt(), max_relative = 1e-9);
    assert_relative_eq!(k.theta, std::f64::consts::FRAC_PI_4, max_relative = 1e-9);
    let sqrt_real = PotentialModel::imaginary("sqrt", Arc::new(|x| x), Domain::HalfLine).with_real_part(Arc::new(f64::sqrt));
    let k = kappa(&sqrt_real, 100.0, Some(0.0)).unwrap();
    assert_relative_eq!(k.x_b, 100.0, max_relative = 1e-10);
    assert_relative_eq!(k.kappa, 0.05, max_relative = 1e-6);
}

#[test]
fn iota_examples() {
    for n in [2, 4] {
        let v = parse_potential(&format!("monomial:n={n}")).unwrap();
        for t in [1.0, 100.0] {
            assert!(iota(&v, t).unwrap() <= 1e-12);
        }
    }
    let p2 = parse_potential("power:p=2").unwrap();
    let (a, b) = (iota(&p2, 100.0).unwrap(), iota(&p2, 1000.0).unwrap());
    assert!(a <= 1e-3 && b < a, "{a} {b}");
    let p23 = parse_potential("power:p=0.6666666666666666").unwrap();
    let seq: Vec<f64> = (1..=5).map(|k| iota(&p23, 10f64.powi(k)).unwrap()).collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    assert!(seq.iter().all(|v| *v >= 0.0));
}

#[test]
fn assumption_reports() {
    for spec in ["power:p=1.5", "power:p=0.6667", "monomial:n=2", "log", "expsq"] {
        let v = parse_potential(spec).unwrap();
        let r = check_assumptions(&v, AssumptionMode::ImaginaryAxis);
        assert!(r.all_pass(), "{spec}: {}", r.summary());
    }
    let wobble = PotentialModel::imaginary("wobble", Arc::new(|x: f64| 2.0 + x.sin()), Domain::HalfLine);
    let r = check_assumptions(&wobble, AssumptionMode::ImaginaryAxis);
    assert!(r.failures().iter().any(|i| i.id == "iR-i-monotone"));
    let real = check_assumptions(&parse_potential("power:p=2").unwrap(), AssumptionMode::RealAxis);
    assert!(real.all_pass(), "{}", real.summary());
    assert!(real.items.iter().any(|i| i.status == ItemStatus::Untested));
}

#[test]
fn registry_rejects_bad_specs() {
    for bad in ["power:p=-1", "monomial:n=2.5", "nonsense", "power", "monomial:n=2@middle", "table:"] {
        assert!(matches!(parse_potential(bad), Err(Error::Parse(_))), "{bad}");
    }
    assert_eq!(parse_potential("monomial:n=2@half").unwrap().domain, Domain::HalfLine);
}

#[test]
fn table_loader_formats() {
    let dir = tempfile::tempdir().unwrap();
    let bare = dir.path().join("bare.csv");
    let mut f = std::fs::File::create(&bare).unwrap();
    writeln!(f, "# x, V2").unwrap();
    for k in 0..50 {
        let x = k as f64 * 0.5;
        writeln!(f, "{x},{}", x * x).unwrap();
    }
    drop(f);
    let v = load_table(&bare).unwrap();
    assert_eq!(v.domain, Domain::HalfLine);
    assert!((v.v2(3.3) - 3.3 * 3.3).abs() < 0.02);
    let headed = dir.path().join("headed.csv");
    std::fs::write(&headed, "v2,x,v1\n0,0,1\n1,1,1\n4,2,1\n").unwrap();
    let v = load_table(&headed).unwrap();
    assert!(v.has_real_part());
    assert_relative_eq!(v.v2(2.0), 4.0);
    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "0,1\n1,oops\n").unwrap();
    assert!(matches!(load_table(&broken), Err(Error::Parse(_))));
    assert!(parse_potential(&format!("table:{}", bare.display())).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monomial_turning_points(n in 1i32..7, lb in -2.0f64..12.0) {
        let b = 10f64.powf(lb);
        let v = parse_potential(&format!("monomial:n={n}@half")).unwrap();
        let x = turning_point(&v, b, Side::Plus).unwrap();
        prop_assert!((x / b.powf(1.0 / n as f64) - 1.0).abs() < 1e-10);
        let y = turning_point(&v, 2.0 * b, Side::Plus).unwrap();
        prop_assert!(y > x);
    }

    #[test]
    fn monomial_fourier_scales(n in 1i32..4, la in -1.0f64..10.0) {
        let p = 2 * n;
        let a = 10f64.powf(la);
        let v = parse_potential(&format!("monomial:n={p}")).unwrap();
        let t = fourier_scale(&v, a).unwrap();
        prop_assert!((t / (2.0 * a.sqrt()).powf(1.0 / (p as f64 + 1.0)) - 1.0).abs() < 1e-10);
        prop_assert!(fourier_scale(&v, 2.0 * a).unwrap() > t);
    }

    #[test]
    fn kappa_vanishes_without_real_part(lb in 0.0f64..10.0, p in 0.3f64..4.0) {
        let v = parse_potential(&format!("power:p={p}")).unwrap();
        prop_assert_eq!(kappa(&v, 10f64.powf(lb) + 2.0, None).unwrap().kappa, 0.0);
    }
}

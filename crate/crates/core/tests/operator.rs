use std::f64::consts::FRAC_PI_2;

use approx::assert_relative_eq;
use num_complex::Complex64 as C;

use pseudonorm::airy::{airy_norm, airy_norm_asym, rotated_norm_unreduced, AiryKind, AiryNormTable, AiryQuery};
use pseudonorm::operator_lab::{assemble, resolvent_norm_numeric, resolvent_norm_with, Discretization, NormOptions, Operator, Stencil};
use pseudonorm::potential::parse_potential;
use pseudonorm::Error;

fn norm(spec: &str, lambda: C, stencil: Stencil) -> f64 {
    let v = parse_potential(spec).unwrap();
    resolvent_norm_with((&v).into(), lambda, &NormOptions { stencil, ..Default::default() })
        .unwrap()
        .require_converged()
        .unwrap()
        .value
}

#[test]
fn self_adjoint_distance_to_spectrum() {
    assert_relative_eq!(norm("free", C::new(-1.0, 0.0), Stencil::Fd2), 1.0, max_relative = 2e-3);
    assert_relative_eq!(norm("harmonic", C::new(0.0, 0.0), Stencil::Fd2), 1.0, max_relative = 2e-3);
    // nearest eigenvalue of -d² + x² to 2 + i/2 is 1 or 3
    let want = 1.0 / (1.25f64).sqrt();
    assert_relative_eq!(norm("harmonic", C::new(2.0, 0.5), Stencil::Fd4), want, max_relative = 1e-5);
}

#[test]
fn stencils_agree() {
    let lam = C::new(3.0, 20.0);
    let a = norm("monomial:n=2", lam, Stencil::Fd2);
    let b = norm("monomial:n=2", lam, Stencil::Fd4);
    assert_relative_eq!(a, b, max_relative = 1e-5);
}

#[test]
fn conjugation_is_exact_at_the_discrete_level() {
    let v = parse_potential("power:p=1.5").unwrap();
    let w = v.conjugate();
    let disc = Discretization { length: 12.0, n: 801, stencil: Stencil::Fd4 };
    let lam = C::new(1.0, 4.0);
    let a = resolvent_norm_numeric((&v).into(), lam, 1.0, Some(disc)).unwrap().history[0].value;
    let b = resolvent_norm_numeric((&w).into(), lam.conj(), 1.0, Some(disc)).unwrap().history[0].value;
    assert_relative_eq!(a, b, max_relative = 1e-10);
}

#[test]
fn assembled_matrix_has_stencil_bandwidth() {
    let v = parse_potential("monomial:n=3").unwrap();
    for (stencil, bw) in [(Stencil::Fd2, 1), (Stencil::Fd4, 2)] {
        let m = assemble((&v).into(), C::new(0.0, 1.0), &Discretization { length: 5.0, n: 50, stencil }).unwrap();
        assert_eq!(m.matrix.lower_bandwidth(), bw);
        assert_eq!(m.matrix.upper_bandwidth(), bw);
        assert_eq!(m.grid.len(), 50);
    }
}

#[test]
fn refinement_cap_reports_not_converged() {
    let v = parse_potential("monomial:n=2").unwrap();
    let opts = NormOptions { tol: 1e-14, max_n: 400, ..Default::default() };
    let r = resolvent_norm_with((&v).into(), C::new(0.0, 50.0), &opts).unwrap();
    assert!(!r.converged);
    assert!(matches!(r.require_converged(), Err(Error::NotConverged { .. })));
}

#[test]
fn rotated_airy_constant() {
    let r = airy_norm(&AiryQuery::new(AiryKind::imaginary(), 0.0)).unwrap();
    assert_relative_eq!(r.value, 1.33377, max_relative = 1e-4);
}

#[test]
fn adjoint_rotation_has_equal_norm() {
    let up = airy_norm(&AiryQuery::new(AiryKind::Rotated { r: 1.0, theta: FRAC_PI_2 }, 0.7)).unwrap().value;
    let down = airy_norm(&AiryQuery::new(AiryKind::Rotated { r: 1.0, theta: -FRAC_PI_2 }, 0.7)).unwrap().value;
    assert_relative_eq!(up, down, max_relative = 1e-3);
}

#[test]
fn scaling_law_via_unreduced_operator() {
    let base = airy_norm(&AiryQuery::new(AiryKind::imaginary(), 0.0)).unwrap().value;
    for r in [0.5, 2.0] {
        let direct = rotated_norm_unreduced(r, FRAC_PI_2, 0.0, 1e-6).unwrap().value;
        assert_relative_eq!(direct, r.powf(-2.0 / 3.0) * base, max_relative = 1e-3);
    }
}

#[test]
fn fourier_duality_for_beta_two() {
    let g = airy_norm(&AiryQuery::new(AiryKind::Generalized { beta: 2.0 }, 0.0)).unwrap().value;
    assert_relative_eq!(g, 1.33377, max_relative = 1e-4);
}

#[test]
fn asymptotic_needs_positive_mu() {
    assert!(matches!(airy_norm_asym(AiryKind::imaginary(), 0.0), Err(Error::MuNonpositive(_))));
    assert!(airy_norm_asym(AiryKind::Generalized { beta: 0.5 }, 2.0).unwrap() > 1.0);
}

#[test]
fn generalized_operator_is_first_order() {
    let m = assemble(Operator::GeneralizedAiry { beta: 1.0 }, C::new(0.0, 0.0), &Discretization { length: 4.0, n: 9, stencil: Stencil::Fd2 }).unwrap();
    let h = m.h;
    assert_relative_eq!(m.matrix.get(4, 5).re, -0.5 / h, max_relative = 1e-14);
    assert_relative_eq!(m.matrix.get(4, 3).re, 0.5 / h, max_relative = 1e-14);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("airy.json");
    let q = AiryQuery::new(AiryKind::imaginary(), 1.0).with_tol(1e-5);
    let value = {
        let table = AiryNormTable::with_file(&path).unwrap();
        let v = table.norm(&q).unwrap();
        table.save().unwrap();
        v
    };
    let table = AiryNormTable::with_file(&path).unwrap();
    assert_eq!(table.len(), 1);
    assert_eq!(table.lookup(&q), Some(value));
    // a looser request is served, a tighter one is not
    assert_eq!(table.lookup(&q.with_tol(1e-3)), Some(value));
    assert_eq!(table.lookup(&q.with_tol(1e-7)), None);
}

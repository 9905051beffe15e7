use num_complex::Complex64 as C;
use proptest::prelude::*;

use pseudonorm::potential::Side;
use pseudonorm::spectrum::point_spectrum_empty;

#[test]
fn growing_weights_have_no_eigenvalues() {
    let c = point_spectrum_empty(&|x: f64| x * x, C::new(1.0, 1.0), 1e3).unwrap();
    assert!(c.empty && c.growth_condition);
    let c = point_spectrum_empty(&|x: f64| x.abs().sqrt(), C::new(0.0, 0.0), 1e3).unwrap();
    assert!(c.empty);
    assert_eq!(c.divergent_tail, Some(Side::Plus));
}

#[test]
fn zero_weight_below_zero() {
    let c = point_spectrum_empty(&|_| 0.0, C::new(-1.0, 0.0), 1e3).unwrap();
    assert!(c.empty);
}

#[test]
fn gaussian_eigenfunction_is_detected() {
    // u = exp(-x²/2 - λx) is square integrable for every λ
    let c = point_spectrum_empty(&|x: f64| -x, C::new(0.5, 2.0), 1e3).unwrap();
    assert!(!c.empty);
    assert_eq!(c.divergent_tail, None);
}

#[test]
fn rejects_bad_horizon() {
    assert!(point_spectrum_empty(&|x: f64| x, C::new(0.0, 0.0), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_weight_never_has_eigenvalues(re in -20.0f64..20.0, im in -20.0f64..20.0) {
        let c = point_spectrum_empty(&|x: f64| x.abs(), C::new(re, im), 1e3).unwrap();
        prop_assert!(c.empty);
    }
}

use holder_pressure::spectral_core::GridField;
use holder_pressure::symbols::{
    disk_collar_box, identity_box, parametrix_remainder_order, parametrix_setup, quantize_apply, sharp_cap,
    sharp_levels, SymbolGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn sample() -> GridField {
    GridField::periodic_2d(32, 1, |x, y, _| (3.0 * x).sin() * (2.0 * y).cos() + (x + 5.0 * y).cos()).unwrap()
}

#[test]
fn squared_frequency_is_minus_laplacian() {
    let u = GridField::periodic_2d(32, 1, |x, y, _| (3.0 * x).sin() * (2.0 * y).cos()).unwrap();
    let a = SymbolGrid::multiplier(32, 2.0, |xi| Complex64::new(xi[0] * xi[0] + xi[1] * xi[1], 0.0));
    let v = quantize_apply(&a, &u).unwrap();
    assert!(v.sub(&u.scaled(13.0)).sup_norm() < 1e-11);
}

#[test]
fn variable_coefficient_derivative() {
    let u = sample();
    let b = |x: [f64; 2]| 2.0 + x[1].sin();
    let a = SymbolGrid::from_fn(32, 1.0, 0.0, move |x, xi| Complex64::new(0.0, b(x) * xi[0]));
    let v = quantize_apply(&a, &u).unwrap();
    let exact = GridField::periodic_2d(32, 1, |x, y, _| {
        (2.0 + y.sin()) * (3.0 * (3.0 * x).cos() * (2.0 * y).cos() - (x + 5.0 * y).sin())
    })
    .unwrap();
    assert!(v.sub(&exact).sup_norm() < 1e-11);
}

#[test]
fn sharp_levels_follow_the_cap() {
    assert_eq!(sharp_levels(256, 0.25), vec![1, 2, 4]);
    assert_eq!(sharp_levels(16, 0.5), vec![1, 2, 4]);
    assert_eq!(sharp_levels(1, 0.25), vec![1]);
}

#[test]
fn flat_parametrix_inverts_exactly() {
    let s = parametrix_setup(&identity_box(64).unwrap(), 0.25, 1).unwrap();
    let sweep = parametrix_remainder_order(&s.b, &s.e2, &s.cut, &[8, 16, 32]).unwrap();
    assert!(sweep.exact_inverse());
    assert!(sweep.errors.iter().all(|e| e.1 <= 1e-12));
}

#[test]
fn disk_remainder_decays() {
    let s = parametrix_setup(&disk_collar_box(64, 1.0).unwrap(), 0.25, 1).unwrap();
    let sweep = parametrix_remainder_order(&s.b, &s.e2, &s.cut, &[8, 16, 32]).unwrap();
    let fit = sweep.fit.expect("the disk metric is not flat");
    assert!(fit.slope < -1.0, "{}", fit.slope);
    assert!(sweep.to_csv().starts_with("N,error,order\n8,"));
}

proptest! {
    #[test]
    fn cap_is_largest_dyadic_below(m in 1usize..100_000, delta in 0.05f64..1.0) {
        let k = sharp_cap(m, delta);
        let lim = (m as f64).powf(delta);
        prop_assert!(k.is_power_of_two());
        prop_assert!(k as f64 <= lim * (1.0 + 1e-12));
        prop_assert!(2.0 * k as f64 > lim * (1.0 - 1e-12));
    }
}

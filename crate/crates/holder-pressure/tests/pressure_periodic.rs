use holder_pressure::fields::{synth_lacunary_divfree, LacunaryField, LacunarySpec};
use holder_pressure::pressure_periodic::{
    low_frequency_bound, pressure_from_modes, solve_pressure_torus, split_spectra, verify_double_regularity,
};
use holder_pressure::spectral_core::{make_partition, GridField};
use holder_pressure::Error;
use proptest::prelude::*;

fn taylor_green(k: f64, n: usize) -> GridField {
    GridField::periodic_2d(n, 2, |x, y, c| {
        if c == 0 {
            (k * x).sin() * (k * y).cos()
        } else {
            -(k * x).cos() * (k * y).sin()
        }
    })
    .unwrap()
}

#[test]
fn taylor_green_pressure() {
    let p = solve_pressure_torus(&taylor_green(1.0, 32)).unwrap();
    let exact = GridField::periodic_2d(32, 1, |x, y, _| ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0).unwrap();
    assert!(p.sub(&exact).sup_norm() < 1e-14);
}

#[test]
fn single_high_shell_has_no_low_frequencies() {
    let part = make_partition(5);
    let b = low_frequency_bound(&taylor_green(8.0, 64), &part).unwrap();
    assert!(b <= 1e-8, "{b}");
}

#[test]
fn mode_sum_agrees_with_the_grid_solver() {
    let field = LacunaryField::generate(&LacunarySpec { gamma: 0.25, j: 4, seed: 9, amplitude: 1.0 }).unwrap();
    let a = pressure_from_modes(&field, 128).unwrap();
    let b = solve_pressure_torus(&field.sample(128).unwrap()).unwrap();
    assert!(a.sub(&b).sup_norm() < 1e-12);
}

#[test]
fn split_reassembles_the_pressure() {
    let part = make_partition(4);
    let u = synth_lacunary_divfree(&LacunarySpec { gamma: 0.4, j: 4, seed: 1, amplitude: 1.0 }, 64).unwrap();
    let s = split_spectra(&u, &part).unwrap();
    assert!(s.identity_defect(&part) < 1e-12);
    let p = solve_pressure_torus(&u).unwrap();
    assert!(s.pressure().sub(&p).sup_norm() < 1e-12);
}

#[test]
fn regularity_sweep_arguments() {
    assert!(verify_double_regularity(&[], &[1], 64, 4, (4, 16)).unwrap().is_empty());
    assert!(matches!(verify_double_regularity(&[0.7], &[1], 64, 4, (4, 16)), Err(Error::Config(_))));
    let cells = verify_double_regularity(&[0.5], &[1, 2], 128, 5, (2, 16)).unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells.iter().all(|c| c.borderline.is_some() && c.ratio > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pressure_is_quadratic(lambda in -4.0f64..4.0, seed in 0u64..100) {
        let u = synth_lacunary_divfree(&LacunarySpec { gamma: 0.25, j: 3, seed, amplitude: 1.0 }, 32).unwrap();
        let p = solve_pressure_torus(&u).unwrap();
        let q = solve_pressure_torus(&u.scaled(lambda)).unwrap();
        prop_assert!(q.sub(&p.scaled(lambda * lambda)).sup_norm() <= 1e-12 * (1.0 + lambda * lambda) * p.sup_norm());
        prop_assert!(q.mean(0).abs() < 1e-14 * (1.0 + lambda * lambda));
    }
}

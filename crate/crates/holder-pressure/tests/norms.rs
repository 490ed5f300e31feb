use holder_pressure::norms::{
    block_profile, fit_decay_exponent, holder_norm, loglip_norm, second_difference_norm, zygmund_norm, BlockProfile,
};
use holder_pressure::spectral_core::{make_partition, GridField};
use proptest::prelude::*;

#[test]
fn holder_of_cosine_on_the_torus() {
    let f = GridField::periodic_1d(256, |x| x.cos()).unwrap();
    let h = holder_norm(&f, 1.0);
    // ||cos||_inf + sup |cos x - cos y| / |x - y| = 1 + 1.
    assert!((h - 2.0).abs() < 1e-3, "{h}");
}

#[test]
fn loglip_of_square_root_grows() {
    let norm = |n: usize| {
        let f = GridField::window_1d(n, -0.5, 0.5, |x| x.abs().sqrt()).unwrap();
        loglip_norm(&f)
    };
    let (a, b) = (norm(256), norm(1024));
    assert!(b >= 1.3 * a, "{a} -> {b}");
}

#[test]
fn loglip_of_x_log_x_stays_bounded() {
    let norm = |n: usize| {
        let f = GridField::window_1d(n, -0.5, 0.5, |x| if x == 0.0 { 0.0 } else { x * x.abs().ln() }).unwrap();
        loglip_norm(&f)
    };
    let (a, b) = (norm(1024), norm(8192));
    assert!((b / a - 1.0).abs() < 0.1, "{a} -> {b}");
}

#[test]
fn second_difference_of_absolute_value() {
    // |x + h| + |x - h| - 2|x| peaks at x = 0 with value 2h.
    let f = GridField::window_1d(128, -0.5, 0.5, |x| x.abs()).unwrap();
    let (norm, profile) = second_difference_norm(&f);
    assert!(profile.iter().all(|&(_, q)| (q - 2.0).abs() < 1e-12));
    assert!((norm - 2.5).abs() < 1e-12);
}

#[test]
fn power_law_profile_fits_exactly() {
    let levels = vec![1, 2, 4, 8, 16, 32];
    let sup = levels.iter().map(|&l| 3.0 * (l as f64).powf(-0.7)).collect();
    let p = BlockProfile::new(levels, sup).unwrap();
    let fit = fit_decay_exponent(&p, (2, 32)).unwrap();
    assert!((fit.slope + 0.7).abs() < 1e-12);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert!(p.to_csv().starts_with("level,sup_norm\n1,"));
}

#[test]
fn profile_of_a_lacunary_sum() {
    let part = make_partition(5);
    let f = GridField::periodic_1d(128, |x| (4.0 * x).cos() + 0.5 * (16.0 * x).cos()).unwrap();
    let p = block_profile(&f, &part).unwrap();
    assert!((p.get(4).unwrap() - 1.0).abs() < 1e-12);
    assert!((p.get(16).unwrap() - 0.5).abs() < 1e-12);
    assert!(p.get(8).unwrap() < 1e-12);
    let z = zygmund_norm(&f, 0.5, &part).unwrap();
    assert!((z - 2.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn zygmund_norm_is_homogeneous(lambda in -5.0f64..5.0, s in 0.1f64..1.0) {
        let part = make_partition(4);
        let f = GridField::periodic_2d(32, 1, |x, y, _| (2.0 * x).sin() * y.cos() + (5.0 * y).cos()).unwrap();
        let a = zygmund_norm(&f.scaled(lambda), s, &part).unwrap();
        let b = lambda.abs() * zygmund_norm(&f, s, &part).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }
}

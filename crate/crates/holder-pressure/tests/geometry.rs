use holder_pressure::geometry::{
    annulus_outer_metric, disk_metric, double_divergence, ellipticity_constant, laplace_beltrami, CollarField,
    MetricPatch,
};
use holder_pressure::Error;
use proptest::prelude::*;

#[test]
fn disk_metric_samples() {
    let m = disk_metric(0.5, 8, 16).unwrap();
    let top = m.grid.rows - 1;
    assert_eq!(m.g_theta_theta.at(0, 0, 3), 1.0);
    assert_eq!(m.big_g.at(0, 0, 3), 1.0);
    assert_eq!(m.g_theta_theta.at(0, top, 5), 4.0);
    assert_eq!(m.big_g.at(0, top, 5), 0.5);
    assert_eq!(m.a.at(0, top, 5), 2.0);
    assert_eq!(ellipticity_constant(&m), 1.0);
}

#[test]
fn degenerate_collars_are_refused() {
    assert!(matches!(disk_metric(1.0, 8, 16), Err(Error::Config(_))));
    assert!(matches!(disk_metric(0.5, 2, 16), Err(Error::Config(_))));
    assert!(matches!(disk_metric(0.5, 8, 12), Err(Error::Config(_))));
    assert!(annulus_outer_metric(2.0, 0.5, 8, 16).is_ok());
}

#[test]
fn laplacian_of_rho_squared() {
    // rho^2 = (1 - r)^2 has Laplacian 4 in the plane.
    let mut prev = f64::MAX;
    for nr in [8, 16, 32] {
        let m = disk_metric(0.5, nr, 16).unwrap();
        let p = CollarField::from_fn(m.grid, 1, |r, _, _| (1.0 - r).powi(2));
        let e = laplace_beltrami(&p, &m).unwrap().sup_norm_minus(4.0);
        assert!(e <= 2.0 * m.grid.h * m.grid.h, "nr = {nr}: {e}");
        assert!(e <= prev);
        prev = e;
    }
}

#[test]
fn mismatched_grids() {
    let m = disk_metric(0.5, 8, 16).unwrap();
    let other = disk_metric(0.5, 16, 16).unwrap();
    let p = CollarField::zeros(other.grid, 1);
    assert!(laplace_beltrami(&p, &m).is_err());
    assert!(double_divergence(&CollarField::zeros(m.grid, 2), &m).is_err());
}

trait Offset {
    fn sup_norm_minus(&self, c: f64) -> f64;
}

impl Offset for CollarField {
    fn sup_norm_minus(&self, c: f64) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max((v - c).abs()))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flat_laplacian_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let m = MetricPatch::identity(0.5, 8, 16).unwrap();
        let f = CollarField::from_fn(m.grid, 1, |r, t, _| r * r * t.cos());
        let g = CollarField::from_fn(m.grid, 1, |r, t, _| (r - 0.2).powi(3) + (2.0 * t).sin());
        let lhs = laplace_beltrami(&f.scaled(a).add(&g.scaled(b)), &m).unwrap();
        let rhs = laplace_beltrami(&f, &m).unwrap().scaled(a).add(&laplace_beltrami(&g, &m).unwrap().scaled(b));
        prop_assert!(lhs.sub(&rhs).sup_norm() <= 1e-9 * (1.0 + rhs.sup_norm()));
    }
}

use holder_pressure::fields::{
    divergence_residual, synth_disk_tangent, synth_lacunary_divfree, LacunaryField, LacunarySpec, LacunaryStream,
    PolarModeStream, RadialFactor, StreamSpec,
};
use holder_pressure::polar::PolarGrid;
use holder_pressure::Error;
use proptest::prelude::*;

fn spec(gamma: f64, j: u32, seed: u64) -> LacunarySpec {
    LacunarySpec { gamma, j, seed, amplitude: 1.0 }
}

#[test]
fn same_seed_same_field() {
    let a = synth_lacunary_divfree(&spec(0.25, 4, 7), 64).unwrap();
    let b = synth_lacunary_divfree(&spec(0.25, 4, 7), 64).unwrap();
    let c = synth_lacunary_divfree(&spec(0.25, 4, 8), 64).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn shells_decay_with_gamma() {
    let f = LacunaryField::generate(&spec(0.4, 6, 3)).unwrap();
    for m in &f.modes {
        let r = ((m.k[0] * m.k[0] + m.k[1] * m.k[1]) as f64).sqrt();
        let j = r.log2().floor();
        let amp = m.a[0].hypot(m.a[1]);
        assert!((amp - 2f64.powf(-0.4 * j) / 5.0).abs() < 1e-15);
    }
}

#[test]
fn bad_inputs() {
    assert!(matches!(LacunaryField::generate(&spec(1.5, 4, 1)), Err(Error::Config(_))));
    assert!(matches!(LacunaryField::generate(&spec(0.25, 1, 1)), Err(Error::Config(_))));
    assert!(matches!(synth_lacunary_divfree(&spec(0.25, 5, 1), 64), Err(Error::Range(_))));
    let bad = StreamSpec { gamma: 0.25, j: 3, seed: 1, boundary_factor: RadialFactor(vec![1.0, 1.0]) };
    assert!(matches!(LacunaryStream::generate(&bad), Err(Error::Config(_))));
}

#[test]
fn disk_velocity_is_tangent_and_solenoidal() {
    let s = LacunaryStream::generate(&StreamSpec {
        gamma: 0.25,
        j: 4,
        seed: 2,
        boundary_factor: RadialFactor::default(),
    })
    .unwrap();
    let u = synth_disk_tangent(&s, PolarGrid::square(64).unwrap());
    assert!(u.tangency_defect() < 1e-12);
    assert!(u.divergence_residual() < 1e-12);
    let m = PolarModeStream { factor: RadialFactor(vec![1.0, -2.0, 1.0]), power: 2, m: 3 };
    let v = synth_disk_tangent(&m, PolarGrid::square(32).unwrap());
    assert!(v.tangency_defect() < 1e-12);
    assert!(v.divergence_residual() < 1e-11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn periodic_field_is_divergence_free(seed in 0u64..1000, gamma in 0.05f64..1.0, j in 2u32..5) {
        let u = synth_lacunary_divfree(&spec(gamma, j, seed), 64).unwrap();
        prop_assert!(divergence_residual(&u).unwrap() <= 1e-10);
        prop_assert!(u.sup_norm() > 0.0);
    }
}

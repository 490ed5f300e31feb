use holder_pressure::extension::{
    collar_velocity, convective_flux, default_battery, jump_diagnostic, pressure_flux, reflect, reflect_unchecked,
    weak_divergence_residual, TwoSided,
};
use holder_pressure::fields::{LacunaryStream, PolarModeStream, RadialFactor, StreamSpec};
use holder_pressure::geometry::{disk_metric, CollarField};
use holder_pressure::Error;

/// `ρ^3 (1 - 3ρ^2/5) cos 3θ`, whose normal derivative vanishes at `ρ = 1`.
fn neumann_pressure(r: f64, t: f64) -> f64 {
    let rho = 1.0 - r;
    rho.powi(3) * (1.0 - 0.6 * rho * rho) * (3.0 * t).cos()
}

#[test]
fn reflected_lacunary_field() {
    let m = disk_metric(0.5, 32, 128).unwrap();
    let s = LacunaryStream::generate(&StreamSpec {
        gamma: 0.25,
        j: 3,
        seed: 4,
        boundary_factor: RadialFactor::default(),
    })
    .unwrap();
    let u = collar_velocity(&s, m.grid);
    let p = CollarField::from_fn(m.grid, 1, |r, t, _| neumann_pressure(r, t));
    let rc = reflect(&u, Some(&p), &m).unwrap();
    let w = weak_divergence_residual(&rc, &default_battery(0.5));
    assert!(w < 1e-5, "{w}");
    assert!(jump_diagnostic(&convective_flux(&rc)).unwrap().max() < 1e-10);
    let pj = jump_diagnostic(&pressure_flux(&rc).unwrap()).unwrap().max();
    assert!(pj < 1e-5, "{pj}");
    assert!(rc.mirrored().u.sub(&rc.u).sup_norm() < 1e-14);
}

#[test]
fn violations_are_visible() {
    let m = disk_metric(0.5, 16, 64).unwrap();
    let leak = CollarField::from_fn(m.grid, 2, |r, _, c| if c == 0 { 1.0 / (1.0 - r) } else { 0.0 });
    assert!(matches!(reflect(&leak, None, &m), Err(Error::Precondition(_))));
    let rc = reflect_unchecked(&leak, None, &m).unwrap();
    assert!(weak_divergence_residual(&rc, &default_battery(0.5)) > 0.1);
    assert!(pressure_flux(&rc).is_err());

    // pressure with a nonzero normal derivative at the wall
    let rot = PolarModeStream { factor: RadialFactor::default(), power: 0, m: 0 };
    let u = collar_velocity(&rot, m.grid);
    let p = CollarField::from_fn(m.grid, 1, |r, _, _| r);
    let rc = reflect(&u, Some(&p), &m).unwrap();
    let f = pressure_flux(&rc).unwrap();
    assert!(jump_diagnostic(&f).unwrap().max() > 1.0);
    let flipped = TwoSided { neg: f.neg.scaled(-1.0), pos: f.pos.clone() };
    assert!(jump_diagnostic(&flipped).unwrap().max() < 1e-10);
}

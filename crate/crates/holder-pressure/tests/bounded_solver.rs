use holder_pressure::bounded_solver::{
    assemble, boundary_lift, boundary_normal_derivative, solve, solve_disk, NeumannProblem,
};
use holder_pressure::fields::{synth_disk_tangent, DiskVelocity, LacunaryStream, PolarModeStream, RadialFactor, StreamSpec};
use holder_pressure::polar::{PolarField, PolarGrid};
use holder_pressure::Error;

fn lacunary(n: usize) -> DiskVelocity {
    let s = LacunaryStream::generate(&StreamSpec {
        gamma: 0.5,
        j: 3,
        seed: 11,
        boundary_factor: RadialFactor::default(),
    })
    .unwrap();
    synth_disk_tangent(&s, PolarGrid::square(n).unwrap())
}

#[test]
fn pressure_is_quadratic_in_the_velocity() {
    let u = lacunary(32);
    let p = solve_disk(&u).unwrap().solution.p;
    let q = solve_disk(&u.scaled(-3.0)).unwrap().solution.p;
    assert!(q.sub(&p.scaled(9.0)).sup_norm() < 1e-9 * p.sup_norm());
}

#[test]
fn repeated_solves_agree_bitwise() {
    let u = lacunary(32);
    let a = solve_disk(&u).unwrap();
    let b = solve_disk(&u).unwrap();
    assert_eq!(a.solution.p, b.solution.p);
    assert!(a.solution.solve_residual < 1e-10);
    assert!(a.problem.compatibility_defect() < 1e-13);
}

#[test]
fn weak_residual_shrinks_under_refinement() {
    let w: Vec<f64> = [32, 64, 128].iter().map(|&n| solve_disk(&lacunary(n)).unwrap().weak_residual).collect();
    assert!(w[1] < 0.5 * w[0] && w[2] < 0.5 * w[1], "{w:?}");
}

#[test]
fn manufactured_neumann_problem() {
    // Δp = -rhs + a with p = ρ^4 cos 2θ: Δp = 12 ρ^2 cos 2θ, ∂_n p = 4 cos 2θ.
    let mut prev = f64::MAX;
    for n in [16, 32, 64] {
        let g = PolarGrid::square(n).unwrap();
        let rhs = PolarField::from_fn(g, 1, |r, t, _| -12.0 * r * r * (2.0 * t).cos());
        let data = (0..g.ntheta).map(|j| 4.0 * (2.0 * g.theta(j)).cos()).collect();
        let np = NeumannProblem::new(g, rhs, data).unwrap();
        assert!(np.a.abs() < 1e-12);
        let p = solve(&np).unwrap().p;
        let exact = PolarField::from_fn(g, 1, |r, t, _| r.powi(4) * (2.0 * t).cos());
        let e = p.sub(&exact).sup_norm();
        assert!(e < 0.3 * prev, "n = {n}: {e}");
        prev = e;
    }
    assert!(prev < 2e-3);
}

#[test]
fn lift_carries_the_boundary_data() {
    let u = lacunary(64);
    let np = assemble(&u).unwrap();
    let psi = boundary_lift(&np).unwrap();
    let dn = boundary_normal_derivative(&psi);
    let worst = dn.iter().zip(&np.neumann_data).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let scale = np.neumann_data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(worst < 0.05 * scale, "{worst} vs {scale}");
}

#[test]
fn leaking_velocity_is_refused() {
    let g = PolarGrid::square(16).unwrap();
    let mut u = synth_disk_tangent(&PolarModeStream { factor: RadialFactor::default(), power: 0, m: 0 }, g);
    u.u.data.iter_mut().take(g.points()).for_each(|v| *v += 1.0);
    assert!(matches!(assemble(&u), Err(Error::Precondition(_))));
    assert!(assemble(&DiskVelocity::zero(g)).is_ok());
}

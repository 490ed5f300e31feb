//! Reflection of velocity, pressure and metric across the boundary `r = 0`
//! of the collar, and checks that the reflected fields carry no jumps.
//!
//! Velocities are coordinate components `(u^r, u^θ)`. The radial component is
//! extended oddly, everything else evenly.

use crate::error::{Error, Result};
use crate::fields::Stream;
use crate::geometry::{CollarField, CollarGrid, MetricPatch};

/// Tangency required at `r = 0` before reflecting.
pub const TANGENCY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectedCollar {
    /// Symmetric grid over `[-r0, r0]`; row `nr` is `r = 0`.
    pub grid: CollarGrid,
    pub u: CollarField,
    pub p: Option<CollarField>,
    pub g_theta_theta: CollarField,
    pub big_g: CollarField,
}

impl ReflectedCollar {
    pub fn nr(&self) -> usize {
        (self.grid.rows - 1) / 2
    }

    /// Apply `r -> -r` with the parity of each field.
    pub fn mirrored(&self) -> ReflectedCollar {
        let flip = |f: &CollarField, signs: &[f64]| {
            let g = f.grid;
            let mut out = f.clone();
            for c in 0..f.components {
                for i in 0..g.rows {
                    for j in 0..g.ntheta {
                        out.set(c, i, j, signs[c] * f.at(c, g.rows - 1 - i, j));
                    }
                }
            }
            out
        };
        ReflectedCollar {
            grid: self.grid,
            u: flip(&self.u, &[-1.0, 1.0]),
            p: self.p.as_ref().map(|p| flip(p, &[1.0])),
            g_theta_theta: flip(&self.g_theta_theta, &[1.0]),
            big_g: flip(&self.big_g, &[1.0]),
        }
    }

    /// Restriction to `r >= 0`.
    pub fn positive_half(&self) -> (CollarField, Option<CollarField>) {
        let (_, u) = split_halves(&self.u);
        let p = self.p.as_ref().map(|p| split_halves(p).1);
        (u, p)
    }
}

/// Odd/even extension. Fails unless `|u^r(0, θ)| <= TANGENCY_TOL`.
pub fn reflect(u: &CollarField, p: Option<&CollarField>, m: &MetricPatch) -> Result<ReflectedCollar> {
    let worst = u.row(0, 0).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if worst > TANGENCY_TOL {
        return Err(Error::Precondition(format!(
            "velocity is not tangent to the boundary: max |u^r(0, θ)| = {worst:.3e}; \
             the odd extension of u^r needs u·n = 0"
        )));
    }
    reflect_unchecked(u, p, m)
}

/// Reflection without the tangency check, for manufacturing violations.
pub fn reflect_unchecked(u: &CollarField, p: Option<&CollarField>, m: &MetricPatch) -> Result<ReflectedCollar> {
    if u.grid != m.grid || u.components != 2 {
        return Err(Error::Config("velocity must be a two-component field on the metric's collar".into()));
    }
    if let Some(p) = p {
        if p.grid != m.grid || p.components != 1 {
            return Err(Error::Config("pressure must be a scalar on the metric's collar".into()));
        }
    }
    let g = m.grid;
    let nr = g.rows - 1;
    let grid = CollarGrid::symmetric(nr as f64 * g.h, nr, g.ntheta)?;
    let extend = |f: &CollarField, signs: &[f64]| {
        let mut out = CollarField::zeros(grid, f.components);
        for c in 0..f.components {
            for k in 0..grid.rows {
                let (i, s) = if k >= nr { (k - nr, 1.0) } else { (nr - k, signs[c]) };
                for j in 0..g.ntheta {
                    out.set(c, k, j, s * f.at(c, i, j));
                }
            }
        }
        out
    };
    Ok(ReflectedCollar {
        grid,
        u: extend(u, &[-1.0, 1.0]),
        p: p.map(|p| extend(p, &[1.0])),
        g_theta_theta: extend(&m.g_theta_theta, &[1.0]),
        big_g: extend(&m.big_g, &[1.0]),
    })
}

/// Coordinate velocity `(u^r, u^θ)` of a disk stream on a collar, `ρ = 1 - r`.
pub fn collar_velocity(stream: &dyn Stream, grid: CollarGrid) -> CollarField {
    let mut out = CollarField::zeros(grid, 2);
    for i in 0..grid.rows {
        let rho = 1.0 - grid.r(i);
        for j in 0..grid.ntheta {
            let (s, c) = grid.theta(j).sin_cos();
            let d = stream.eval(rho * c, rho * s);
            let (ux, uy) = (-d.dy, d.dx);
            out.set(0, i, j, -(c * ux + s * uy));
            out.set(1, i, j, (-s * ux + c * uy) / rho);
        }
    }
    out
}

/// Split a field on a symmetric grid into `r <= 0` and `r >= 0` parts; both
/// contain the row `r = 0`.
pub fn split_halves(f: &CollarField) -> (CollarField, CollarField) {
    let g = f.grid;
    let nr = (g.rows - 1) / 2;
    let half = |r_start: f64, first: usize| {
        let hg = CollarGrid {
            r_start,
            h: g.h,
            rows: nr + 1,
            ntheta: g.ntheta,
        };
        let mut out = CollarField::zeros(hg, f.components);
        for c in 0..f.components {
            for i in 0..=nr {
                for j in 0..g.ntheta {
                    out.set(c, i, j, f.at(c, first + i, j));
                }
            }
        }
        out
    };
    (half(g.r_start, 0), half(0.0, nr))
}

/// Inverse of [`split_halves`]; row `r = 0` is taken from `pos`.
pub fn join_halves(neg: &CollarField, pos: &CollarField) -> CollarField {
    let nr = neg.grid.rows - 1;
    let grid = CollarGrid {
        r_start: neg.grid.r_start,
        h: neg.grid.h,
        rows: 2 * nr + 1,
        ntheta: neg.grid.ntheta,
    };
    let mut out = CollarField::zeros(grid, neg.components);
    for c in 0..neg.components {
        for k in 0..grid.rows {
            for j in 0..grid.ntheta {
                let v = if k < nr { neg.at(c, k, j) } else { pos.at(c, k - nr, j) };
                out.set(c, k, j, v);
            }
        }
    }
    out
}

/// Apply `op` to each side of `r = 0` separately, so no stencil crosses it.
pub fn halfwise(f: &CollarField, op: impl Fn(&CollarField) -> CollarField) -> CollarField {
    let (n, p) = split_halves(f);
    join_halves(&op(&n), &op(&p))
}

/// `φ(r, θ) = b((r - c)/w) (1 + (r - c)/(2w)) exp(κ (cos(θ - θ_c) - 1))` with
/// the compactly supported `b(s) = (1 - s^2)^6` on `|s| < 1` and `κ = 4`.
///
/// `b` has moderate derivatives, which keeps Boole's rule accurate at desk
/// resolutions; the angular factor is analytic, so the trapezoid rule
/// converges geometrically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestBump {
    pub centre: f64,
    pub width: f64,
    pub theta_c: f64,
}

fn profile(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let q5 = q.powi(5);
    (q5 * q, -12.0 * s * q5)
}

const KAPPA: f64 = 4.0;

impl TestBump {
    /// `(φ, ∂_r φ, ∂_θ φ)`.
    pub fn eval(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        let s = (r - self.centre) / self.width;
        let (m, dm) = profile(s);
        let poly = 1.0 + 0.5 * s;
        let radial = m * poly;
        let d_radial = (dm * poly + 0.5 * m) / self.width;
        let (sn, cs) = (theta - self.theta_c).sin_cos();
        let a = (KAPPA * (cs - 1.0)).exp();
        (radial * a, d_radial * a, -radial * a * KAPPA * sn)
    }
}

/// Three widths times four centres, all straddling `r = 0` and supported
/// inside the collar.
pub fn default_battery(r0: f64) -> Vec<TestBump> {
    let mut out = Vec::new();
    for (wi, f) in [0.6, 0.45, 0.3].iter().enumerate() {
        let w = f * r0;
        for (ci, c) in [-0.5, -0.2, 0.15, 0.45].iter().enumerate() {
            out.push(TestBump {
                centre: c * w,
                width: w,
                theta_c: 0.7 * (4 * wi + ci) as f64,
            });
        }
    }
    out
}

/// Composite Boole weights for `n` intervals of width `h`, `n % 4 == 0`.
fn boole_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n % 4 == 0, "Boole's rule needs a multiple of four intervals");
    let mut w = vec![0.0; n + 1];
    for b in (0..n).step_by(4) {
        for (k, c) in [7.0, 32.0, 12.0, 32.0, 7.0].iter().enumerate() {
            w[b + k] += 2.0 * h * c / 45.0;
        }
    }
    w
}

/// `max_φ |∫∫ G̃ ũ · ∇φ dr dθ| / ||φ||_{C^1}`; each half is integrated with
/// Boole's rule in `r`, the trapezoid rule in `θ`.
pub fn weak_divergence_residual(rc: &ReflectedCollar, battery: &[TestBump]) -> f64 {
    let g = rc.grid;
    let nr = rc.nr();
    let wr = boole_weights(nr, g.h);
    let dt = g.dtheta();
    let mut worst = 0.0f64;
    for bump in battery {
        let mut acc = 0.0;
        let mut c1 = 0.0f64;
        let mut c0 = 0.0f64;
        for k in 0..g.rows {
            let r = g.r(k);
            // row nr belongs to both halves
            let w = if k < nr {
                wr[k]
            } else if k == nr {
                wr[nr] + wr[0]
            } else {
                wr[k - nr]
            };
            for j in 0..g.ntheta {
                let (phi, pr, pt) = bump.eval(r, g.theta(j));
                c0 = c0.max(phi.abs());
                c1 = c1.max(pr.abs().max(pt.abs()));
                let integrand =
                    rc.big_g.at(0, k, j) * (rc.u.at(0, k, j) * pr + rc.u.at(1, k, j) * pt);
                acc += w * dt * integrand;
            }
        }
        let norm = c0 + c1;
        if norm > 0.0 {
            worst = worst.max(acc.abs() / norm);
        }
    }
    worst
}

/// A field stored separately on `r <= 0` and `r >= 0`; both halves hold a
/// row at `r = 0`, so one-sided traces are available exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSided {
    pub neg: CollarField,
    pub pos: CollarField,
}

impl TwoSided {
    pub fn from_symmetric(f: &CollarField) -> Self {
        let (neg, pos) = split_halves(f);
        TwoSided { neg, pos }
    }

    pub fn map(&self, op: impl Fn(&CollarField) -> CollarField) -> Self {
        TwoSided {
            neg: op(&self.neg),
            pos: op(&self.pos),
        }
    }

    pub fn zip(&self, o: &TwoSided, op: impl Fn(&CollarField, &CollarField) -> CollarField) -> Self {
        TwoSided {
            neg: op(&self.neg, &o.neg),
            pos: op(&self.pos, &o.pos),
        }
    }

    /// Single field on the symmetric grid; row `r = 0` from the `r >= 0` side.
    pub fn joined(&self) -> CollarField {
        join_halves(&self.neg, &self.pos)
    }
}

/// `F(0+, θ) - F(0-, θ)` per component.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpProfile {
    pub ntheta: usize,
    pub components: usize,
    /// Jump of component `c` at `θ_j`, stored at `c * ntheta + j`.
    pub jumps: Vec<f64>,
}

impl JumpProfile {
    pub fn max(&self) -> f64 {
        self.jumps.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Rows `theta,component,jump`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,component,jump\n");
        for c in 0..self.components {
            for j in 0..self.ntheta {
                let t = 2.0 * std::f64::consts::PI * j as f64 / self.ntheta as f64;
                s.push_str(&format!("{t:.17e},{c},{:.17e}\n", self.jumps[c * self.ntheta + j]));
            }
        }
        s
    }
}

pub fn jump_diagnostic(f: &TwoSided) -> Result<JumpProfile> {
    let (n, p) = (&f.neg, &f.pos);
    if n.components != p.components || n.grid.ntheta != p.grid.ntheta {
        return Err(Error::Config("the two sides of the field do not match".into()));
    }
    let last = n.grid.rows - 1;
    let mut jumps = Vec::with_capacity(n.components * n.grid.ntheta);
    for c in 0..n.components {
        for (a, b) in p.row(c, 0).iter().zip(n.row(c, last)) {
            jumps.push(a - b);
        }
    }
    Ok(JumpProfile {
        ntheta: n.grid.ntheta,
        components: n.components,
        jumps,
    })
}

fn require_pressure(rc: &ReflectedCollar) -> Result<&CollarField> {
    rc.p.as_ref()
        .ok_or_else(|| Error::Config("reflected collar carries no pressure".into()))
}

/// `G̃ g̃^{ij} ∂_j p̃` as `(r, θ)` components; `∂_r` is fourth order on each side.
pub fn pressure_flux(rc: &ReflectedCollar) -> Result<TwoSided> {
    let p = TwoSided::from_symmetric(require_pressure(rc)?);
    let gg = TwoSided::from_symmetric(&rc.big_g);
    let gtt = TwoSided::from_symmetric(&rc.g_theta_theta);
    let fr = p.map(|h| h.d_r4()).zip(&gg, |a, b| a.mul(b));
    let ft = p.map(|h| h.d_theta()).zip(&gtt, |a, b| a.mul(b)).zip(&gg, |a, b| a.mul(b));
    Ok(fr.zip(&ft, |a, b| CollarField::stack(&[a.clone(), b.clone()])))
}

/// `G̃ ũ^j ∂_j ũ^i`; `∂_r` is fourth order on each side.
pub fn convective_flux(rc: &ReflectedCollar) -> TwoSided {
    let u = TwoSided::from_symmetric(&rc.u);
    let gg = TwoSided::from_symmetric(&rc.big_g);
    u.zip(&gg, |u, g| {
        let ur = u.component(0);
        let ut = u.component(1);
        let comp = |f: &CollarField| ur.mul(&f.d_r4()).add(&ut.mul(&f.d_theta())).mul(g);
        CollarField::stack(&[comp(&ur), comp(&ut)])
    })
}

/// `∂_i(g̃^{ij} G̃ ∂_j p̃) + ∂_i∂_j(G̃ ũ^i ũ^j)`, evaluated on each side of `r = 0`.
pub fn extended_equation_residual(rc: &ReflectedCollar) -> Result<CollarField> {
    let p = require_pressure(rc)?;
    let gg = &rc.big_g;
    let dr = |f: &CollarField| halfwise(f, |h| h.d_r());
    let drr = |f: &CollarField| halfwise(f, |h| h.d_rr());
    let lap = dr(&gg.mul(&dr(p))).add(&gg.mul(&rc.g_theta_theta).mul(&p.d_theta()).d_theta());
    let ur = rc.u.component(0);
    let ut = rc.u.component(1);
    let dd = drr(&gg.mul(&ur).mul(&ur))
        .add(&dr(&gg.mul(&ur).mul(&ut).d_theta()).scaled(2.0))
        .add(&gg.mul(&ut).mul(&ut).d_theta2());
    Ok(lap.add(&dd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PolarModeStream;
    use crate::fields::RadialFactor;
    use crate::geometry::disk_metric;

    fn rotation() -> PolarModeStream {
        PolarModeStream { factor: RadialFactor::default(), power: 0, m: 0 }
    }

    #[test]
    fn parity_is_exact() {
        let m = disk_metric(0.5, 16, 32).unwrap();
        let u = collar_velocity(&rotation(), m.grid);
        let p = CollarField::from_fn(m.grid, 1, |r, t, _| (1.0 - r).powi(2) * (1.0 + t.sin()));
        let rc = reflect(&u, Some(&p), &m).unwrap();
        assert_eq!(rc.mirrored(), rc);
        assert_eq!(rc.mirrored().mirrored(), rc);
        let (u2, p2) = rc.positive_half();
        assert_eq!(u2.data, u.data);
        assert_eq!(p2.unwrap().data, p.data);
    }

    #[test]
    fn rejects_non_tangent_velocity() {
        let m = disk_metric(0.5, 16, 32).unwrap();
        let u = CollarField::from_fn(m.grid, 2, |r, _, c| if c == 0 { 1.0 / (1.0 - r) } else { 0.0 });
        assert!(matches!(reflect(&u, None, &m), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let m = disk_metric(0.5, 16, 32).unwrap();
        let u = CollarField::zeros(m.grid, 2);
        let rc = reflect(&u, None, &m).unwrap();
        assert_eq!(weak_divergence_residual(&rc, &default_battery(0.5)), 0.0);
    }

    #[test]
    fn boole_integrates_quartics() {
        let w = boole_weights(8, 0.125);
        let s: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64 * 0.125).powi(4)).sum();
        assert!((s - 0.2).abs() < 1e-15);
    }

    #[test]
    fn manufactured_sign_flip_is_a_jump() {
        let g = CollarGrid::symmetric(0.5, 16, 16).unwrap();
        let f = CollarField::from_fn(g, 1, |r, t, _| 1.0 + 0.5 * t.cos() + r);
        let two = TwoSided::from_symmetric(&f);
        let flipped = TwoSided { neg: two.neg.scaled(-1.0), pos: two.pos };
        let jp = jump_diagnostic(&flipped).unwrap();
        for (j, v) in jp.jumps.iter().enumerate() {
            let t = g.theta(j);
            assert!((v - 2.0 * (1.0 + 0.5 * t.cos())).abs() < 1e-12);
        }
    }
}

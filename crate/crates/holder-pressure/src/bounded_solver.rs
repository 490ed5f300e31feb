//! Neumann problem for the pressure on the unit disk:
//! `-Δp = ∂_i u^j ∂_j u^i` in the disk, `∂_n p = u⊗u : ∇n` on the circle.
//!
//! Five-point polar finite differences on a [`PolarGrid`], with the pole as
//! a single averaged unknown and a ghost ring closing the Neumann condition.
//! The operator is symmetrized by cell weights and solved with conjugate
//! gradients preconditioned by an exact θ-FFT / radial tridiagonal solve.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::DiskVelocity;
use crate::norms::{linear_fit, ExponentFit};
use crate::polar::{PolarField, PolarGrid};
use crate::spectral_core::fft;

/// Relative tangency tolerance for [`assemble`].
pub const TANGENCY_TOL: f64 = 1e-10;

/// `Δp = -rhs + a` in the disk, `∂_ρ p = neumann_data` at `ρ = 1`; `a` is the
/// constant making the discrete problem compatible.
#[derive(Clone, Debug)]
pub struct NeumannProblem {
    pub grid: PolarGrid,
    pub rhs: PolarField,
    pub neumann_data: Vec<f64>,
    pub a: f64,
}

/// Symmetric weighted form `K p = W (b - F)` of the discrete Laplacian.
struct Stencil {
    nr: usize,
    nt: usize,
    /// `c[i]` couples rings `i` and `i + 1` (ring 0 is the pole).
    c: Vec<f64>,
    /// Angular coupling on ring `i >= 1`.
    t: Vec<f64>,
    /// Cell weights; `w[0]` is the pole cell.
    w: Vec<f64>,
    /// Weight of the boundary flux term.
    w_boundary: f64,
}

impl Stencil {
    fn new(g: PolarGrid) -> Self {
        let (nr, nt) = (g.nr, g.ntheta);
        let h = g.h();
        let dt = g.dtheta();
        let half = |i: usize| (i as f64 + 0.5) * h;
        let c = (0..nr).map(|i| dt * half(i) / h).collect();
        let mut t = vec![0.0; nr + 1];
        let mut w = vec![0.0; nr + 1];
        w[0] = std::f64::consts::PI * h * h / 4.0;
        for i in 1..nr {
            t[i] = h / (g.rho(i) * dt);
            w[i] = g.rho(i) * h * dt;
        }
        t[nr] = h * half(nr - 1) / (2.0 * dt);
        w[nr] = 0.5 * h * half(nr - 1) * dt;
        Stencil {
            nr,
            nt,
            c,
            t,
            w,
            w_boundary: half(nr - 1) * half(nr) * dt,
        }
    }

    fn len(&self) -> usize {
        1 + self.nr * self.nt
    }

    fn weight(&self, k: usize) -> f64 {
        if k == 0 {
            self.w[0]
        } else {
            self.w[1 + (k - 1) / self.nt]
        }
    }

    fn total_weight(&self) -> f64 {
        self.w[0] + self.nt as f64 * self.w[1..].iter().sum::<f64>()
    }

    fn apply(&self, p: &[f64], y: &mut [f64]) {
        let (nr, nt) = (self.nr, self.nt);
        let c0 = self.c[0];
        y[0] = (0..nt).map(|j| c0 * (p[0] - p[1 + j])).sum();
        y[1..].par_chunks_mut(nt).enumerate().for_each(|(ii, out)| {
            let i = ii + 1;
            let ring = &p[1 + ii * nt..1 + (ii + 1) * nt];
            let ti = self.t[i];
            for j in 0..nt {
                let inner = if i == 1 { p[0] } else { p[1 + (ii - 1) * nt + j] };
                let mut v = self.c[i - 1] * (ring[j] - inner);
                if i < nr {
                    v += self.c[i] * (ring[j] - p[1 + (ii + 1) * nt + j]);
                }
                let (jp, jm) = ((j + 1) % nt, (j + nt - 1) % nt);
                v += ti * (2.0 * ring[j] - ring[jp] - ring[jm]);
                out[j] = v;
            }
        });
    }

    /// Exact solve of `K x = z` up to an additive constant; `z[0]` only
    /// fixes that constant and is not read.
    fn precondition(&self, z: &[f64], x: &mut [f64]) {
        let (nr, nt) = (self.nr, self.nt);
        let mut buf: Vec<Complex64> = z[1..].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::rows(&mut buf, nt, FftDirection::Forward);
        let dt = 2.0 * std::f64::consts::PI / nt as f64;
        let mut sol = vec![Complex64::new(0.0, 0.0); nr * nt];
        for m in 0..nt {
            let lam = 2.0 - 2.0 * (m as f64 * dt).cos();
            let rhs: Vec<Complex64> = (0..nr).map(|i| buf[i * nt + m]).collect();
            let diag: Vec<f64> = (1..=nr)
                .map(|i| {
                    let mut d = self.c[i - 1] + self.t[i] * lam;
                    if i < nr {
                        d += self.c[i];
                    }
                    d
                })
                .collect();
            let off: Vec<f64> = (1..nr).map(|i| -self.c[i]).collect();
            // in the mean mode the chain with the pole is singular; pinning
            // the pole at zero leaves the ring system nonsingular
            let col = thomas(&diag, &off, &rhs);
            for i in 0..nr {
                sol[i * nt + m] = col[i];
            }
        }
        fft::rows(&mut sol, nt, FftDirection::Inverse);
        x[0] = 0.0;
        let s = 1.0 / nt as f64;
        for (o, v) in x[1..].iter_mut().zip(&sol) {
            *o = v.re * s;
        }
    }
}

/// Tridiagonal solve with symmetric off-diagonal `off`.
fn thomas(diag: &[f64], off: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    cp[0] = if n > 1 { off[0] / denom } else { 0.0 };
    dp[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * cp[i - 1];
        if i < n - 1 {
            cp[i] = off[i] / denom;
        }
        dp[i] = (rhs[i] - off[i - 1] * dp[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = dp[i + 1];
        dp[i] -= cp[i] * next;
    }
    dp
}

impl NeumannProblem {
    /// Problem with the compatibility constant computed from the discrete
    /// Green identity.
    pub fn new(grid: PolarGrid, rhs: PolarField, neumann_data: Vec<f64>) -> Result<Self> {
        if rhs.grid != grid || rhs.components != 1 || neumann_data.len() != grid.ntheta {
            return Err(Error::Config("Neumann problem data does not match its grid".into()));
        }
        let mut np = NeumannProblem { grid, rhs, neumann_data, a: 0.0 };
        let st = Stencil::new(grid);
        np.a = -np.green_defect(&st) / st.total_weight();
        Ok(np)
    }

    /// `Σ W (-rhs + a) - Σ w_b g`.
    fn green_defect(&self, st: &Stencil) -> f64 {
        let g = self.grid;
        let mut s = st.w[0] * (self.a - self.rhs.at(0, 0, 0));
        for i in 1..=g.nr {
            s += st.w[i] * self.rhs.ring(0, i).iter().map(|&v| self.a - v).sum::<f64>();
        }
        s - st.w_boundary * self.neumann_data.iter().sum::<f64>()
    }

    /// Discrete compatibility defect relative to the size of the data.
    pub fn compatibility_defect(&self) -> f64 {
        let st = Stencil::new(self.grid);
        let scale = st.total_weight() * (self.rhs.sup_norm() + self.a.abs())
            + st.w_boundary * self.neumann_data.iter().map(|v| v.abs()).sum::<f64>();
        self.green_defect(&st).abs() / scale.max(f64::MIN_POSITIVE)
    }

    /// Same boundary data, no interior source: `Δψ = A`, `∂_n ψ = g`.
    pub fn lift_problem(&self) -> NeumannProblem {
        NeumannProblem::new(self.grid, PolarField::zeros(self.grid, 1), self.neumann_data.clone())
            .expect("shapes match")
    }

    /// Same source, homogeneous Neumann data.
    pub fn homogeneous_problem(&self) -> NeumannProblem {
        NeumannProblem::new(self.grid, self.rhs.clone(), vec![0.0; self.grid.ntheta]).expect("shapes match")
    }
}

/// `rhs = ∂_i u^j ∂_j u^i`, `g = |u · e_θ|^2` at `ρ = 1`.
pub fn assemble(u: &DiskVelocity) -> Result<NeumannProblem> {
    let defect = u.tangency_defect();
    if defect > TANGENCY_TOL * u.sup_norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "velocity is not tangent to the boundary: max |u·n| = {defect:.3e}"
        )));
    }
    let g = u.grid;
    let m = g.points();
    let gr = &u.grad.data;
    let mut rhs = PolarField::zeros(g, 1);
    for p in 0..m {
        let (a, b, c, d) = (gr[p], gr[m + p], gr[2 * m + p], gr[3 * m + p]);
        rhs.data[p] = a * a + 2.0 * b * c + d * d;
    }
    // the pole is a single unknown
    let pole = rhs.ring(0, 0).iter().sum::<f64>() / g.ntheta as f64;
    rhs.data[..g.ntheta].iter_mut().for_each(|v| *v = pole);
    let pc = u.polar_components();
    let data = pc.ring(1, g.nr).iter().map(|v| v * v).collect();
    NeumannProblem::new(g, rhs, data)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rel_tol: 1e-12, max_iter: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct PressureSolution {
    pub p: PolarField,
    /// Mean after normalization.
    pub mean: f64,
    /// `||K p - b|| / ||b||` of the weighted system.
    pub solve_residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

pub fn solve(np: &NeumannProblem) -> Result<PressureSolution> {
    solve_with(np, SolverOptions::default())
}

pub fn solve_with(np: &NeumannProblem, opts: SolverOptions) -> Result<PressureSolution> {
    let g = np.grid;
    let st = Stencil::new(g);
    let nt = g.ntheta;
    let len = st.len();
    let node = |k: usize| if k == 0 { (0, 0) } else { (1 + (k - 1) / nt, (k - 1) % nt) };
    let mut b: Vec<f64> = (0..len)
        .map(|k| {
            let (i, j) = node(k);
            st.weight(k) * (np.rhs.at(0, i, j) - np.a)
        })
        .collect();
    for j in 0..nt {
        b[1 + (g.nr - 1) * nt + j] += st.w_boundary * np.neumann_data[j];
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; len];
    let mut history = Vec::new();
    let mut iterations = 0;
    if bnorm > 0.0 {
        let mut r = b.clone();
        let mut z = vec![0.0; len];
        st.precondition(&r, &mut z);
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let mut kd = vec![0.0; len];
        loop {
            let res = dot(&r, &r).sqrt() / bnorm;
            history.push(res);
            if res <= opts.rel_tol {
                break;
            }
            if iterations >= opts.max_iter || !res.is_finite() {
                return Err(Error::Numerical {
                    message: format!("conjugate gradients stalled at relative residual {res:.3e}"),
                    history,
                });
            }
            iterations += 1;
            st.apply(&d, &mut kd);
            let alpha = rz / dot(&d, &kd);
            for k in 0..len {
                x[k] += alpha * d[k];
                r[k] -= alpha * kd[k];
            }
            st.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..len {
                d[k] = z[k] + beta * d[k];
            }
        }
    }
    let mut kx = vec![0.0; len];
    st.apply(&x, &mut kx);
    let solve_residual = if bnorm > 0.0 {
        kx.iter().zip(&b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() / bnorm
    } else {
        0.0
    };
    let mut p = PolarField::zeros(g, 1);
    for j in 0..nt {
        p.set(0, 0, j, x[0]);
    }
    for k in 1..len {
        let (i, j) = node(k);
        p.set(0, i, j, x[k]);
    }
    let m = disk_mean(&p);
    p.data.iter_mut().for_each(|v| *v -= m);
    let mean = disk_mean(&p);
    Ok(PressureSolution {
        p,
        mean,
        solve_residual,
        iterations,
        history,
    })
}

/// Simpson weights in `ρ` times `ρ`; `∫_disk f = Σ_i Σ_j w_i Δθ f_ij`.
fn radial_weights(nr: usize) -> Vec<f64> {
    let h = 1.0 / nr as f64;
    (0..=nr)
        .map(|i| {
            let s = if i == 0 || i == nr {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s * h / 3.0 * i as f64 * h
        })
        .collect()
}

/// `∫_disk f dA` by Simpson's rule in `ρ` and the trapezoid rule in `θ`.
pub fn disk_integral(f: &PolarField, c: usize) -> f64 {
    let g = f.grid;
    let w = radial_weights(g.nr);
    let dt = g.dtheta();
    (0..=g.nr).map(|i| w[i] * dt * f.ring(c, i).iter().sum::<f64>()).sum()
}

pub fn disk_mean(f: &PolarField) -> f64 {
    disk_integral(f, 0) / std::f64::consts::PI
}

/// `∮ f ds` of samples on the unit circle.
pub fn circle_integral(f: &[f64]) -> f64 {
    2.0 * std::f64::consts::PI / f.len() as f64 * f.iter().sum::<f64>()
}

/// Value, gradient and Hessian `(φ, [φ_x, φ_y], [φ_xx, φ_xy, φ_yy])`.
pub type Jet = (f64, [f64; 2], [f64; 3]);

pub struct TestFunction {
    pub name: &'static str,
    pub eval: Box<dyn Fn(f64, f64) -> Jet + Send + Sync>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

fn monomial(a: i32, b: i32) -> impl Fn(f64, f64) -> Jet {
    move |x, y| {
        let pw = |v: f64, k: i32| if k < 0 { 0.0 } else { v.powi(k) };
        let (af, bf) = (a as f64, b as f64);
        (
            pw(x, a) * pw(y, b),
            [af * pw(x, a - 1) * pw(y, b), bf * pw(x, a) * pw(y, b - 1)],
            [
                af * (af - 1.0) * pw(x, a - 2) * pw(y, b),
                af * bf * pw(x, a - 1) * pw(y, b - 1),
                bf * (bf - 1.0) * pw(x, a) * pw(y, b - 2),
            ],
        )
    }
}

/// Polynomials up to degree four plus smooth trigonometric and radial
/// products; twenty members, the constant first.
pub fn default_test_battery() -> Vec<TestFunction> {
    let mut out: Vec<TestFunction> = [
        ("1", 0, 0),
        ("x", 1, 0),
        ("y", 0, 1),
        ("x^2", 2, 0),
        ("xy", 1, 1),
        ("y^2", 0, 2),
        ("x^3", 3, 0),
        ("x^2 y", 2, 1),
        ("x y^2", 1, 2),
        ("y^3", 0, 3),
        ("x^4", 4, 0),
        ("x^2 y^2", 2, 2),
        ("x y^3", 1, 3),
    ]
    .into_iter()
    .map(|(name, a, b)| TestFunction { name, eval: Box::new(monomial(a, b)) })
    .collect();
    let tf = |name, f: fn(f64, f64) -> Jet| TestFunction { name, eval: Box::new(f) };
    out.push(tf("x^2 + y^2", |x, y| (x * x + y * y, [2.0 * x, 2.0 * y], [2.0, 0.0, 2.0])));
    out.push(tf("(x^2 + y^2)^2", |x, y| {
        let s = x * x + y * y;
        (s * s, [4.0 * s * x, 4.0 * s * y], [4.0 * s + 8.0 * x * x, 8.0 * x * y, 4.0 * s + 8.0 * y * y])
    }));
    out.push(tf("sin(x + 2y)", |x, y| {
        let (s, c) = (x + 2.0 * y).sin_cos();
        (s, [c, 2.0 * c], [-s, -2.0 * s, -4.0 * s])
    }));
    out.push(tf("cos(2x - y)", |x, y| {
        let (s, c) = (2.0 * x - y).sin_cos();
        (c, [-2.0 * s, s], [-4.0 * c, 2.0 * c, -c])
    }));
    out.push(tf("e^x cos y", |x, y| {
        let (s, c) = y.sin_cos();
        let e = x.exp();
        (e * c, [e * c, -e * s], [e * c, -e * s, -e * c])
    }));
    out.push(tf("cos(pi (x^2 + y^2))", |x, y| {
        let k = std::f64::consts::PI;
        let (s, c) = (k * (x * x + y * y)).sin_cos();
        (
            c,
            [-2.0 * k * x * s, -2.0 * k * y * s],
            [
                -2.0 * k * s - 4.0 * k * k * x * x * c,
                -4.0 * k * k * x * y * c,
                -2.0 * k * s - 4.0 * k * k * y * y * c,
            ],
        )
    }));
    out.push(tf("x sin(3(x^2 + y^2))", |x, y| {
        let (s, c) = (3.0 * (x * x + y * y)).sin_cos();
        (
            x * s,
            [s + 6.0 * x * x * c, 6.0 * x * y * c],
            [
                18.0 * x * c - 36.0 * x * x * x * s,
                6.0 * y * c - 36.0 * x * x * y * s,
                6.0 * x * c - 36.0 * x * y * y * s,
            ],
        )
    }));
    out
}

/// `max|φ| + max|∇φ| + max|Hφ|` over the grid nodes.
fn c2_norm(grid: PolarGrid, f: &TestFunction) -> f64 {
    let mut m = [0.0f64; 3];
    for i in 0..=grid.nr {
        for j in 0..grid.ntheta {
            let (x, y) = grid.xy(i, j);
            let (v, d, h) = (f.eval)(x, y);
            m[0] = m[0].max(v.abs());
            m[1] = m[1].max(d[0].hypot(d[1]));
            m[2] = m[2].max(h[0].abs().max(h[1].abs()).max(h[2].abs()));
        }
    }
    m.iter().sum()
}

/// `|-∫ p Δφ + ∮ p ∂_n φ - ∫ u⊗u : Hφ| / ||φ||_{C^2}` for each member.
pub fn weak_form_residuals(u: &DiskVelocity, p: &PolarField, battery: &[TestFunction]) -> Vec<f64> {
    let g = p.grid;
    battery
        .iter()
        .map(|f| {
            let mut lap = PolarField::zeros(g, 1);
            let mut conv = PolarField::zeros(g, 1);
            let mut dn = vec![0.0; g.ntheta];
            for i in 0..=g.nr {
                for j in 0..g.ntheta {
                    let (x, y) = g.xy(i, j);
                    let (_, d, h) = (f.eval)(x, y);
                    let (ux, uy) = (u.u.at(0, i, j), u.u.at(1, i, j));
                    lap.set(0, i, j, p.at(0, i, j) * (h[0] + h[2]));
                    conv.set(0, i, j, ux * ux * h[0] + 2.0 * ux * uy * h[1] + uy * uy * h[2]);
                    if i == g.nr {
                        let (s, c) = g.theta(j).sin_cos();
                        dn[j] = p.at(0, i, j) * (c * d[0] + s * d[1]);
                    }
                }
            }
            let r = -disk_integral(&lap, 0) + circle_integral(&dn) - disk_integral(&conv, 0);
            r.abs() / c2_norm(g, f).max(1.0)
        })
        .collect()
}

pub fn weak_form_residual(u: &DiskVelocity, p: &PolarField, battery: &[TestFunction]) -> f64 {
    weak_form_residuals(u, p, battery).into_iter().fold(0.0, f64::max)
}

/// Zero-mean `ψ` with `Δψ = A`, `∂_n ψ = u⊗u : ∇n`.
pub fn boundary_lift(np: &NeumannProblem) -> Result<PolarField> {
    Ok(solve(&np.lift_problem())?.p)
}

/// Second-order one-sided `∂_ρ f` on the boundary ring.
pub fn boundary_normal_derivative(f: &PolarField) -> Vec<f64> {
    let g = f.grid;
    let n = g.nr;
    (0..g.ntheta)
        .map(|j| (3.0 * f.at(0, n, j) - 4.0 * f.at(0, n - 1, j) + f.at(0, n - 2, j)) / (2.0 * g.h()))
        .collect()
}

/// Supremum of radial second differences per dyadic step.
#[derive(Clone, Debug, Serialize)]
pub struct ZygmundProfile {
    /// `(h, sup |δ²_h p|, sup |δ²_h p| / h)`.
    pub rows: Vec<(f64, f64, f64)>,
    /// Fit of `log2 sup |δ²_h p|` against `log2 h`.
    pub fit: ExponentFit,
}

impl ZygmundProfile {
    pub fn quotient_exponent(&self) -> f64 {
        self.fit.slope - 1.0
    }

    pub fn max_quotient(&self) -> f64 {
        self.rows.iter().map(|r| r.2).fold(0.0, f64::max)
    }

    /// Rows `h,sup_second_difference,sup_quotient`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,sup_second_difference,sup_quotient\n");
        for (h, d, q) in &self.rows {
            s.push_str(&format!("{h:.17e},{d:.17e},{q:.17e}\n"));
        }
        s
    }
}

/// Radial triples `(ρ - h, ρ, ρ + h)` inside the collar `1 - r0 <= ρ` and
/// away from the outermost two cells, for `h = 4 h_grid, 8 h_grid, ... <= r0/4`.
pub fn local_zygmund_profile(p: &PolarField, r0: f64) -> Result<ZygmundProfile> {
    let g = p.grid;
    if !(r0 > 0.0 && r0 <= 1.0) {
        return Err(Error::Config(format!("collar width {r0} outside (0, 1]")));
    }
    let lo = ((1.0 - r0) * g.nr as f64).ceil() as usize;
    let hi = g.nr - 2;
    let mut rows = Vec::new();
    let mut k = 4usize;
    while k as f64 * g.h() <= r0 / 4.0 + 1e-12 {
        let mut sup = 0.0f64;
        for i in lo + k..=hi.saturating_sub(k) {
            for j in 0..g.ntheta {
                let d = p.at(0, i + k, j) + p.at(0, i - k, j) - 2.0 * p.at(0, i, j);
                sup = sup.max(d.abs());
            }
        }
        let h = k as f64 * g.h();
        rows.push((h, sup, sup / h));
        k *= 2;
    }
    if rows.len() < 2 || rows.iter().any(|r| r.1 <= 0.0) {
        return Err(Error::DegenerateFit(format!(
            "{} usable steps in the collar; refine the grid or widen it",
            rows.len()
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.log2()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    let fit = ExponentFit {
        slope,
        intercept,
        r_squared,
        level_range: (4, k / 2),
    };
    Ok(ZygmundProfile { rows, fit })
}

/// Solution, its weak residual against the default battery and the lift.
#[derive(Clone, Debug)]
pub struct DiskSolve {
    pub problem: NeumannProblem,
    pub solution: PressureSolution,
    pub weak_residual: f64,
}

pub fn solve_disk(u: &DiskVelocity) -> Result<DiskSolve> {
    let problem = assemble(u)?;
    let solution = solve(&problem)?;
    let weak_residual = weak_form_residual(u, &solution.p, &default_test_battery());
    Ok(DiskSolve { problem, solution, weak_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{synth_disk_tangent, PolarModeStream, RadialFactor};

    #[test]
    fn simpson_area() {
        let g = PolarGrid::new(16, 32).unwrap();
        let one = PolarField::from_fn(g, 1, |_, _, _| 1.0);
        assert!((disk_integral(&one, 0) - std::f64::consts::PI).abs() < 1e-13);
        let r2 = PolarField::from_fn(g, 1, |r, _, _| r * r);
        assert!((disk_mean(&r2) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn rigid_rotation_is_exact() {
        let g = PolarGrid::new(16, 32).unwrap();
        let s = PolarModeStream { factor: RadialFactor(vec![1.0, -1.0]), power: 0, m: 0 };
        let u = synth_disk_tangent(&s, g);
        let np = assemble(&u).unwrap();
        assert!(np.neumann_data.iter().all(|v| (v - 4.0).abs() < 1e-12));
        let sol = solve(&np).unwrap();
        let exact = PolarField::from_fn(g, 1, |r, _, _| 2.0 * r * r - 1.0);
        assert!(sol.p.sub(&exact).sup_norm() < 1e-10, "{}", sol.p.sub(&exact).sup_norm());
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = PolarGrid::new(8, 16).unwrap();
        let sol = solve(&NeumannProblem::new(g, PolarField::zeros(g, 1), vec![0.0; 16]).unwrap()).unwrap();
        assert_eq!(sol.p.sup_norm(), 0.0);
        assert_eq!(sol.iterations, 0);
    }
}

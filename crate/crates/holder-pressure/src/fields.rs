//! Divergence-free velocity fields of prescribed Hölder regularity on the torus
//! and on the unit disk.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{PolarField, PolarGrid};
use crate::spectral_core::{dft_forward, fft, index_of, GridField};

/// Wavevectors drawn per dyadic shell.
pub const MODES_PER_SHELL: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LacunarySpec {
    pub gamma: f64,
    #[serde(rename = "J")]
    pub j: u32,
    pub seed: u64,
    pub amplitude: f64,
}

/// One term `a cos(k . x + phase)` with `a` orthogonal to `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: [i64; 2],
    pub a: [f64; 2],
    pub phase: f64,
}

/// `sum_{j=2..J} sum_m a_{j,m} cos(k_{j,m} . x + phase_{j,m})`.
///
/// Shell `j` is the base shell `j = 2` dilated by `2^{j-2}`, and every mode
/// peaks at one random centre, so the field is self-similar about that point.
#[derive(Clone, Debug)]
pub struct LacunaryField {
    pub spec: LacunarySpec,
    pub modes: Vec<Mode>,
}

/// Eight distinct wavevectors with `2^j <= |k| < 1.25 * 2^j`, one per angular
/// sector of the upper half plane, no two equal up to sign.
fn shell_wavevectors(rng: &mut ChaCha8Rng, j: u32) -> Vec<[i64; 2]> {
    let lo = (1i64 << j) as f64;
    let hi = 1.25 * lo;
    let mut out: Vec<[i64; 2]> = Vec::with_capacity(MODES_PER_SHELL);
    for sector in 0..MODES_PER_SHELL {
        loop {
            let t: f64 = rng.gen_range(0.0..1.0);
            let angle = (sector as f64 + t) * std::f64::consts::PI / MODES_PER_SHELL as f64;
            let radius: f64 = rng.gen_range(lo..hi);
            let k = [
                (radius * angle.cos()).round() as i64,
                (radius * angle.sin()).round() as i64,
            ];
            let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            if r < lo || r >= hi {
                continue;
            }
            if out.iter().any(|q| *q == k || (q[0] == -k[0] && q[1] == -k[1])) {
                continue;
            }
            out.push(k);
            break;
        }
    }
    out
}

/// Independent stream per shell so the field does not depend on scheduling.
fn shell_rng(seed: u64, j: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    rng
}

impl LacunaryField {
    pub fn generate(spec: &LacunarySpec) -> Result<Self> {
        if !(spec.gamma > 0.0 && spec.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1]", spec.gamma)));
        }
        if spec.j < 2 {
            return Err(Error::Config(format!("J = {} below 2", spec.j)));
        }
        if !(spec.amplitude > 0.0) {
            return Err(Error::Config("amplitude must be positive".into()));
        }
        let tau = 2.0 * std::f64::consts::PI;
        // every mode peaks at `centre`, aligned with one direction
        let mut rng = shell_rng(spec.seed, 0);
        let centre = [rng.gen_range(0.0..tau), rng.gen_range(0.0..tau)];
        let (ds, dc) = rng.gen_range(0.0..tau).sin_cos();
        let base = shell_wavevectors(&mut shell_rng(spec.seed, 2), 2);
        let shells: Vec<Vec<Mode>> = (2..=spec.j)
            .into_par_iter()
            .map(|j| {
                let ks: Vec<[i64; 2]> = base.iter().map(|k| [k[0] << (j - 2), k[1] << (j - 2)]).collect();
                let weight = spec.amplitude * 2f64.powf(-spec.gamma * j as f64) / 5.0;
                ks.into_iter()
                    .map(|k| {
                        let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                        let perp = [-k[1] as f64 / r, k[0] as f64 / r];
                        let sign = (perp[0] * dc + perp[1] * ds).signum();
                        let phase = (-(k[0] as f64 * centre[0] + k[1] as f64 * centre[1]))
                            .rem_euclid(tau);
                        Mode {
                            k,
                            a: [sign * weight * perp[0], sign * weight * perp[1]],
                            phase,
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(LacunaryField {
            spec: spec.clone(),
            modes: shells.into_iter().flatten().collect(),
        })
    }

    /// Samples on the periodic `n x n` grid; needs `2^J <= n/4`.
    pub fn sample(&self, n: usize) -> Result<GridField> {
        if (1usize << self.spec.j) * 4 > n {
            return Err(Error::Range(format!(
                "J = {} needs a grid of at least {} points per axis",
                self.spec.j,
                4usize << self.spec.j
            )));
        }
        let mut out = GridField::zeros(2, n, 2)?;
        let m = n * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * m];
        for mode in &self.modes {
            let e = Complex64::from_polar(0.5, mode.phase);
            let ip = index_of(mode.k[1], n) * n + index_of(mode.k[0], n);
            let im = index_of(-mode.k[1], n) * n + index_of(-mode.k[0], n);
            for c in 0..2 {
                buf[c * m + ip] += e * mode.a[c];
                buf[c * m + im] += e.conj() * mode.a[c];
            }
        }
        for (c, chunk) in buf.chunks_mut(m).enumerate() {
            fft::fft2(chunk, n, FftDirection::Inverse);
            for (o, z) in out.comp_mut(c).iter_mut().zip(chunk.iter()) {
                *o = z.re;
            }
        }
        Ok(out)
    }
}

pub fn synth_lacunary_divfree(spec: &LacunarySpec, n: usize) -> Result<GridField> {
    LacunaryField::generate(spec)?.sample(n)
}

/// Max of the spectral divergence of a periodic 2-component field.
pub fn divergence_residual(u: &GridField) -> Result<f64> {
    if u.components != u.dim {
        return Err(Error::Config(format!(
            "divergence needs {} components, got {}",
            u.dim, u.components
        )));
    }
    let s = dft_forward(u)?;
    let scale = s.wave_scale();
    let m = s.points();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for c in 0..u.components {
        for (idx, (b, z)) in buf.iter_mut().zip(s.comp(c)).enumerate() {
            if s.is_nyquist(idx) {
                continue;
            }
            let k = s.wavevector(idx)[c] as f64 * scale;
            *b += Complex64::new(0.0, k) * z;
        }
    }
    fft::fft_nd(&mut buf, s.dim, s.n, FftDirection::Inverse);
    Ok(buf.iter().fold(0.0, |a, z| a.max(z.re.abs())))
}

/// Stream function value with its Cartesian gradient and Hessian.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StreamDerivs {
    pub psi: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

pub trait Stream: Sync {
    fn eval(&self, x: f64, y: f64) -> StreamDerivs;
}

/// Polynomial in `s = rho^2`, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialFactor(pub Vec<f64>);

impl Default for RadialFactor {
    fn default() -> Self {
        RadialFactor(vec![1.0, -1.0])
    }
}

impl RadialFactor {
    /// `(B, B', B'')` as functions of `s`.
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let mut b = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &c in self.0.iter().rev() {
            d2 = d2 * s + 2.0 * d1;
            d1 = d1 * s + b;
            b = b * s + c;
        }
        (b, d1, d2)
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        self.0.iter().sum::<f64>().abs() < 1e-14
    }

    /// Multiply `inner` (given with its derivatives) by `B(x^2 + y^2)`.
    fn times(&self, x: f64, y: f64, g: StreamDerivs) -> StreamDerivs {
        let (b, b1, b2) = self.eval(x * x + y * y);
        let bx = 2.0 * x * b1;
        let by = 2.0 * y * b1;
        let bxx = 4.0 * x * x * b2 + 2.0 * b1;
        let byy = 4.0 * y * y * b2 + 2.0 * b1;
        let bxy = 4.0 * x * y * b2;
        StreamDerivs {
            psi: b * g.psi,
            dx: bx * g.psi + b * g.dx,
            dy: by * g.psi + b * g.dy,
            dxx: bxx * g.psi + 2.0 * bx * g.dx + b * g.dxx,
            dxy: bxy * g.psi + bx * g.dy + by * g.dx + b * g.dxy,
            dyy: byy * g.psi + 2.0 * by * g.dy + b * g.dyy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub gamma: f64,
    #[serde(rename = "J")]
    pub j: u32,
    pub seed: u64,
    #[serde(default)]
    pub boundary_factor: RadialFactor,
}

/// `psi = B(rho^2) sum_j 2^(-(1+gamma) j) sum_m c_m cos(k_m . x + phase_m)`.
#[derive(Clone, Debug)]
pub struct LacunaryStream {
    pub spec: StreamSpec,
    pub terms: Vec<([f64; 2], f64, f64)>,
}

impl LacunaryStream {
    pub fn generate(spec: &StreamSpec) -> Result<Self> {
        if !(spec.gamma > 0.0 && spec.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1]", spec.gamma)));
        }
        if !spec.boundary_factor.vanishes_on_boundary() {
            return Err(Error::Config("boundary factor must vanish at rho = 1".into()));
        }
        let mut terms = Vec::new();
        for j in 2..=spec.j.max(2) {
            let mut rng = shell_rng(spec.seed, j);
            let w = 2f64.powf(-(1.0 + spec.gamma) * j as f64);
            for k in shell_wavevectors(&mut rng, j) {
                let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let c = w * rng.gen_range(0.5..1.0);
                terms.push(([k[0] as f64, k[1] as f64], c, phase));
            }
        }
        Ok(LacunaryStream {
            spec: spec.clone(),
            terms,
        })
    }
}

impl Stream for LacunaryStream {
    fn eval(&self, x: f64, y: f64) -> StreamDerivs {
        let mut s = StreamDerivs::default();
        for &(k, c, ph) in &self.terms {
            let (sn, cs) = (k[0] * x + k[1] * y + ph).sin_cos();
            s.psi += c * cs;
            s.dx -= c * k[0] * sn;
            s.dy -= c * k[1] * sn;
            s.dxx -= c * k[0] * k[0] * cs;
            s.dxy -= c * k[0] * k[1] * cs;
            s.dyy -= c * k[1] * k[1] * cs;
        }
        self.spec.boundary_factor.times(x, y, s)
    }
}

/// `psi = B(rho^2) rho^p cos(m theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarModeStream {
    pub factor: RadialFactor,
    pub power: i32,
    pub m: i32,
}

impl Stream for PolarModeStream {
    fn eval(&self, x: f64, y: f64) -> StreamDerivs {
        let r = (x * x + y * y).sqrt();
        if r == 0.0 {
            let inner = if self.power == 0 && self.m == 0 {
                StreamDerivs { psi: 1.0, ..Default::default() }
            } else {
                StreamDerivs::default()
            };
            return self.factor.times(x, y, inner);
        }
        let t = y.atan2(x);
        let (p, m) = (self.power as f64, self.m as f64);
        let (sm, cm) = (m * t).sin_cos();
        let rp = r.powf(p);
        let f = rp * cm;
        let fr = p * rp / r * cm;
        let frr = p * (p - 1.0) * rp / (r * r) * cm;
        let ft = -m * rp * sm;
        let ftt = -m * m * f;
        let frt = -m * p * rp / r * sm;
        let (s, c) = t.sin_cos();
        let g = StreamDerivs {
            psi: f,
            dx: c * fr - s * ft / r,
            dy: s * fr + c * ft / r,
            dxx: c * c * frr + s * s * (fr / r + ftt / (r * r))
                - 2.0 * s * c * (frt / r - ft / (r * r)),
            dyy: s * s * frr + c * c * (fr / r + ftt / (r * r))
                + 2.0 * s * c * (frt / r - ft / (r * r)),
            dxy: s * c * (frr - fr / r - ftt / (r * r)) + (c * c - s * s) * (frt / r - ft / (r * r)),
        };
        self.factor.times(x, y, g)
    }
}

/// Velocity `u = (-psi_y, psi_x)` on a polar grid with its exact gradient.
#[derive(Clone, Debug)]
pub struct DiskVelocity {
    pub grid: PolarGrid,
    /// Cartesian components `(u_x, u_y)`.
    pub u: PolarField,
    /// `(d_x u_x, d_y u_x, d_x u_y, d_y u_y)`.
    pub grad: PolarField,
}

pub fn synth_disk_tangent(stream: &dyn Stream, grid: PolarGrid) -> DiskVelocity {
    let mut u = PolarField::zeros(grid, 2);
    let mut grad = PolarField::zeros(grid, 4);
    for i in 0..grid.rows() {
        for j in 0..grid.ntheta {
            let (x, y) = grid.xy(i, j);
            let d = stream.eval(x, y);
            u.set(0, i, j, -d.dy);
            u.set(1, i, j, d.dx);
            grad.set(0, i, j, -d.dxy);
            grad.set(1, i, j, -d.dyy);
            grad.set(2, i, j, d.dxx);
            grad.set(3, i, j, d.dxy);
        }
    }
    DiskVelocity { grid, u, grad }
}

impl DiskVelocity {
    pub fn zero(grid: PolarGrid) -> Self {
        DiskVelocity {
            grid,
            u: PolarField::zeros(grid, 2),
            grad: PolarField::zeros(grid, 4),
        }
    }

    /// `(u_rho, u_theta)` physical polar components.
    pub fn polar_components(&self) -> PolarField {
        let g = self.grid;
        let mut out = PolarField::zeros(g, 2);
        for i in 0..g.rows() {
            for j in 0..g.ntheta {
                let (s, c) = g.theta(j).sin_cos();
                let ux = self.u.at(0, i, j);
                let uy = self.u.at(1, i, j);
                out.set(0, i, j, c * ux + s * uy);
                out.set(1, i, j, -s * ux + c * uy);
            }
        }
        out
    }

    /// `max_theta |u . e_rho(1, theta)|`.
    pub fn tangency_defect(&self) -> f64 {
        let pc = self.polar_components();
        pc.ring(0, self.grid.nr).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max of the pointwise trace of the velocity gradient.
    pub fn divergence_residual(&self) -> f64 {
        let m = self.grid.points();
        (0..m).fold(0.0, |acc, p| {
            acc.max((self.grad.data[p] + self.grad.data[3 * m + p]).abs())
        })
    }

    pub fn scaled(&self, a: f64) -> DiskVelocity {
        DiskVelocity {
            grid: self.grid,
            u: self.u.scaled(a),
            grad: self.grad.scaled(a),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        let m = self.grid.points();
        (0..m).fold(0.0, |acc, p| acc.max(self.u.data[p].hypot(self.u.data[m + p])))
    }
}

/// Polar-metric divergence `(1/rho) d_rho(rho u_rho) + (1/rho) d_theta u_theta` of
/// physical components, centred in `rho` and spectral in `theta`, max over rings `1..nr`.
pub fn polar_divergence_residual(polar: &PolarField) -> f64 {
    let g = polar.grid;
    let h = g.h();
    let dt = polar.component(1).d_theta();
    let mut worst = 0.0f64;
    for i in 1..g.nr {
        let r = g.rho(i);
        for j in 0..g.ntheta {
            let flux_p = g.rho(i + 1) * polar.at(0, i + 1, j);
            let flux_m = g.rho(i - 1) * polar.at(0, i - 1, j);
            let div = (flux_p - flux_m) / (2.0 * h * r) + dt.at(0, i, j) / r;
            worst = worst.max(div.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shells_are_orthogonal_and_in_range() {
        let spec = LacunarySpec { gamma: 0.4, j: 6, seed: 3, amplitude: 1.0 };
        let f = LacunaryField::generate(&spec).unwrap();
        assert_eq!(f.modes.len(), 5 * MODES_PER_SHELL);
        for m in &f.modes {
            let dot = m.k[0] as f64 * m.a[0] + m.k[1] as f64 * m.a[1];
            assert!(dot.abs() < 1e-15);
        }
    }

    #[test]
    fn single_shell_divergence() {
        let spec = LacunarySpec { gamma: 0.5, j: 2, seed: 9, amplitude: 1.0 };
        let u = synth_lacunary_divfree(&spec, 32).unwrap();
        assert!(divergence_residual(&u).unwrap() <= 1e-13);
    }

    #[test]
    fn grid_too_small() {
        let spec = LacunarySpec { gamma: 0.5, j: 5, seed: 0, amplitude: 1.0 };
        assert!(matches!(synth_lacunary_divfree(&spec, 64), Err(Error::Range(_))));
    }

    #[test]
    fn radial_factor_derivatives() {
        let b = RadialFactor(vec![0.5, -2.0, 1.5]);
        let (v, d1, d2) = b.eval(0.3);
        assert!((v - (0.5 - 0.6 + 1.5 * 0.09)).abs() < 1e-15);
        assert!((d1 - (-2.0 + 3.0 * 0.3)).abs() < 1e-15);
        assert!((d2 - 3.0).abs() < 1e-15);
    }

    fn check_stream(s: &dyn Stream, x: f64, y: f64) {
        let e = 1e-5;
        let d = s.eval(x, y);
        let fx = (s.eval(x + e, y).psi - s.eval(x - e, y).psi) / (2.0 * e);
        let fy = (s.eval(x, y + e).psi - s.eval(x, y - e).psi) / (2.0 * e);
        let fxx = (s.eval(x + e, y).dx - s.eval(x - e, y).dx) / (2.0 * e);
        let fxy = (s.eval(x, y + e).dx - s.eval(x, y - e).dx) / (2.0 * e);
        let fyy = (s.eval(x, y + e).dy - s.eval(x, y - e).dy) / (2.0 * e);
        for (a, b) in [(d.dx, fx), (d.dy, fy), (d.dxx, fxx), (d.dxy, fxy), (d.dyy, fyy)] {
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn stream_derivatives_match_differences() {
        let pm = PolarModeStream { factor: RadialFactor::default(), power: 2, m: 4 };
        check_stream(&pm, 0.3, -0.45);
        let spec = StreamSpec { gamma: 0.3, j: 3, seed: 1, boundary_factor: RadialFactor::default() };
        let ls = LacunaryStream::generate(&spec).unwrap();
        check_stream(&ls, -0.2, 0.6);
    }
}

//! Uniform grids, discrete Fourier transforms and the smooth dyadic partition.
//!
//! Periodic grids have period `extent` (default 2 pi) and the Fourier
//! coefficients are indexed by integer wavevectors, so that dyadic levels land
//! on lattice points.

mod bump;
pub(crate) mod fft;

use num_complex::Complex64;
use rustfft::FftDirection;

pub use bump::Bump;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Sampled real field on a uniform grid, row-major with the last axis fastest.
///
/// Component `c` occupies `data[c * m .. (c + 1) * m]` with `m = n^dim`; in 2D the
/// sample at row `j`, column `i` sits at `(x, y) = (origin + i h, origin + j h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub dim: usize,
    pub n: usize,
    pub extent: f64,
    pub origin: f64,
    pub periodic: bool,
    pub components: usize,
    pub data: Vec<f64>,
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "grid size {n} must be a power of two and at least 4"
        )));
    }
    Ok(())
}

impl GridField {
    pub fn zeros(dim: usize, n: usize, components: usize) -> Result<Self> {
        check_n(n)?;
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("dimension {dim} not in {{1, 2}}")));
        }
        if components == 0 {
            return Err(Error::Config("a field needs at least one component".into()));
        }
        Ok(GridField {
            dim,
            n,
            extent: TWO_PI,
            origin: 0.0,
            periodic: true,
            components,
            data: vec![0.0; components * n.pow(dim as u32)],
        })
    }

    /// Periodic 2D field on [0, 2 pi)^2 with `f(x, y, component)`.
    pub fn periodic_2d(
        n: usize,
        components: usize,
        f: impl Fn(f64, f64, usize) -> f64,
    ) -> Result<Self> {
        let mut g = Self::zeros(2, n, components)?;
        let h = g.step();
        for c in 0..components {
            let out = g.comp_mut(c);
            for j in 0..n {
                let y = j as f64 * h;
                for i in 0..n {
                    out[j * n + i] = f(i as f64 * h, y, c);
                }
            }
        }
        Ok(g)
    }

    pub fn periodic_1d(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(1, n, 1)?;
        let h = g.step();
        for (i, v) in g.data.iter_mut().enumerate() {
            *v = f(i as f64 * h);
        }
        Ok(g)
    }

    /// Non-periodic 1D samples at `a + i (b - a) / n`, `i < n`.
    pub fn window_1d(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(1, n, 1)?;
        g.extent = b - a;
        g.origin = a;
        g.periodic = false;
        let h = g.step();
        for (i, v) in g.data.iter_mut().enumerate() {
            *v = f(a + i as f64 * h);
        }
        Ok(g)
    }

    pub fn with_data(&self, components: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), components * self.points());
        GridField {
            components,
            data,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Self {
        GridField {
            dim: self.dim,
            n: self.n,
            extent: self.extent,
            origin: self.origin,
            periodic: self.periodic,
            components: self.components,
            data: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Config(format!("dimension {} not in {{1, 2}}", self.dim)));
        }
        if self.data.len() != self.components * self.points() {
            return Err(Error::Config(format!(
                "data length {} does not match {} components of {} points",
                self.data.len(),
                self.components,
                self.points()
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn step(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let m = self.points();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let m = self.points();
        &mut self.data[c * m..(c + 1) * m]
    }

    pub fn component(&self, c: usize) -> GridField {
        self.with_data(1, self.comp(c).to_vec())
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Vec<f64> {
        let m = self.points();
        let mut out = vec![0.0; m];
        for c in 0..self.components {
            for (o, v) in out.iter_mut().zip(self.comp(c)) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }

    /// Grid maximum of the pointwise magnitude.
    pub fn sup_norm(&self) -> f64 {
        if self.components == 1 {
            return self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> GridField {
        self.with_data(self.components, self.data.iter().map(|v| a * v).collect())
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        assert_eq!(self.data.len(), other.data.len());
        let d = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        self.with_data(self.components, d)
    }

    pub fn add(&self, other: &GridField) -> GridField {
        assert_eq!(self.data.len(), other.data.len());
        let d = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        self.with_data(self.components, d)
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.comp(c).iter().sum::<f64>() / self.points() as f64
    }
}

/// Fourier coefficients `f(x) = sum_xi c(xi) exp(i xi . x)` of a periodic field.
#[derive(Clone, Debug)]
pub struct SpectralField {
    pub dim: usize,
    pub n: usize,
    pub extent: f64,
    pub components: usize,
    pub coeffs: Vec<Complex64>,
}

/// Signed integer frequency of DFT index `i`; the Nyquist index maps to `-n/2`.
#[inline]
pub fn freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
pub(crate) fn index_of(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

impl SpectralField {
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let m = self.points();
        &self.coeffs[c * m..(c + 1) * m]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let m = self.points();
        &mut self.coeffs[c * m..(c + 1) * m]
    }

    /// Integer wavevector of flat index `idx` within one component.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        if self.dim == 1 {
            [freq(idx, self.n), 0]
        } else {
            [freq(idx % self.n, self.n), freq(idx / self.n, self.n)]
        }
    }

    pub fn coeff(&self, c: usize, k: [i64; 2]) -> Complex64 {
        let n = self.n;
        let idx = if self.dim == 1 {
            index_of(k[0], n)
        } else {
            index_of(k[1], n) * n + index_of(k[0], n)
        };
        self.comp(c)[idx]
    }

    /// True when the index is a Nyquist mode along some axis.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = self.n / 2;
        if self.dim == 1 {
            idx == h
        } else {
            idx % self.n == h || idx / self.n == h
        }
    }

    /// Multiply component `c` by `m(xi)` and return the real inverse transform.
    pub fn synthesize(&self, c: usize, m: impl Fn([i64; 2]) -> Complex64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .comp(c)
            .iter()
            .enumerate()
            .map(|(idx, v)| v * m(self.wavevector(idx)))
            .collect();
        fft::fft_nd(&mut buf, self.dim, self.n, FftDirection::Inverse);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Same as [`synthesize`](Self::synthesize) with a real radial multiplier of `|xi|`.
    pub fn synthesize_radial(&self, c: usize, m: impl Fn(f64) -> f64) -> Vec<f64> {
        self.synthesize(c, |k| {
            let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            Complex64::new(m(r), 0.0)
        })
    }

    pub fn grid_like(&self, components: usize, data: Vec<f64>) -> GridField {
        GridField {
            dim: self.dim,
            n: self.n,
            extent: self.extent,
            origin: 0.0,
            periodic: true,
            components,
            data,
        }
    }

    /// Scale factor turning integer wavevectors into physical ones.
    pub fn wave_scale(&self) -> f64 {
        TWO_PI / self.extent
    }
}

pub fn dft_forward(f: &GridField) -> Result<SpectralField> {
    f.validate()?;
    if !f.periodic {
        return Err(Error::Config("spectral transform needs a periodic field".into()));
    }
    let m = f.points();
    let norm = 1.0 / m as f64;
    let mut coeffs: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for chunk in coeffs.chunks_mut(m) {
        fft::fft_nd(chunk, f.dim, f.n, FftDirection::Forward);
        chunk.iter_mut().for_each(|z| *z *= norm);
    }
    Ok(SpectralField {
        dim: f.dim,
        n: f.n,
        extent: f.extent,
        components: f.components,
        coeffs,
    })
}

/// Real part of the inverse transform.
pub fn dft_inverse(s: &SpectralField) -> GridField {
    let m = s.points();
    let mut buf = s.coeffs.clone();
    for chunk in buf.chunks_mut(m) {
        fft::fft_nd(chunk, s.dim, s.n, FftDirection::Inverse);
    }
    s.grid_like(s.components, buf.into_iter().map(|z| z.re).collect())
}

/// The smooth dyadic partition `P_1 = phi`, `P_N = phi(./N) - phi(2./N)`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicPartition {
    pub j_max: u32,
    bump: &'static Bump,
}

impl DyadicPartition {
    pub fn bump(&self) -> &'static Bump {
        self.bump
    }

    /// Dyadic levels `1, 2, ..., 2^j_max`.
    pub fn levels(&self) -> Vec<usize> {
        (0..=self.j_max).map(|j| 1usize << j).collect()
    }

    /// `P_N(xi)` at `|xi| = t`, for any power of two `N`.
    #[inline]
    pub fn multiplier(&self, level: usize, t: f64) -> f64 {
        let nf = level as f64;
        if level == 1 {
            self.bump.phi(t)
        } else {
            self.bump.phi(t / nf) - self.bump.phi(2.0 * t / nf)
        }
    }

    /// `sum_{M <= N} P_M(xi) = phi(xi / N)`.
    #[inline]
    pub fn low_pass(&self, level: usize, t: f64) -> f64 {
        self.bump.phi(t / level as f64)
    }

    /// Largest level `N` with `2N <= n/2`, capped at `2^j_max`.
    pub fn top_resolvable(&self, n: usize) -> usize {
        (n / 4).min(1 << self.j_max).max(1)
    }

    pub fn resolvable_levels(&self, n: usize) -> Vec<usize> {
        let top = self.top_resolvable(n);
        self.levels().into_iter().filter(|&l| l <= top).collect()
    }

    pub(crate) fn check_level(&self, level: usize, n: usize) -> Result<()> {
        if !level.is_power_of_two() {
            return Err(Error::Range(format!("block level {level} is not dyadic")));
        }
        if level > 1 << self.j_max {
            return Err(Error::Range(format!(
                "block level {level} exceeds 2^{}",
                self.j_max
            )));
        }
        if 2 * level > n / 2 {
            return Err(Error::Range(format!(
                "block level {level} not resolvable on a grid of {n} (needs 2N <= n/2)"
            )));
        }
        Ok(())
    }
}

pub fn make_partition(j_max: u32) -> DyadicPartition {
    DyadicPartition {
        j_max: j_max.max(2),
        bump: Bump::shared(),
    }
}

/// `u_N` from precomputed coefficients without resolvability checks.
pub(crate) fn block_of(s: &SpectralField, level: usize, part: &DyadicPartition) -> GridField {
    let data = (0..s.components)
        .flat_map(|c| s.synthesize_radial(c, |t| part.multiplier(level, t)))
        .collect();
    s.grid_like(s.components, data)
}

pub fn project_block(f: &GridField, level: usize, part: &DyadicPartition) -> Result<GridField> {
    part.check_level(level, f.n)?;
    let s = dft_forward(f)?;
    Ok(block_of(&s, level, part))
}

/// `|| |D|^s u_N ||_inf / (N^s || u_N ||_inf)` with `p = infinity`.
pub fn bernstein_ratio(f: &GridField, level: usize, s: f64, part: &DyadicPartition) -> Result<f64> {
    part.check_level(level, f.n)?;
    let spec = dft_forward(f)?;
    let block = block_of(&spec, level, part);
    let denom = block.sup_norm();
    if denom <= 1e-13 * f.sup_norm() {
        return Err(Error::EmptyBlock(level));
    }
    let data = (0..spec.components)
        .flat_map(|c| {
            spec.synthesize_radial(c, |t| {
                let p = part.multiplier(level, t);
                if p == 0.0 {
                    0.0
                } else {
                    p * t.powf(s)
                }
            })
        })
        .collect();
    let num = spec.grid_like(spec.components, data).sup_norm();
    Ok(num / ((level as f64).powf(s) * denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(GridField::zeros(2, 12, 1), Err(Error::Config(_))));
        assert!(matches!(GridField::zeros(1, 2, 1), Err(Error::Config(_))));
        assert!(GridField::zeros(2, 16, 2).is_ok());
    }

    #[test]
    fn cosine_coefficients() {
        let f = GridField::periodic_1d(64, |x| (3.0 * x).cos()).unwrap();
        let s = dft_forward(&f).unwrap();
        for idx in 0..64 {
            let k = s.wavevector(idx)[0];
            let want = if k.abs() == 3 { 0.5 } else { 0.0 };
            assert!((s.coeffs[idx].re - want).abs() < 1e-14);
            assert!(s.coeffs[idx].im.abs() < 1e-14);
        }
    }

    #[test]
    fn constant_field_is_zero_mode() {
        let f = GridField::periodic_2d(16, 1, |_, _, _| 2.5).unwrap();
        let s = dft_forward(&f).unwrap();
        assert!((s.coeffs[0].re - 2.5).abs() < 1e-15);
        assert!(s.coeffs[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn transpose_roundtrip() {
        let n = 70;
        let mut v: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        fft::transpose_square(&mut v, n);
        assert_eq!(v[1].re, n as f64);
        fft::transpose_square(&mut v, n);
        assert!(v.iter().enumerate().all(|(i, z)| z.re == i as f64));
    }

    #[test]
    fn two_dimensional_mode_lands_on_its_wavevector() {
        let f = GridField::periodic_2d(32, 1, |x, y, _| (2.0 * x - 5.0 * y).cos()).unwrap();
        let s = dft_forward(&f).unwrap();
        assert!((s.coeff(0, [2, -5]).re - 0.5).abs() < 1e-14);
        assert!((s.coeff(0, [-2, 5]).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn level_checks() {
        let p = make_partition(6);
        let f = GridField::zeros(2, 32, 1).unwrap();
        assert!(project_block(&f, 8, &p).is_ok());
        assert!(matches!(project_block(&f, 16, &p), Err(Error::Range(_))));
        assert!(matches!(project_block(&f, 3, &p), Err(Error::Range(_))));
    }

    #[test]
    fn empty_block_signal() {
        let p = make_partition(5);
        let f = GridField::periodic_1d(64, |x| (2.0 * x).cos()).unwrap();
        assert!(matches!(bernstein_ratio(&f, 8, 1.0, &p), Err(Error::EmptyBlock(8))));
    }
}

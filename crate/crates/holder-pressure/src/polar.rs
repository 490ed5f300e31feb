//! Node-centred polar grids on the closed unit disk.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::spectral_core::{fft, freq};

/// Nodes `rho_i = i / nr` for `i = 0..=nr` and `theta_j = 2 pi j / ntheta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolarGrid {
    pub nr: usize,
    pub ntheta: usize,
}

impl PolarGrid {
    pub fn new(nr: usize, ntheta: usize) -> Result<Self> {
        if nr < 4 {
            return Err(Error::Config(format!("radial resolution {nr} below 4")));
        }
        if ntheta < 8 || !ntheta.is_power_of_two() {
            return Err(Error::Config(format!(
                "angular resolution {ntheta} must be a power of two and at least 8"
            )));
        }
        Ok(PolarGrid { nr, ntheta })
    }

    /// Grid with `n` angles and `n / 2` radial intervals.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n / 2, n)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.nr as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.ntheta as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        i as f64 / self.nr as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn rows(&self) -> usize {
        self.nr + 1
    }

    pub fn points(&self) -> usize {
        self.rows() * self.ntheta
    }

    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        let (s, c) = self.theta(j).sin_cos();
        let r = self.rho(i);
        (r * c, r * s)
    }
}

/// Samples on a [`PolarGrid`], component-major then ring-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarField {
    pub grid: PolarGrid,
    pub components: usize,
    pub data: Vec<f64>,
}

impl PolarField {
    pub fn zeros(grid: PolarGrid, components: usize) -> Self {
        PolarField {
            grid,
            components,
            data: vec![0.0; components * grid.points()],
        }
    }

    pub fn from_fn(grid: PolarGrid, components: usize, f: impl Fn(f64, f64, usize) -> f64) -> Self {
        let mut out = Self::zeros(grid, components);
        for c in 0..components {
            for i in 0..grid.rows() {
                for j in 0..grid.ntheta {
                    let v = f(grid.rho(i), grid.theta(j), c);
                    out.set(c, i, j, v);
                }
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.grid.rows() + i) * self.grid.ntheta + j]
    }

    #[inline]
    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f64) {
        let nt = self.grid.ntheta;
        let rows = self.grid.rows();
        self.data[(c * rows + i) * nt + j] = v;
    }

    pub fn ring(&self, c: usize, i: usize) -> &[f64] {
        let nt = self.grid.ntheta;
        let start = (c * self.grid.rows() + i) * nt;
        &self.data[start..start + nt]
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let m = self.grid.points();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn component(&self, c: usize) -> PolarField {
        PolarField {
            grid: self.grid,
            components: 1,
            data: self.comp(c).to_vec(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> PolarField {
        PolarField {
            data: self.data.iter().map(|v| a * v).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &PolarField) -> PolarField {
        PolarField {
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }

    /// Spectral `d/dtheta` of every ring (Nyquist mode dropped).
    pub fn d_theta(&self) -> PolarField {
        let mut out = self.clone();
        let nt = self.grid.ntheta;
        for ring in out.data.chunks_mut(nt) {
            let d = periodic_derivative(ring, 1);
            ring.copy_from_slice(&d);
        }
        out
    }

    pub fn d_theta2(&self) -> PolarField {
        let mut out = self.clone();
        let nt = self.grid.ntheta;
        for ring in out.data.chunks_mut(nt) {
            let d = periodic_derivative(ring, 2);
            ring.copy_from_slice(&d);
        }
        out
    }
}

/// Spectral derivative of order `order` of one period sampled uniformly on [0, 2 pi).
pub fn periodic_derivative(v: &[f64], order: u32) -> Vec<f64> {
    let n = v.len();
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::rows(&mut buf, n, FftDirection::Forward);
    for (i, z) in buf.iter_mut().enumerate() {
        let k = freq(i, n);
        if n % 2 == 0 && i == n / 2 && order % 2 == 1 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, k as f64).powu(order);
        *z *= ik / n as f64;
    }
    fft::rows(&mut buf, n, FftDirection::Inverse);
    buf.into_iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_theta_derivative() {
        let g = PolarGrid::new(8, 32).unwrap();
        let f = PolarField::from_fn(g, 1, |r, t, _| r * (3.0 * t).sin());
        let d = f.d_theta();
        let d2 = f.d_theta2();
        for i in 0..g.rows() {
            for j in 0..g.ntheta {
                let r = g.rho(i);
                let t = g.theta(j);
                assert!((d.at(0, i, j) - 3.0 * r * (3.0 * t).cos()).abs() < 1e-12);
                assert!((d2.at(0, i, j) + 9.0 * r * (3.0 * t).sin()).abs() < 1e-11);
            }
        }
    }
}

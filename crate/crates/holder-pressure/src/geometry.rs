//! Boundary-normal coordinates `(r, θ)` on a collar of the boundary, with `r`
//! the distance to the boundary. The metric is block diagonal,
//! `g = diag(1, g^{θθ})`, and `G = sqrt(det g)` is the area density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::periodic_derivative;

/// Nodes `r_i = r_start + i h` for `i < rows` and `θ_j = 2πj / ntheta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarGrid {
    pub r_start: f64,
    pub h: f64,
    pub rows: usize,
    pub ntheta: usize,
}

impl CollarGrid {
    /// `r in [0, r0]` with `nr` intervals.
    pub fn new(r0: f64, nr: usize, ntheta: usize) -> Result<Self> {
        Self::check(nr, ntheta)?;
        Ok(CollarGrid {
            r_start: 0.0,
            h: r0 / nr as f64,
            rows: nr + 1,
            ntheta,
        })
    }

    /// `r in [-r0, r0]` with `nr` intervals on each side; row `nr` is `r = 0`.
    pub fn symmetric(r0: f64, nr: usize, ntheta: usize) -> Result<Self> {
        Self::check(nr, ntheta)?;
        Ok(CollarGrid {
            r_start: -r0,
            h: r0 / nr as f64,
            rows: 2 * nr + 1,
            ntheta,
        })
    }

    fn check(nr: usize, ntheta: usize) -> Result<()> {
        if nr < 4 {
            return Err(Error::Config(format!("collar needs at least 4 radial intervals, got {nr}")));
        }
        if ntheta < 8 || !ntheta.is_power_of_two() {
            return Err(Error::Config(format!(
                "angular resolution {ntheta} must be a power of two and at least 8"
            )));
        }
        Ok(())
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_start + i as f64 * self.h
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * 2.0 * std::f64::consts::PI / self.ntheta as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.ntheta as f64
    }

    pub fn points(&self) -> usize {
        self.rows * self.ntheta
    }
}

/// Samples on a [`CollarGrid`], component-major then row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CollarField {
    pub grid: CollarGrid,
    pub components: usize,
    pub data: Vec<f64>,
}

impl CollarField {
    pub fn zeros(grid: CollarGrid, components: usize) -> Self {
        CollarField {
            grid,
            components,
            data: vec![0.0; components * grid.points()],
        }
    }

    pub fn from_fn(grid: CollarGrid, components: usize, f: impl Fn(f64, f64, usize) -> f64) -> Self {
        let mut out = Self::zeros(grid, components);
        for c in 0..components {
            for i in 0..grid.rows {
                for j in 0..grid.ntheta {
                    out.set(c, i, j, f(grid.r(i), grid.theta(j), c));
                }
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.grid.rows + i) * self.grid.ntheta + j]
    }

    #[inline]
    pub fn set(&mut self, c: usize, i: usize, j: usize, v: f64) {
        let k = (c * self.grid.rows + i) * self.grid.ntheta + j;
        self.data[k] = v;
    }

    pub fn row(&self, c: usize, i: usize) -> &[f64] {
        let nt = self.grid.ntheta;
        let s = (c * self.grid.rows + i) * nt;
        &self.data[s..s + nt]
    }

    pub fn component(&self, c: usize) -> CollarField {
        let m = self.grid.points();
        CollarField {
            grid: self.grid,
            components: 1,
            data: self.data[c * m..(c + 1) * m].to_vec(),
        }
    }

    pub fn stack(parts: &[CollarField]) -> CollarField {
        let grid = parts[0].grid;
        let mut data = Vec::new();
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        CollarField {
            grid,
            components: data.len() / grid.points(),
            data,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, o: &CollarField) -> CollarField {
        self.zip(o, |a, b| a - b)
    }

    pub fn add(&self, o: &CollarField) -> CollarField {
        self.zip(o, |a, b| a + b)
    }

    pub fn mul(&self, o: &CollarField) -> CollarField {
        self.zip(o, |a, b| a * b)
    }

    pub fn scaled(&self, s: f64) -> CollarField {
        CollarField {
            data: self.data.iter().map(|v| s * v).collect(),
            ..self.clone()
        }
    }

    fn zip(&self, o: &CollarField, f: impl Fn(f64, f64) -> f64) -> CollarField {
        CollarField {
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(*a, *b)).collect(),
            ..self.clone()
        }
    }

    /// Sup norm over rows `lo..hi`.
    pub fn sup_rows(&self, lo: usize, hi: usize) -> f64 {
        let mut m: f64 = 0.0;
        for c in 0..self.components {
            for i in lo..hi {
                for v in self.row(c, i) {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }

    pub fn d_theta(&self) -> CollarField {
        self.map_rows(|r| periodic_derivative(r, 1))
    }

    pub fn d_theta2(&self) -> CollarField {
        self.map_rows(|r| periodic_derivative(r, 2))
    }

    fn map_rows(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> CollarField {
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(self.grid.ntheta) {
            let d = f(chunk);
            chunk.copy_from_slice(&d);
        }
        out
    }

    /// Centred `∂_r` in the interior, second-order one-sided at the end rows.
    pub fn d_r(&self) -> CollarField {
        let g = self.grid;
        let mut out = Self::zeros(g, self.components);
        let last = g.rows - 1;
        for c in 0..self.components {
            for j in 0..g.ntheta {
                let v = |i: usize| self.at(c, i, j);
                out.set(c, 0, j, (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * g.h));
                for i in 1..last {
                    out.set(c, i, j, (v(i + 1) - v(i - 1)) / (2.0 * g.h));
                }
                out.set(c, last, j, (3.0 * v(last) - 4.0 * v(last - 1) + v(last - 2)) / (2.0 * g.h));
            }
        }
        out
    }

    /// Fourth-order `∂_r`: five-point centred in the interior, biased near the ends.
    pub fn d_r4(&self) -> CollarField {
        let g = self.grid;
        assert!(g.rows >= 5, "fourth-order stencil needs five rows");
        let mut out = Self::zeros(g, self.components);
        let l = g.rows - 1;
        let s = 1.0 / (12.0 * g.h);
        for c in 0..self.components {
            for j in 0..g.ntheta {
                let v = |i: usize| self.at(c, i, j);
                out.set(c, 0, j, s * (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)));
                out.set(c, 1, j, s * (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4)));
                for i in 2..l - 1 {
                    out.set(c, i, j, s * (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)));
                }
                out.set(c, l - 1, j, s * (3.0 * v(l) + 10.0 * v(l - 1) - 18.0 * v(l - 2) + 6.0 * v(l - 3) - v(l - 4)));
                out.set(c, l, j, s * (25.0 * v(l) - 48.0 * v(l - 1) + 36.0 * v(l - 2) - 16.0 * v(l - 3) + 3.0 * v(l - 4)));
            }
        }
        out
    }

    /// Centred `∂_r^2` in the interior, second-order one-sided at the end rows.
    pub fn d_rr(&self) -> CollarField {
        let g = self.grid;
        let mut out = Self::zeros(g, self.components);
        let last = g.rows - 1;
        let h2 = g.h * g.h;
        for c in 0..self.components {
            for j in 0..g.ntheta {
                let v = |i: usize| self.at(c, i, j);
                out.set(c, 0, j, (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / h2);
                for i in 1..last {
                    out.set(c, i, j, (v(i + 1) - 2.0 * v(i) + v(i - 1)) / h2);
                }
                out.set(
                    c,
                    last,
                    j,
                    (2.0 * v(last) - 5.0 * v(last - 1) + 4.0 * v(last - 2) - v(last - 3)) / h2,
                );
            }
        }
        out
    }
}

/// Metric data on a collar: `g^{θθ}`, `G`, `a = 1/G` and the ellipticity constant.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricPatch {
    pub r0: f64,
    pub grid: CollarGrid,
    pub g_theta_theta: CollarField,
    pub big_g: CollarField,
    pub a: CollarField,
    pub c: f64,
}

impl MetricPatch {
    pub fn from_fn(
        r0: f64,
        grid: CollarGrid,
        g_tt: impl Fn(f64, f64) -> f64,
        big_g: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let gtt = CollarField::from_fn(grid, 1, |r, t, _| g_tt(r, t));
        let gg = CollarField::from_fn(grid, 1, |r, t, _| big_g(r, t));
        if gg.data.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("area density must be positive on the collar".into()));
        }
        if gtt.data.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("g^θθ must be positive on the collar".into()));
        }
        let a = CollarField {
            data: gg.data.iter().map(|v| 1.0 / v).collect(),
            ..gg.clone()
        };
        let mut m = MetricPatch {
            r0,
            grid,
            g_theta_theta: gtt,
            big_g: gg,
            a,
            c: 0.0,
        };
        m.c = ellipticity_constant(&m);
        Ok(m)
    }

    /// Flat metric `g = I`, `G = 1`.
    pub fn identity(r0: f64, nr: usize, ntheta: usize) -> Result<Self> {
        Self::from_fn(r0, CollarGrid::new(r0, nr, ntheta)?, |_, _| 1.0, |_, _| 1.0)
    }

    /// `g^{rr}` is identically one and `g^{rθ}` identically zero.
    pub fn g_rr(&self, _i: usize, _j: usize) -> f64 {
        1.0
    }

    pub fn g_rtheta(&self, _i: usize, _j: usize) -> f64 {
        0.0
    }
}

/// Unit disk with `r = 1 - ρ`: `g^{θθ} = (1-r)^{-2}`, `G = 1 - r`.
pub fn disk_metric(r0: f64, nr: usize, ntheta: usize) -> Result<MetricPatch> {
    if r0 >= 1.0 {
        return Err(Error::Config(format!(
            "collar width {r0} reaches the centre of the disk; coordinates degenerate"
        )));
    }
    if !(r0 > 0.0 && r0 <= 0.5) {
        return Err(Error::Config(format!("collar width {r0} outside (0, 1/2]")));
    }
    let grid = CollarGrid::new(r0, nr, ntheta)?;
    MetricPatch::from_fn(r0, grid, |r, _| (1.0 - r).powi(-2), |r, _| 1.0 - r)
}

/// Collar of the outer circle `ρ = outer` of an annulus, `r = outer - ρ`.
pub fn annulus_outer_metric(outer: f64, r0: f64, nr: usize, ntheta: usize) -> Result<MetricPatch> {
    if !(r0 > 0.0 && r0 < outer) {
        return Err(Error::Config(format!("collar width {r0} outside (0, {outer})")));
    }
    let grid = CollarGrid::new(r0, nr, ntheta)?;
    MetricPatch::from_fn(r0, grid, move |r, _| (outer - r).powi(-2), move |r, _| outer - r)
}

/// `min` over the grid of the smallest eigenvalue of `diag(1, g^{θθ})`.
pub fn ellipticity_constant(m: &MetricPatch) -> f64 {
    m.g_theta_theta.data.iter().fold(1.0f64, |acc, &v| acc.min(v))
}

fn check_same_grid(f: &CollarField, m: &MetricPatch) -> Result<()> {
    if f.grid != m.grid {
        return Err(Error::Config("field and metric live on different collar grids".into()));
    }
    Ok(())
}

/// `Δ_g p = G^{-1} ∂_i(G g^{ij} ∂_j p)`, flux form in `r` with `G` averaged to
/// half nodes, spectral in `θ`.
pub fn laplace_beltrami(p: &CollarField, m: &MetricPatch) -> Result<CollarField> {
    check_same_grid(p, m)?;
    let g = p.grid;
    let big_g = &m.big_g;
    let flux_t = m.big_g.mul(&m.g_theta_theta).mul(&p.d_theta()).d_theta();
    let pr = p.d_r();
    let prr = p.d_rr();
    let gr = big_g.d_r();
    let mut out = CollarField::zeros(g, 1);
    let last = g.rows - 1;
    let h2 = g.h * g.h;
    for j in 0..g.ntheta {
        for i in 0..g.rows {
            let gi = big_g.at(0, i, j);
            let radial = if i == 0 || i == last {
                prr.at(0, i, j) + gr.at(0, i, j) / gi * pr.at(0, i, j)
            } else {
                let gp = 0.5 * (gi + big_g.at(0, i + 1, j));
                let gm = 0.5 * (gi + big_g.at(0, i - 1, j));
                let v = |k: usize| p.at(0, k, j);
                (gp * (v(i + 1) - v(i)) - gm * (v(i) - v(i - 1))) / (h2 * gi)
            };
            out.set(0, i, j, radial + flux_t.at(0, i, j) / gi);
        }
    }
    Ok(out)
}

/// `G^{-1} ∂_i∂_j(G T^{ij})` for a symmetric tensor with components
/// `(T^{rr}, T^{rθ}, T^{θθ})`.
pub fn double_divergence(uu: &CollarField, m: &MetricPatch) -> Result<CollarField> {
    check_same_grid(uu, m)?;
    if uu.components != 3 {
        return Err(Error::Config(format!(
            "double divergence needs (rr, rθ, θθ) components, got {}",
            uu.components
        )));
    }
    let w = |c: usize| uu.component(c).mul(&m.big_g);
    let rr = w(0).d_rr();
    let rt = w(1).d_theta().d_r();
    let tt = w(2).d_theta2();
    let mut out = CollarField::zeros(uu.grid, 1);
    for (k, o) in out.data.iter_mut().enumerate() {
        *o = (rr.data[k] + 2.0 * rt.data[k] + tt.data[k]) * m.a.data[k];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_samples_are_exact() {
        let m = disk_metric(0.5, 16, 32).unwrap();
        for i in 0..m.grid.rows {
            let r = m.grid.r(i);
            assert_eq!(m.big_g.at(0, i, 3), 1.0 - r);
            assert_eq!(m.g_theta_theta.at(0, i, 5), (1.0 - r).powi(-2));
        }
        assert_eq!(m.c, 1.0);
    }

    #[test]
    fn fourth_order_derivative_is_exact_on_quartics() {
        let g = CollarGrid::new(0.5, 8, 8).unwrap();
        let f = CollarField::from_fn(g, 1, |r, _, _| r.powi(4) - 2.0 * r.powi(3) + r);
        let d = f.d_r4();
        for i in 0..g.rows {
            let r = g.r(i);
            assert!((d.at(0, i, 0) - (4.0 * r.powi(3) - 6.0 * r * r + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_collar() {
        assert!(disk_metric(1.0, 16, 32).is_err());
        assert!(disk_metric(0.75, 16, 32).is_err());
    }

    #[test]
    fn annulus_ellipticity() {
        let m = annulus_outer_metric(2.0, 1.0, 16, 32).unwrap();
        assert!((m.c - 0.25).abs() < 1e-15);
    }

    #[test]
    fn laplacian_of_constant_and_harmonic() {
        let m = disk_metric(0.5, 32, 32).unwrap();
        let one = CollarField::from_fn(m.grid, 1, |_, _, _| 1.0);
        assert!(laplace_beltrami(&one, &m).unwrap().sup_norm() < 1e-12);
        let x = CollarField::from_fn(m.grid, 1, |r, t, _| (1.0 - r) * t.cos());
        assert!(laplace_beltrami(&x, &m).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn affine_weighted_tensor_has_zero_double_divergence() {
        let m = disk_metric(0.5, 16, 16).unwrap();
        let uu = CollarField::from_fn(m.grid, 3, |r, _, c| (1.0 + 2.0 * r + c as f64) / (1.0 - r));
        let d = double_divergence(&uu, &m).unwrap();
        assert!(d.sup_rows(1, m.grid.rows - 1) < 1e-9);
    }
}

//! Pseudodifferential symbols on the `n x n` torus: quantization
//! `Op(a)u(x) = Σ_ξ e^{ix·ξ} a(x, ξ) û(ξ)`, the sharp/flat splitting of the
//! collar metric symbol, ellipticity of the sharp part and its parametrix.
//!
//! The reflected collar is placed in the box `[0, 2π)^2` with `r = x_1 - π`
//! and `θ = x_2`; away from the collar the metric is blended to the identity.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::norms::{linear_fit, ExponentFit};
use crate::spectral_core::{fft, freq, make_partition, Bump, DyadicPartition, GridField};

type PointFn = dyn Fn([f64; 2], [f64; 2]) -> Complex64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Generic(Arc<PointFn>),
    Sharp(Arc<SharpSymbol>),
    Parametrix(Arc<Parametrix>),
}

/// A symbol `a(x, ξ)` evaluated on demand, one frequency at a time, over the
/// grid points `x`. Nothing of size `n^4` is ever stored.
#[derive(Clone)]
pub struct SymbolGrid {
    pub n: usize,
    pub order: f64,
    pub delta: f64,
    kind: Kind,
}

impl std::fmt::Debug for SymbolGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Generic(_) => "generic",
            Kind::Sharp(_) => "sharp",
            Kind::Parametrix(_) => "parametrix",
        };
        f.debug_struct("SymbolGrid")
            .field("n", &self.n)
            .field("order", &self.order)
            .field("delta", &self.delta)
            .field("kind", &kind)
            .finish()
    }
}

fn x_of(n: usize, idx: usize) -> [f64; 2] {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    [(idx % n) as f64 * h, (idx / n) as f64 * h]
}

impl SymbolGrid {
    pub fn from_fn(
        n: usize,
        order: f64,
        delta: f64,
        f: impl Fn([f64; 2], [f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        SymbolGrid {
            n,
            order,
            delta,
            kind: Kind::Generic(Arc::new(f)),
        }
    }

    /// `x`-independent symbol.
    pub fn multiplier(n: usize, order: f64, f: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::from_fn(n, order, 0.0, move |_, xi| f(xi))
    }

    /// Values at the grid points `xs` (flat indices `j n + i`).
    pub fn eval_points(&self, xi: [i64; 2], xs: &[usize], out: &mut [Complex64]) {
        match &self.kind {
            Kind::Generic(f) => {
                let k = [xi[0] as f64, xi[1] as f64];
                for (o, &p) in out.iter_mut().zip(xs) {
                    *o = f(x_of(self.n, p), k);
                }
            }
            Kind::Sharp(s) => {
                for (o, &p) in out.iter_mut().zip(xs) {
                    *o = Complex64::new(s.value(p, xi), 0.0);
                }
            }
            Kind::Parametrix(b) => {
                for (o, &p) in out.iter_mut().zip(xs) {
                    *o = b.value(p, xi);
                }
            }
        }
    }

    pub fn at(&self, point: usize, xi: [i64; 2]) -> Complex64 {
        let mut v = [Complex64::new(0.0, 0.0)];
        self.eval_points(xi, &[point], &mut v);
        v[0]
    }

    /// Points outside which the symbol vanishes identically, if known.
    fn x_support(&self) -> Option<&[usize]> {
        match &self.kind {
            Kind::Parametrix(b) => Some(&b.support),
            _ => None,
        }
    }
}

/// `Op(a)` applied to a field given by its normalized Fourier coefficients;
/// returns complex grid values. Coefficients below `1e-15` of the largest are
/// skipped.
pub fn quantize_apply_coeffs(a: &SymbolGrid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = a.n;
    let big = coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let active: Vec<(usize, [i64; 2])> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-15 * big)
        .map(|(idx, _)| (idx, [freq(idx % n, n), freq(idx / n, n)]))
        .collect();
    let all: Vec<usize>;
    let xs: &[usize] = match a.x_support() {
        Some(s) => s,
        None => {
            all = (0..n * n).collect();
            &all
        }
    };
    let roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let chunk = 256;
    let partial: Vec<Vec<Complex64>> = xs
        .par_chunks(chunk)
        .map(|pts| {
            let mut acc = vec![Complex64::new(0.0, 0.0); pts.len()];
            let mut vals = vec![Complex64::new(0.0, 0.0); pts.len()];
            for &(idx, xi) in &active {
                a.eval_points(xi, pts, &mut vals);
                let c = coeffs[idx];
                for ((o, v), &p) in acc.iter_mut().zip(&vals).zip(pts) {
                    let (i1, i2) = ((p % n) as i64, (p / n) as i64);
                    let ph = (i1 * xi[0] + i2 * xi[1]).rem_euclid(n as i64) as usize;
                    *o += v * c * roots[ph];
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for (pts, vals) in xs.chunks(chunk).zip(partial) {
        for (&p, v) in pts.iter().zip(vals) {
            out[p] = v;
        }
    }
    out
}

fn forward_complex(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    fft::fft2(&mut buf, n, FftDirection::Forward);
    let s = 1.0 / (n * n) as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

fn check_box(u: &GridField, n: usize) -> Result<()> {
    let tau = 2.0 * std::f64::consts::PI;
    if u.dim != 2 || u.n != n || (u.extent - tau).abs() > 1e-12 || !u.periodic {
        return Err(Error::Config(format!(
            "symbols act on periodic {n} x {n} fields of period 2π"
        )));
    }
    Ok(())
}

/// Real part of `Op(a)u`, component by component.
pub fn quantize_apply(a: &SymbolGrid, u: &GridField) -> Result<GridField> {
    check_box(u, a.n)?;
    let n = a.n;
    let mut data = Vec::with_capacity(u.data.len());
    for c in 0..u.components {
        let vals: Vec<Complex64> = u.comp(c).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let coeffs = forward_complex(&vals, n);
        data.extend(quantize_apply_coeffs(a, &coeffs).into_iter().map(|z| z.re));
    }
    Ok(u.with_data(u.components, data))
}

/// Spatial cutoffs `ψ_x = φ(|r|/0.5)`, `χ_x = φ(|r|/0.25)` and the frequency
/// cutoff `ψ_ξ = 1 - φ(|ξ|/R)`.
#[derive(Clone, Debug)]
pub struct CutoffSet {
    pub psi_x: Vec<f64>,
    pub chi_x: Vec<f64>,
    pub big_r: f64,
}

pub const PSI_RADIUS: f64 = 0.5;
pub const CHI_RADIUS: f64 = 0.25;

impl CutoffSet {
    pub fn new(n: usize, big_r: f64) -> Self {
        Self::with_radii(n, PSI_RADIUS, CHI_RADIUS, big_r)
    }

    /// `ψ_x = φ(|r|/psi_radius)`, `χ_x = φ(|r|/chi_radius)`; needs `2 chi_radius <= psi_radius`.
    pub fn with_radii(n: usize, psi_radius: f64, chi_radius: f64, big_r: f64) -> Self {
        let b = Bump::shared();
        let r = |p: usize| x_of(n, p)[0] - std::f64::consts::PI;
        CutoffSet {
            psi_x: (0..n * n).map(|p| b.phi(r(p).abs() / psi_radius)).collect(),
            chi_x: (0..n * n).map(|p| b.phi(r(p).abs() / chi_radius)).collect(),
            big_r,
        }
    }

    pub fn psi_xi(&self, xi: [i64; 2]) -> f64 {
        let t = ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).sqrt();
        1.0 - Bump::shared().phi(t / self.big_r)
    }

    /// Points where `ψ_x = 1`.
    pub fn inner_region(&self) -> Vec<usize> {
        (0..self.psi_x.len()).filter(|&p| self.psi_x[p] == 1.0).collect()
    }

    pub fn with_radius(&self, big_r: f64) -> Self {
        CutoffSet { big_r, ..self.clone() }
    }
}

/// Block-diagonal metric `diag(g^{11}, g^{22})` sampled on the torus box.
#[derive(Clone, Debug)]
pub struct CollarBox {
    pub n: usize,
    pub g11: Vec<f64>,
    pub g22: Vec<f64>,
    /// Ellipticity constant of the uncut metric.
    pub c: f64,
    pub cut: CutoffSet,
}

/// Reflected disk collar metric `g^{θθ} = (1 - |r|)^{-2}`, blended to the
/// identity by `ψ_x` and multiplied by `scale`. `c` is that of the unscaled
/// metric.
pub fn disk_collar_box(n: usize, scale: f64) -> Result<CollarBox> {
    disk_collar_box_with(n, scale, CutoffSet::new(n, 0.0))
}

pub fn disk_collar_box_with(n: usize, scale: f64, cut: CutoffSet) -> Result<CollarBox> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::Config(format!("box resolution {n} must be a power of two >= 16")));
    }
    let g22 = (0..n * n)
        .map(|p| {
            let r = x_of(n, p)[0] - std::f64::consts::PI;
            let s = cut.psi_x[p];
            let gt = if s > 0.0 { (1.0 - r.abs()).powi(-2) } else { 1.0 };
            scale * (s * gt + (1.0 - s))
        })
        .collect();
    Ok(CollarBox {
        n,
        g11: vec![scale; n * n],
        g22,
        c: 1.0,
        cut,
    })
}

pub fn identity_box(n: usize) -> Result<CollarBox> {
    let mut b = disk_collar_box(n, 1.0)?;
    b.g22 = vec![1.0; n * n];
    Ok(b)
}

/// Largest dyadic `K <= M^δ`.
pub fn sharp_cap(m: usize, delta: f64) -> usize {
    let lim = (m as f64).powf(delta) * (1.0 + 1e-12);
    let mut k = 1;
    while 2.0 * k as f64 <= lim {
        k *= 2;
    }
    k
}

/// The `x`-frequency levels `K` entering the sharp symbol at `ξ`-level `M`.
pub fn sharp_levels(m: usize, delta: f64) -> Vec<usize> {
    let cap = sharp_cap(m, delta);
    std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k <= cap).collect()
}

fn low_pass(field: &[f64], n: usize, k: usize) -> (Vec<f64>, [Vec<f64>; 2]) {
    let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::fft2(&mut buf, n, FftDirection::Forward);
    let b = Bump::shared();
    let s = 1.0 / (n * n) as f64;
    for (idx, z) in buf.iter_mut().enumerate() {
        let e = [freq(idx % n, n), freq(idx / n, n)];
        let t = ((e[0] * e[0] + e[1] * e[1]) as f64).sqrt();
        *z *= b.phi(t / k as f64) * s;
    }
    let synth = |m: &dyn Fn([i64; 2]) -> Complex64| -> Vec<f64> {
        let mut v: Vec<Complex64> = buf
            .iter()
            .enumerate()
            .map(|(idx, z)| z * m([freq(idx % n, n), freq(idx / n, n)]))
            .collect();
        fft::fft2(&mut v, n, FftDirection::Inverse);
        v.into_iter().map(|z| z.re).collect()
    };
    let one = synth(&|_| Complex64::new(1.0, 0.0));
    let dx = synth(&|e| Complex64::new(0.0, e[0] as f64));
    let dy = synth(&|e| Complex64::new(0.0, e[1] as f64));
    (one, [dx, dy])
}

/// Smoothed metric entries `S_K g^{ii}` with their gradients.
#[derive(Debug)]
struct Smoothed {
    k: usize,
    g: [Vec<f64>; 2],
    grad: [[Vec<f64>; 2]; 2],
}

/// `e♯₂(x, ξ) = Σ_M P_M(ξ) ξ^T (S_{K(M)} g)(x) ξ`.
#[derive(Debug)]
pub struct SharpSymbol {
    delta: f64,
    part: DyadicPartition,
    levels: Vec<usize>,
    smoothed: Vec<Smoothed>,
}

impl SharpSymbol {
    fn new(b: &CollarBox, delta: f64) -> Self {
        let n = b.n;
        let part = make_partition(n.trailing_zeros());
        let levels = part.levels();
        let mut caps: Vec<usize> = levels.iter().map(|&m| sharp_cap(m, delta)).collect();
        caps.dedup();
        let smoothed = caps
            .into_iter()
            .map(|k| {
                let (g1, d1) = low_pass(&b.g11, n, k);
                let (g2, d2) = low_pass(&b.g22, n, k);
                Smoothed { k, g: [g1, g2], grad: [d1, d2] }
            })
            .collect();
        SharpSymbol { delta, part, levels, smoothed }
    }

    fn smoothed_for(&self, m: usize) -> &Smoothed {
        let k = sharp_cap(m, self.delta);
        self.smoothed.iter().find(|s| s.k == k).expect("cap precomputed")
    }

    /// `(P_M(ξ), S_{K(M)} g)` for the levels with `P_M(ξ) != 0`.
    fn weights(&self, xi: [i64; 2]) -> Vec<(f64, &Smoothed)> {
        let t = ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).sqrt();
        self.levels
            .iter()
            .filter_map(|&m| {
                let w = self.part.multiplier(m, t);
                (w != 0.0).then(|| (w, self.smoothed_for(m)))
            })
            .collect()
    }

    fn value(&self, p: usize, xi: [i64; 2]) -> f64 {
        let (a, b) = ((xi[0] * xi[0]) as f64, (xi[1] * xi[1]) as f64);
        self.weights(xi)
            .into_iter()
            .map(|(w, s)| w * (a * s.g[0][p] + b * s.g[1][p]))
            .sum()
    }

    fn grad_x(&self, p: usize, xi: [i64; 2]) -> [f64; 2] {
        let (a, b) = ((xi[0] * xi[0]) as f64, (xi[1] * xi[1]) as f64);
        let mut out = [0.0; 2];
        for (w, s) in self.weights(xi) {
            for (d, o) in out.iter_mut().enumerate() {
                *o += w * (a * s.grad[0][d][p] + b * s.grad[1][d][p]);
            }
        }
        out
    }

    /// `i`-th component of `Σ_M P_M(ξ) (S_{K(M)} g^{ij}) ξ_j`.
    fn first_order(&self, i: usize, p: usize, xi: [i64; 2]) -> f64 {
        self.weights(xi).into_iter().map(|(w, s)| w * s.g[i][p] * xi[i] as f64).sum()
    }
}

pub fn sharp_symbol(b: &CollarBox, delta: f64) -> Result<SymbolGrid> {
    check_delta(delta)?;
    Ok(SymbolGrid {
        n: b.n,
        order: 2.0,
        delta,
        kind: Kind::Sharp(Arc::new(SharpSymbol::new(b, delta))),
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Config(format!("δ = {delta} outside (0, 1/2)")));
    }
    Ok(())
}

/// `(e♯₁,i, e♭_i)` for `i = 1, 2`, with `e♯₁ + e♭ = g ξ`.
pub fn sharp_flat_split(b: &CollarBox, delta: f64) -> Result<(Vec<SymbolGrid>, Vec<SymbolGrid>)> {
    check_delta(delta)?;
    let sharp = Arc::new(SharpSymbol::new(b, delta));
    let g = Arc::new([b.g11.clone(), b.g22.clone()]);
    let n = b.n;
    let idx = move |x: [f64; 2]| -> usize {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        ((x[1] / h).round() as usize % n) * n + (x[0] / h).round() as usize % n
    };
    let mut sharp_parts = Vec::new();
    let mut flat_parts = Vec::new();
    for i in 0..2 {
        let s = sharp.clone();
        sharp_parts.push(SymbolGrid::from_fn(n, 1.0, delta, move |x, xi| {
            let k = [xi[0] as i64, xi[1] as i64];
            Complex64::new(s.first_order(i, idx(x), k), 0.0)
        }));
        let s = sharp.clone();
        let g = g.clone();
        flat_parts.push(SymbolGrid::from_fn(n, 1.0 - delta, delta, move |x, xi| {
            let p = idx(x);
            let k = [xi[0] as i64, xi[1] as i64];
            Complex64::new(g[i][p] * xi[i] - s.first_order(i, p, k), 0.0)
        }));
    }
    Ok((sharp_parts, flat_parts))
}

fn sharp_of(a: &SymbolGrid) -> Result<&Arc<SharpSymbol>> {
    match &a.kind {
        Kind::Sharp(s) => Ok(s),
        _ => Err(Error::Config("expected a sharp metric symbol".into())),
    }
}

fn lattice(n: usize) -> impl Iterator<Item = [i64; 2]> {
    (0..n * n).map(move |idx| [freq(idx % n, n), freq(idx / n, n)])
}

/// Smallest dyadic `M₀ >= 2` with `e♯₂(x, ξ) >= (c/2)|ξ|^2` for every lattice
/// `|ξ| >= M₀` and every `x` in `region`.
pub fn verify_sharp_ellipticity(e2: &SymbolGrid, c: f64, region: &[usize]) -> Result<usize> {
    let n = e2.n;
    let worst_fail = lattice(n)
        .collect::<Vec<_>>()
        .par_iter()
        .filter_map(|&xi| {
            let k2 = (xi[0] * xi[0] + xi[1] * xi[1]) as f64;
            if k2 == 0.0 {
                return None;
            }
            let mut vals = vec![Complex64::new(0.0, 0.0); region.len()];
            e2.eval_points(xi, region, &mut vals);
            vals.iter().any(|v| v.re < 0.5 * c * k2).then(|| k2.sqrt())
        })
        .reduce_with(f64::max);
    let max_xi = (n as f64 / 2.0) * std::f64::consts::SQRT_2;
    let mut m0 = 2usize;
    if let Some(w) = worst_fail {
        while m0 as f64 <= w {
            m0 *= 2;
        }
        if m0 as f64 > max_xi {
            return Err(Error::NonElliptic(format!(
                "the sharp symbol violates the ellipticity bound up to |ξ| = {w:.2}, the edge of the lattice"
            )));
        }
    }
    Ok(m0)
}

#[derive(Debug)]
pub struct Parametrix {
    sharp: Arc<SharpSymbol>,
    chi: Vec<f64>,
    cut: CutoffSet,
    order: u8,
    support: Vec<usize>,
}

impl Parametrix {
    fn first(&self, p: usize, xi: [i64; 2]) -> f64 {
        let psi = self.cut.psi_xi(xi);
        if psi == 0.0 {
            return 0.0;
        }
        self.chi[p] * psi / self.sharp.value(p, xi)
    }

    fn value(&self, p: usize, xi: [i64; 2]) -> Complex64 {
        if self.chi[p] == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let b1 = self.first(p, xi);
        if self.order == 1 {
            return Complex64::new(b1, 0.0);
        }
        // b₂ = (i/a) ∇_ξ b₁ · ∇_x a, ∇_ξ by centred lattice differences
        let db = [
            0.5 * (self.first(p, [xi[0] + 1, xi[1]]) - self.first(p, [xi[0] - 1, xi[1]])),
            0.5 * (self.first(p, [xi[0], xi[1] + 1]) - self.first(p, [xi[0], xi[1] - 1])),
        ];
        if db == [0.0, 0.0] {
            return Complex64::new(b1, 0.0);
        }
        let a = self.sharp.value(p, xi);
        let ga = self.sharp.grad_x(p, xi);
        Complex64::new(b1, (db[0] * ga[0] + db[1] * ga[1]) / a)
    }
}

/// `b = χ ψ_ξ / e♯₂`, plus the first correction when `order = 2`.
pub fn build_parametrix(e2: &SymbolGrid, cut: &CutoffSet, c: f64, order: u8) -> Result<SymbolGrid> {
    if !(order == 1 || order == 2) {
        return Err(Error::Config(format!("parametrix order {order} not in {{1, 2}}")));
    }
    let sharp = sharp_of(e2)?.clone();
    let n = e2.n;
    let support: Vec<usize> = (0..n * n).filter(|&p| cut.chi_x[p] != 0.0).collect();
    let bad = lattice(n)
        .collect::<Vec<_>>()
        .par_iter()
        .filter(|&&xi| cut.psi_xi(xi) > 0.0)
        .filter_map(|&xi| {
            let k2 = (xi[0] * xi[0] + xi[1] * xi[1]) as f64;
            let lo = support.iter().map(|&p| sharp.value(p, xi)).fold(f64::INFINITY, f64::min);
            (lo < 0.25 * c * k2).then_some(lo / k2)
        })
        .reduce_with(f64::min);
    if let Some(ratio) = bad {
        return Err(Error::Numerical {
            message: format!(
                "sharp symbol drops to {ratio:.3e} |ξ|^2 inside the frequency cutoff; raise R"
            ),
            history: vec![ratio],
        });
    }
    let delta = e2.delta;
    Ok(SymbolGrid {
        n,
        order: -2.0,
        delta,
        kind: Kind::Parametrix(Arc::new(Parametrix {
            sharp,
            chi: cut.chi_x.clone(),
            cut: cut.clone(),
            order,
            support,
        })),
    })
}

/// Errors `||Op(b) Op(e♯₂) e_N - χ e_N||_∞` over a list of modes.
#[derive(Clone, Debug)]
pub struct RemainderSweep {
    pub order: u8,
    pub errors: Vec<(usize, f64)>,
    /// `None` when every error is at roundoff level: the parametrix is an exact inverse.
    pub fit: Option<ExponentFit>,
}

impl RemainderSweep {
    pub fn exact_inverse(&self) -> bool {
        self.fit.is_none()
    }

    /// Rows `N,error,order`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,error,order\n");
        for (m, e) in &self.errors {
            s.push_str(&format!("{m},{e:.17e},{}\n", self.order));
        }
        s
    }
}

/// Wavevector of `e_N`: `(round(N/√2), round(N/√2))`.
pub fn diagonal_mode(m: usize) -> [i64; 2] {
    let k = (m as f64 / std::f64::consts::SQRT_2).round() as i64;
    [k, k]
}

pub fn parametrix_remainder_order(
    b: &SymbolGrid,
    e2: &SymbolGrid,
    cut: &CutoffSet,
    modes: &[usize],
) -> Result<RemainderSweep> {
    let order = match &b.kind {
        Kind::Parametrix(p) => p.order,
        _ => return Err(Error::Config("expected a parametrix symbol".into())),
    };
    let n = e2.n;
    let mut errors = Vec::with_capacity(modes.len());
    for &m in modes {
        let k = diagonal_mode(m);
        if k[0] >= (n / 2) as i64 {
            return Err(Error::Range(format!("mode N = {m} not resolvable on {n} points")));
        }
        let all: Vec<usize> = (0..n * n).collect();
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        e2.eval_points(k, &all, &mut a);
        let wave = |p: usize| {
            let x = x_of(n, p);
            Complex64::from_polar(1.0, k[0] as f64 * x[0] + k[1] as f64 * x[1])
        };
        let v: Vec<Complex64> = (0..n * n).map(|p| a[p] * wave(p)).collect();
        let w = quantize_apply_coeffs(b, &forward_complex(&v, n));
        let err = (0..n * n).fold(0.0f64, |acc, p| acc.max((w[p] - cut.chi_x[p] * wave(p)).norm()));
        errors.push((m, err));
    }
    let exact = errors.iter().all(|&(_, e)| e <= 1e-12);
    let fit = if exact {
        None
    } else {
        if errors.len() < 2 || errors.iter().any(|&(_, e)| e <= 0.0) {
            return Err(Error::DegenerateFit("remainder sweep needs two or more nonzero errors".into()));
        }
        let xs: Vec<f64> = errors.iter().map(|&(m, _)| (m as f64).log2()).collect();
        let ys: Vec<f64> = errors.iter().map(|&(_, e)| e.log2()).collect();
        let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
        Some(ExponentFit {
            slope,
            intercept,
            r_squared,
            level_range: (modes[0], modes[modes.len() - 1]),
        })
    };
    Ok(RemainderSweep { order, errors, fit })
}

/// Sharp symbol, verified `M₀`, cutoffs with `R = 2 M₀` and parametrix.
pub struct ParametrixSetup {
    pub e2: SymbolGrid,
    pub m0: usize,
    pub cut: CutoffSet,
    pub b: SymbolGrid,
}

pub fn parametrix_setup(bx: &CollarBox, delta: f64, order: u8) -> Result<ParametrixSetup> {
    let e2 = sharp_symbol(bx, delta)?;
    let m0 = verify_sharp_ellipticity(&e2, bx.c, &bx.cut.inner_region())?;
    let cut = bx.cut.with_radius(2.0 * m0 as f64);
    let b = build_parametrix(&e2, &cut, bx.c, order)?;
    Ok(ParametrixSetup { e2, m0, cut, b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_arithmetic() {
        assert_eq!(sharp_levels(256, 0.25), vec![1, 2, 4]);
        assert_eq!(sharp_cap(255, 0.25), 2);
        assert_eq!(sharp_cap(1, 0.25), 1);
    }

    #[test]
    fn identity_symbol_is_identity() {
        let u = GridField::periodic_2d(16, 1, |x, y, _| (2.0 * x).sin() + (x - 3.0 * y).cos()).unwrap();
        let a = SymbolGrid::multiplier(16, 0.0, |_| Complex64::new(1.0, 0.0));
        let v = quantize_apply(&a, &u).unwrap();
        assert!(v.sub(&u).sup_norm() < 1e-13);
    }

    #[test]
    fn identity_metric_is_elliptic_from_two() {
        let bx = identity_box(16).unwrap();
        let e2 = sharp_symbol(&bx, 0.25).unwrap();
        assert_eq!(verify_sharp_ellipticity(&e2, 1.0, &bx.cut.inner_region()).unwrap(), 2);
    }

    #[test]
    fn shrunken_metric_is_flagged() {
        let bx = disk_collar_box(16, 0.01).unwrap();
        let e2 = sharp_symbol(&bx, 0.25).unwrap();
        let r = verify_sharp_ellipticity(&e2, 1.0, &bx.cut.inner_region());
        assert!(matches!(r, Err(Error::NonElliptic(_))));
    }
}

//! Spectral solution of `-Δp = ∂_i∂_j(u^i u^j)` on the torus and the
//! paraproduct splitting `q_N = I_N + J_N`.
//!
//! Quadratic products are formed on a grid refined by two in each direction, so
//! that every retained mode of the product is exact.

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{divergence_residual, synth_lacunary_divfree, LacunaryField, LacunarySpec};
use crate::norms::{
    block_profile, block_profile_of, fit_decay_exponent, holder_norm, zygmund_norm, BlockProfile, ExponentFit,
};
use crate::spectral_core::{
    block_of, dft_forward, fft, freq, index_of, make_partition, DyadicPartition, GridField, SpectralField,
};

const DIV_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Values on the `2n x 2n` grid of a band-limited component given by its
/// normalized coefficients on the `n x n` lattice; Nyquist modes are dropped.
fn to_fine(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut buf = vec![zero(); m * m];
    for (idx, &z) in coeffs.iter().enumerate() {
        let (kx, ky) = (freq(idx % n, n), freq(idx / n, n));
        if kx == -(n as i64) / 2 || ky == -(n as i64) / 2 {
            continue;
        }
        buf[index_of(ky, m) * m + index_of(kx, m)] = z;
    }
    fft::fft2(&mut buf, m, FftDirection::Inverse);
    buf.into_iter().map(|z| z.re).collect()
}

/// Normalized coefficients of fine-grid values, restricted to `|xi_i| < n/2`.
fn from_fine(values: &[f64], n: usize) -> Vec<Complex64> {
    let m = 2 * n;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::fft2(&mut buf, m, FftDirection::Forward);
    let norm = 1.0 / (m * m) as f64;
    let mut out = vec![zero(); n * n];
    for (idx, o) in out.iter_mut().enumerate() {
        let (kx, ky) = (freq(idx % n, n), freq(idx / n, n));
        if kx == -(n as i64) / 2 || ky == -(n as i64) / 2 {
            continue;
        }
        *o = buf[index_of(ky, m) * m + index_of(kx, m)] * norm;
    }
    out
}

/// Spectrum of `-ξ_iξ_j T^{ij}` from `(T^11, T^22, T^12 + T^21)` spectra.
fn contract(s: &SpectralField, t11: &[Complex64], t22: &[Complex64], t12s: &[Complex64]) -> Vec<Complex64> {
    let sc = s.wave_scale();
    (0..s.points())
        .map(|idx| {
            let k = s.wavevector(idx);
            let (a, b) = (k[0] as f64 * sc, k[1] as f64 * sc);
            -(t11[idx] * (a * a) + t22[idx] * (b * b) + t12s[idx] * (a * b))
        })
        .collect()
}

/// `(-Δ)^{-1}` on non-zero modes; equals `(1 - φ(2ξ))/|ξ|^2` on the lattice.
fn inverse_laplacian(s: &SpectralField, v: &mut [Complex64]) {
    let sc = s.wave_scale();
    for (idx, z) in v.iter_mut().enumerate() {
        let k = s.wavevector(idx);
        let k2 = ((k[0] * k[0] + k[1] * k[1]) as f64) * sc * sc;
        *z = if k2 == 0.0 { zero() } else { *z / k2 };
    }
}

fn check_velocity(u: &GridField) -> Result<()> {
    if u.dim != 2 || u.components != 2 {
        return Err(Error::Config("pressure solve needs a 2D two-component field".into()));
    }
    let div = divergence_residual(u)?;
    let tol = DIV_TOL * u.sup_norm().max(1.0);
    if div > tol {
        return Err(Error::Precondition(format!(
            "velocity divergence {div:.3e} exceeds {tol:.1e}"
        )));
    }
    Ok(())
}

/// Pressure coefficients `p̂ = -ξ_iξ_j (u^i u^j)^ / |ξ|^2`, `p̂(0) = 0`.
fn pressure_spectrum(s: &SpectralField) -> Vec<Complex64> {
    let n = s.n;
    let u1 = to_fine(s.comp(0), n);
    let u2 = to_fine(s.comp(1), n);
    let p11: Vec<f64> = u1.iter().map(|a| a * a).collect();
    let p22: Vec<f64> = u2.iter().map(|a| a * a).collect();
    let p12: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| 2.0 * a * b).collect();
    drop((u1, u2));
    let t11 = from_fine(&p11, n);
    let t22 = from_fine(&p22, n);
    let t12 = from_fine(&p12, n);
    let mut q = contract(s, &t11, &t22, &t12);
    inverse_laplacian(s, &mut q);
    q
}

fn spectral_scalar(s: &SpectralField, coeffs: Vec<Complex64>) -> SpectralField {
    SpectralField {
        dim: s.dim,
        n: s.n,
        extent: s.extent,
        components: 1,
        coeffs,
    }
}

fn real_field(s: &SpectralField, mut coeffs: Vec<Complex64>) -> GridField {
    fft::fft2(&mut coeffs, s.n, FftDirection::Inverse);
    s.grid_like(1, coeffs.into_iter().map(|z| z.re).collect())
}

pub fn solve_pressure_torus(u: &GridField) -> Result<GridField> {
    check_velocity(u)?;
    let s = dft_forward(u)?;
    let q = pressure_spectrum(&s);
    Ok(real_field(&s, q))
}

/// Exact pressure of a finite mode sum, truncated to `|ξ_i| < n/2`.
pub fn pressure_from_modes(field: &LacunaryField, n: usize) -> Result<GridField> {
    let mut out = GridField::zeros(2, n, 1)?;
    let half = (n / 2) as i64;
    let mut buf = vec![zero(); n * n];
    let mut deposit = |xi: [i64; 2], c: f64, phase: f64| {
        if xi == [0, 0] || xi[0].abs() >= half || xi[1].abs() >= half {
            return;
        }
        let k2 = (xi[0] * xi[0] + xi[1] * xi[1]) as f64;
        let e = Complex64::from_polar(0.5 * c / k2, phase);
        buf[index_of(xi[1], n) * n + index_of(xi[0], n)] += e;
        buf[index_of(-xi[1], n) * n + index_of(-xi[0], n)] += e.conj();
    };
    let dot = |k: [i64; 2], a: [f64; 2]| k[0] as f64 * a[0] + k[1] as f64 * a[1];
    for m in &field.modes {
        for q in &field.modes {
            let w = 0.5 * dot(q.k, m.a) * dot(m.k, q.a);
            deposit([m.k[0] + q.k[0], m.k[1] + q.k[1]], -w, m.phase + q.phase);
            deposit([m.k[0] - q.k[0], m.k[1] - q.k[1]], w, m.phase - q.phase);
        }
    }
    fft::fft2(&mut buf, n, FftDirection::Inverse);
    for (o, z) in out.data.iter_mut().zip(buf) {
        *o = z.re;
    }
    Ok(out)
}

/// `||P_1 p||_inf`.
pub fn low_frequency_bound(u: &GridField, part: &DyadicPartition) -> Result<f64> {
    let p = solve_pressure_torus(u)?;
    let s = dft_forward(&p)?;
    Ok(block_of(&s, 1, part).sup_norm())
}

/// Spectra of `q`, of the comparable-frequency part `∂_ij Σ_{M∼K} u^i_M u^j_K`
/// and of the separated part `Σ_{M≪K} (∂_j u^i_K ∂_i u^j_M + ∂_j u^i_M ∂_i u^j_K)`,
/// each already multiplied by `(-Δ)^{-1}`.
pub struct SplitSpectra {
    pub base: SpectralField,
    pub q: Vec<Complex64>,
    pub i_part: Vec<Complex64>,
    pub j_part: Vec<Complex64>,
}

/// `M ≪ K` means `K >= 8M`; all other pairs count as comparable.
pub const SEPARATION: usize = 8;

pub fn split_spectra(u: &GridField, part: &DyadicPartition) -> Result<SplitSpectra> {
    check_velocity(u)?;
    let s = dft_forward(u)?;
    let n = s.n;
    let sc = s.wave_scale();
    let q = pressure_spectrum(&s);
    let fine = 4 * n * n;
    let mut l11 = vec![0.0; fine];
    let mut l22 = vec![0.0; fine];
    let mut l12 = vec![0.0; fine];
    let mut jacc = vec![0.0; fine];
    let top = n; // sum of blocks up to n covers the whole lattice
    let filtered = |c: usize, m: &dyn Fn(f64) -> f64, deriv: Option<usize>| -> Vec<Complex64> {
        s.comp(c)
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let k = s.wavevector(idx);
                let r = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                let mut v = z * m(r);
                if let Some(d) = deriv {
                    v *= Complex64::new(0.0, k[d] as f64 * sc);
                }
                v
            })
            .collect()
    };
    let mut level = SEPARATION;
    while level <= top {
        let low_level = level / SEPARATION;
        let band = |r: f64| part.multiplier(level, r);
        let low = |r: f64| part.low_pass(low_level, r);
        let active = (0..2).any(|c| filtered(c, &band, None).iter().any(|z| z.norm() > 0.0))
            && (0..2).any(|c| filtered(c, &low, None).iter().any(|z| z.norm() > 0.0));
        if active {
            let uk: Vec<Vec<f64>> = (0..2).map(|c| to_fine(&filtered(c, &band, None), n)).collect();
            let sl: Vec<Vec<f64>> = (0..2).map(|c| to_fine(&filtered(c, &low, None), n)).collect();
            for p in 0..fine {
                l11[p] += sl[0][p] * uk[0][p];
                l22[p] += sl[1][p] * uk[1][p];
                l12[p] += sl[0][p] * uk[1][p] + sl[1][p] * uk[0][p];
            }
            drop((uk, sl));
            // d[i][j] = ∂_j v^i on the fine grid
            let grad = |m: &dyn Fn(f64) -> f64| -> Vec<Vec<Vec<f64>>> {
                (0..2)
                    .map(|i| (0..2).map(|j| to_fine(&filtered(i, m, Some(j)), n)).collect())
                    .collect()
            };
            let dk = grad(&band);
            let ds = grad(&low);
            for p in 0..fine {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        acc += dk[i][j][p] * ds[j][i][p] + ds[i][j][p] * dk[j][i][p];
                    }
                }
                jacc[p] += acc;
            }
        }
        level *= 2;
    }
    let t11 = from_fine(&l11, n);
    let t22 = from_fine(&l22, n);
    let t12 = from_fine(&l12, n);
    drop((l11, l22, l12));
    let mut sep = contract(&s, &t11, &t22, &t12);
    inverse_laplacian(&s, &mut sep);
    let i_part: Vec<Complex64> = q.iter().zip(&sep).map(|(a, b)| a - 2.0 * b).collect();
    let mut j_part = from_fine(&jacc, n);
    inverse_laplacian(&s, &mut j_part);
    Ok(SplitSpectra {
        base: spectral_scalar(&s, Vec::new()),
        q,
        i_part,
        j_part,
    })
}

impl SplitSpectra {
    fn block(&self, v: &[Complex64], level: usize, part: &DyadicPartition) -> GridField {
        let s = spectral_scalar(&self.base, v.to_vec());
        block_of(&s, level, part)
    }

    pub fn q_block(&self, level: usize, part: &DyadicPartition) -> GridField {
        self.block(&self.q, level, part)
    }

    pub fn i_block(&self, level: usize, part: &DyadicPartition) -> GridField {
        self.block(&self.i_part, level, part)
    }

    pub fn j_block(&self, level: usize, part: &DyadicPartition) -> GridField {
        self.block(&self.j_part, level, part)
    }

    pub fn pressure(&self) -> GridField {
        real_field(&self.base, self.q.clone())
    }

    /// Block profiles of `q`, `I` and `J`.
    pub fn profiles(&self, part: &DyadicPartition) -> (BlockProfile, BlockProfile, BlockProfile) {
        let prof = |v: &[Complex64]| block_profile_of(&spectral_scalar(&self.base, v.to_vec()), part);
        (prof(&self.q), prof(&self.i_part), prof(&self.j_part))
    }

    /// `max_N ||q_N - (I_N + J_N)||_inf / ||q||_inf` over resolvable `N >= 2`.
    pub fn identity_defect(&self, part: &DyadicPartition) -> f64 {
        let qn = self.pressure().sup_norm().max(1e-300);
        part.resolvable_levels(self.base.n)
            .into_iter()
            .filter(|&l| l >= 2)
            .map(|l| {
                let q = self.q_block(l, part);
                let i = self.i_block(l, part);
                let j = self.j_block(l, part);
                q.sub(&i.add(&j)).sup_norm() / qn
            })
            .fold(0.0, f64::max)
    }
}

pub fn split_in_jn(u: &GridField, level: usize, part: &DyadicPartition) -> Result<(GridField, GridField)> {
    part.check_level(level, u.n)?;
    if level < 2 {
        return Err(Error::Range("splitting is defined for N >= 2".into()));
    }
    let sp = split_spectra(u, part)?;
    Ok((sp.i_block(level, part), sp.j_block(level, part)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PressureDiag {
    pub q_blocks: BlockProfile,
    pub i_blocks: BlockProfile,
    pub j_blocks: BlockProfile,
    pub low_freq_sup: f64,
    pub identity_defect: f64,
}

pub fn pressure_diagnostics(u: &GridField, part: &DyadicPartition) -> Result<PressureDiag> {
    let sp = split_spectra(u, part)?;
    let (q_blocks, i_blocks, j_blocks) = sp.profiles(part);
    Ok(PressureDiag {
        low_freq_sup: q_blocks.get(1).unwrap_or(0.0),
        identity_defect: sp.identity_defect(part),
        q_blocks,
        i_blocks,
        j_blocks,
    })
}

/// One `(γ, seed)` cell of a double-regularity sweep.
#[derive(Clone, Debug)]
pub struct RegularityCell {
    pub gamma: f64,
    pub seed: u64,
    pub u_blocks: BlockProfile,
    pub p_blocks: BlockProfile,
    pub u_fit: ExponentFit,
    pub p_fit: ExponentFit,
    /// `zygmund_norm(p, 2γ) / zygmund_norm(u, γ)^2`.
    pub ratio: f64,
    /// `sup_N N ||p_N|| / holder_norm(u, 1/2)^2`, only for `γ = 1/2`.
    pub borderline: Option<f64>,
    pub u: GridField,
    pub p: GridField,
    pub seconds: f64,
}

/// Synthesizes, solves and measures every `(γ, seed)` pair on an `n x n` grid
/// with shells up to `2^j_max`, fitting over `range`.
pub fn verify_double_regularity(
    gammas: &[f64],
    seeds: &[u64],
    n: usize,
    j_max: u32,
    range: (usize, usize),
) -> Result<Vec<RegularityCell>> {
    let part = make_partition(j_max);
    let mut cells = Vec::new();
    for &gamma in gammas {
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(Error::Config(format!("gamma {gamma} outside (0, 0.5]")));
        }
        for &seed in seeds {
            let t = std::time::Instant::now();
            let u = synth_lacunary_divfree(&LacunarySpec { gamma, j: j_max, seed, amplitude: 1.0 }, n)?;
            let p = solve_pressure_torus(&u)?;
            let u_blocks = block_profile(&u, &part)?;
            let p_blocks = block_profile(&p, &part)?;
            let u_fit = fit_decay_exponent(&u_blocks, range)?;
            let p_fit = fit_decay_exponent(&p_blocks, range)?;
            let ratio = zygmund_norm(&p, 2.0 * gamma, &part)? / zygmund_norm(&u, gamma, &part)?.powi(2);
            let borderline = (gamma == 0.5).then(|| p_blocks.weighted_sup(1.0) / holder_norm(&u, 0.5).powi(2));
            cells.push(RegularityCell {
                gamma,
                seed,
                u_blocks,
                p_blocks,
                u_fit,
                p_fit,
                ratio,
                borderline,
                u,
                p,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::LacunarySpec;
    use crate::spectral_core::make_partition;

    #[test]
    fn fine_grid_roundtrip() {
        let f = GridField::periodic_2d(16, 1, |x, y, _| (3.0 * x - y).sin() + 0.5).unwrap();
        let s = dft_forward(&f).unwrap();
        let back = from_fine(&to_fine(s.comp(0), 16), 16);
        for (a, b) in back.iter().zip(s.comp(0)) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_velocity_has_no_pressure() {
        let u = GridField::periodic_2d(16, 2, |_, _, c| [0.3, -1.2][c]).unwrap();
        let p = solve_pressure_torus(&u).unwrap();
        assert!(p.sup_norm() < 1e-15);
    }

    #[test]
    fn rejects_compressible_input() {
        let u = GridField::periodic_2d(16, 2, |x, _, c| if c == 0 { x.sin() } else { 0.0 }).unwrap();
        assert!(matches!(solve_pressure_torus(&u), Err(Error::Precondition(_))));
    }

    #[test]
    fn mode_sum_matches_fft_solver() {
        let spec = LacunarySpec { gamma: 0.4, j: 4, seed: 5, amplitude: 1.0 };
        let f = LacunaryField::generate(&spec).unwrap();
        let u = f.sample(128).unwrap();
        let p = solve_pressure_torus(&u).unwrap();
        let q = pressure_from_modes(&f, 128).unwrap();
        assert!(p.sub(&q).sup_norm() < 1e-13);
    }

    #[test]
    fn single_shell_has_no_separated_part() {
        let part = make_partition(6);
        let spec = LacunarySpec { gamma: 0.4, j: 2, seed: 1, amplitude: 1.0 };
        let u = LacunaryField::generate(&spec).unwrap().sample(64).unwrap();
        let sp = split_spectra(&u, &part).unwrap();
        assert!(sp.j_part.iter().all(|z| z.norm() < 1e-15));
        assert!(sp.identity_defect(&part) < 1e-12);
    }
}

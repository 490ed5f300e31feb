//! Hölder, Hölder-Zygmund, second-difference and log-Lipschitz estimators, and
//! least-squares extraction of dyadic decay exponents.
//!
//! Difference quotients use offsets that are dyadic multiples of the grid step
//! up to a quarter of the extent. Periodic fields wrap around; non-periodic
//! windows drop every stencil that would leave the window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_core::{block_of, dft_forward, DyadicPartition, GridField, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockProfile {
    pub levels: Vec<usize>,
    pub sup_norms: Vec<f64>,
}

impl BlockProfile {
    pub fn new(levels: Vec<usize>, sup_norms: Vec<f64>) -> Result<Self> {
        if levels.len() != sup_norms.len() {
            return Err(Error::Config("levels and sup_norms differ in length".into()));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) || levels.iter().any(|l| !l.is_power_of_two())
        {
            return Err(Error::Config("levels must be increasing dyadics".into()));
        }
        if sup_norms.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::Config("sup norms must be non-negative".into()));
        }
        Ok(BlockProfile { levels, sup_norms })
    }

    pub fn get(&self, level: usize) -> Option<f64> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .map(|i| self.sup_norms[i])
    }

    /// `sup_N N^s sup_norm(N)`.
    pub fn weighted_sup(&self, s: f64) -> f64 {
        self.levels
            .iter()
            .zip(&self.sup_norms)
            .map(|(&l, &v)| (l as f64).powf(s) * v)
            .fold(0.0, f64::max)
    }

    /// Rows `level,sup_norm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,sup_norm\n");
        for (l, v) in self.levels.iter().zip(&self.sup_norms) {
            s.push_str(&format!("{l},{v:.17e}\n"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub level_range: (usize, usize),
}

/// Sup norms of every resolvable block.
pub fn block_profile(f: &GridField, part: &DyadicPartition) -> Result<BlockProfile> {
    let s = dft_forward(f)?;
    Ok(block_profile_of(&s, part))
}

pub fn block_profile_of(s: &SpectralField, part: &DyadicPartition) -> BlockProfile {
    let levels = part.resolvable_levels(s.n);
    let sup_norms = levels
        .iter()
        .map(|&l| block_of(s, l, part).sup_norm())
        .collect();
    BlockProfile { levels, sup_norms }
}

/// `max_N N^s ||f_N||_inf` over resolvable levels.
pub fn zygmund_norm(f: &GridField, s: f64, part: &DyadicPartition) -> Result<f64> {
    Ok(block_profile(f, part)?.weighted_sup(s))
}

/// Visit `(center, plus, minus)` index triples for an offset of `k` steps along `axis`.
fn for_each_triple(f: &GridField, axis: usize, k: usize, mut visit: impl FnMut(usize, usize, usize)) {
    let n = f.n;
    let wrap = |i: usize, d: isize| -> Option<usize> {
        let j = i as isize + d;
        if f.periodic {
            Some(j.rem_euclid(n as isize) as usize)
        } else if j < 0 || j >= n as isize {
            None
        } else {
            Some(j as usize)
        }
    };
    let k = k as isize;
    if f.dim == 1 {
        for i in 0..n {
            if let (Some(p), Some(m)) = (wrap(i, k), wrap(i, -k)) {
                visit(i, p, m);
            }
        }
    } else {
        for row in 0..n {
            for col in 0..n {
                let c = row * n + col;
                let (p, m) = if axis == 0 {
                    (wrap(col, k).map(|x| row * n + x), wrap(col, -k).map(|x| row * n + x))
                } else {
                    (wrap(row, k).map(|y| y * n + col), wrap(row, -k).map(|y| y * n + col))
                };
                if let (Some(p), Some(m)) = (p, m) {
                    visit(c, p, m);
                }
            }
        }
    }
}

/// Dyadic step multiples `k` with `k h <= extent / 4`.
fn dyadic_offsets(f: &GridField) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 1;
    while k * 4 <= f.n {
        out.push(k);
        k *= 2;
    }
    out
}

fn sup_over<F: Fn(&[f64]) -> f64>(f: &GridField, axis: usize, k: usize, stencil: F) -> f64 {
    let m = f.points();
    let mut best = 0.0f64;
    let mut vals = [0.0; 3];
    for_each_triple(f, axis, k, |c, p, q| {
        let mut acc = 0.0;
        for comp in 0..f.components {
            let d = &f.data[comp * m..(comp + 1) * m];
            vals[0] = d[c];
            vals[1] = d[p];
            vals[2] = d[q];
            let v = stencil(&vals);
            acc += v * v;
        }
        best = best.max(acc.sqrt());
    });
    best
}

/// Per-offset suprema of `|f(x+h) + f(x-h) - 2 f(x)| / h` and the resulting norm.
pub fn second_difference_norm(f: &GridField) -> (f64, Vec<(f64, f64)>) {
    let h0 = f.step();
    let profile: Vec<(f64, f64)> = dyadic_offsets(f)
        .into_iter()
        .map(|k| {
            let h = k as f64 * h0;
            let s = (0..f.dim)
                .map(|axis| sup_over(f, axis, k, |v| v[1] + v[2] - 2.0 * v[0]))
                .fold(0.0, f64::max);
            (h, s / h)
        })
        .collect();
    let q = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    (f.sup_norm() + q, profile)
}

fn first_difference_profile(f: &GridField) -> Vec<(f64, f64)> {
    let h0 = f.step();
    dyadic_offsets(f)
        .into_iter()
        .map(|k| {
            let s = (0..f.dim)
                .map(|axis| sup_over(f, axis, k, |v| v[1] - v[0]))
                .fold(0.0, f64::max);
            (k as f64 * h0, s)
        })
        .collect()
}

/// `||f||_inf + sup |f(x+h) - f(x)| / (h (1 + |log h|))`.
pub fn loglip_norm(f: &GridField) -> f64 {
    let q = first_difference_profile(f)
        .into_iter()
        .map(|(h, d)| d / (h * (1.0 + h.ln().abs())))
        .fold(0.0, f64::max);
    f.sup_norm() + q
}

/// `||f||_inf + sup_h ||f(. + h) - f||_inf / h^gamma`.
pub fn holder_norm(f: &GridField, gamma: f64) -> f64 {
    let q = first_difference_profile(f)
        .into_iter()
        .map(|(h, d)| d / h.powf(gamma))
        .fold(0.0, f64::max);
    f.sup_norm() + q
}

/// Ordinary least squares `y = slope x + intercept` with its r^2.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - slope * x - intercept;
            e * e
        })
        .sum();
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

/// Default fit window `[2^3, 2^(J-2)]`.
pub fn default_fit_range(j_max: u32) -> (usize, usize) {
    (8, 1usize << j_max.saturating_sub(2))
}

/// Least-squares line through `(log2 N, log2 sup_norm)` for `N` in `range`.
pub fn fit_decay_exponent(profile: &BlockProfile, range: (usize, usize)) -> Result<ExponentFit> {
    let (lo, hi) = range;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&l, &v) in profile.levels.iter().zip(&profile.sup_norms) {
        if l < lo || l > hi {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::DegenerateFit(format!("zero block at level {l}")));
        }
        xs.push((l as f64).log2());
        ys.push(v.log2());
    }
    if xs.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "{} levels in [{lo}, {hi}], need at least 4",
            xs.len()
        )));
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        level_range: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::make_partition;

    #[test]
    fn exact_power_law() {
        let levels: Vec<usize> = (0..8).map(|j| 1 << j).collect();
        let sups = levels.iter().map(|&l| 1.0 / l as f64).collect();
        let p = BlockProfile::new(levels, sups).unwrap();
        let fit = fit_decay_exponent(&p, (1, 128)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_profile() {
        let levels: Vec<usize> = (0..6).map(|j| 1 << j).collect();
        let p = BlockProfile::new(levels, vec![3.0; 6]).unwrap();
        let fit = fit_decay_exponent(&p, (1, 32)).unwrap();
        assert!(fit.slope.abs() < 1e-14);
    }

    #[test]
    fn degenerate_fits() {
        let levels: Vec<usize> = (0..6).map(|j| 1 << j).collect();
        let p = BlockProfile::new(levels, vec![1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(fit_decay_exponent(&p, (1, 32)), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_decay_exponent(&p, (8, 32)), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn zygmund_single_block() {
        let part = make_partition(6);
        let f = GridField::periodic_2d(64, 1, |x, _, _| (8.0 * x).cos()).unwrap();
        assert!((zygmund_norm(&f, 1.0, &part).unwrap() - 8.0).abs() < 1e-12);
        let z = GridField::zeros(2, 64, 1).unwrap();
        assert_eq!(zygmund_norm(&z, 1.0, &part).unwrap(), 0.0);
    }

    #[test]
    fn holder_of_cosine() {
        let f = GridField::periodic_1d(1024, |x| x.cos()).unwrap();
        assert!((holder_norm(&f, 1.0) - 2.0).abs() < 0.02);
        assert_eq!(holder_norm(&GridField::zeros(1, 64, 1).unwrap(), 0.5), 0.0);
    }

    #[test]
    fn affine_window_has_no_second_difference() {
        let f = GridField::window_1d(256, -1.0, 1.0, |x| 2.0 * x).unwrap();
        let (v, prof) = second_difference_norm(&f);
        assert!(prof.iter().all(|p| p.1 < 1e-12));
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn loglip_of_constant() {
        let f = GridField::window_1d(256, -1.0, 1.0, |_| -0.75).unwrap();
        assert_eq!(loglip_norm(&f), 0.75);
    }
}

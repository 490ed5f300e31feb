use std::sync::OnceLock;

use sha2::{Digest, Sha256};

const PANELS: usize = 8192;
const SUBSTEPS: usize = 32;

/// The mollifier exp(-1/(1-y^2)) on y = 2s-1, supported in s in (0,1).
fn mollifier(s: f64) -> f64 {
    let y = 2.0 * s - 1.0;
    let q = 1.0 - y * y;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

/// Radial profile with phi = 1 on [0,1], phi = 0 on [2, inf) and a C-infinity
/// monotone ramp in between given by the normalized integral of the mollifier.
#[derive(Debug)]
pub struct Bump {
    cumulative: Vec<f64>,
    total: f64,
}

impl Bump {
    fn build() -> Self {
        let h = 1.0 / PANELS as f64;
        let sub = h / SUBSTEPS as f64;
        let mut cumulative = Vec::with_capacity(PANELS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for p in 0..PANELS {
            let a = p as f64 * h;
            let mut s = mollifier(a) + mollifier(a + h);
            for k in 1..SUBSTEPS {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * mollifier(a + k as f64 * sub);
            }
            acc += s * sub / 3.0;
            cumulative.push(acc);
        }
        Bump { cumulative, total: acc }
    }

    pub fn shared() -> &'static Bump {
        static BUMP: OnceLock<Bump> = OnceLock::new();
        BUMP.get_or_init(Bump::build)
    }

    /// Normalized ramp rising from 0 at s = 0 to 1 at s = 1.
    pub fn ramp(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let x = s * PANELS as f64;
        let i = (x as usize).min(PANELS - 1);
        let t = x - i as f64;
        let h = 1.0 / PANELS as f64;
        let y0 = self.cumulative[i];
        let y1 = self.cumulative[i + 1];
        let d0 = mollifier(i as f64 * h) * h;
        let d1 = mollifier((i + 1) as f64 * h) * h;
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        (v / self.total).clamp(0.0, 1.0)
    }

    /// phi(t) for t = |xi| >= 0.
    pub fn phi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else if t >= 2.0 {
            0.0
        } else {
            1.0 - self.ramp(t - 1.0)
        }
    }

    /// Hex SHA-256 of phi sampled at 1001 points of [0, 2].
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for k in 0..=1000 {
            let t = 2.0 * k as f64 / 1000.0;
            hasher.update(self.phi(t).to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn description(&self) -> &'static str {
        "phi = 1 on [0,1], 0 on [2,inf); ramp = normalized integral of exp(-1/(1-y^2))"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_matches_direct_quadrature() {
        let b = Bump::shared();
        for &s in &[0.1, 0.37, 0.5, 0.77, 0.93] {
            let m = 200_000;
            let h = s / m as f64;
            let mut acc = mollifier(0.0) + mollifier(s);
            for k in 1..m {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * mollifier(k as f64 * h);
            }
            let direct = acc * h / 3.0 / b.total;
            assert!((b.ramp(s) - direct).abs() < 1e-13, "s={s}");
        }
    }

    #[test]
    fn symmetric_about_midpoint() {
        let b = Bump::shared();
        assert!((b.ramp(0.5) - 0.5).abs() < 1e-14);
        for &s in &[0.01, 0.2, 0.45] {
            assert!((b.ramp(s) + b.ramp(1.0 - s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone() {
        let b = Bump::shared();
        let mut prev = 1.0;
        for k in 0..=20_000 {
            let v = b.phi(1.0 + k as f64 / 20_000.0);
            assert!(v <= prev + 1e-15, "t={} v={v} prev={prev}", 1.0 + k as f64 / 20_000.0);
            prev = v;
        }
    }
}

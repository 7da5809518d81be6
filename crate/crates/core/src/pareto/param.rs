use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::model::{CovarianceMatrix, InterferenceSystem};

/// `Q = c p U diag(s, 1-s) U^H` with
/// `U = [[cos t, -sin t e^{-i phi}], [sin t e^{i phi}, cos t]]`.
///
/// For single-antenna transmitters only `c` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyParam2x2 {
    pub s: f64,
    pub theta: f64,
    pub phi: f64,
    pub c: f64,
}

impl StrategyParam2x2 {
    pub fn new(s: f64, theta: f64, phi: f64, c: f64) -> Self {
        Self { s, theta, phi, c }
    }

    /// Clamps `s`, `c` to `[0, 1]` and `theta` to `[0, pi/2]`; wraps `phi` into `[0, 2 pi)`.
    pub fn clamped(self) -> Self {
        Self {
            s: self.s.clamp(0.0, 1.0),
            theta: self.theta.clamp(0.0, FRAC_PI_2),
            phi: self.phi.rem_euclid(2.0 * PI),
            c: self.c.clamp(0.0, 1.0),
        }
    }

    pub(crate) fn matrix(&self, nt: usize, p: f64) -> CMat {
        let scale = self.c * p;
        if nt == 1 {
            return CMat::from_element(1, 1, Complex64::new(scale, 0.0));
        }
        let (st, ct) = self.theta.sin_cos();
        let q00 = scale * (self.s * ct * ct + (1.0 - self.s) * st * st);
        let q11 = scale * (self.s * st * st + (1.0 - self.s) * ct * ct);
        let off = Complex64::from_polar(scale * (2.0 * self.s - 1.0) * ct * st, -self.phi);
        CMat::from_row_slice(
            2,
            2,
            &[Complex64::new(q00, 0.0), off, off.conj(), Complex64::new(q11, 0.0)],
        )
    }

    /// Covariance for a transmitter with `nt` antennas (1 or 2) and budget `p`.
    pub fn to_covariance(&self, nt: usize, p: f64) -> CovarianceMatrix {
        assert!(nt == 1 || nt == 2, "parameterization covers Nt <= 2");
        CovarianceMatrix::from_raw(self.clamped().matrix(nt, p))
    }

    /// Inverse of [`to_covariance`](Self::to_covariance).
    pub fn from_covariance(q: &CovarianceMatrix, p: f64) -> Self {
        let tr = q.trace().max(0.0);
        let c = (tr / p).clamp(0.0, 1.0);
        if q.dim() == 1 || tr <= 0.0 {
            return Self::new(1.0, 0.0, 0.0, c);
        }
        let eig = q.eig();
        let s = (eig.values[0] / tr).clamp(0.0, 1.0);
        let v0 = eig.vectors.get(0, 0);
        let v1 = eig.vectors.get(1, 0);
        let (theta, phi) = if v0.norm() > 1e-14 {
            let rot = v0.conj() / v0.norm();
            let w1 = v1 * rot;
            (v0.norm().clamp(0.0, 1.0).acos(), w1.arg())
        } else {
            (FRAC_PI_2, v1.arg())
        };
        Self::new(s, theta, phi, c).clamped()
    }
}

/// Number of grid points along each parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridResolution {
    pub s: usize,
    pub theta: usize,
    pub phi: usize,
    pub c: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        Self {
            s: 11,
            theta: 10,
            phi: 4,
            c: 6,
        }
    }
}

impl GridResolution {
    pub fn uniform(n: usize) -> Self {
        Self {
            s: n,
            theta: n,
            phi: n,
            c: n,
        }
    }

    /// Full-power grid used by best-response oracles.
    pub fn oracle(n: usize) -> Self {
        Self {
            s: n,
            theta: n,
            phi: n,
            c: 1,
        }
    }

    /// Restricted rotations for real diagonal channels.
    pub fn fast(n: usize) -> Self {
        Self {
            s: n,
            theta: 3,
            phi: 1,
            c: n,
        }
    }

    /// Default grid, or the fast grid when requested and every channel is real diagonal.
    pub fn for_system(sys: &InterferenceSystem, fast: bool) -> Self {
        if fast && all_real_diagonal(sys) {
            Self::fast(33)
        } else {
            Self::default()
        }
    }

    pub fn s_values(&self) -> Vec<f64> {
        closed_axis(self.s, 0.0, 1.0, 1.0)
    }

    pub fn theta_values(&self) -> Vec<f64> {
        closed_axis(self.theta, 0.0, FRAC_PI_2, 0.0)
    }

    pub fn phi_values(&self) -> Vec<f64> {
        let n = self.phi.max(1);
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }

    pub fn c_values(&self) -> Vec<f64> {
        closed_axis(self.c, 0.0, 1.0, 1.0)
    }

    /// Distinct parameter points for a transmitter with `nt` antennas.
    pub fn params(&self, nt: usize) -> Vec<StrategyParam2x2> {
        let mut out = Vec::new();
        let cs = self.c_values();
        if nt == 1 {
            return cs
                .into_iter()
                .map(|c| StrategyParam2x2::new(1.0, 0.0, 0.0, c))
                .collect();
        }
        let thetas = self.theta_values();
        let phis = self.phi_values();
        let mut zero_done = false;
        for &c in &cs {
            if c == 0.0 {
                if !zero_done {
                    out.push(StrategyParam2x2::new(1.0, 0.0, 0.0, 0.0));
                    zero_done = true;
                }
                continue;
            }
            for &s in &self.s_values() {
                for (ti, &theta) in thetas.iter().enumerate() {
                    if s == 0.5 && ti > 0 {
                        continue;
                    }
                    let axis = theta == 0.0 || theta == FRAC_PI_2;
                    for (pi, &phi) in phis.iter().enumerate() {
                        if (axis || s == 0.5) && pi > 0 {
                            continue;
                        }
                        out.push(StrategyParam2x2::new(s, theta, phi, c));
                    }
                }
            }
        }
        out
    }
}

fn closed_axis(n: usize, lo: f64, hi: f64, single: f64) -> Vec<f64> {
    match n {
        0 | 1 => vec![single],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

pub(crate) fn all_real_diagonal(sys: &InterferenceSystem) -> bool {
    (0..sys.users()).all(|i| {
        (0..sys.users()).all(|j| {
            let h = sys.h(i, j);
            h.is_real()
                && (0..h.rows()).all(|r| (0..h.cols()).all(|c| r == c || h.get(r, c).norm() == 0.0))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_and_psd() {
        let p = StrategyParam2x2::new(0.3, 0.7, 1.9, 0.8);
        let q = p.to_covariance(2, 2.0);
        assert!((q.trace() - 1.6).abs() < 1e-12);
        assert!(q.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn round_trip() {
        for &(s, t, f, c) in &[
            (0.9, 0.4, 0.3, 1.0),
            (0.7, 1.2, 5.0, 0.5),
            (1.0, 0.0, 0.0, 0.25),
            (0.8, FRAC_PI_2, 2.0, 1.0),
        ] {
            let p = StrategyParam2x2::new(s, t, f, c);
            let q = p.to_covariance(2, 1.0);
            let back = StrategyParam2x2::from_covariance(&q, 1.0).to_covariance(2, 1.0);
            assert!(q.max_entry_distance(&back) < 1e-10, "{p:?}");
        }
    }

    #[test]
    fn single_point_grid() {
        let g = GridResolution::uniform(1);
        let ps = g.params(2);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0], StrategyParam2x2::new(1.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn siso_grid_is_power_only() {
        let g = GridResolution::uniform(5);
        let ps = g.params(1);
        assert_eq!(ps.len(), 5);
        assert!(ps.iter().all(|p| p.s == 1.0 && p.theta == 0.0));
    }
}

#![allow(dead_code)]

use std::path::PathBuf;

use ratebargain::model::{load_scenario, ComplexMatrix, CovarianceMatrix, InterferenceSystem};

pub fn fixture(name: &str) -> InterferenceSystem {
    load_scenario(fixture_path(name)).expect("bundled fixture loads")
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

/// Two users, real diagonal channels `[h11, h12, h21, h22]`.
pub fn diag_system(h: [[f64; 2]; 4], rho: f64, eta: f64) -> InterferenceSystem {
    let d = |v: [f64; 2]| ComplexMatrix::from_real_diag(&v);
    InterferenceSystem::two_user(d(h[0]), d(h[1]), d(h[2]), d(h[3]), rho, eta).unwrap()
}

pub fn diag_entries(q: &CovarianceMatrix) -> [f64; 2] {
    [q.get(0, 0).re, q.get(1, 1).re]
}

/// Scalar water-filling of `p` over gains `g`: `q_k = max(mu - 1/g_k, 0)`.
pub fn scalar_water_fill(g: &[f64], p: f64) -> Vec<f64> {
    let (mut lo, mut hi) = (0.0_f64, p + g.iter().filter(|&&x| x > 0.0).map(|x| 1.0 / x).sum::<f64>());
    let fill = |mu: f64| -> Vec<f64> {
        g.iter().map(|&x| if x > 0.0 { (mu - 1.0 / x).max(0.0) } else { 0.0 }).collect()
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid).iter().sum::<f64>() > p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    fill(0.5 * (lo + hi))
}

/// Rates of a diagonal two-user system with diagonal covariances.
pub fn diag_rates(h: [[f64; 2]; 4], rho: f64, eta: f64, q1: [f64; 2], q2: [f64; 2]) -> [f64; 2] {
    let r = |hd: [f64; 2], hx: [f64; 2], qd: [f64; 2], qx: [f64; 2]| {
        (0..2)
            .map(|k| (1.0 + rho * hd[k] * hd[k] * qd[k] / (1.0 + eta * hx[k] * hx[k] * qx[k])).log2())
            .sum::<f64>()
    };
    [r(h[0], h[1], q1, q2), r(h[3], h[2], q2, q1)]
}

/// Gauss-Seidel iterative water-filling on a diagonal system, written independently of the library.
pub fn diag_iwf(h: [[f64; 2]; 4], rho: f64, eta: f64) -> ([f64; 2], [f64; 2]) {
    let mut q1 = [0.5, 0.5];
    let mut q2 = [0.5, 0.5];
    for _ in 0..10_000 {
        let g1: Vec<f64> = (0..2)
            .map(|k| rho * h[0][k] * h[0][k] / (1.0 + eta * h[1][k] * h[1][k] * q2[k]))
            .collect();
        let n1 = scalar_water_fill(&g1, 1.0);
        let g2: Vec<f64> = (0..2)
            .map(|k| rho * h[3][k] * h[3][k] / (1.0 + eta * h[2][k] * h[2][k] * n1[k]))
            .collect();
        let n2 = scalar_water_fill(&g2, 1.0);
        let change = (0..2).map(|k| (n1[k] - q1[k]).abs().max((n2[k] - q2[k]).abs())).fold(0.0, f64::max);
        q1 = [n1[0], n1[1]];
        q2 = [n2[0], n2[1]];
        if change < 1e-12 {
            break;
        }
    }
    (q1, q2)
}

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use ratebargain::bargaining::jain_fairness_index;
use ratebargain::equilibrium::{find_nash_equilibrium, IwfOptions};
use ratebargain::model::{hermitian_eig, ComplexMatrix, CovarianceMatrix, InterferenceSystem, RatePoint, StrategyProfile};
use ratebargain::pareto::{certify_convexity, pareto_filter, time_sharing_hull};
use ratebargain::rates::{mutual_information, specialized_rate_miso_siso};

fn complex(rows: usize, cols: usize, v: &[f64]) -> ComplexMatrix {
    let n = rows * cols;
    ComplexMatrix::new(rows, cols, (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect()).unwrap()
}

fn covariance(n: usize, v: &[f64], p: f64) -> CovarianceMatrix {
    let g = complex(n, n, v).into_dmatrix();
    let a = &g * g.adjoint();
    let tr = a.trace().re.max(1e-12);
    CovarianceMatrix::new(ComplexMatrix::from_dmatrix(a.map(|z| z * (p / tr))).unwrap()).unwrap()
}

fn system(nt: usize, nr: usize, v: &[f64], rho: f64, eta: f64) -> InterferenceSystem {
    let k = 2 * nt * nr;
    let h: Vec<ComplexMatrix> = (0..4).map(|i| complex(nr, nt, &v[i * k..(i + 1) * k])).collect();
    InterferenceSystem::two_user(h[0].clone(), h[1].clone(), h[2].clone(), h[3].clone(), rho, eta).unwrap()
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.5..1.5f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstruction(v in entries(18)) {
        let a = complex(3, 3, &v).into_dmatrix();
        let h = ComplexMatrix::from_dmatrix((&a + a.adjoint()).scale(0.5)).unwrap();
        let e = hermitian_eig(&h).unwrap();
        prop_assert!(e.reconstruct().frobenius_distance(&h) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn own_power_helps_and_interference_hurts(
        v in entries(32), q in entries(16), rho in 0.5..30.0f64, eta in 0.0..30.0f64, c in 0.05..0.95f64,
    ) {
        let sys = system(2, 2, &v, rho, eta);
        let full = StrategyProfile::new(&sys, vec![covariance(2, &q[..8], 1.0), covariance(2, &q[8..], 1.0)]).unwrap();
        let scaled = |i: usize| {
            let mut qs = full.covariances().to_vec();
            qs[i] = covariance(2, if i == 0 { &q[..8] } else { &q[8..] }, c);
            StrategyProfile::new(&sys, qs).unwrap()
        };
        let base = mutual_information(&sys, &full, 0).unwrap();
        prop_assert!(mutual_information(&sys, &scaled(0), 0).unwrap() <= base + 1e-12);
        prop_assert!(mutual_information(&sys, &scaled(1), 0).unwrap() >= base - 1e-12);
    }

    #[test]
    fn jfi_bounds_and_scale_invariance(
        x in proptest::collection::vec(0.01..10.0f64, 2..6), scale in 0.01..100.0f64,
    ) {
        let optimal = vec![1.0; x.len()];
        let j = jain_fairness_index(&x, &optimal).unwrap();
        prop_assert!(j >= 1.0 / x.len() as f64 - 1e-12 && j <= 1.0 + 1e-12);
        let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
        prop_assert!((jain_fairness_index(&scaled, &optimal).unwrap() - j).abs() < 1e-12);
        prop_assert!((jain_fairness_index(&x, &scaled).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_filter_ignores_order(
        pts in proptest::collection::vec((0.0..10.0f64, 0.0..10.0f64), 1..40), seed in any::<u64>(),
    ) {
        let points: Vec<RatePoint> = pts.iter().map(|&(a, b)| RatePoint::new(vec![a, b]).unwrap()).collect();
        let mut shuffled = points.clone();
        let n = shuffled.len();
        let mut s = seed;
        for k in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(k, (s >> 33) as usize % (k + 1));
        }
        let a = pareto_filter(&points).unwrap();
        let b = pareto_filter(&shuffled).unwrap();
        prop_assert_eq!(a.xy(), b.xy());
        // every input point is weakly dominated by the boundary
        for p in &points {
            prop_assert!(a.points().iter().any(|q| q.get(0) >= p.get(0) - 1e-9 && q.get(1) >= p.get(1) - 1e-9));
        }
    }

    #[test]
    fn hull_dominates_boundary(pts in proptest::collection::vec((0.0..10.0f64, 0.0..10.0f64), 3..40)) {
        let points: Vec<RatePoint> = pts.iter().map(|&(a, b)| RatePoint::new(vec![a, b]).unwrap()).collect();
        let boundary = pareto_filter(&points).unwrap();
        let hull = time_sharing_hull(&boundary).unwrap();
        for p in boundary.xy() {
            prop_assert!(hull.interpolate(p.0).unwrap() >= p.1 - 1e-9);
        }
        if let Ok(cert) = certify_convexity(&hull, 1e-9) {
            prop_assert!(cert.convex);
        }
    }

    #[test]
    fn miso_and_siso_rates_match_general_formula(
        v in entries(16), q in entries(16), rho in 0.1..50.0f64, eta in 0.0..50.0f64, siso in any::<bool>(),
    ) {
        let nt = if siso { 1 } else { 2 };
        let sys = system(nt, 1, &v, rho, eta);
        let profile = StrategyProfile::new(
            &sys,
            vec![covariance(nt, &q[..2 * nt * nt], 0.8), covariance(nt, &q[8..8 + 2 * nt * nt], 1.0)],
        )
        .unwrap();
        for i in 0..2 {
            let general = mutual_information(&sys, &profile, i).unwrap();
            let special = specialized_rate_miso_siso(&sys, &profile, i).unwrap();
            prop_assert!((general - special).abs() <= 1e-12 * general.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn equilibrium_is_feasible(v in entries(32), rho in 0.5..20.0f64, eta in 0.0..5.0f64) {
        let sys = system(2, 2, &v, rho, eta);
        let ne = find_nash_equilibrium(&sys, None, &IwfOptions::default()).unwrap();
        for q in ne.profile.covariances() {
            prop_assert!(q.trace() <= 1.0 + 1e-9);
            prop_assert!(q.min_eigenvalue() >= -1e-9);
        }
        prop_assert!(ne.profile.validate(&sys).is_ok());
    }
}

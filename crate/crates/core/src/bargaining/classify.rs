use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eig_sorted, StrategyProfile};
use crate::linalg::CMat;

/// Eigenvalues closer than this count as equal.
pub const EIGENVALUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibleType {
    /// Same eigenbasis, different power allocation.
    TypeI,
    /// Same power allocation, rotated eigenbasis.
    TypeII,
    TypeIII,
    Unchanged,
}

/// Largest angle, in radians, between a unit vector of one basis and the nearest
/// eigenspace of the other matrix.
fn basis_angle(vals_a: &[f64], vecs_a: &CMat, vecs_b: &CMat, tol: f64) -> f64 {
    let n = vals_a.len();
    // group numerically equal eigenvalues of `a` into eigenspaces
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(c) if (vals_a[c[0]] - vals_a[k]).abs() <= tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let v = vecs_b.column(j);
        let best = clusters
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&k| vecs_a.column(k).dotc(&v).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    .clamp(0.0, 1.0)
                    .acos()
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

/// Per-user structure of the move from the NE covariance to the NB covariance.
///
/// Eigenbases match when every eigenvector of one matrix lies within `tol_angle_deg`
/// of an eigenspace of the other, checked in both directions and accepted if either holds.
pub fn classify_feasible_type(
    ne_profile: &StrategyProfile,
    nb_profile: &StrategyProfile,
    tol_angle_deg: f64,
) -> Result<Vec<FeasibleType>> {
    if ne_profile.len() != nb_profile.len() {
        return Err(Error::ShapeMismatch {
            field: "nb_profile".into(),
            expected: format!("{} users", ne_profile.len()),
            found: format!("{} users", nb_profile.len()),
        });
    }
    let tol_angle = tol_angle_deg.to_radians();
    ne_profile
        .covariances()
        .iter()
        .zip(nb_profile.covariances())
        .map(|(a, b)| {
            if a.dim() != b.dim() {
                return Err(Error::ShapeMismatch {
                    field: "nb_profile".into(),
                    expected: format!("{0}x{0}", a.dim()),
                    found: format!("{0}x{0}", b.dim()),
                });
            }
            let (va, ua) = eig_sorted(a.dm());
            let (vb, ub) = eig_sorted(b.dm());
            let same_values = va
                .iter()
                .zip(&vb)
                .all(|(x, y)| (x - y).abs() <= EIGENVALUE_TOL);
            let angle = basis_angle(&va, &ua, &ub, EIGENVALUE_TOL)
                .min(basis_angle(&vb, &ub, &ua, EIGENVALUE_TOL));
            let same_basis = angle < tol_angle;
            Ok(match (same_basis, same_values) {
                (true, true) => FeasibleType::Unchanged,
                (true, false) => FeasibleType::TypeI,
                (false, true) => FeasibleType::TypeII,
                (false, false) => FeasibleType::TypeIII,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CovarianceMatrix;

    fn profile(qs: Vec<CovarianceMatrix>) -> StrategyProfile {
        StrategyProfile::from_vec_unchecked(qs)
    }

    #[test]
    fn diagonal_reallocation_is_type_one() {
        let ne = profile(vec![CovarianceMatrix::diag(&[0.75, 0.25]).unwrap()]);
        let nb = profile(vec![CovarianceMatrix::diag(&[1.0, 0.0]).unwrap()]);
        assert_eq!(
            classify_feasible_type(&ne, &nb, 5.0).unwrap(),
            vec![FeasibleType::TypeI]
        );
    }

    #[test]
    fn rotation_is_type_two() {
        let ne = profile(vec![CovarianceMatrix::diag(&[1.0, 0.0]).unwrap()]);
        let nb = profile(vec![
            CovarianceMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap(),
        ]);
        assert_eq!(
            classify_feasible_type(&ne, &nb, 5.0).unwrap(),
            vec![FeasibleType::TypeII]
        );
    }

    #[test]
    fn rotation_and_reallocation_is_type_three() {
        let ne = profile(vec![CovarianceMatrix::diag(&[0.8, 0.2]).unwrap()]);
        let nb = profile(vec![
            CovarianceMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap(),
        ]);
        assert_eq!(
            classify_feasible_type(&ne, &nb, 5.0).unwrap(),
            vec![FeasibleType::TypeIII]
        );
    }

    #[test]
    fn identity_shares_every_basis() {
        let ne = profile(vec![CovarianceMatrix::scaled_identity(2, 0.5)]);
        let nb = profile(vec![
            CovarianceMatrix::from_real_rows(&[&[0.6, 0.1], &[0.1, 0.4]]).unwrap(),
        ]);
        assert_eq!(
            classify_feasible_type(&ne, &nb, 5.0).unwrap(),
            vec![FeasibleType::TypeI]
        );
        assert_eq!(
            classify_feasible_type(&ne, &ne, 5.0).unwrap(),
            vec![FeasibleType::Unchanged]
        );
    }
}

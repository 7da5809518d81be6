//! Two-user multi-stage interference cancellation with zero-forcing decoding.
//!
//! Stage 2 subtracts the other user's signal decoded from its raw observation;
//! stage 3 repeats the subtraction with the other receiver's stage-2 estimate.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::water_fill;
use crate::error::{Error, Result};
use crate::linalg::{c, condition_number, congruence, hermitize, inv_hpd, CMat};
use crate::model::{ComplexMatrix, CovarianceMatrix, InterferenceSystem, StrategyProfile};
use crate::pareto::{filter_tagged, refined_boundary, BoundaryKind, GridResolution, ParetoBoundary, RefineOptions};
use crate::rates::{interference_dm, profile_refs, rate_from_parts};

/// Direct channels at or above this condition number count as singular.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveLink {
    pub user: usize,
    pub stage: usize,
    /// Signal matrix with the SNR already absorbed.
    pub h_eff: ComplexMatrix,
    pub noise_cov: CovarianceMatrix,
    pub interference_free: bool,
}

impl EffectiveLink {
    /// `log2 det(I + H_eff Q H_eff^H N^{-1})`
    pub fn rate(&self, q: &CovarianceMatrix) -> Result<f64> {
        let n = self.noise_cov.dm();
        let s = congruence(self.h_eff.as_dmatrix(), q.dm(), 1.0);
        rate_from_parts(n, &s)
    }

    /// Water-filling covariance for this link under budget `p`.
    pub fn optimal_covariance(&self, p: f64) -> Result<CovarianceMatrix> {
        let ninv = inv_hpd(self.noise_cov.dm()).ok_or(Error::SingularNoiseCovariance)?;
        let h = self.h_eff.as_dmatrix();
        let a = congruence(&h.adjoint(), &ninv, 1.0);
        Ok(CovarianceMatrix::from_raw(water_fill(&a, p)))
    }
}

fn check_stage(stage: usize) -> Result<()> {
    if (1..=3).contains(&stage) {
        Ok(())
    } else {
        Err(Error::UnsupportedStage(stage))
    }
}

/// Inverses of both direct channels, rejecting ill-conditioned ones.
fn direct_inverses(sys: &InterferenceSystem) -> Result<[CMat; 2]> {
    let inv = |i: usize| -> Result<CMat> {
        let h = sys.hm(i, i);
        let condition = condition_number(h);
        if !(condition < MAX_CONDITION) {
            return Err(Error::SingularDirectChannel { user: i, condition });
        }
        h.clone()
            .try_inverse()
            .ok_or(Error::SingularDirectChannel { user: i, condition })
    };
    Ok([inv(0)?, inv(1)?])
}

fn check_ic_system(sys: &InterferenceSystem) -> Result<()> {
    sys.require_two_users("interference cancellation")?;
    if sys.nt() != sys.nr() {
        return Err(Error::WrongDimensions {
            required: "Nt = Nr",
            nt: sys.nt(),
            nr: sys.nr(),
        });
    }
    Ok(())
}

/// `G_j = sqrt(rho_j) H_jj - sqrt(eta_ji eta_ij / rho_i) H_ji H_ii^{-1} H_ij`, the signal
/// matrix of receiver `j` after its first cancellation round.
fn stage2_signal(sys: &InterferenceSystem, inv: &[CMat; 2], j: usize) -> CMat {
    let i = 1 - j;
    let k = (sys.eta(j, i) * sys.eta(i, j) / sys.rho(i)).sqrt();
    sys.hm(j, j).scale(sys.rho(j).sqrt()) - (sys.hm(j, i) * &inv[i] * sys.hm(i, j)).scale(k)
}

fn link(user: usize, stage: usize, h_eff: CMat, noise: CMat, interference_free: bool) -> EffectiveLink {
    EffectiveLink {
        user,
        stage,
        h_eff: ComplexMatrix::from_dmatrix(h_eff).expect("finite effective channel"),
        noise_cov: CovarianceMatrix::from_raw(noise),
        interference_free,
    }
}

/// Effective links of both users after `stage - 1` cancellation rounds.
///
/// Stage 1 is plain reception, where the interference from `profile` is part of the noise.
/// Later stages do not depend on `profile`.
pub fn ic_stage(
    sys: &InterferenceSystem,
    stage: usize,
    profile: &StrategyProfile,
) -> Result<[EffectiveLink; 2]> {
    check_stage(stage)?;
    check_ic_system(sys)?;
    profile.validate(sys)?;
    if stage == 1 {
        let qs = profile_refs(profile);
        let make = |i: usize| {
            link(
                i,
                1,
                sys.hm(i, i).scale(sys.rho(i).sqrt()),
                interference_dm(sys, &qs, i),
                false,
            )
        };
        return Ok([make(0), make(1)]);
    }
    let inv = direct_inverses(sys)?;
    let n = sys.nr();
    let eye = CMat::identity(n, n);
    let make = |i: usize| -> Result<EffectiveLink> {
        let j = 1 - i;
        let (rho_i, rho_j) = (sys.rho(i), sys.rho(j));
        let (eta_ij, eta_ji) = (sys.eta(i, j), sys.eta(j, i));
        let (hii, hij, hji) = (sys.hm(i, i), sys.hm(i, j), sys.hm(j, i));
        if stage == 2 {
            let a = hij * &inv[j];
            let h_eff = hii.scale(rho_i.sqrt()) - (&a * hji).scale((eta_ij * eta_ji / rho_j).sqrt());
            let noise = &eye + congruence(&a, &eye, eta_ij / rho_j);
            return Ok(link(i, 2, h_eff, noise, true));
        }
        let g = stage2_signal(sys, &inv, j);
        if !(condition_number(&g) < MAX_CONDITION) {
            return Err(Error::SingularCombinedChannel { user: j });
        }
        let g_inv = g.try_inverse().ok_or(Error::SingularCombinedChannel { user: j })?;
        let b = &eye + (hij * &g_inv * hji * &inv[i]).scale((eta_ij * eta_ji / rho_i).sqrt());
        let cm = (hij * &g_inv).scale(-eta_ij.sqrt());
        let noise = hermitize(&(&b * b.adjoint() + &cm * cm.adjoint()));
        Ok(link(i, 3, hii.scale(rho_i.sqrt()), noise, true))
    };
    Ok([make(0)?, make(1)?])
}

/// Rate boundary with cancellation.
///
/// Stage 1 is the refined pure-strategy boundary. From stage 2 on the users decouple and
/// the boundary is the single corner where both water-fill on their effective links.
pub fn ic_rate_boundary(
    sys: &InterferenceSystem,
    stage: usize,
    res: &GridResolution,
    refine: &RefineOptions,
) -> Result<ParetoBoundary> {
    check_stage(stage)?;
    check_ic_system(sys)?;
    let kind = BoundaryKind::InterferenceCancellation { stage };
    if stage == 1 {
        return Ok(refined_boundary(sys, res, &[], refine)?.with_meta(kind, Some(*res), false));
    }
    let links = ic_stage(sys, stage, &StrategyProfile::zeros(sys))?;
    let qs = [
        links[0].optimal_covariance(sys.p(0))?,
        links[1].optimal_covariance(sys.p(1))?,
    ];
    let rates = (links[0].rate(&qs[0])?, links[1].rate(&qs[1])?);
    let profile = StrategyProfile::from_vec_unchecked(qs.to_vec());
    Ok(filter_tagged(vec![(rates.0, rates.1, Some(profile))], kind))
}

/// Sample covariance of the residual noise and the standard error of every entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub covariance: ComplexMatrix,
    /// Standard errors of the real parts, row-major.
    pub std_err_re: Vec<Vec<f64>>,
    pub std_err_im: Vec<Vec<f64>>,
    pub samples: usize,
}

impl NoiseEstimate {
    /// Largest entrywise deviation from `reference` in units of standard error.
    pub fn max_z_score(&self, reference: &CovarianceMatrix) -> f64 {
        let n = self.covariance.rows();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let d = self.covariance.get(a, b) - reference.get(a, b);
                for (dev, se) in [(d.re, self.std_err_re[a][b]), (d.im, self.std_err_im[a][b])] {
                    if se > 0.0 {
                        worst = worst.max(dev.abs() / se);
                    } else if dev.abs() > 1e-12 {
                        worst = f64::INFINITY;
                    }
                }
            }
        }
        worst
    }
}

const BLOCK: usize = 4096;

/// First and second moments of `e e^H` over one block.
struct Moments {
    sum: Vec<Complex64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
}

/// Residual noise of `user` by symbol-level simulation of the cancellation chain.
///
/// Noise is i.i.d. CN(0, 1) and each user transmits with the uniform covariance `(p / Nt) I`;
/// the residual is the stage output minus the effective signal term and is compared
/// against [`ic_stage`] at the uniform profile. Deterministic for a given seed.
pub fn monte_carlo_noise_cov(
    sys: &InterferenceSystem,
    stage: usize,
    user: usize,
    n_samples: usize,
    seed: u64,
) -> Result<NoiseEstimate> {
    check_stage(stage)?;
    check_ic_system(sys)?;
    sys.check_user(user)?;
    if n_samples < 1000 {
        return Err(Error::NonPositiveParameter {
            field: "n_samples".into(),
            requirement: ">= 1000",
            value: n_samples as f64,
        });
    }
    let links = ic_stage(sys, stage, &StrategyProfile::uniform(sys))?;
    let amp = [
        (sys.p(0) / sys.nt() as f64).sqrt(),
        (sys.p(1) / sys.nt() as f64).sqrt(),
    ];
    let inv = if stage >= 2 {
        Some(direct_inverses(sys)?)
    } else {
        None
    };
    let g_inv: Option<[CMat; 2]> = match (&inv, stage) {
        (Some(inv), 3) => Some([
            stage2_signal(sys, inv, 0).try_inverse().ok_or(Error::SingularCombinedChannel { user: 0 })?,
            stage2_signal(sys, inv, 1).try_inverse().ok_or(Error::SingularCombinedChannel { user: 1 })?,
        ]),
        _ => None,
    };
    let n = sys.nr();
    let i = user;
    let j = 1 - i;
    let h_eff = links[i].h_eff.as_dmatrix().clone();
    let sq = |a: usize, b: usize| sys.hm(a, b).scale(if a == b { sys.rho(a) } else { sys.eta(a, b) }.sqrt());
    let h = [[sq(0, 0), sq(0, 1)], [sq(1, 0), sq(1, 1)]];
    let blocks = n_samples.div_ceil(BLOCK);

    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(blk as u64);
            let normal = Normal::new(0.0, FRAC_1_SQRT_2).expect("valid normal");
            let mut draw = |len: usize| {
                CMat::from_fn(len, 1, |_, _| {
                    Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                })
            };
            let count = BLOCK.min(n_samples - blk * BLOCK);
            let mut m = Moments {
                sum: vec![c(0.0); n * n],
                sq_re: vec![0.0; n * n],
                sq_im: vec![0.0; n * n],
            };
            for _ in 0..count {
                let x = [draw(sys.nt()).scale(amp[0]), draw(sys.nt()).scale(amp[1])];
                let nz = [draw(n), draw(n)];
                let y: Vec<CMat> = (0..2)
                    .map(|r| &h[r][0] * &x[0] + &h[r][1] * &x[1] + &nz[r])
                    .collect();
                let out = match stage {
                    1 => y[i].clone(),
                    2 => {
                        let inv = inv.as_ref().expect("stage >= 2");
                        let xj = &inv[j] * &y[j] / c(sys.rho(j).sqrt());
                        &y[i] - &h[i][j] * xj
                    }
                    _ => {
                        let inv = inv.as_ref().expect("stage >= 2");
                        let g_inv = g_inv.as_ref().expect("stage 3");
                        // receiver j's stage-2 observation, then its decoded signal
                        let xi = &inv[i] * &y[i] / c(sys.rho(i).sqrt());
                        let yj2 = &y[j] - &h[j][i] * xi;
                        let xj = &g_inv[j] * yj2;
                        &y[i] - &h[i][j] * xj
                    }
                };
                // stage 1 keeps the interference in the residual
                let e = out - &h_eff * &x[i];
                for a in 0..n {
                    for b in 0..n {
                        let v = e[a] * e[b].conj();
                        m.sum[a * n + b] += v;
                        m.sq_re[a * n + b] += v.re * v.re;
                        m.sq_im[a * n + b] += v.im * v.im;
                    }
                }
            }
            m
        })
        .collect();

    let mut sum = vec![c(0.0); n * n];
    let mut sq_re = vec![0.0; n * n];
    let mut sq_im = vec![0.0; n * n];
    for p in &parts {
        for k in 0..n * n {
            sum[k] += p.sum[k];
            sq_re[k] += p.sq_re[k];
            sq_im[k] += p.sq_im[k];
        }
    }
    let ns = n_samples as f64;
    let mean: Vec<Complex64> = sum.iter().map(|s| s / ns).collect();
    let se = |sq: &[f64], part: fn(Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let k = a * n + b;
                        let mu = part(mean[k]);
                        ((sq[k] / ns - mu * mu).max(0.0) / ns).sqrt()
                    })
                    .collect()
            })
            .collect()
    };
    let std_err_re = se(&sq_re, |z| z.re);
    let std_err_im = se(&sq_im, |z| z.im);
    let covariance = ComplexMatrix::from_dmatrix(CMat::from_fn(n, n, |a, b| mean[a * n + b]))
        .expect("finite sample covariance");
    Ok(NoiseEstimate {
        covariance,
        std_err_re,
        std_err_im,
        samples: n_samples,
    })
}

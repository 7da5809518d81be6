use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::refine::convex_within;
use super::{certify_convexity, GridResolution, ParetoBoundary, RefineOptions};
use crate::error::Result;
use crate::model::{ComplexMatrix, InterferenceSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOptions {
    pub resolution: GridResolution,
    pub refine: RefineOptions,
    /// Allowed distance below the concave hull, as a fraction of the largest single-user rate.
    pub eps: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            resolution: GridResolution {
                s: 7,
                theta: 6,
                phi: 4,
                c: 4,
            },
            // shorter ascents leave the verdicts unchanged and cut the sweep time by a third
            refine: RefineOptions {
                max_iter: 250,
                ..RefineOptions::coarse()
            },
            eps: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCell {
    pub snr: f64,
    pub snr_inr_db: f64,
    pub trials: usize,
    pub convex: usize,
    pub probability: f64,
}

/// Four i.i.d. CN(0, 1) 2x2 channels for one trial; the stream depends only on `(seed, trial)`.
pub(crate) fn rayleigh_channels(seed: u64, trial: u64) -> Vec<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    (0..4)
        .map(|_| {
            let entries = (0..4)
                .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
                .collect();
            ComplexMatrix::new(2, 2, entries).expect("finite draw")
        })
        .collect()
}

/// INR implied by a linear SNR and an SNR/INR ratio in dB; infinite dB means no interference.
pub fn inr_from_ratio_db(snr: f64, snr_inr_db: f64) -> f64 {
    if snr_inr_db == f64::INFINITY {
        0.0
    } else {
        snr / 10f64.powf(snr_inr_db / 10.0)
    }
}

/// Convexity verdict used by the sweep.
///
/// Distances are taken normal to the hull and scaled by the region's extent:
/// vertical gaps on near-vertical stretches blow up tiny optimizer shortfalls,
/// and convexity does not depend on the rate scale.
pub fn region_is_convex(boundary: &ParetoBoundary, rel_eps: f64) -> Result<bool> {
    let cert = certify_convexity(boundary, rel_eps)?;
    let scale = boundary.xy().iter().fold(0.0_f64, |m, p| m.max(p.0).max(p.1));
    Ok(cert.worst_normal_violation <= rel_eps * scale)
}

/// Fraction of Rayleigh draws whose pure-strategy region is convex, per `(SNR, SNR/INR dB)` cell.
///
/// Trial `t` uses the same channel draw in every cell.
pub fn convexity_probability_sweep(
    snr_list: &[f64],
    snr_inr_db_list: &[f64],
    trials: usize,
    seed: u64,
    opts: &SweepOptions,
) -> Result<Vec<ConvexityCell>> {
    let cells: Vec<(f64, f64)> = snr_list
        .iter()
        .flat_map(|&s| snr_inr_db_list.iter().map(move |&d| (s, d)))
        .collect();
    let per_trial: Vec<Vec<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let h = rayleigh_channels(seed, t);
            cells
                .iter()
                .map(|&(snr, db)| {
                    let sys = InterferenceSystem::two_user(
                        h[0].clone(),
                        h[1].clone(),
                        h[2].clone(),
                        h[3].clone(),
                        snr,
                        inr_from_ratio_db(snr, db),
                    )?;
                    convex_within(&sys, &opts.resolution, &opts.refine, opts.eps)
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    Ok(cells
        .iter()
        .enumerate()
        .map(|(k, &(snr, db))| {
            let convex = per_trial.iter().filter(|v| v[k]).count();
            ConvexityCell {
                snr,
                snr_inr_db: db,
                trials,
                convex,
                probability: if trials == 0 {
                    0.0
                } else {
                    convex as f64 / trials as f64
                },
            }
        })
        .collect())
}

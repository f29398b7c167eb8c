//! Deterministic instance generation for fuzz campaigns.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{AngleModel, FuzzConfig, InvarianceMode, SpectrumModel};
use crate::error::Result;
use crate::numkern::{hermitian_from_spectrum, random_unitary, HermitianMatrix, OrthonormalBasis};
use crate::subspace::{perturb_subspace, AngleVector};

/// One generated problem: a Hermitian matrix and a pair of equidimensional
/// trial subspaces.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: HermitianMatrix,
    pub x: OrthonormalBasis,
    pub y: OrthonormalBasis,
    pub n: usize,
    pub k: usize,
}

/// Generation result; configurations can be unsatisfiable for a sampled
/// shape, which is recorded rather than thrown.
#[derive(Debug, Clone)]
pub enum GeneratedInstance {
    Ok(Instance),
    Skipped { reason: String },
}

/// Mixes the campaign seed and the trial seed into one ChaCha key, so every
/// trial stream is independent and replayable from the pair alone.
fn trial_rng(campaign_seed: u64, trial_seed: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&campaign_seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial_seed.to_le_bytes());
    key[16..24].copy_from_slice(b"ritzfuzz");
    ChaCha20Rng::from_seed(key)
}

fn sample_spectrum(model: SpectrumModel, n: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let mut values: Vec<f64> = match model {
        SpectrumModel::UniformInterval => (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        SpectrumModel::Clustered => {
            let clusters = rng.gen_range(1..=3.min(n));
            let centers: Vec<f64> = (0..clusters).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let jitter = *[0.0, 1e-12, 1e-6].choose(rng).unwrap();
            (0..n)
                .map(|_| {
                    let c = *centers.choose(rng).unwrap();
                    c + jitter * rng.gen_range(-1.0..1.0)
                })
                .collect()
        }
        SpectrumModel::Integer => (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect(),
        SpectrumModel::TwoPoint => {
            let plus = rng.gen_range(1..n);
            (0..n).map(|i| if i < plus { 1.0 } else { -1.0 }).collect()
        }
    };
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

fn sample_angles(
    model: AngleModel,
    k: usize,
    capacity: usize,
    rng: &mut ChaCha20Rng,
) -> AngleVector {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut thetas: Vec<f64> = match model {
        AngleModel::Uniform => (0..k).map(|_| rng.gen_range(0.0..half_pi)).collect(),
        AngleModel::GradedPowers => {
            let base = rng.gen_range(1e-4..half_pi);
            let ratio = rng.gen_range(0.1..0.7);
            (0..k).map(|i| base * ratio.powi(i as i32)).collect()
        }
        AngleModel::NearZero => (0..k)
            .map(|_| 10f64.powf(rng.gen_range(-7.0..-3.0)))
            .collect(),
        AngleModel::MixedWithRightAngles => (0..k)
            .map(|_| match rng.gen_range(0..4) {
                0 => half_pi,
                1 | 2 => rng.gen_range(0.0..half_pi),
                _ => 10f64.powf(rng.gen_range(-7.0..-1.0)),
            })
            .collect(),
    };
    thetas.sort_by(|a, b| b.total_cmp(a));
    for t in thetas.iter_mut().skip(capacity) {
        *t = 0.0;
    }
    AngleVector::new(thetas).expect("sampled angles are in range")
}

fn random_subset(n: usize, k: usize, rng: &mut ChaCha20Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

/// Positions whose eigenvalue lies in the chosen half of the spectrum, the
/// midpoint included on either side.
fn half_candidates(spectrum: &[f64], top: bool) -> Vec<usize> {
    let n = spectrum.len();
    let mid = 0.5 * (spectrum[0] + spectrum[n - 1]);
    let spr = spectrum[0] - spectrum[n - 1];
    let slack = 1e-12 * spr.max(1.0);
    (0..n)
        .filter(|&i| {
            if top {
                spectrum[i] >= mid - slack
            } else {
                spectrum[i] <= mid + slack
            }
        })
        .collect()
}

/// Generates the trial instance for `(cfg.seed, trial_seed)`; deterministic
/// in that pair.
pub fn generate_instance(cfg: &FuzzConfig, trial_seed: u64) -> Result<GeneratedInstance> {
    let mut rng = trial_rng(cfg.seed, trial_seed);

    let n = rng.gen_range(cfg.n_range.0..=cfg.n_range.1);
    // Keep one direction free so nonzero angles are always possible.
    let k_hi = cfg.k_range.1.min(n.saturating_sub(1));
    if k_hi < cfg.k_range.0 {
        return Ok(GeneratedInstance::Skipped {
            reason: format!(
                "sampled n = {n} cannot host a subspace of dimension in [{}, {}]",
                cfg.k_range.0, cfg.k_range.1
            ),
        });
    }
    let k = rng.gen_range(cfg.k_range.0..=k_hi);

    let spectrum = sample_spectrum(cfg.spectrum_model, n, &mut rng);
    let a = hermitian_from_spectrum(&spectrum, rng.gen());

    let x = match cfg.invariance_mode {
        InvarianceMode::InvariantX => {
            let indices = random_subset(n, k, &mut rng);
            crate::ritz::invariant_subspace(&a, &indices)?
        }
        InvarianceMode::NonInvariant => {
            let q = random_unitary(n, rng.gen());
            OrthonormalBasis::new(q.as_matrix().columns(0, k).into_owned())?
        }
        InvarianceMode::ContiguousExtreme => {
            let indices: Vec<usize> = if rng.gen_bool(0.5) {
                (0..k).collect()
            } else {
                (n - k..n).collect()
            };
            crate::ritz::invariant_subspace(&a, &indices)?
        }
        InvarianceMode::HalfSpectrum => {
            let first_top = rng.gen_bool(0.5);
            let mut candidates = half_candidates(&spectrum, first_top);
            if candidates.len() < k {
                candidates = half_candidates(&spectrum, !first_top);
            }
            if candidates.len() < k {
                return Ok(GeneratedInstance::Skipped {
                    reason: format!(
                        "no spectrum half holds {k} eigenvalues (n = {n})"
                    ),
                });
            }
            let mut picked = candidates;
            picked.shuffle(&mut rng);
            picked.truncate(k);
            picked.sort_unstable();
            crate::ritz::invariant_subspace(&a, &picked)?
        }
    };

    let angles = sample_angles(cfg.angle_model, k, n - k, &mut rng);
    let y = perturb_subspace(&x, &angles, rng.gen())?;

    Ok(GeneratedInstance::Ok(Instance { a, x, y, n, k }))
}

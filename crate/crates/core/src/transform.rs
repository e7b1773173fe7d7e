//! Hemisphere transforms of measures and Monte Carlo checks of the identities
//! that tie them to the angular metric.
//!
//! With σ the rotation-invariant measure of total mass π on the sphere of
//! directions,
//!
//! ```text
//! d(x, y)             = ∫ |1{t·x > 0} - 1{t·y > 0}|² dσ(t)
//! ∫∫ d d(μ₁ - μ₂)²    = -2 ∫ (μ₁(H_t) - μ₂(H_t))² dσ(t)
//! ```
//!
//! σ-integrals are estimated by uniform sampling scaled by π. Samples are
//! processed in fixed-size chunks, each with its own generator stream, so the
//! estimate is a function of (inputs, samples, seed) alone.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dims, Error, Result};
use crate::measure::{
    hemisphere_mass, invariant_part, partitioning_mass, DiscreteMeasure, HemisphereFingerprint,
};
use crate::sampling::stream_rng;
use crate::sphere::{dot, raw_angle, MetricPower, UnitVector};

pub const MIN_SAMPLES: usize = 100;

/// Masses closer than this are treated as agreeing.
pub const AGREE_TOL: f64 = 1e-12;
/// Masses further apart than this are treated as different.
pub const DIFFER_TOL: f64 = 1e-9;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    /// Sample standard deviation over √samples.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Running mean and sum of squared deviations (Welford), mergeable across
/// chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 =
            self.m2 + other.m2 + delta * delta * (self.count * other.count) as f64 / count as f64;
        Moments { count, mean, m2 }
    }
}

/// Mean of `integrand` over `samples` uniform directions in R^dim.
///
/// The integrand receives an unnormalized Gaussian vector; only its direction
/// is uniform, so it must depend on the sign pattern of dot products only.
fn sphere_average<F>(dim: usize, samples: usize, seed: u64, integrand: F) -> MonteCarloEstimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut t = vec![0.0; dim];
            let mut acc = Moments::default();
            for _ in 0..len {
                t.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                acc.push(integrand(&t));
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.count > 1 {
        total.m2 / (total.count - 1) as f64
    } else {
        0.0
    };
    MonteCarloEstimate {
        value: total.mean,
        std_error: (var.max(0.0) / total.count as f64).sqrt(),
        samples,
        seed,
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    Ok(())
}

/// Estimates d(x, y) as π times the fraction of random poles that separate
/// x from y.
pub fn mc_distance_identity(
    x: &UnitVector,
    y: &UnitVector,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_dims(x.dim(), y.dim())?;
    check_samples(samples)?;
    let (a, b) = (x.coords(), y.coords());
    Ok(sphere_average(x.dim(), samples, seed, |t| {
        if (dot(t, a) > 0.0) != (dot(t, b) > 0.0) {
            PI
        } else {
            0.0
        }
    }))
}

/// Both sides of the energy identity for two probability measures.
///
/// Returns the exact double sum Σᵢⱼ wᵢwⱼ d(aᵢ, aⱼ) over the signed measure
/// μ₁ - μ₂, and a Monte Carlo estimate of -2π·E_t[(μ₁(H_t) - μ₂(H_t))²]. The
/// estimate's value and standard error are both on that scaled quantity.
pub fn mc_energy_identity(
    m1: &DiscreteMeasure,
    m2: &DiscreteMeasure,
    samples: usize,
    seed: u64,
) -> Result<(f64, MonteCarloEstimate)> {
    check_dims(m1.dim(), m2.dim())?;
    m1.require_probability()?;
    m2.require_probability()?;
    check_samples(samples)?;
    let lhs = energy_functional(m1, m2, MetricPower::ONE)?;
    let rhs = sphere_average(m1.dim(), samples, seed, |t| {
        let gap = m1.open_mass_raw(t) - m2.open_mass_raw(t);
        -2.0 * PI * gap * gap
    });
    Ok((lhs, rhs))
}

/// ∫∫ d^r d(μ₁ - μ₂)², evaluated exactly on atoms.
///
/// Nonpositive on spheres; zero iff μ₁ = μ₂ when the joint support has at most
/// one antipodal pair (or r < 1).
pub fn energy_functional(
    m1: &DiscreteMeasure,
    m2: &DiscreteMeasure,
    r: MetricPower,
) -> Result<f64> {
    check_dims(m1.dim(), m2.dim())?;
    let atoms: Vec<&UnitVector> = m1.atoms().iter().chain(m2.atoms()).collect();
    let weights: Vec<f64> = m1
        .weights()
        .iter()
        .copied()
        .chain(m2.weights().iter().map(|w| -w))
        .collect();
    let mut acc = 0.0;
    for (i, (a, wa)) in atoms.iter().zip(&weights).enumerate() {
        let mut row = 0.0;
        for (j, (b, wb)) in atoms.iter().zip(&weights).enumerate() {
            if i != j {
                row += wb * r.apply(raw_angle(a.coords(), b.coords()));
            }
        }
        acc += wa * row;
    }
    Ok(acc)
}

/// a_μ(x) = Σᵢ wᵢ d(x, aᵢ)^r at each query point.
pub fn expected_distance_profile(
    m: &DiscreteMeasure,
    query_points: &[UnitVector],
    r: MetricPower,
) -> Result<Vec<f64>> {
    query_points
        .iter()
        .map(|x| {
            check_dims(m.dim(), x.dim())?;
            Ok(m.iter()
                .map(|(a, w)| w * r.apply(raw_angle(x.coords(), a.coords())))
                .sum())
        })
        .collect()
}

/// True iff the fingerprints agree componentwise to within `tol`.
pub fn fingerprints_equal(
    f1: &HemisphereFingerprint,
    f2: &HemisphereFingerprint,
    tol: f64,
) -> Result<bool> {
    if f1.directions != f2.directions || f1.restricted_to != f2.restricted_to {
        return Err(Error::DirectionMismatch);
    }
    Ok(f1
        .masses
        .iter()
        .zip(&f2.masses)
        .all(|(a, b)| (a - b).abs() <= tol))
}

/// Finite-direction test of μ(H_t) = μ(H_{-t}).
pub fn r_invariance_check(
    m: &DiscreteMeasure,
    directions: &[UnitVector],
    tol: f64,
) -> Result<bool> {
    if directions.is_empty() {
        return Err(Error::Empty("directions"));
    }
    for t in directions {
        let here = hemisphere_mass(m, t, None)?;
        let there = hemisphere_mass(m, &t.reflect(), None)?;
        if (here - there).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    Same,
    Differ,
    Inconclusive,
}

/// Compares two probability measures through their partitioning-hemisphere
/// masses on the sampled poles.
///
/// Agreeing masses only pin a measure down when it has no antipodally
/// symmetric mass, so `Same` additionally requires both invariant parts to
/// vanish and the atoms to match directly.
pub fn reconstruct_check(
    m1: &DiscreteMeasure,
    m2: &DiscreteMeasure,
    directions: &[UnitVector],
) -> Result<Reconstruction> {
    check_dims(m1.dim(), m2.dim())?;
    m1.require_probability()?;
    m2.require_probability()?;
    let mut worst: f64 = 0.0;
    for t in directions {
        let gap = (partitioning_mass(m1, t)? - partitioning_mass(m2, t)?).abs();
        if gap > DIFFER_TOL {
            return Ok(Reconstruction::Differ);
        }
        worst = worst.max(gap);
    }
    let asymmetric = invariant_part(m1)?.is_empty() && invariant_part(m2)?.is_empty();
    if worst <= AGREE_TOL && asymmetric && m1.approx_eq(m2, DIFFER_TOL) {
        Ok(Reconstruction::Same)
    } else {
        Ok(Reconstruction::Inconclusive)
    }
}

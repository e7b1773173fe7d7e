//! Randomized verification runs, one per identity or theorem-level property.
//!
//! Each check draws its own configurations from a seed and reports the worst
//! value of its figure of merit together with a pass flag.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{antisymmetrize, fingerprint, invariant_part, DiscreteMeasure};
use crate::negtype::{
    distance_matrix, quadratic_form, strictness_certificate, StrictnessCertificate,
};
use crate::sampling::stream_rng;
use crate::sphere::{
    angular_distance, sample_uniform, uniform_direction, Hemisphere, MetricPower, UnitVector,
};
use crate::transform::{
    mc_distance_identity, mc_energy_identity, r_invariance_check, MonteCarloEstimate, DIFFER_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// d(x, y) as a σ-integral of separating hemispheres.
    Identity,
    /// Energy of μ₁ - μ₂ as -2 ∫ (μ₁(H_t) - μ₂(H_t))² dσ(t).
    Energy,
    /// Nonpositivity of the sum-zero quadratic form.
    Negtype,
    /// Hemisphere fingerprints separate measures on an open hemisphere.
    Cw,
    /// μ(H_t) = μ(H_{-t}) on sampled poles iff μ is R-invariant.
    Symm,
    /// 2θ(S) ≥ |θ - R_*θ|(S) with equality iff θ has no invariant part.
    Compare,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::Identity,
        Check::Energy,
        Check::Negtype,
        Check::Cw,
        Check::Symm,
        Check::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Identity => "identity",
            Check::Energy => "energy",
            Check::Negtype => "negtype",
            Check::Cw => "cw",
            Check::Symm => "symm",
            Check::Compare => "compare",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Check::Identity | Check::Energy => 20,
            Check::Negtype => 500,
            Check::Cw | Check::Symm | Check::Compare => 200,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub check: Check,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub failures: usize,
    pub metrics: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<MonteCarloEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<StrictnessCertificate>,
}

impl VerifyReport {
    fn new(check: Check, trials: usize, seed: u64) -> Self {
        Self {
            check,
            trials,
            seed,
            passed: true,
            failures: 0,
            metrics: BTreeMap::new(),
            estimate: None,
            certificate: None,
        }
    }

    fn record(&mut self, ok: bool) {
        if !ok {
            self.failures += 1;
            self.passed = false;
        }
    }
}

pub fn run(check: Check, trials: usize, samples: usize, seed: u64) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    match check {
        Check::Identity => identity(trials, samples, seed),
        Check::Energy => energy(trials, samples, seed),
        Check::Negtype => negtype(trials, seed),
        Check::Cw => cw(trials, seed),
        Check::Symm => symm(trials, seed),
        Check::Compare => compare(trials, seed),
    }
}

fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn random_measure<R: Rng>(rng: &mut R, dim: usize, max_atoms: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=max_atoms);
    let atoms = (0..k).map(|_| uniform_direction(rng, dim)).collect();
    DiscreteMeasure::new(atoms, random_weights(rng, k)).expect("nonempty")
}

/// A point of H_pole at least `margin` away from its boundary.
fn point_in_hemisphere<R: Rng>(rng: &mut R, pole: &UnitVector, margin: f64) -> UnitVector {
    loop {
        let x = uniform_direction(rng, pole.dim());
        let h = x.dot(pole).expect("same dimension");
        if h.abs() > margin {
            return if h > 0.0 { x } else { x.reflect() };
        }
    }
}

fn identity(trials: usize, samples: usize, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(Check::Identity, trials, seed);
    let x = UnitVector::basis(3, 0)?;
    let y = UnitVector::basis(3, 1)?;
    let est = mc_distance_identity(&x, &y, samples, seed)?;
    let z = (est.value - PI / 2.0).abs() / est.std_error;
    rep.record(z <= 3.0);
    rep.metrics.insert("builtin_exact", PI / 2.0);
    rep.metrics.insert("builtin_z", z);
    rep.estimate = Some(est);

    let mut rng = stream_rng(seed, 1);
    let mut worst: f64 = 0.0;
    for k in 0..trials {
        let dim = 3 + k % 2;
        let a = uniform_direction(&mut rng, dim);
        let b = uniform_direction(&mut rng, dim);
        let exact = angular_distance(&a, &b, MetricPower::ONE)?;
        let e = mc_distance_identity(&a, &b, samples, seed.wrapping_add(1 + k as u64))?;
        let z = (e.value - exact).abs() / e.std_error;
        worst = worst.max(z);
        rep.record(z <= 3.0);

        let same = mc_distance_identity(&a, &a, MIN_ENDPOINT_SAMPLES, seed)?;
        let anti = mc_distance_identity(&a, &a.reflect(), MIN_ENDPOINT_SAMPLES, seed)?;
        rep.record(same.value == 0.0 && anti.value == PI);
    }
    rep.metrics.insert("max_z", worst);
    Ok(rep)
}

const MIN_ENDPOINT_SAMPLES: usize = 1000;

fn energy(trials: usize, samples: usize, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(Check::Energy, trials, seed);
    let mut rng = stream_rng(seed, 1);
    let mut worst: f64 = 0.0;
    let mut dirac_gap: f64 = 0.0;
    for k in 0..trials {
        let m1 = random_measure(&mut rng, 3, 5);
        let m2 = random_measure(&mut rng, 3, 5);
        let (lhs, rhs) = mc_energy_identity(&m1, &m2, samples, seed.wrapping_add(1 + k as u64))?;
        let z = (lhs - rhs.value).abs() / rhs.std_error;
        worst = worst.max(z);
        rep.record(z <= 4.0);

        let x = uniform_direction(&mut rng, 3);
        let y = uniform_direction(&mut rng, 3);
        let (dl, _) = mc_energy_identity(
            &DiscreteMeasure::dirac(x.clone()),
            &DiscreteMeasure::dirac(y.clone()),
            MIN_ENDPOINT_SAMPLES,
            seed,
        )?;
        let gap = (dl + 2.0 * angular_distance(&x, &y, MetricPower::ONE)?).abs();
        dirac_gap = dirac_gap.max(gap);
        rep.record(gap == 0.0);
    }
    rep.metrics.insert("max_z", worst);
    rep.metrics.insert("max_dirac_gap", dirac_gap);
    Ok(rep)
}

fn negtype(trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(Check::Negtype, trials, seed);
    let mut rng = stream_rng(seed, 1);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..trials {
        let dim = 2 + k % 4;
        let n = rng.random_range(2..=12);
        let r = if k % 2 == 0 {
            MetricPower::ONE
        } else {
            MetricPower::new(0.5)?
        };
        let pts: Vec<_> = (0..n).map(|_| uniform_direction(&mut rng, dim)).collect();
        let dm = distance_matrix(&pts, r)?;
        let mut alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = alpha.iter().sum::<f64>() / n as f64;
        alpha.iter_mut().for_each(|a| *a -= mean);
        let q = quadratic_form(&dm, &alpha)?;
        worst = worst.max(q);
        rep.record(q <= 1e-10);
    }
    rep.metrics.insert("max_quadratic_form", worst);

    let circle: Vec<UnitVector> = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
        .iter()
        .map(|c| UnitVector::from_slice(c))
        .collect::<Result<_>>()?;
    let dm = distance_matrix(&circle, MetricPower::ONE)?;
    let q = quadratic_form(&dm, &[1.0, 1.0, -1.0, -1.0])?;
    rep.record(q.abs() <= 1e-12);
    rep.metrics.insert("circle_quadratic_form", q);
    rep.certificate = Some(strictness_certificate(&dm)?);
    Ok(rep)
}

fn cw(trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(Check::Cw, trials, seed);
    let mut rng = stream_rng(seed, 1);
    let mut weakest = f64::INFINITY;
    for k in 0..trials {
        let dim = 2 + k % 3;
        let pole = uniform_direction(&mut rng, dim);
        let pool: Vec<_> = (0..8)
            .map(|_| point_in_hemisphere(&mut rng, &pole, 1e-3))
            .collect();
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
            let n = rng.random_range(1..=8);
            let atoms: Vec<_> = (0..n)
                .map(|_| pool[rng.random_range(0..pool.len())].clone())
                .collect();
            DiscreteMeasure::new(atoms, random_weights(rng, n)).expect("nonempty")
        };
        let (m1, m2) = loop {
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            if !a.approx_eq(&b, DIFFER_TOL) {
                break (a, b);
            }
        };
        let dirs = sample_uniform(dim, 500, rng.random())?;
        let h = Hemisphere::new(pole);
        let f1 = fingerprint(&m1, &dirs, Some(&h))?;
        let f2 = fingerprint(&m2, &dirs, Some(&h))?;
        let gap = f1
            .masses
            .iter()
            .zip(&f2.masses)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        weakest = weakest.min(gap);
        rep.record(gap > DIFFER_TOL);
    }
    rep.metrics.insert("min_max_fingerprint_gap", weakest);
    Ok(rep)
}

fn symmetric_measure<R: Rng>(rng: &mut R, dim: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=4);
    let w = random_weights(rng, k);
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for wi in w {
        let x = uniform_direction(rng, dim);
        atoms.push(x.reflect());
        atoms.push(x);
        weights.extend([wi / 2.0, wi / 2.0]);
    }
    DiscreteMeasure::new(atoms, weights).expect("nonempty")
}

fn symm(trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(Check::Symm, trials, seed);
    let mut rng = stream_rng(seed, 1);
    let mut agree = 0usize;
    for k in 0..trials {
        let dim = 2 + k % 3;
        let m = if k % 2 == 0 {
            symmetric_measure(&mut rng, dim)
        } else {
            random_measure(&mut rng, dim, 6)
        };
        let dirs = sample_uniform(dim, 200, rng.random())?;
        let seen = r_invariance_check(&m, &dirs, 1e-12)?;
        let truth = invariant_part(&m)?.approx_eq(&m, 1e-12);
        if seen == truth {
            agree += 1;
        }
        rep.record(seen == truth);
    }
    rep.metrics
        .insert("agreement", agree as f64 / trials as f64);
    Ok(rep)
}

fn compare(trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(Check::Compare, trials, seed);
    let mut rng = stream_rng(seed, 1);
    let mut min_slack = f64::INFINITY;
    let mut equality_cases = 0usize;
    for k in 0..trials {
        let dim = 2 + k % 3;
        let scale = rng.random_range(0.1..10.0);
        let base = random_measure(&mut rng, dim, 6);
        let theta = if k % 2 == 0 {
            base.add_scaled(&symmetric_measure(&mut rng, dim), 0.5)?
        } else {
            base
        }
        .scaled(scale);
        let slack = 2.0 * theta.total_mass() - antisymmetrize(&theta).total_variation();
        min_slack = min_slack.min(slack);
        let equal = slack.abs() <= 1e-12;
        if equal {
            equality_cases += 1;
        }
        let no_invariant = invariant_part(&theta)?.is_empty();
        rep.record(slack >= -1e-12 && equal == no_invariant);
    }
    rep.metrics.insert("min_slack", min_slack);
    rep.metrics.insert("equality_cases", equality_cases as f64);
    Ok(rep)
}

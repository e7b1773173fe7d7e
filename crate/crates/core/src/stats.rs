//! Energy statistics with angular distances: distance covariance, energy
//! distance and their permutation tests.
//!
//! All tests report add-one permutation p-values. Each replicate draws from
//! its own generator stream keyed by (seed, replicate index), so reports are
//! identical regardless of thread count.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dims, Error, Result};
use crate::negtype::raw_distance_matrix;
use crate::sampling::{stream_rng, ReferenceSampler};
use crate::sphere::{MetricPower, UnitVector};

pub const MIN_PAIRED: usize = 4;
pub const MIN_PERMUTATIONS: usize = 99;

/// Relative slack when counting replicates at least as extreme as the observed
/// statistic; replicates that equal it up to summation order must count.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PairedSample {
    xs: Vec<UnitVector>,
    ys: Vec<UnitVector>,
}

impl PairedSample {
    pub fn new(xs: Vec<UnitVector>, ys: Vec<UnitVector>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.len() < MIN_PAIRED {
            return Err(Error::InvalidArgument(format!(
                "paired sample needs at least {MIN_PAIRED} observations, got {}",
                xs.len()
            )));
        }
        homogeneous(&xs)?;
        homogeneous(&ys)?;
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[UnitVector] {
        &self.xs
    }

    pub fn ys(&self) -> &[UnitVector] {
        &self.ys
    }
}

fn homogeneous(points: &[UnitVector]) -> Result<usize> {
    let dim = points.first().ok_or(Error::Empty("points"))?.dim();
    for p in points {
        check_dims(dim, p.dim())?;
    }
    Ok(dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    DcovPermutation,
    EnergyPermutation,
    EnergyGof,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    /// (1 + #{replicates ≥ statistic}) / (1 + replications)
    pub p_value: f64,
    pub replications: usize,
    pub seed: u64,
    pub method: TestMethod,
}

/// Aᵢⱼ = aᵢⱼ - āᵢ· - ā·ⱼ + ā··
pub fn double_center(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| d.row(i).sum() / n as f64).collect();
    let col_means: Vec<f64> = (0..n).map(|j| d.column(j).sum() / n as f64).collect();
    let grand = d.sum() / (n * n) as f64;
    DMatrix::from_fn(n, n, |i, j| d[(i, j)] - row_means[i] - col_means[j] + grand)
}

/// V²ₙ = (1/n²) Σᵢⱼ AᵢⱼBᵢⱼ from raw pairwise distance matrices.
///
/// This is the computation behind [`dcov_statistic`], without its minimum
/// sample-size guard.
pub fn dcov_from_distance_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Empty("distance matrix"));
    }
    let ca = double_center(a);
    let cb = double_center(b);
    Ok(ca.component_mul(&cb).sum() / (n * n) as f64)
}

/// Squared distance covariance (V-statistic) with angular distances.
pub fn dcov_statistic(s: &PairedSample, r: MetricPower) -> Result<f64> {
    dcov_from_distance_matrices(
        &raw_distance_matrix(&s.xs, r),
        &raw_distance_matrix(&s.ys, r),
    )
}

fn check_permutations(permutations: usize) -> Result<()> {
    if permutations < MIN_PERMUTATIONS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_PERMUTATIONS} permutations required, got {permutations}"
        )));
    }
    Ok(())
}

fn permutation_p_value(observed: f64, replicates: &[f64]) -> f64 {
    let cutoff = observed - TIE_TOL * observed.abs().max(1.0);
    let extreme = replicates.iter().filter(|r| **r >= cutoff).count();
    (1 + extreme) as f64 / (1 + replicates.len()) as f64
}

/// Runs `permutations` replicates in parallel; replicate k shuffles an index
/// vector with generator stream k + 1 (stream 0 is left to reference draws).
fn replicate<F>(n: usize, permutations: usize, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    (0..permutations)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64 + 1);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            stat(&idx)
        })
        .collect()
}

/// Permutation test of independence between the two marginals of `s`.
pub fn independence_test(
    s: &PairedSample,
    r: MetricPower,
    permutations: usize,
    seed: u64,
) -> Result<TestReport> {
    check_permutations(permutations)?;
    let n = s.len();
    let a = double_center(&raw_distance_matrix(&s.xs, r));
    // Double centering commutes with relabeling, so the permuted statistic is
    // Σᵢⱼ Aᵢⱼ B_{π(i)π(j)} with B centered once.
    let b = double_center(&raw_distance_matrix(&s.ys, r));
    let norm = (n * n) as f64;
    let observed = a.component_mul(&b).sum() / norm;
    let reps = replicate(n, permutations, seed, |perm| {
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += a[(i, j)] * b[(perm[i], perm[j])];
            }
        }
        acc / norm
    });
    Ok(TestReport {
        statistic: observed,
        p_value: permutation_p_value(observed, &reps),
        replications: permutations,
        seed,
        method: TestMethod::DcovPermutation,
    })
}

/// 2·mean d(aᵢ, bⱼ) - mean d(aᵢ, aᵢ') - mean d(bⱼ, bⱼ'), means over all ordered
/// pairs.
pub fn energy_distance(a: &[UnitVector], b: &[UnitVector], r: MetricPower) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let dim = homogeneous(a)?;
    check_dims(dim, homogeneous(b)?)?;
    let pooled: Vec<UnitVector> = a.iter().chain(b).cloned().collect();
    let d = raw_distance_matrix(&pooled, r);
    let labels: Vec<usize> = (0..pooled.len()).collect();
    Ok(split_energy(&d, &labels, a.len()))
}

/// Energy distance between the first `n_a` entries of `order` and the rest,
/// read off the pooled distance matrix.
fn split_energy(d: &DMatrix<f64>, order: &[usize], n_a: usize) -> f64 {
    let (left, right) = order.split_at(n_a);
    let block = |p: &[usize], q: &[usize]| {
        let mut s = 0.0;
        for &i in p {
            for &j in q {
                s += d[(i, j)];
            }
        }
        s / (p.len() * q.len()) as f64
    };
    2.0 * block(left, right) - block(left, left) - block(right, right)
}

/// Two-sample energy test: pooled observations are re-split at the original
/// sizes in each replicate.
pub fn two_sample_test(
    a: &[UnitVector],
    b: &[UnitVector],
    r: MetricPower,
    permutations: usize,
    seed: u64,
) -> Result<TestReport> {
    check_permutations(permutations)?;
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(
            "each sample needs at least 2 points".into(),
        ));
    }
    let dim = homogeneous(a)?;
    check_dims(dim, homogeneous(b)?)?;
    let pooled: Vec<UnitVector> = a.iter().chain(b).cloned().collect();
    let d = raw_distance_matrix(&pooled, r);
    let identity: Vec<usize> = (0..pooled.len()).collect();
    let observed = split_energy(&d, &identity, a.len());
    let reps = replicate(pooled.len(), permutations, seed, |perm| {
        split_energy(&d, perm, a.len())
    });
    Ok(TestReport {
        statistic: observed,
        p_value: permutation_p_value(observed, &reps),
        replications: permutations,
        seed,
        method: TestMethod::EnergyPermutation,
    })
}

/// Goodness of fit against a reference distribution: `m` reference points are
/// drawn with `seed` and compared to `sample` by [`two_sample_test`].
pub fn gof_test<S: ReferenceSampler>(
    sample: &[UnitVector],
    reference: &S,
    m: usize,
    r: MetricPower,
    permutations: usize,
    seed: u64,
) -> Result<TestReport> {
    if m < sample.len() {
        return Err(Error::InvalidArgument(format!(
            "reference size {m} is smaller than the sample size {}",
            sample.len()
        )));
    }
    if let Some(p) = sample.first() {
        check_dims(reference.dim(), p.dim())?;
    }
    let draws = reference.sample(m, seed);
    let mut report = two_sample_test(sample, &draws, r, permutations, seed)?;
    report.method = TestMethod::EnergyGof;
    Ok(report)
}

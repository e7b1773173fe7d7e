//! Negative type of the angular metric on finite point sets.
//!
//! The quadratic form Σ αᵢαⱼ d(xᵢ, xⱼ) is nonpositive on sum-zero weights for
//! every finite subset of a sphere. Whether it is *strictly* negative is
//! decided spectrally: the form is restricted to an orthonormal basis of the
//! sum-zero hyperplane and its top eigenvalue inspected.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{check_dims, Error, Result};
use crate::sphere::{raw_angle, MetricPower, UnitVector};

/// Restricted eigenvalues above `-STRICT_TOL` count as zero.
pub const STRICT_TOL: f64 = 1e-10;

/// Angular tolerance below π for declaring two points antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-9;

const SUM_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: DMatrix<f64>,
    points: Vec<UnitVector>,
    r: MetricPower,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn power(&self) -> MetricPower {
        self.r
    }
}

/// Pairwise d^r matrix; the diagonal is exactly zero and the matrix exactly
/// symmetric.
pub fn distance_matrix(points: &[UnitVector], r: MetricPower) -> Result<DistanceMatrix> {
    let dim = points.first().ok_or(Error::Empty("points"))?.dim();
    for p in points {
        check_dims(dim, p.dim())?;
    }
    Ok(DistanceMatrix {
        entries: raw_distance_matrix(points, r),
        points: points.to_vec(),
        r,
    })
}

pub(crate) fn raw_distance_matrix(points: &[UnitVector], r: MetricPower) -> DMatrix<f64> {
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = r.apply(raw_angle(points[i].coords(), points[j].coords()));
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    m
}

/// Σᵢⱼ αᵢ αⱼ d(xᵢ, xⱼ).
///
/// Weights that do not sum to zero are still evaluated, with a warning.
pub fn quadratic_form(dm: &DistanceMatrix, alpha: &[f64]) -> Result<f64> {
    if alpha.len() != dm.len() {
        return Err(Error::LengthMismatch {
            expected: dm.len(),
            found: alpha.len(),
        });
    }
    let total: f64 = alpha.iter().sum();
    if total.abs() > SUM_ZERO_TOL {
        log::warn!("quadratic form evaluated on weights summing to {total:e}");
    }
    Ok(bilinear(&dm.entries, alpha))
}

pub(crate) fn bilinear(d: &DMatrix<f64>, alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += d[(i, j)] * alpha[j];
        }
        acc += alpha[i] * row;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    StrictlyNegative,
    NullDirectionFound,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrictnessCertificate {
    /// Largest eigenvalue of the form on unit sum-zero vectors. `-inf` for a
    /// single point, where that subspace is trivial.
    pub max_restricted_eigenvalue: f64,
    pub verdict: Strictness,
    /// Unit sum-zero vector attaining the maximum.
    pub witness: Option<Vec<f64>>,
}

/// Orthonormal basis of {α : Σα = 0} as the columns of an n × (n-1) matrix
/// (Helmert contrasts).
fn sum_zero_basis(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = scale;
        }
        q[(k, k - 1)] = -(k as f64) * scale;
    }
    q
}

/// Spectral test of strict negative type on the points of `dm`.
///
/// The maximum of αᵀDα over unit α with Σα = 0 is the top eigenvalue of QᵀDQ,
/// where Q spans the sum-zero hyperplane; this is the same spectrum PDP has on
/// that hyperplane, with the all-ones direction already removed.
pub fn strictness_certificate(dm: &DistanceMatrix) -> Result<StrictnessCertificate> {
    let n = dm.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if dm.points[i].coincides(&dm.points[j]) {
                return Err(Error::RepeatedPoints);
            }
        }
    }
    if n < 2 {
        return Ok(StrictnessCertificate {
            max_restricted_eigenvalue: f64::NEG_INFINITY,
            verdict: Strictness::StrictlyNegative,
            witness: None,
        });
    }
    let q = sum_zero_basis(n);
    let mut restricted = q.transpose() * &dm.entries * &q;
    // symmetrize away rounding before the symmetric solver
    restricted = (&restricted + restricted.transpose()) * 0.5;
    let eig = SymmetricEigen::new(restricted);
    let (top, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("n >= 2");
    let v: DVector<f64> = &q * eig.eigenvectors.column(top);
    let mut witness: Vec<f64> = v.iter().copied().collect();
    let norm = witness.iter().map(|w| w * w).sum::<f64>().sqrt();
    witness.iter_mut().for_each(|w| *w /= norm);

    let verdict = if lambda < -STRICT_TOL {
        Strictness::StrictlyNegative
    } else if lambda <= STRICT_TOL {
        Strictness::NullDirectionFound
    } else {
        Strictness::Indefinite
    };
    Ok(StrictnessCertificate {
        max_restricted_eigenvalue: lambda,
        verdict,
        witness: Some(witness),
    })
}

/// Index pairs (i, j), i < j, at angular distance greater than π - 1e-9.
pub fn antipodal_pairs(points: &[UnitVector]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i].dim() == points[j].dim()
                && raw_angle(points[i].coords(), points[j].coords())
                    > std::f64::consts::PI - ANTIPODAL_TOL
            {
                out.push((i, j));
            }
        }
    }
    out
}

//! Finitely supported signed measures on S^n.
//!
//! A [`DiscreteMeasure`] is a list of distinct atoms with nonzero real weights.
//! Positive and negative parts are computed on demand, so differences such as
//! θ - R_*θ stay a single merge of atom lists.

use serde::Serialize;

use crate::error::{check_dims, Error, Result};
use crate::sampling::stream_rng;
use crate::sphere::{dot, partition_side, uniform_direction, Hemisphere, UnitVector};

/// Tolerance on total mass for a measure to count as a probability.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Smallest |u·x| accepted when searching for a great sphere that avoids atoms.
pub const NULL_SPHERE_MARGIN: f64 = 1e-12;

const NULL_SPHERE_DRAWS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<UnitVector>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure, merging atoms closer than [`crate::sphere::POINT_TOL`]
    /// and dropping atoms whose merged weight is zero.
    pub fn new(atoms: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        let dim = atoms.first().ok_or(Error::Empty("atoms"))?.dim();
        Self::with_dim(dim, atoms, weights)
    }

    pub fn with_dim(dim: usize, atoms: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: atoms.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut merged = Self::zero(dim);
        for (a, w) in atoms.into_iter().zip(weights) {
            check_dims(dim, a.dim())?;
            merged.push_merge(a, w);
        }
        merged.prune();
        Ok(merged)
    }

    /// Equal weights 1/len on the given points.
    pub fn uniform(points: Vec<UnitVector>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        Self::new(points, vec![w; n])
    }

    pub fn dirac(x: UnitVector) -> Self {
        Self {
            dim: x.dim(),
            atoms: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn push_merge(&mut self, atom: UnitVector, weight: f64) {
        match self.atoms.iter().position(|a| a.coincides(&atom)) {
            Some(i) => self.weights[i] += weight,
            None => {
                self.atoms.push(atom);
                self.weights.push(weight);
            }
        }
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.atoms.len() {
            if self.weights[i] == 0.0 {
                self.atoms.swap_remove(i);
                self.weights.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[UnitVector] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UnitVector, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc + w)
    }

    /// Sum of absolute atom weights.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc + w.abs())
    }

    pub fn is_positive(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0)
    }

    pub fn is_probability(&self) -> bool {
        self.is_positive() && (self.total_mass() - 1.0).abs() <= PROBABILITY_TOL
    }

    pub(crate) fn require_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability)
        }
    }

    /// Weight on the atom coinciding with `x`, or 0.
    pub fn weight_at(&self, x: &UnitVector) -> f64 {
        self.atoms
            .iter()
            .position(|a| a.coincides(x))
            .map_or(0.0, |i| self.weights[i])
    }

    pub fn positive_part(&self) -> DiscreteMeasure {
        self.filter_weights(|w| w > 0.0)
    }

    pub fn negative_part(&self) -> DiscreteMeasure {
        let mut m = self.filter_weights(|w| w < 0.0);
        m.weights.iter_mut().for_each(|w| *w = -*w);
        m
    }

    fn filter_weights(&self, keep: impl Fn(f64) -> bool) -> DiscreteMeasure {
        let (atoms, weights) = self
            .iter()
            .filter(|(_, w)| keep(*w))
            .map(|(a, w)| (a.clone(), w))
            .unzip();
        DiscreteMeasure {
            dim: self.dim,
            atoms,
            weights,
        }
    }

    pub fn scaled(&self, factor: f64) -> DiscreteMeasure {
        let mut m = self.clone();
        m.weights.iter_mut().for_each(|w| *w *= factor);
        m.prune();
        m
    }

    /// self + factor·other, with atoms merged.
    pub fn add_scaled(&self, other: &DiscreteMeasure, factor: f64) -> Result<DiscreteMeasure> {
        check_dims(self.dim, other.dim)?;
        let mut m = self.clone();
        for (a, w) in other.iter() {
            m.push_merge(a.clone(), factor * w);
        }
        m.prune();
        Ok(m)
    }

    pub fn difference(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure> {
        self.add_scaled(other, -1.0)
    }

    /// Total weight of atoms satisfying `pred`. Folds from +0.0, since float
    /// `sum` of an empty iterator yields -0.0.
    pub fn mass_where(&self, mut pred: impl FnMut(&UnitVector) -> bool) -> f64 {
        self.iter()
            .filter(|(a, _)| pred(a))
            .fold(0.0, |acc, (_, w)| acc + w)
    }

    /// Mass of the open hemisphere with (unnormalized) pole `t`; only the sign
    /// of t·x is read, so any positive multiple of the pole gives the same value.
    pub(crate) fn open_mass_raw(&self, t: &[f64]) -> f64 {
        self.iter()
            .filter(|(a, _)| dot(t, a.coords()) > 0.0)
            .fold(0.0, |acc, (_, w)| acc + w)
    }

    /// Atomwise comparison: same support at [`crate::sphere::POINT_TOL`] and
    /// weights within `tol`.
    pub fn approx_eq(&self, other: &DiscreteMeasure, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let covered = |m: &DiscreteMeasure, n: &DiscreteMeasure| {
            m.iter().all(|(a, w)| (w - n.weight_at(a)).abs() <= tol)
        };
        covered(self, other) && covered(other, self)
    }
}

/// Image of `m` under x ↦ -x.
pub fn pushforward_reflect(m: &DiscreteMeasure) -> DiscreteMeasure {
    DiscreteMeasure {
        dim: m.dim,
        atoms: m.atoms.iter().map(UnitVector::reflect).collect(),
        weights: m.weights.clone(),
    }
}

/// θ - R_*θ.
pub fn antisymmetrize(m: &DiscreteMeasure) -> DiscreteMeasure {
    m.add_scaled(&pushforward_reflect(m), -1.0)
        .expect("reflection preserves dimension")
}

/// Largest R-invariant measure below a positive measure.
///
/// Each antipodal pair {x, -x} keeps min(m{x}, m{-x}) on both points; atoms
/// without an antipodal partner drop out.
pub fn invariant_part(m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if !m.is_positive() {
        return Err(Error::NegativeWeight);
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (i, (a, w)) in m.iter().enumerate() {
        let partner = m
            .atoms
            .iter()
            .enumerate()
            .find(|(j, b)| *j != i && a.is_antipodal_to(b));
        if let Some((j, _)) = partner {
            atoms.push(a.clone());
            weights.push(w.min(m.weights[j]));
        }
    }
    DiscreteMeasure::with_dim(m.dim, atoms, weights)
}

/// m(H_pole), or m(H_pole ∩ restriction) when restricted.
pub fn hemisphere_mass(
    m: &DiscreteMeasure,
    pole: &UnitVector,
    restriction: Option<&Hemisphere>,
) -> Result<f64> {
    check_dims(m.dim, pole.dim())?;
    if let Some(h) = restriction {
        check_dims(m.dim, h.dim())?;
    }
    Ok(m.mass_where(|x| {
        dot(pole.coords(), x.coords()) > 0.0
            && restriction.is_none_or(|h| dot(h.pole.coords(), x.coords()) > 0.0)
    }))
}

/// m(K) for the partitioning hemisphere K with the given pole.
pub fn partitioning_mass(m: &DiscreteMeasure, pole: &UnitVector) -> Result<f64> {
    check_dims(m.dim, pole.dim())?;
    Ok(m.mass_where(|x| partition_side(dot(pole.coords(), x.coords()), x.coords())))
}

/// Hemisphere masses of a measure over a finite set of directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HemisphereFingerprint {
    pub directions: Vec<UnitVector>,
    pub masses: Vec<f64>,
    pub restricted_to: Option<Hemisphere>,
}

pub fn fingerprint(
    m: &DiscreteMeasure,
    directions: &[UnitVector],
    restriction: Option<&Hemisphere>,
) -> Result<HemisphereFingerprint> {
    if directions.is_empty() {
        return Err(Error::Empty("directions"));
    }
    let masses = directions
        .iter()
        .map(|t| hemisphere_mass(m, t, restriction))
        .collect::<Result<Vec<_>>>()?;
    Ok(HemisphereFingerprint {
        directions: directions.to_vec(),
        masses,
        restricted_to: restriction.cloned(),
    })
}

/// A pole whose boundary great sphere carries no atom of any input measure.
///
/// Uniform random poles avoid a finite atom set almost surely; after
/// `NULL_SPHERE_DRAWS` failures the last draw is nudged along successive
/// coordinate axes before giving up.
pub fn find_null_great_sphere(ms: &[DiscreteMeasure], seed: u64) -> Result<UnitVector> {
    let dim = ms.first().ok_or(Error::Empty("measures"))?.dim;
    for m in ms {
        check_dims(dim, m.dim)?;
    }
    let avoids = |u: &UnitVector| {
        ms.iter()
            .flat_map(|m| m.atoms.iter())
            .all(|x| dot(u.coords(), x.coords()).abs() > NULL_SPHERE_MARGIN)
    };
    let mut rng = stream_rng(seed, 0);
    let mut last = uniform_direction(&mut rng, dim);
    if avoids(&last) {
        return Ok(last);
    }
    for _ in 1..NULL_SPHERE_DRAWS {
        last = uniform_direction(&mut rng, dim);
        if avoids(&last) {
            return Ok(last);
        }
    }
    for k in 1..=dim * 8 {
        let mut c = last.coords().to_vec();
        c[k % dim] += 1e-3 * k as f64;
        if let Ok(u) = UnitVector::new(c) {
            if avoids(&u) {
                return Ok(u);
            }
        }
    }
    Err(Error::DegenerateSupport)
}

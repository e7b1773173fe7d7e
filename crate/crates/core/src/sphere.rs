//! Points on the unit sphere S^n and the elementary geometry on it.
//!
//! Everything here is a pure function of its inputs. Points are stored as unit
//! vectors in R^{n+1}; the metric is the geodesic (great-circle) angle,
//! optionally raised to a power `r` in (0, 1].

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{check_dims, Error, Result};
use crate::sampling::stream_rng;

/// Norms below this are rejected rather than renormalized.
pub const MIN_NORM: f64 = 1e-6;

/// Chordal tolerance used to identify coincident or antipodal points.
///
/// For small separations the chord and the angle agree to third order, so this
/// is also the angular tolerance.
pub const POINT_TOL: f64 = 1e-9;

/// A point of S^n, stored as a unit vector of length n + 1.
#[derive(Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < MIN_NORM {
            return Err(Error::DegenerateVector(norm));
        }
        let mut coords = coords;
        if norm != 1.0 {
            coords.iter_mut().for_each(|c| *c /= norm);
        }
        Ok(Self { coords })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// The `axis`-th standard basis vector of R^dim.
    pub fn basis(dim: usize, axis: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if axis >= dim {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for dimension {dim}"
            )));
        }
        let mut coords = vec![0.0; dim];
        coords[axis] = 1.0;
        Ok(Self { coords })
    }

    /// Ambient dimension n + 1.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.coords, &other.coords))
    }

    /// The antipode -x.
    pub fn reflect(&self) -> UnitVector {
        UnitVector {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// True when `other` is within [`POINT_TOL`] of this point.
    pub fn coincides(&self, other: &UnitVector) -> bool {
        self.dim() == other.dim() && chord(&self.coords, &other.coords, 1.0) < POINT_TOL
    }

    /// True when `other` is within [`POINT_TOL`] of the antipode of this point.
    pub fn is_antipodal_to(&self, other: &UnitVector) -> bool {
        self.dim() == other.dim() && chord(&self.coords, &other.coords, -1.0) < POINT_TOL
    }
}

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitVector{:?}", self.coords)
    }
}

impl Serialize for UnitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

/// Exponent `r` of the powered metric d^r.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct MetricPower(f64);

impl MetricPower {
    pub const ONE: MetricPower = MetricPower(1.0);

    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r <= 1.0 {
            Ok(Self(r))
        } else {
            Err(Error::InvalidMetricPower(r))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        if self.0 == 1.0 {
            d
        } else {
            d.powf(self.0)
        }
    }
}

impl Default for MetricPower {
    fn default() -> Self {
        Self::ONE
    }
}

/// Open hemisphere H_t = {x : t·x > 0}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hemisphere {
    pub pole: UnitVector,
}

impl Hemisphere {
    pub fn new(pole: UnitVector) -> Self {
        Self { pole }
    }

    pub fn dim(&self) -> usize {
        self.pole.dim()
    }

    /// Strict membership; the boundary great sphere is excluded.
    pub fn contains(&self, x: &UnitVector) -> Result<bool> {
        Ok(self.pole.dot(x)? > 0.0)
    }

    /// The opposite open hemisphere H_{-t}.
    pub fn opposite(&self) -> Hemisphere {
        Hemisphere::new(self.pole.reflect())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// |a - sign·b|
#[inline]
fn chord(a: &[f64], b: &[f64], sign: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - sign * y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Geodesic angle between unit vectors, without dimension checks.
///
/// Evaluated as 2·atan2(|x - y|, |x + y|), which equals arccos(x·y) but keeps
/// full relative precision near 0 and near π where arccos loses half the digits.
#[inline]
pub(crate) fn raw_angle(a: &[f64], b: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Angular distance d(x, y)^r, in [0, π^r].
pub fn angular_distance(x: &UnitVector, y: &UnitVector, r: MetricPower) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(r.apply(raw_angle(&x.coords, &y.coords).clamp(0.0, PI)))
}

/// The reflection R: x ↦ -x.
pub fn reflect(x: &UnitVector) -> UnitVector {
    x.reflect()
}

pub fn hemisphere_contains(h: &Hemisphere, x: &UnitVector) -> Result<bool> {
    h.contains(x)
}

/// Membership in the partitioning hemisphere with the given pole.
///
/// Interior points (pole·x > 0) belong; on the boundary great sphere the point
/// belongs iff its first nonzero coordinate is positive. Exactly one of x, -x
/// is a member for every x.
pub fn partitioning_contains(pole: &UnitVector, x: &UnitVector) -> Result<bool> {
    let t = pole.dot(x)?;
    Ok(partition_side(t, x.coords()))
}

#[inline]
pub(crate) fn partition_side(pole_dot: f64, coords: &[f64]) -> bool {
    if pole_dot > 0.0 {
        true
    } else if pole_dot < 0.0 {
        false
    } else {
        coords.iter().find(|c| **c != 0.0).is_some_and(|c| *c > 0.0)
    }
}

/// Householder reflection that swaps `pole` with the last basis vector.
///
/// Represented by its unit normal; `None` when the pole already is e_last.
struct PoleFrame {
    normal: Option<Vec<f64>>,
}

impl PoleFrame {
    fn new(pole: &UnitVector) -> Self {
        let p = pole.coords();
        let last = p.len() - 1;
        let head_sq: f64 = p[..last].iter().map(|c| c * c).sum();
        if head_sq == 0.0 && p[last] > 0.0 {
            return Self { normal: None };
        }
        // v = pole - e_last, with the last entry computed without cancellation
        // when the pole is close to e_last.
        let mut v = p.to_vec();
        v[last] = if p[last] > 0.0 {
            -head_sq / (1.0 + p[last])
        } else {
            p[last] - 1.0
        };
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        Self { normal: Some(v) }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.normal {
            None => x.to_vec(),
            Some(v) => {
                let s = 2.0 * dot(v, x);
                x.iter().zip(v).map(|(xi, vi)| xi - s * vi).collect()
            }
        }
    }
}

/// Central projection of the open hemisphere H_pole onto the tangent plane at
/// its pole.
///
/// Coordinates are taken in the frame where `pole` is the last axis (a fixed
/// Householder reflection), so the output has the form (y_1, …, y_n, 1).
pub fn gnomonic_project(x: &UnitVector, pole: &UnitVector) -> Result<Vec<f64>> {
    let h = pole.dot(x)?;
    if h <= 0.0 {
        return Err(Error::NotInHemisphere);
    }
    let rotated = PoleFrame::new(pole).apply(x.coords());
    let last = rotated.len() - 1;
    let height = rotated[last];
    let mut out: Vec<f64> = rotated.iter().map(|c| c / height).collect();
    out[last] = 1.0;
    Ok(out)
}

/// Inverse of [`gnomonic_project`]: normalize, then undo the frame change.
pub fn gnomonic_unproject(y: &[f64], pole: &UnitVector) -> Result<UnitVector> {
    check_dims(pole.dim(), y.len())?;
    let direction = UnitVector::from_slice(y)?;
    UnitVector::new(PoleFrame::new(pole).apply(direction.coords()))
}

/// Open halfspace {y : normal·y + offset > 0} of the affine plane y_last = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineHalfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl AffineHalfspace {
    /// Membership of a projected point (only its first n coordinates are read).
    pub fn contains(&self, y: &[f64]) -> bool {
        dot(&self.normal, &y[..self.normal.len()]) + self.offset > 0.0
    }
}

/// Image of H_pole ∩ H_t under [`gnomonic_project`].
pub fn project_halfspace(t: &UnitVector, pole: &UnitVector) -> Result<AffineHalfspace> {
    check_dims(pole.dim(), t.dim())?;
    let mut s = PoleFrame::new(pole).apply(t.coords());
    let offset = s.pop().expect("dimension at least 2");
    Ok(AffineHalfspace { normal: s, offset })
}

/// One draw from the uniform distribution on S^{dim-1}.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::new(v) {
            return u;
        }
    }
}

/// `count` independent uniform points on S^{dim-1}, deterministic in `seed`.
pub fn sample_uniform(dim: usize, count: usize, seed: u64) -> Result<Vec<UnitVector>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if count == 0 {
        return Err(Error::Empty("sample count"));
    }
    let mut rng = stream_rng(seed, 0);
    Ok((0..count)
        .map(|_| uniform_direction(&mut rng, dim))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn uv(c: &[f64]) -> UnitVector {
        UnitVector::from_slice(c).unwrap()
    }

    #[test]
    fn construction_normalizes_and_rejects() {
        let u = uv(&[3.0, 0.0, 4.0]);
        assert_abs_diff_eq!(u.coords()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(u.coords()[2], 0.8, epsilon = 1e-15);
        assert_eq!(
            UnitVector::new(vec![0.0, 0.0]),
            Err(Error::DegenerateVector(0.0))
        );
        assert!(matches!(
            UnitVector::new(vec![1.0]),
            Err(Error::InvalidDimension(1))
        ));
        assert_eq!(UnitVector::new(vec![f64::NAN, 1.0]), Err(Error::NonFinite));
        assert!(UnitVector::new(vec![1e-7, 0.0]).is_err());
    }

    #[test]
    fn distance_examples() {
        let r1 = MetricPower::ONE;
        assert_eq!(
            angular_distance(&uv(&[1.0, 0.0]), &uv(&[1.0, 0.0]), r1).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            angular_distance(&uv(&[1.0, 0.0]), &uv(&[-1.0, 0.0]), r1).unwrap(),
            PI,
            epsilon = 1e-15
        );
        let half = MetricPower::new(0.5).unwrap();
        let d = angular_distance(&uv(&[1.0, 0.0]), &uv(&[0.0, 1.0]), half).unwrap();
        assert_abs_diff_eq!(d, (PI / 2.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d, 1.2533, epsilon = 1e-4);
        assert!(angular_distance(&uv(&[1.0, 0.0]), &uv(&[1.0, 0.0, 0.0]), r1).is_err());
    }

    #[test]
    fn small_angles_keep_precision() {
        let eps: f64 = 1e-10;
        let d = angular_distance(
            &uv(&[1.0, 0.0]),
            &uv(&[eps.cos(), eps.sin()]),
            MetricPower::ONE,
        )
        .unwrap();
        assert_abs_diff_eq!(d, eps, epsilon = 1e-20);
    }

    #[test]
    fn metric_power_range() {
        assert!(MetricPower::new(0.0).is_err());
        assert!(MetricPower::new(1.5).is_err());
        assert!(MetricPower::new(f64::NAN).is_err());
        assert!(MetricPower::new(1.0).is_ok());
    }

    #[test]
    fn reflection_examples() {
        let x = uv(&[0.0, 0.0, 1.0]);
        assert_eq!(reflect(&x).coords(), &[-0.0, -0.0, -1.0]);
        assert_eq!(reflect(&reflect(&x)), x);
        let y = uv(&[0.3, -0.2, 0.9]);
        assert_abs_diff_eq!(
            angular_distance(&y, &reflect(&y), MetricPower::ONE).unwrap(),
            PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn hemisphere_membership_is_open() {
        let h = Hemisphere::new(uv(&[1.0, 0.0]));
        assert!(hemisphere_contains(&h, &uv(&[1.0, 0.0])).unwrap());
        assert!(!hemisphere_contains(&h, &uv(&[0.0, 1.0])).unwrap());
        assert!(!hemisphere_contains(&h, &uv(&[-1.0, 0.0])).unwrap());
        assert!(hemisphere_contains(&h, &uv(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn partitioning_tie_break() {
        let pole = uv(&[0.0, 1.0]);
        assert!(partitioning_contains(&pole, &uv(&[1.0, 0.0])).unwrap());
        assert!(!partitioning_contains(&pole, &uv(&[-1.0, 0.0])).unwrap());
        assert!(partitioning_contains(&pole, &uv(&[0.0, 1.0])).unwrap());
        // Boundary point whose first coordinate is zero falls back to the next one.
        let pole3 = uv(&[1.0, 0.0, 0.0]);
        assert!(partitioning_contains(&pole3, &uv(&[0.0, 0.0, 1.0])).unwrap());
        assert!(!partitioning_contains(&pole3, &uv(&[0.0, 0.0, -1.0])).unwrap());
    }

    #[test]
    fn gnomonic_examples() {
        let pole = uv(&[0.0, 0.0, 1.0]);
        assert_eq!(gnomonic_project(&pole, &pole).unwrap(), vec![0.0, 0.0, 1.0]);
        let s = 1.0 / 2f64.sqrt();
        let a = gnomonic_project(&uv(&[s, 0.0, s]), &pole).unwrap();
        assert_abs_diff_eq!(a[0], 1.0, epsilon = 1e-15);
        assert_eq!(a[1], 0.0);
        assert_eq!(a[2], 1.0);
        let b = gnomonic_project(&uv(&[0.0, s, s]), &pole).unwrap();
        assert_abs_diff_eq!(b[1], 1.0, epsilon = 1e-15);
        assert_eq!(b[2], 1.0);
        assert_eq!(
            gnomonic_project(&uv(&[1.0, 0.0, 0.0]), &pole),
            Err(Error::NotInHemisphere)
        );
        assert_eq!(
            gnomonic_project(&uv(&[0.0, 0.0, -1.0]), &pole),
            Err(Error::NotInHemisphere)
        );
    }

    #[test]
    fn gnomonic_general_pole_maps_pole_to_origin() {
        for pole in [
            uv(&[1.0, 2.0, -0.5]),
            uv(&[0.0, 0.0, -1.0]),
            uv(&[1e-9, 0.0, 1.0]),
        ] {
            let y = gnomonic_project(&pole, &pole).unwrap();
            assert!(y[..2].iter().all(|c| c.abs() < 1e-12), "{y:?}");
            assert_eq!(y[2], 1.0);
        }
    }

    #[test]
    fn sampler_contract() {
        assert!(sample_uniform(1, 10, 0).is_err());
        assert!(sample_uniform(3, 0, 0).is_err());
        let a = sample_uniform(3, 1000, 7).unwrap();
        assert_eq!(a, sample_uniform(3, 1000, 7).unwrap());
        let mut mean = [0.0; 3];
        for p in &a {
            for (m, c) in mean.iter_mut().zip(p.coords()) {
                *m += c / 1000.0;
            }
        }
        assert!(mean.iter().map(|m| m * m).sum::<f64>().sqrt() < 0.1);

        let b = sample_uniform(2, 4000, 1).unwrap();
        let frac = b.iter().filter(|p| p.coords()[0] > 0.0).count() as f64 / 4000.0;
        assert!((0.475..=0.525).contains(&frac), "{frac}");
        assert!(b
            .iter()
            .all(|p| (dot(p.coords(), p.coords()) - 1.0).abs() < 1e-9));
    }

    fn arb_point(dim: usize) -> impl Strategy<Value = UnitVector> {
        prop::collection::vec(-1.0f64..1.0, dim)
            .prop_filter_map("degenerate", |v| UnitVector::new(v).ok())
    }

    fn arb_dim_triple() -> impl Strategy<Value = (UnitVector, UnitVector, UnitVector)> {
        (2usize..6).prop_flat_map(|d| (arb_point(d), arb_point(d), arb_point(d)))
    }

    proptest! {
        #[test]
        fn triangle_inequality((x, y, z) in arb_dim_triple(), half in any::<bool>()) {
            let r = if half { MetricPower::new(0.5).unwrap() } else { MetricPower::ONE };
            let xz = angular_distance(&x, &z, r).unwrap();
            let xy = angular_distance(&x, &y, r).unwrap();
            let yz = angular_distance(&y, &z, r).unwrap();
            prop_assert!(xz <= xy + yz + 1e-12);
            prop_assert!((0.0..=PI.powf(r.value())).contains(&xy));
            prop_assert_eq!(xy, angular_distance(&y, &x, r).unwrap());
        }

        #[test]
        fn antipodal_complement((x, y, _z) in arb_dim_triple()) {
            let s = angular_distance(&x, &y, MetricPower::ONE).unwrap()
                + angular_distance(&x, &reflect(&y), MetricPower::ONE).unwrap();
            prop_assert!((s - PI).abs() <= 1e-12);
        }

        #[test]
        fn partition_exactly_one_of_pair((pole, x, _z) in arb_dim_triple(), axis_aligned in any::<bool>()) {
            // also probe boundary points by zeroing the pole component
            let x = if axis_aligned {
                let mut c = x.coords().to_vec();
                let k = c.len() - 1;
                c[k] = 0.0;
                match UnitVector::new(c) { Ok(v) => v, Err(_) => x }
            } else { x };
            let pole = if axis_aligned { UnitVector::basis(pole.dim(), pole.dim() - 1).unwrap() } else { pole };
            let a = partitioning_contains(&pole, &x).unwrap();
            let b = partitioning_contains(&pole, &reflect(&x)).unwrap();
            prop_assert!(a ^ b);
        }

        #[test]
        fn gnomonic_roundtrip_and_halfspaces((pole, x, t) in arb_dim_triple()) {
            let x = if pole.dot(&x).unwrap() > 0.0 { x } else { reflect(&x) };
            prop_assume!(pole.dot(&x).unwrap() > 1e-3);
            let y = gnomonic_project(&x, &pole).unwrap();
            prop_assert_eq!(*y.last().unwrap(), 1.0);
            let back = gnomonic_unproject(&y, &pole).unwrap();
            for (a, b) in back.coords().iter().zip(x.coords()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let half = project_halfspace(&t, &pole).unwrap();
            let margin = t.dot(&x).unwrap();
            prop_assume!(margin.abs() > 1e-12);
            prop_assert_eq!(Hemisphere::new(t.clone()).contains(&x).unwrap(), half.contains(&y));
        }

        #[test]
        fn gnomonic_injective((pole, x, z) in arb_dim_triple()) {
            let x = if pole.dot(&x).unwrap() > 0.0 { x } else { reflect(&x) };
            let z = if pole.dot(&z).unwrap() > 0.0 { z } else { reflect(&z) };
            prop_assume!(pole.dot(&x).unwrap() > 1e-3 && pole.dot(&z).unwrap() > 1e-3);
            prop_assume!(angular_distance(&x, &z, MetricPower::ONE).unwrap() > 1e-9);
            let a = gnomonic_project(&x, &pole).unwrap();
            let b = gnomonic_project(&z, &pole).unwrap();
            let gap = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            prop_assert!(gap > 1e-12);
        }
    }
}

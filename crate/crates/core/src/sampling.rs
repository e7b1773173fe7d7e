//! Seeded random streams and reference distributions on the sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sphere::{dot, uniform_direction, UnitVector};

/// Independent generator number `stream` under `seed`.
///
/// Parallel work items draw from their own stream, so results never depend on
/// scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A seeded source of reference points for goodness-of-fit testing.
pub trait ReferenceSampler: Send + Sync {
    fn dim(&self) -> usize;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector
    where
        Self: Sized;

    /// `count` draws, deterministic in `seed`.
    fn sample(&self, count: usize, seed: u64) -> Vec<UnitVector>
    where
        Self: Sized,
    {
        let mut rng = stream_rng(seed, 0);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// Uniform distribution on S^{dim-1}.
#[derive(Debug, Clone, Copy)]
pub struct UniformSphere {
    dim: usize,
}

impl UniformSphere {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { dim })
    }
}

impl ReferenceSampler for UniformSphere {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        uniform_direction(rng, self.dim)
    }
}

/// Von Mises–Fisher distribution with mean direction `mean` and concentration
/// `kappa`.
///
/// Draws use the tangent-normal decomposition x = w·mean + √(1-w²)·v, with the
/// cosine w sampled by Wood's rejection scheme and v uniform on the unit
/// sphere orthogonal to the mean.
#[derive(Debug, Clone)]
pub struct VonMisesFisher {
    mean: UnitVector,
    kappa: f64,
    b: f64,
    x0: f64,
    c: f64,
    beta: Option<Beta<f64>>,
}

impl VonMisesFisher {
    pub fn new(mean: UnitVector, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "concentration must be finite and nonnegative, got {kappa}"
            )));
        }
        let m = (mean.dim() - 1) as f64;
        // b = (-2κ + √(4κ² + m²)) / m, rearranged to avoid cancellation.
        let b = m / (2.0 * kappa + (4.0 * kappa * kappa + m * m).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + m * (1.0 - x0 * x0).ln();
        let beta = if kappa > 0.0 {
            Some(Beta::new(m / 2.0, m / 2.0).expect("positive shape parameters"))
        } else {
            None
        };
        Ok(Self {
            mean,
            kappa,
            b,
            x0,
            c,
            beta,
        })
    }

    pub fn mean(&self) -> &UnitVector {
        &self.mean
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn sample_cosine<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = (self.mean.dim() - 1) as f64;
        let beta = self.beta.as_ref().expect("kappa > 0");
        loop {
            let z = beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + m * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return w;
            }
        }
    }
}

impl ReferenceSampler for VonMisesFisher {
    fn dim(&self) -> usize {
        self.mean.dim()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let dim = self.mean.dim();
        if self.beta.is_none() {
            return uniform_direction(rng, dim);
        }
        let w = self.sample_cosine(rng);
        let mu = self.mean.coords();
        loop {
            let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let along = dot(&g, mu);
            let tangent: Vec<f64> = g.iter().zip(mu).map(|(gi, mi)| gi - along * mi).collect();
            let norm = tangent.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let s = (1.0 - w * w).max(0.0).sqrt() / norm;
            let x: Vec<f64> = mu
                .iter()
                .zip(&tangent)
                .map(|(m, t)| w * m + s * t)
                .collect();
            if let Ok(p) = UnitVector::new(x) {
                return p;
            }
        }
    }
}

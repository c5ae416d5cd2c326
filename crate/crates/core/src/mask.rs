//! Observation masks and the projections onto observed / missing entries.

use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Index set of observed entries, stored as one flag per canonical position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    shape: Vec<usize>,
    observed: Vec<bool>,
}

impl ObservationMask {
    pub fn new(shape: Vec<usize>, observed: Vec<bool>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidShape {
                shape,
                reason: "mask shape must have positive extents".into(),
            });
        }
        if observed.len() != expected {
            return Err(Error::LengthMismatch {
                shape,
                len: observed.len(),
                expected,
            });
        }
        Ok(Self { shape, observed })
    }

    pub fn full(shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), vec![true; shape.iter().product()])
    }

    /// Removes exactly `floor(rate * total)` entries, chosen uniformly without
    /// replacement from a seeded stream.
    pub fn random_missing(shape: &[usize], missing_rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&missing_rate) {
            return Err(Error::InvalidConfig(format!(
                "missing rate {missing_rate} outside [0, 1]"
            )));
        }
        let total: usize = shape.iter().product();
        let missing = missing_count(total, missing_rate);
        let mut observed = vec![true; total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in index::sample(&mut rng, total, missing) {
            observed[i] = false;
        }
        Self::new(shape.to_vec(), observed)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn flags(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_observed(&self, linear: usize) -> bool {
        self.observed[linear]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn missing_count(&self) -> usize {
        self.observed.len() - self.observed_count()
    }

    pub fn is_empty(&self) -> bool {
        self.observed_count() == 0
    }

    pub fn missing_rate(&self) -> f64 {
        self.missing_count() as f64 / self.observed.len() as f64
    }

    pub fn complement(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            observed: self.observed.iter().map(|o| !o).collect(),
        }
    }

    fn check(&self, t: &DenseTensor) -> Result<()> {
        if t.shape() != self.shape.as_slice() {
            return Err(Error::ShapeMismatch {
                left: t.shape().to_vec(),
                right: self.shape.clone(),
            });
        }
        Ok(())
    }

    /// P_Ω: keeps observed entries, zeroes the rest.
    pub fn project(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.check(t)?;
        let data = t
            .data()
            .iter()
            .zip(&self.observed)
            .map(|(&v, &o)| if o { v } else { 0.0 })
            .collect();
        DenseTensor::new(t.shape().to_vec(), data)
    }

    /// P_Ω(observed) + P_Ω̄(fill)
    pub fn merge(&self, observed: &DenseTensor, fill: &DenseTensor) -> Result<DenseTensor> {
        self.check(observed)?;
        self.check(fill)?;
        let data = observed
            .data()
            .iter()
            .zip(fill.data())
            .zip(&self.observed)
            .map(|((&o, &f), &keep)| if keep { o } else { f })
            .collect();
        DenseTensor::new(observed.shape().to_vec(), data)
    }

    /// The mask as a 0/1 weight tensor.
    pub fn to_weights(&self) -> DenseTensor {
        DenseTensor::new(
            self.shape.clone(),
            self.observed.iter().map(|&o| if o { 1.0 } else { 0.0 }).collect(),
        )
        .expect("mask shape validated on construction")
    }
}

/// Deterministic count policy: `floor(rate * total)`.
pub fn missing_count(total: usize, missing_rate: f64) -> usize {
    ((missing_rate * total as f64).floor() as usize).min(total)
}

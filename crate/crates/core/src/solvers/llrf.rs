use super::{initial_cores, initial_estimate, validate_problem, zeros_like, AdmmState, SolverConfig};
use crate::error::Result;
use crate::mask::ObservationMask;
use crate::prox::{core_update_llrf, svt_unfolding};
use crate::ring::TrCores;
use crate::tensor::DenseTensor;

/// State of the latent low-rank factor model: every core `G_n` is tied to the
/// sum of three latent tensors `W_ni`, each low-rank in one unfolding.
#[derive(Debug, Clone)]
pub struct LlrfState {
    pub x: DenseTensor,
    pub cores: TrCores,
    pub latent: Vec<[DenseTensor; 3]>,
    pub multipliers: Vec<DenseTensor>,
    pub mu: f64,
    pub iter: usize,
}

impl LlrfState {
    /// Normal(0, 1) cores, zero latents and multipliers, zero-filled estimate.
    pub fn init(observed: &DenseTensor, mask: &ObservationMask, cfg: &SolverConfig) -> Result<Self> {
        validate_problem(observed, mask, cfg)?;
        let cores = initial_cores(observed, cfg)?;
        let multipliers = cores
            .cores()
            .iter()
            .map(|c| DenseTensor::zeros(c.shape()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x: initial_estimate(observed, mask)?,
            latent: zeros_like(&cores)?,
            multipliers,
            cores,
            mu: cfg.mu0,
            iter: 0,
        })
    }

    fn latent_sum(latent: &[DenseTensor; 3]) -> Result<DenseTensor> {
        latent[0].add(&latent[1])?.add(&latent[2])
    }
}

impl AdmmState for LlrfState {
    fn x(&self) -> &DenseTensor {
        &self.x
    }

    fn cores(&self) -> &TrCores {
        &self.cores
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn iteration(&self) -> usize {
        self.iter
    }

    fn step(&mut self, observed: &DenseTensor, mask: &ObservationMask, cfg: &SolverConfig) -> Result<()> {
        let mu = self.mu;
        for n in 0..self.cores.order() {
            let g = core_update_llrf(
                &self.x,
                &self.cores,
                &self.latent[n],
                &self.multipliers[n],
                n,
                cfg.lambda,
                mu,
            )?;
            self.cores.set_core(n, g)?;
        }
        for (n, (latent, mult)) in self.latent.iter_mut().zip(&self.multipliers).enumerate() {
            // Gauss-Seidel over i: each latent sees the freshest siblings.
            let target = self.cores.core(n).axpy(-1.0 / mu, mult)?;
            for i in 0..3 {
                let mut shifted = target.clone();
                for (j, w) in latent.iter().enumerate() {
                    if j != i {
                        shifted = shifted.sub(w)?;
                    }
                }
                latent[i] = svt_unfolding(&shifted, i, 1.0 / mu)?;
            }
        }
        self.x = mask.merge(observed, &self.cores.reconstruct())?;
        for (n, (latent, mult)) in self.latent.iter().zip(self.multipliers.iter_mut()).enumerate() {
            let gap = Self::latent_sum(latent)?.sub(self.cores.core(n))?;
            *mult = mult.axpy(mu, &gap)?;
        }
        self.mu = cfg.next_mu(mu);
        self.iter += 1;
        Ok(())
    }

    fn consistency(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (n, latent) in self.latent.iter().enumerate() {
            let g = self.cores.core(n);
            let gap = Self::latent_sum(latent)
                .and_then(|s| s.sub(g))
                .map(|d| d.frobenius_norm())
                .unwrap_or(f64::INFINITY);
            worst = worst.max(gap / g.frobenius_norm().max(f64::MIN_POSITIVE));
        }
        worst
    }

    fn into_parts(self) -> (DenseTensor, TrCores) {
        (self.x, self.cores)
    }
}

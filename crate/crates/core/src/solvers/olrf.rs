use super::{initial_cores, initial_estimate, validate_problem, zeros_like, AdmmState, SolverConfig};
use crate::error::Result;
use crate::mask::ObservationMask;
use crate::prox::{core_update_olrf, svt_unfolding};
use crate::ring::TrCores;
use crate::tensor::DenseTensor;

/// State of the overlapped low-rank factor model: every core `G_n` is split
/// into three auxiliary copies `M_ni`, each shrunk in its own unfolding.
#[derive(Debug, Clone)]
pub struct OlrfState {
    pub x: DenseTensor,
    pub cores: TrCores,
    pub aux: Vec<[DenseTensor; 3]>,
    pub multipliers: Vec<[DenseTensor; 3]>,
    pub mu: f64,
    pub iter: usize,
}

impl OlrfState {
    /// Normal(0, 1) cores, zero auxiliaries and multipliers, zero-filled estimate.
    pub fn init(observed: &DenseTensor, mask: &ObservationMask, cfg: &SolverConfig) -> Result<Self> {
        validate_problem(observed, mask, cfg)?;
        let cores = initial_cores(observed, cfg)?;
        Ok(Self {
            x: initial_estimate(observed, mask)?,
            aux: zeros_like(&cores)?,
            multipliers: zeros_like(&cores)?,
            cores,
            mu: cfg.mu0,
            iter: 0,
        })
    }
}

impl AdmmState for OlrfState {
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
            let g = core_update_olrf(
                &self.x,
                &self.cores,
                &self.aux[n],
                &self.multipliers[n],
                n,
                cfg.lambda,
                mu,
            )?;
            self.cores.set_core(n, g)?;
        }
        for (n, (aux, mult)) in self.aux.iter_mut().zip(&self.multipliers).enumerate() {
            let g = self.cores.core(n);
            for i in 0..3 {
                aux[i] = svt_unfolding(&g.axpy(-1.0 / mu, &mult[i])?, i, 1.0 / mu)?;
            }
        }
        self.x = mask.merge(observed, &self.cores.reconstruct())?;
        for (n, (aux, mult)) in self.aux.iter().zip(self.multipliers.iter_mut()).enumerate() {
            let g = self.cores.core(n);
            for i in 0..3 {
                mult[i] = mult[i].axpy(mu, &aux[i].sub(g)?)?;
            }
        }
        self.mu = cfg.next_mu(mu);
        self.iter += 1;
        Ok(())
    }

    fn consistency(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (n, aux) in self.aux.iter().enumerate() {
            let g = self.cores.core(n);
            let norm = g.frobenius_norm().max(f64::MIN_POSITIVE);
            for m in aux {
                let gap = m.sub(g).map(|d| d.frobenius_norm()).unwrap_or(f64::INFINITY);
                worst = worst.max(gap / norm);
            }
        }
        worst
    }

    fn into_parts(self) -> (DenseTensor, TrCores) {
        (self.x, self.cores)
    }
}

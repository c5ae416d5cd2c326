//! Synthetic problem instances and seed derivation.
//!
//! A run seed `s` fans out into independent streams for the ground-truth
//! cores, the missing-entry mask and the solver's initial cores. Sweeps use
//! `s = base + repeat`.

use trc_core::{DenseTensor, ObservationMask, SolverConfig, TrCores, TrRank};

use crate::error::{Error, Result};

/// Standard deviation of synthetic ground-truth core entries.
pub const CORE_STD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Truth = 0,
    Mask = 1,
    Init = 2,
}

/// SplitMix64 finalizer over `seed` and the stream tag.
pub fn sub_seed(seed: u64, stream: Stream) -> u64 {
    let mut z = seed ^ (stream as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub truth: DenseTensor,
    pub mask: ObservationMask,
}

impl Instance {
    /// Truth is the reconstruction of `N(0, CORE_STD²)` cores; the mask hides
    /// exactly `floor(missing_rate · len)` entries.
    pub fn generate(shape: &[usize], ranks: &TrRank, missing_rate: f64, seed: u64) -> Result<Self> {
        if ranks.len() != shape.len() {
            return Err(trc_core::Error::RankOrderMismatch {
                ranks: ranks.len(),
                order: shape.len(),
            }
            .into());
        }
        let cores = TrCores::random(shape, ranks, 0.0, CORE_STD, sub_seed(seed, Stream::Truth))?;
        let mask = ObservationMask::random_missing(shape, missing_rate, sub_seed(seed, Stream::Mask))?;
        Ok(Self {
            truth: cores.reconstruct(),
            mask,
        })
    }

    /// Observed tensor with missing entries zeroed.
    pub fn observed(&self) -> Result<DenseTensor> {
        Ok(self.mask.project(&self.truth)?)
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad {what} entry {p:?} in {s:?}")))
        })
        .collect()
}

/// A rank vector, or one rank applied to every bond.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankArg {
    Uniform(usize),
    Explicit(Vec<usize>),
}

impl RankArg {
    pub fn resolve(&self, order: usize) -> Result<TrRank> {
        let ranks = match self {
            RankArg::Uniform(r) => vec![*r; order],
            RankArg::Explicit(v) => v.clone(),
        };
        if ranks.len() != order {
            return Err(trc_core::Error::RankOrderMismatch {
                ranks: ranks.len(),
                order,
            }
            .into());
        }
        Ok(TrRank::new(ranks)?)
    }
}

impl std::str::FromStr for RankArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ranks: Vec<usize> = parse_list(s, "rank")?;
        Ok(if ranks.len() == 1 {
            RankArg::Uniform(ranks[0])
        } else {
            RankArg::Explicit(ranks)
        })
    }
}

/// Solver settings other than the rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub lambda: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for Tuning {
    fn default() -> Self {
        Self {
            lambda: SolverConfig::DEFAULT_LAMBDA,
            tol: SolverConfig::DEFAULT_TOL,
            max_iters: SolverConfig::DEFAULT_MAX_ITERS,
            seed: 0,
        }
    }
}

impl Tuning {
    pub fn config(&self, rank: TrRank) -> SolverConfig {
        let mut cfg = SolverConfig::new(rank);
        cfg.lambda = self.lambda;
        cfg.tol = self.tol;
        cfg.max_iters = self.max_iters;
        cfg.seed = self.seed;
        cfg
    }
}

pub fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

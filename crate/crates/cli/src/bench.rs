//! Per-iteration timing across tensor order and TR rank.

use std::time::Instant;

use trc_core::{AdmmState, LlrfState, OlrfState, Solver, TrRank};

use crate::error::{Error, Result};
use crate::experiment::{sub_seed, Instance, Stream, Tuning};
use crate::report::BenchRow;

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub solvers: Vec<Solver>,
    /// Orders timed at `rank`.
    pub orders: Vec<usize>,
    pub extent: usize,
    pub rank: usize,
    /// Ranks timed at `rank_sweep_order`.
    pub rank_sweep: Vec<usize>,
    pub rank_sweep_order: usize,
    /// Timed iterations per point, after initialization.
    pub iterations: usize,
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            solvers: vec![Solver::Olrf],
            orders: (3..=8).collect(),
            extent: 6,
            rank: 3,
            rank_sweep: vec![2, 3, 4, 5, 6],
            rank_sweep_order: 4,
            iterations: 3,
            missing_rate: 0.5,
            seed: 1,
        }
    }
}

impl BenchSpec {
    /// Distinct `(order, rank)` points: the order sweep, then the rank sweep.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut points: Vec<(usize, usize)> = self.orders.iter().map(|&n| (n, self.rank)).collect();
        for &r in &self.rank_sweep {
            if !points.contains(&(self.rank_sweep_order, r)) {
                points.push((self.rank_sweep_order, r));
            }
        }
        points
    }
}

fn time_steps<S: AdmmState>(
    mut state: S,
    inst: &Instance,
    cfg: &trc_core::SolverConfig,
    iterations: usize,
) -> Result<f64> {
    let observed = inst.observed()?;
    let start = Instant::now();
    for _ in 0..iterations {
        state.step(&observed, &inst.mask, cfg)?;
    }
    Ok(start.elapsed().as_secs_f64() / iterations as f64)
}

/// Seconds per iteration of `solver` on a synthetic `extent^order` tensor.
pub fn time_iteration(
    solver: Solver,
    order: usize,
    extent: usize,
    rank: usize,
    iterations: usize,
    missing_rate: f64,
    seed: u64,
) -> Result<f64> {
    let shape = vec![extent; order];
    let ranks = TrRank::uniform(order, rank)?;
    let inst = Instance::generate(&shape, &ranks, missing_rate, seed)?;
    let cfg = Tuning {
        seed: sub_seed(seed, Stream::Init),
        ..Tuning::default()
    }
    .config(ranks);
    let observed = inst.observed()?;
    match solver {
        Solver::Olrf => time_steps(OlrfState::init(&observed, &inst.mask, &cfg)?, &inst, &cfg, iterations),
        Solver::Llrf => time_steps(LlrfState::init(&observed, &inst.mask, &cfg)?, &inst, &cfg, iterations),
    }
}

/// Runs sequentially so timings do not compete for cores.
pub fn bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    if spec.iterations == 0 {
        return Err(Error::Usage("bench needs at least one iteration".into()));
    }
    let mut rows = Vec::new();
    for &solver in &spec.solvers {
        for (order, rank) in spec.points() {
            let secs = time_iteration(
                solver,
                order,
                spec.extent,
                rank,
                spec.iterations,
                spec.missing_rate,
                spec.seed,
            )?;
            rows.push(BenchRow {
                solver: solver.name().to_string(),
                order,
                extent: spec.extent,
                rank,
                iterations: spec.iterations,
                secs_per_iter: secs,
            });
        }
    }
    Ok(rows)
}

/// Least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

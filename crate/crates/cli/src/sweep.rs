//! Parameter sweeps over missing rate, TR rank or λ.
//!
//! Repeat `r` of every grid point uses run seed `seed + r`, so all grid
//! points of one repeat share the same ground truth and (for fixed missing
//! rate) the same mask. Runs execute on the rayon pool and are collected in
//! grid order.

use rayon::prelude::*;
use trc_core::{rse, RseScope, Solver, TrRank};

use crate::error::{Error, Result};
use crate::experiment::{join, sub_seed, Instance, Stream, Tuning};
use crate::report::{mean_std, median, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    MissingRate(Vec<f64>),
    /// Solver rank vectors; the ground truth keeps the true rank.
    Rank(Vec<TrRank>),
    Lambda(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::MissingRate(_) => "missing_rate",
            SweepAxis::Rank(_) => "ssr",
            SweepAxis::Lambda(_) => "lambda",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::MissingRate(g) | SweepAxis::Lambda(g) => g.len(),
            SweepAxis::Rank(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, k: usize) -> String {
        match self {
            SweepAxis::MissingRate(g) | SweepAxis::Lambda(g) => g[k].to_string(),
            SweepAxis::Rank(g) => join(g[k].ranks(), "-"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub shape: Vec<usize>,
    pub true_rank: TrRank,
    /// Used unless the axis varies it.
    pub missing_rate: f64,
    pub axis: SweepAxis,
    pub solvers: Vec<Solver>,
    pub repeats: usize,
    pub seed: u64,
    /// `lambda` is overridden on a λ axis; `seed` is ignored.
    pub tuning: Tuning,
}

/// One finished run.
#[derive(Debug, Clone, Copy)]
struct RunResult {
    rse_missing: f64,
    rse_all: f64,
    iterations: usize,
    converged: bool,
}

/// Settings of one grid point.
struct Point {
    missing_rate: f64,
    rank: TrRank,
    lambda: f64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.axis.is_empty() {
            return Err(Error::Usage("sweep grid is empty".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Usage("repeats must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Usage("no solver selected".into()));
        }
        if let SweepAxis::Rank(grid) = &self.axis {
            if let Some(bad) = grid.iter().find(|r| r.len() != self.shape.len()) {
                return Err(trc_core::Error::RankOrderMismatch {
                    ranks: bad.len(),
                    order: self.shape.len(),
                }
                .into());
            }
        }
        Ok(())
    }

    fn point(&self, k: usize) -> Point {
        let mut p = Point {
            missing_rate: self.missing_rate,
            rank: self.true_rank.clone(),
            lambda: self.tuning.lambda,
        };
        match &self.axis {
            SweepAxis::MissingRate(g) => p.missing_rate = g[k],
            SweepAxis::Rank(g) => p.rank = g[k].clone(),
            SweepAxis::Lambda(g) => p.lambda = g[k],
        }
        p
    }

    fn run_one(&self, k: usize, solver: Solver, repeat: usize) -> Result<RunResult> {
        let p = self.point(k);
        let run_seed = self.seed.wrapping_add(repeat as u64);
        let inst = Instance::generate(&self.shape, &self.true_rank, p.missing_rate, run_seed)?;
        let tuning = Tuning {
            lambda: p.lambda,
            seed: sub_seed(run_seed, Stream::Init),
            ..self.tuning
        };
        let report = solver.solve(&inst.observed()?, &inst.mask, &tuning.config(p.rank), None)?;
        let rse_missing = if inst.mask.missing_count() > 0 {
            rse(&report.final_x, &inst.truth, RseScope::Missing(&inst.mask))?
        } else {
            0.0
        };
        Ok(RunResult {
            rse_missing,
            rse_all: rse(&report.final_x, &inst.truth, RseScope::All)?,
            iterations: report.iterations,
            converged: report.converged,
        })
    }
}

/// One row per grid point per solver, in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let tasks: Vec<(usize, Solver, usize)> = (0..spec.axis.len())
        .flat_map(|k| {
            spec.solvers
                .iter()
                .flat_map(move |&s| (0..spec.repeats).map(move |r| (k, s, r)))
        })
        .collect();
    let results: Vec<RunResult> = tasks
        .par_iter()
        .map(|&(k, s, r)| spec.run_one(k, s, r))
        .collect::<Result<_>>()?;

    let rows = tasks
        .chunks(spec.repeats)
        .zip(results.chunks(spec.repeats))
        .map(|(group, runs)| {
            let (k, solver, _) = group[0];
            let p = spec.point(k);
            let missing: Vec<f64> = runs.iter().map(|r| r.rse_missing).collect();
            let all: Vec<f64> = runs.iter().map(|r| r.rse_all).collect();
            let iters: Vec<f64> = runs.iter().map(|r| r.iterations as f64).collect();
            let (mean_rse_missing, std_rse_missing) = mean_std(&missing);
            SweepRow {
                axis: spec.axis.name().to_string(),
                value: spec.axis.label(k),
                solver: solver.name().to_string(),
                shape: join(&spec.shape, "x"),
                ranks: join(p.rank.ranks(), "-"),
                ssr: p.rank.ssr(),
                missing_rate: p.missing_rate,
                lambda: p.lambda,
                repeats: spec.repeats,
                mean_rse_missing,
                std_rse_missing,
                median_rse_missing: median(&missing),
                mean_rse_all: mean_std(&all).0,
                mean_iterations: mean_std(&iters).0,
                converged_runs: runs.iter().filter(|r| r.converged).count(),
            }
        })
        .collect();
    Ok(rows)
}

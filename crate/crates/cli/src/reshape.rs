//! Multi-order completion by canonical reshape.
//!
//! Reshaping keeps the first-index-fastest payload untouched, so a mode of
//! extent `a·b` splits into a fast mode `a` followed by a slow mode `b`.

use trc_core::{DenseTensor, ObservationMask, Solver};

use crate::commands::solve_problem;
use crate::error::{Error, Result};
use crate::experiment::{join, RankArg, Tuning};
use crate::report::CompletionRow;

/// Extents of the hyperspectral cube the recipe expects.
pub const HYPERSPECTRAL_SHAPE: [usize; 3] = [200, 200, 80];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReshapePlan {
    pub shape: Vec<usize>,
    /// Uniform TR rank used at this order.
    pub rank: usize,
}

/// Orders 3, 5, 7 and 8 of the 200×200×80 cube with their ranks.
pub fn hyperspectral_recipe() -> Vec<ReshapePlan> {
    [
        (vec![200, 200, 80], 12),
        (vec![10, 20, 10, 20, 80], 18),
        (vec![4, 5, 10, 4, 5, 10, 80], 20),
        (vec![8, 5, 5, 8, 5, 5, 8, 10], 22),
    ]
    .into_iter()
    .map(|(shape, rank)| ReshapePlan { shape, rank })
    .collect()
}

pub fn check_reshape(from: &[usize], to: &[usize]) -> Result<()> {
    let a: usize = from.iter().product();
    let b: usize = to.iter().product();
    if a != b || to.is_empty() {
        return Err(Error::Usage(format!(
            "cannot reshape {} ({a} entries) to {} ({b} entries)",
            join(from, "x"),
            join(to, "x")
        )));
    }
    Ok(())
}

/// Reshapes observation, mask and optional truth together.
pub fn reshape_problem(
    observed: &DenseTensor,
    mask: &ObservationMask,
    truth: Option<&DenseTensor>,
    to: &[usize],
) -> Result<(DenseTensor, ObservationMask, Option<DenseTensor>)> {
    check_reshape(observed.shape(), to)?;
    check_reshape(mask.shape(), to)?;
    let m = ObservationMask::new(to.to_vec(), mask.flags().to_vec())?;
    let t = truth.map(|t| t.reshape(to)).transpose()?;
    Ok((observed.reshape(to)?, m, t))
}

/// Runs every solver at every plan; rows come back in plan-major order.
pub fn run_plans(
    observed: &DenseTensor,
    mask: &ObservationMask,
    truth: Option<&DenseTensor>,
    plans: &[ReshapePlan],
    solvers: &[Solver],
    tuning: &Tuning,
) -> Result<Vec<CompletionRow>> {
    for plan in plans {
        check_reshape(observed.shape(), &plan.shape)?;
    }
    let mut rows = Vec::with_capacity(plans.len() * solvers.len());
    for plan in plans {
        for &solver in solvers {
            let rank = RankArg::Uniform(plan.rank);
            let done = solve_problem(observed, mask, truth, solver, &rank, tuning, Some(&plan.shape))?;
            rows.push(done.row);
        }
    }
    Ok(rows)
}

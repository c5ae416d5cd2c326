//! `synth` and `complete`.

use std::fs;
use std::path::{Path, PathBuf};

use trc_core::{rse, DenseTensor, ObservationMask, RseScope, Solver, TrRank};

use crate::error::{Error, Result};
use crate::experiment::{join, Instance, RankArg, Tuning};
use crate::io::{read_ground_truth, read_tensor, write_tensor};
use crate::report::{write_csv, CompletionRow, ReportKind};
use crate::reshape::reshape_problem;

pub const TRUTH_FILE: &str = "truth.trt";
pub const OBSERVED_FILE: &str = "observed.trt";
pub const COMPLETED_FILE: &str = "completed.trt";
pub const COMPLETION_CSV: &str = "completion.csv";

pub fn core_file(n: usize) -> String {
    format!("core_{n}.trt")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub shape: Vec<usize>,
    pub rank: TrRank,
    pub missing_rate: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Writes `truth.trt` and `observed.trt` into `out_dir`.
pub fn synth(spec: &SynthSpec) -> Result<Instance> {
    let inst = Instance::generate(&spec.shape, &spec.rank, spec.missing_rate, spec.seed)?;
    create_dir(&spec.out_dir)?;
    write_tensor(&spec.out_dir.join(TRUTH_FILE), &inst.truth, None)?;
    write_tensor(&spec.out_dir.join(OBSERVED_FILE), &inst.truth, Some(&inst.mask))?;
    Ok(inst)
}

#[derive(Debug, Clone)]
pub struct CompleteSpec {
    pub input: PathBuf,
    pub truth: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub solver: Solver,
    pub rank: RankArg,
    pub tuning: Tuning,
    /// Solve in this shape; outputs are reshaped back.
    pub reshape: Option<Vec<usize>>,
}

/// Outcome of one completion, already in the caller's shape.
#[derive(Debug, Clone)]
pub struct Completion {
    pub row: CompletionRow,
    pub completed: DenseTensor,
    pub cores: Vec<DenseTensor>,
}

/// Solves one problem, optionally in a reshaped form.
pub fn solve_problem(
    observed: &DenseTensor,
    mask: &ObservationMask,
    truth: Option<&DenseTensor>,
    solver: Solver,
    rank: &RankArg,
    tuning: &Tuning,
    reshape: Option<&[usize]>,
) -> Result<Completion> {
    let original = observed.shape().to_vec();
    let target = reshape.unwrap_or(&original);
    let (obs, m, _) = reshape_problem(observed, mask, None, target)?;
    let cfg = tuning.config(rank.resolve(target.len())?);
    let report = solver.solve(&obs, &m, &cfg, None)?;
    let completed = report.final_x.reshape(&original)?;

    let rse_all = truth.map(|t| rse(&completed, t, RseScope::All)).transpose()?;
    let rse_missing = match truth {
        Some(t) if mask.missing_count() > 0 => Some(rse(&completed, t, RseScope::Missing(mask))?),
        _ => None,
    };
    let row = CompletionRow {
        solver: solver.name().to_string(),
        shape: join(target, "x"),
        ranks: join(cfg.tr_rank.ranks(), "-"),
        missing_rate: mask.missing_rate(),
        lambda: cfg.lambda,
        iterations: report.iterations,
        converged: report.converged,
        rse_all,
        rse_missing,
        wall_time_s: report.wall_time.as_secs_f64(),
    };
    Ok(Completion {
        row,
        completed,
        cores: report.final_cores.into_cores(),
    })
}

/// Writes `completed.trt`, `core_<n>.trt` and `completion.csv` into `out_dir`.
pub fn complete(spec: &CompleteSpec) -> Result<Completion> {
    let (observed, mask) = read_tensor(&spec.input)?;
    let truth = spec.truth.as_deref().map(read_ground_truth).transpose()?;
    if let Some(t) = &truth {
        t.ensure_same_shape(&observed)?;
    }
    let done = solve_problem(
        &observed,
        &mask,
        truth.as_ref(),
        spec.solver,
        &spec.rank,
        &spec.tuning,
        spec.reshape.as_deref(),
    )?;
    create_dir(&spec.out_dir)?;
    write_tensor(&spec.out_dir.join(COMPLETED_FILE), &done.completed, None)?;
    for (n, core) in done.cores.iter().enumerate() {
        write_tensor(&spec.out_dir.join(core_file(n)), core, None)?;
    }
    write_csv(
        &spec.out_dir.join(COMPLETION_CSV),
        ReportKind::Completion,
        std::slice::from_ref(&done.row),
    )?;
    Ok(done)
}

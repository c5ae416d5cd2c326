use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trc_cli::bench::{bench, BenchSpec};
use trc_cli::commands::{complete, synth, CompleteSpec, SynthSpec, COMPLETION_CSV};
use trc_cli::experiment::{parse_list, RankArg, Tuning};
use trc_cli::io::read_tensor;
use trc_cli::report::{write_csv, write_rows, ReportKind};
use trc_cli::reshape::{hyperspectral_recipe, run_plans};
use trc_cli::sweep::{sweep, SweepAxis, SweepSpec};
use trc_cli::{Error, Result};
use trc_core::{Solver, SolverConfig};

#[derive(Parser)]
#[command(name = "trc", version, about = "Tensor-ring completion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth tensor and an observed copy with missing entries.
    Synth(SynthArgs),
    /// Complete an observed tensor file.
    Complete(CompleteArgs),
    /// Repeat completions over a grid of missing rates, ranks or λ values.
    Sweep(SweepArgs),
    /// Time solver iterations across tensor order and rank.
    Bench(BenchArgs),
}

#[derive(Args)]
struct TuningArgs {
    #[arg(long, default_value_t = SolverConfig::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

#[derive(Args)]
struct SynthArgs {
    /// Extents, e.g. 10,10,10,10.
    #[arg(long)]
    shape: String,
    /// TR rank vector, or one value for all bonds.
    #[arg(long)]
    rank: String,
    #[arg(long, default_value_t = 0.5)]
    missing_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Recipe {
    /// 200x200x80 cube at orders 3, 5, 7 and 8.
    Hyperspectral,
}

#[derive(Args)]
struct CompleteArgs {
    /// Observed tensor file; NaN marks missing entries.
    #[arg(long)]
    input: PathBuf,
    /// Ground-truth file for RSE columns.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Solver TR rank vector, or one value for all bonds; applies to the solved shape.
    #[arg(long, required_unless_present = "recipe")]
    rank: Option<String>,
    #[arg(long, default_value = "olrf")]
    solver: String,
    /// Solve in this shape instead; must hold the same number of entries.
    #[arg(long, conflicts_with = "recipe")]
    reshape: Option<String>,
    /// Run a predefined set of reshapes with both solvers; writes only a CSV.
    #[arg(long, value_enum)]
    recipe: Option<Recipe>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    MissingRate,
    Ssr,
    Lambda,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    /// Comma-separated values; for `ssr`, rank vectors separated by `;`.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    shape: String,
    /// True TR rank of the synthetic data.
    #[arg(long)]
    rank: String,
    #[arg(long, default_value_t = 0.5)]
    missing_rate: f64,
    /// One or more of olrf, llrf.
    #[arg(long, default_value = "olrf,llrf")]
    solver: String,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    tuning: TuningArgs,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "3,4,5,6,7,8")]
    orders: String,
    #[arg(long, default_value_t = 6)]
    extent: usize,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    #[arg(long, default_value = "2,3,4,5,6")]
    rank_sweep: String,
    #[arg(long, default_value_t = 4)]
    rank_sweep_order: usize,
    #[arg(long, default_value_t = 3)]
    iterations: usize,
    #[arg(long, default_value = "olrf")]
    solver: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl TuningArgs {
    fn tuning(&self, seed: u64) -> Tuning {
        Tuning {
            lambda: self.lambda,
            tol: self.tol,
            max_iters: self.max_iters,
            seed,
        }
    }
}

fn emit<T: serde::Serialize>(out: Option<&PathBuf>, kind: ReportKind, rows: &[T]) -> Result<()> {
    match out {
        Some(path) => write_csv(path, kind, rows),
        None => write_rows(std::io::stdout().lock(), kind, rows),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => {
            let shape = parse_list(&a.shape, "shape")?;
            let rank = a.rank.parse::<RankArg>()?.resolve(shape.len())?;
            let inst = synth(&SynthSpec {
                shape,
                rank,
                missing_rate: a.missing_rate,
                seed: a.seed,
                out_dir: a.out.clone(),
            })?;
            eprintln!(
                "wrote {} ({} of {} entries missing)",
                a.out.display(),
                inst.mask.missing_count(),
                inst.truth.len()
            );
        }
        Command::Complete(a) => {
            let tuning = a.tuning.tuning(a.seed);
            if let Some(Recipe::Hyperspectral) = a.recipe {
                let (observed, mask) = read_tensor(&a.input)?;
                let truth = a.truth.as_deref().map(trc_cli::io::read_ground_truth).transpose()?;
                let rows = run_plans(
                    &observed,
                    &mask,
                    truth.as_ref(),
                    &hyperspectral_recipe(),
                    &[Solver::Olrf, Solver::Llrf],
                    &tuning,
                )?;
                std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
                return write_csv(&a.out.join(COMPLETION_CSV), ReportKind::Completion, &rows);
            }
            let rank = a.rank.as_deref().expect("clap requires --rank without --recipe");
            let done = complete(&CompleteSpec {
                input: a.input,
                truth: a.truth,
                out_dir: a.out,
                solver: a.solver.parse()?,
                rank: rank.parse()?,
                tuning,
                reshape: a.reshape.as_deref().map(|s| parse_list(s, "reshape")).transpose()?,
            })?;
            write_rows(std::io::stdout().lock(), ReportKind::Completion, &[done.row])?;
        }
        Command::Sweep(a) => {
            let shape: Vec<usize> = parse_list(&a.shape, "shape")?;
            let true_rank = a.rank.parse::<RankArg>()?.resolve(shape.len())?;
            let axis = match a.axis {
                Axis::MissingRate => SweepAxis::MissingRate(parse_list(&a.grid, "grid")?),
                Axis::Lambda => SweepAxis::Lambda(parse_list(&a.grid, "grid")?),
                Axis::Ssr => SweepAxis::Rank(
                    a.grid
                        .split(';')
                        .map(|r| r.parse::<RankArg>()?.resolve(shape.len()))
                        .collect::<Result<_>>()?,
                ),
            };
            let rows = sweep(&SweepSpec {
                shape,
                true_rank,
                missing_rate: a.missing_rate,
                axis,
                solvers: parse_list(&a.solver, "solver")?,
                repeats: a.repeats,
                seed: a.seed,
                tuning: a.tuning.tuning(a.seed),
            })?;
            emit(a.out.as_ref(), ReportKind::Sweep, &rows)?;
        }
        Command::Bench(a) => {
            let rows = bench(&BenchSpec {
                solvers: parse_list(&a.solver, "solver")?,
                orders: parse_list(&a.orders, "orders")?,
                extent: a.extent,
                rank: a.rank,
                rank_sweep: parse_list(&a.rank_sweep, "rank sweep")?,
                rank_sweep_order: a.rank_sweep_order,
                iterations: a.iterations,
                seed: a.seed,
                ..BenchSpec::default()
            })?;
            emit(a.out.as_ref(), ReportKind::Bench, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

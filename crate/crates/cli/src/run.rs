use std::fmt::Write as _;
use std::time::Instant;

use anyhow::Result;
use clap::Args;

use streamk_core::decompose::decompose;
use streamk_core::executor::{execute_gemm, gemm_reference, verify};
use streamk_core::{DType, Element, Matrix, TileGrid, WorkAssignment};

use crate::common::{thread_count, ProblemArgs, StrategyArgs};

#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long, default_value = "f64")]
    pub dtype: DType,
    /// A is generated from this seed, B from seed + 1.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; falls back to STREAMK_LAB_THREADS, then the host.
    #[arg(long, env = "STREAMK_LAB_THREADS")]
    pub threads: Option<usize>,
    /// Perturb one output element before verification.
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

pub struct RunOutcome {
    pub report: String,
    pub pass: bool,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome> {
    let grid = args.problem.grid()?;
    let assignment = decompose(&grid, args.strategy.plan(&grid)?)?;
    let threads = thread_count(args.threads);
    match args.dtype {
        DType::Int64 => run_typed::<i64>(args, &grid, &assignment, threads),
        DType::Float32 => run_typed::<f32>(args, &grid, &assignment, threads),
        DType::Float64 => run_typed::<f64>(args, &grid, &assignment, threads),
    }
}

fn run_typed<E: Element>(
    args: &RunArgs,
    grid: &TileGrid,
    assignment: &WorkAssignment,
    threads: usize,
) -> Result<RunOutcome> {
    let a = Matrix::<E>::random(grid.m, grid.k, args.seed);
    let b = Matrix::<E>::random(grid.k, grid.n, args.seed.wrapping_add(1));

    let started = Instant::now();
    let mut c = Matrix::zeros(grid.m, grid.n);
    let stats = execute_gemm(assignment, E::one(), &a, &b, E::zero(), &mut c, threads)?;
    let exec_time = started.elapsed();

    let started = Instant::now();
    let reference = gemm_reference(grid.blocking, &a, &b)?;
    let ref_time = started.elapsed();

    if args.corrupt {
        let v = c.get(0, 0);
        c.set(0, 0, v + E::one() + E::one());
    }
    let report = verify(&c, &reference, grid.k)?;

    let mut out = String::new();
    writeln!(
        out,
        "run {} g={} dtype={} threads={threads} {}x{}x{} blk {}",
        assignment.strategy,
        assignment.grid_size,
        E::DTYPE,
        grid.m,
        grid.n,
        grid.k,
        grid.blocking
    )?;
    writeln!(out, "partials stored {}, tiles stored {}", stats.partials_stored, stats.tiles_stored)?;
    writeln!(out, "measured execute_s {:.6}", exec_time.as_secs_f64())?;
    writeln!(out, "measured reference_s {:.6}", ref_time.as_secs_f64())?;
    match (report.pass, report.exact) {
        (true, true) => writeln!(out, "PASS exact")?,
        (true, false) => writeln!(
            out,
            "PASS max_rel_err={:.3e} <= bound={:.3e}",
            report.max_rel_err, report.rel_bound
        )?,
        (false, _) => writeln!(
            out,
            "FAIL max_abs_err={:.3e} max_rel_err={:.3e} bound={:.3e}",
            report.max_abs_err, report.max_rel_err, report.rel_bound
        )?,
    }
    Ok(RunOutcome { report: out, pass: report.pass })
}

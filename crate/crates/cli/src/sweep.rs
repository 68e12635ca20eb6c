use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use streamk_core::costmodel::select_grid_size;
use streamk_core::decompose::{decompose, HybridVariant, Plan};
use streamk_core::executor::execute;
use streamk_core::simulate::{simulate, simulate_unit, utilization};
use streamk_core::{
    BlockingFactors, CostParamsF64, DType, Element, Exact, Matrix, Strategy, TileGrid,
    WorkAssignment,
};

use crate::common::{fmt_ratio, load_params, thread_count};

pub const CSV_HEADER: &str =
    "schema=1,m,n,k,t,iters_per_tile,strategy,g,utilization,makespan,measured_time_s";

const DIM_LIMIT: usize = 1 << 20;

/// Inclusive dimension range written `lo:hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

impl DimRange {
    pub const DESK: DimRange = DimRange { lo: 128, hi: 2048 };
    pub const PAPER: DimRange = DimRange { lo: 128, hi: 8192 };

    fn sample(self, rng: &mut SplitMix64) -> usize {
        if self.lo == self.hi {
            return self.lo;
        }
        let (lo, hi) = ((self.lo as f64).ln(), (self.hi as f64).ln());
        let x: f64 = rng.gen_range(lo..=hi);
        (x.exp().round() as usize).clamp(self.lo, self.hi)
    }
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        let range = DimRange { lo: parse(lo)?, hi: parse(hi)? };
        if range.lo < 1 || range.hi > DIM_LIMIT || range.lo > range.hi {
            return Err(format!("range {s} must satisfy 1 <= lo <= hi <= {DIM_LIMIT}"));
        }
        Ok(range)
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Range for m as lo:hi (default 128:2048, or 128:8192 with --paper-scale).
    #[arg(long)]
    pub m_range: Option<DimRange>,
    #[arg(long)]
    pub n_range: Option<DimRange>,
    #[arg(long)]
    pub k_range: Option<DimRange>,
    /// Sample each dimension from 128:8192.
    #[arg(long)]
    pub paper_scale: bool,
    /// Comma-separated strategies: dp, split:<s>, streamk, dp-1sk, 2sk-dp.
    #[arg(long, value_delimiter = ',', default_value = "dp,streamk,dp-1sk,2sk-dp")]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 108, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    #[arg(long, default_value = "128x128x32")]
    pub blk: BlockingFactors,
    /// Simulate with these cost constants and let the model pick Stream-K's g.
    /// Without it, time is counted in MAC iterations and g = p.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Also execute every schedule and record its wall-clock time.
    #[arg(long)]
    pub execute: bool,
    #[arg(long, default_value = "f32")]
    pub dtype: DType,
    #[arg(long, env = "STREAMK_LAB_THREADS")]
    pub threads: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SweepArgs {
    fn ranges(&self) -> [DimRange; 3] {
        let default = if self.paper_scale { DimRange::PAPER } else { DimRange::DESK };
        [self.m_range, self.n_range, self.k_range].map(|r| r.unwrap_or(default))
    }

    /// The sampled problem shapes, in output order.
    pub fn shapes(&self) -> Vec<(usize, usize, usize)> {
        let [rm, rn, rk] = self.ranges();
        let mut rng = SplitMix64::seed_from_u64(self.seed);
        (0..self.samples)
            .map(|_| {
                let m = rm.sample(&mut rng);
                let n = rn.sample(&mut rng);
                let k = rk.sample(&mut rng);
                (m, n, k)
            })
            .collect()
    }
}

/// Runs the sweep and returns the CSV text; also writes it to `--out`.
pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    if args.strategies.is_empty() {
        bail!("no strategies given");
    }
    let params = args.params.as_deref().map(load_params).transpose()?.map(|f| f.params);
    let p = args.p as usize;
    let grids = args
        .shapes()
        .into_iter()
        .map(|(m, n, k)| TileGrid::new(m, n, k, args.blk))
        .collect::<Result<Vec<_>, _>>()?;

    let row_sets: Vec<Result<Vec<String>>> = if args.execute {
        // measured times need an otherwise idle machine
        let threads = thread_count(args.threads);
        grids.iter().map(|g| rows_for(args, g, p, params.as_ref(), Some(threads))).collect()
    } else {
        grids.par_iter().map(|g| rows_for(args, g, p, params.as_ref(), None)).collect()
    };

    let mut csv = format!("{CSV_HEADER}\n");
    for rows in row_sets {
        for row in rows? {
            csv.push_str(&row);
        }
    }
    if let Some(path) = &args.out {
        std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(csv)
}

fn plan_for(strategy: Strategy, grid: &TileGrid, p: usize, params: Option<&CostParamsF64>) -> Plan {
    match strategy {
        Strategy::DataParallel => Plan::DataParallel,
        Strategy::FixedSplit(s) => Plan::FixedSplit { s },
        Strategy::StreamK => Plan::StreamK {
            g: params.map_or(p.min(grid.total_iters), |c| select_grid_size(c, grid, p)),
        },
        Strategy::DpOneTileSk => Plan::Hybrid { p, variant: HybridVariant::DpOneTileSk },
        Strategy::TwoTileSkDp => Plan::Hybrid { p, variant: HybridVariant::TwoTileSkDp },
    }
}

fn rows_for(
    args: &SweepArgs,
    grid: &TileGrid,
    p: usize,
    params: Option<&CostParamsF64>,
    threads: Option<usize>,
) -> Result<Vec<String>> {
    let mut rows = Vec::with_capacity(args.strategies.len());
    for &strategy in &args.strategies {
        let assignment = decompose(grid, plan_for(strategy, grid, p, params))?;
        let unit = simulate_unit::<Exact>(&assignment, p)?;
        let u = utilization(&unit);
        let util = fmt_ratio(*u.numer() as f64 / *u.denom() as f64);
        let makespan = match params {
            Some(c) => format!("{}", simulate(&assignment, p, c)?.makespan),
            None => unit.makespan.to_string(),
        };
        let measured = match threads {
            Some(t) => format!("{:.6}", measure(args.dtype, &assignment, args.seed, t)?),
            None => String::new(),
        };
        let mut row = String::new();
        writeln!(
            row,
            "1,{},{},{},{},{},{},{},{util},{makespan},{measured}",
            grid.m,
            grid.n,
            grid.k,
            grid.total_tiles,
            grid.iters_per_tile,
            assignment.strategy,
            assignment.grid_size
        )?;
        rows.push(row);
    }
    Ok(rows)
}

fn measure(dtype: DType, assignment: &WorkAssignment, seed: u64, threads: usize) -> Result<f64> {
    fn timed<E: Element>(a: &WorkAssignment, seed: u64, threads: usize) -> Result<f64> {
        let g = &a.grid;
        let lhs = Matrix::<E>::random(g.m, g.k, seed);
        let rhs = Matrix::<E>::random(g.k, g.n, seed.wrapping_add(1));
        let started = Instant::now();
        execute(a, &lhs, &rhs, threads)?;
        Ok(started.elapsed().as_secs_f64())
    }
    match dtype {
        DType::Int64 => timed::<i64>(assignment, seed, threads),
        DType::Float32 => timed::<f32>(assignment, seed, threads),
        DType::Float64 => timed::<f64>(assignment, seed, threads),
    }
}

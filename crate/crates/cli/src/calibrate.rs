use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;

use streamk_core::costmodel::{calibrate, predict_time, CalibrationSample, ParamsFile};
use streamk_core::decompose::stream_k;
use streamk_core::executor::execute_gemm;
use streamk_core::{BlockingFactors, CostParamsF64, Matrix, TileGrid};

/// Problem shape written `MxNxK`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let dims: Vec<usize> = s
            .split('x')
            .map(|d| d.trim().parse::<usize>().map_err(|e| format!("{d:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match dims[..] {
            [m, n, k] if m > 0 && n > 0 && k > 0 => Ok(Shape { m, n, k }),
            _ => Err(format!("expected MxNxK with positive extents, got {s:?}")),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.k)
    }
}

/// Planted constants `a,b,c,d` for replay mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Planted(pub CostParamsF64);

impl FromStr for Planted {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a, b, c, d] => CostParamsF64::new(a, b, c, d).map(Planted).map_err(|e| e.to_string()),
            _ => Err(format!("expected a,b,c,d, got {s:?}")),
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct CalibrateArgs {
    /// Benchmark shape; repeat for several. Defaults to 32x32x4096,
    /// 64x64x2048, 96x96x1536 and 128x128x1024.
    #[arg(long = "shape")]
    pub shapes: Vec<Shape>,
    #[arg(long, default_value = "32x32x32")]
    pub blk: BlockingFactors,
    /// Modeled processor count; each shape runs at g = t, ceil(p/2) and p.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    /// Repetitions per sample; the fastest is kept.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    /// Replay mode: synthesize noiseless times from these constants.
    #[arg(long)]
    pub synthetic: Option<Planted>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Params file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SHAPES: [Shape; 4] = [
    Shape { m: 32, n: 32, k: 4096 },
    Shape { m: 64, n: 64, k: 2048 },
    Shape { m: 96, n: 96, k: 1536 },
    Shape { m: 128, n: 128, k: 1024 },
];

pub fn benchmark_grid_sizes(grid: &TileGrid, p: usize) -> Vec<usize> {
    let mut gs: Vec<usize> =
        [grid.total_tiles, p.div_ceil(2), p].into_iter().map(|g| g.min(grid.total_iters)).collect();
    gs.sort_unstable();
    gs.dedup();
    gs
}

/// Slowest CTA of one single-threaded run, in microseconds. With one
/// worker no CTA waits, so each CTA's time is its own work.
fn measure(grid: &TileGrid, g: usize, seed: u64) -> Result<f64> {
    let assignment = stream_k(grid, g)?;
    let a = Matrix::<f64>::random(grid.m, grid.k, seed);
    let b = Matrix::<f64>::random(grid.k, grid.n, seed.wrapping_add(1));
    let mut c = Matrix::zeros(grid.m, grid.n);
    let stats = execute_gemm(&assignment, 1.0, &a, &b, 0.0, &mut c, 1)?;
    let slowest = stats.cta_times.iter().max().copied().unwrap_or_default();
    Ok(slowest.as_secs_f64() * 1e6)
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<(ParamsFile, String)> {
    let shapes = if args.shapes.is_empty() { DEFAULT_SHAPES.to_vec() } else { args.shapes.clone() };
    let p = args.p as usize;
    let mut out = String::new();
    let mut samples = Vec::new();
    for shape in &shapes {
        let grid = TileGrid::new(shape.m, shape.n, shape.k, args.blk)?;
        for g in benchmark_grid_sizes(&grid, p) {
            let time = match &args.synthetic {
                Some(Planted(params)) => predict_time(params, &grid, g),
                None => {
                    let mut best = f64::INFINITY;
                    for _ in 0..args.reps {
                        best = best.min(measure(&grid, g, args.seed)?);
                    }
                    best
                }
            };
            writeln!(out, "sample {shape} blk {} g={g} time={time:.3}", args.blk)?;
            samples.push(CalibrationSample { grid, g, time });
        }
    }
    let fit = calibrate(&samples)?;
    let file = ParamsFile { params: fit.params, fit_residual: Some(fit.residual) };
    let unit = if args.synthetic.is_some() { "synthetic" } else { "microseconds" };
    let text = format!("# streamk-lab calibrate, blk {}, time unit {unit}\n{file}", args.blk);
    out.push_str(&text);
    if let Some(path) = &args.out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok((file, out))
}

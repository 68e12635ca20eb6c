use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use streamk_core::costmodel::{select_grid_size, ParamsFile};
use streamk_core::decompose::{HybridVariant, Plan};
use streamk_core::executor::default_thread_count;
use streamk_core::{BlockingFactors, CostParamsF64, TileGrid};

/// Constants fitted on the development host by `streamk-lab calibrate`.
pub const BUNDLED_PARAMS: &str = include_str!("../params/default.params");

#[derive(Args, Clone, Debug)]
pub struct ProblemArgs {
    /// Rows of A and C.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1 << 20))]
    pub m: u64,
    /// Columns of B and C.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1 << 20))]
    pub n: u64,
    /// Accumulation depth.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1 << 20))]
    pub k: u64,
    /// Blocking factors as MxNxK.
    #[arg(long, default_value = "128x128x32")]
    pub blk: BlockingFactors,
}

impl ProblemArgs {
    pub fn grid(&self) -> Result<TileGrid> {
        Ok(TileGrid::new(self.m as usize, self.n as usize, self.k as usize, self.blk)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Dp,
    Split,
    Streamk,
    #[value(name = "dp-1sk")]
    DpOneTileSk,
    #[value(name = "2sk-dp")]
    TwoTileSkDp,
}

#[derive(Args, Clone, Debug)]
pub struct StrategyArgs {
    #[arg(long, value_enum, default_value = "streamk")]
    pub strategy: StrategyName,
    /// Stream-K grid size. Defaults to the model's choice when --params is
    /// given, otherwise to --p.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub g: Option<u64>,
    /// Fixed-split factor.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub s: u64,
    /// Processor (core / SM) count of the modeled machine.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    /// Cost-model constants file (a=, b=, c=, d=).
    #[arg(long)]
    pub params: Option<PathBuf>,
}

impl StrategyArgs {
    pub fn cost_params(&self) -> Result<Option<CostParamsF64>> {
        self.params.as_deref().map(load_params).transpose().map(|p| p.map(|f| f.params))
    }

    pub fn plan(&self, grid: &TileGrid) -> Result<Plan> {
        let p = self.p as usize;
        Ok(match self.strategy {
            StrategyName::Dp => Plan::DataParallel,
            StrategyName::Split => Plan::FixedSplit { s: self.s as usize },
            StrategyName::Streamk => {
                let g = match (self.g, self.cost_params()?) {
                    (Some(g), _) => g as usize,
                    (None, Some(params)) => select_grid_size(&params, grid, p),
                    (None, None) => p,
                };
                Plan::StreamK { g }
            }
            StrategyName::DpOneTileSk => Plan::Hybrid { p, variant: HybridVariant::DpOneTileSk },
            StrategyName::TwoTileSkDp => Plan::Hybrid { p, variant: HybridVariant::TwoTileSkDp },
        })
    }
}

pub fn load_params(path: &Path) -> Result<ParamsFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading params file {}", path.display()))?;
    text.parse::<ParamsFile>()
        .with_context(|| format!("malformed params file {}", path.display()))
}

pub fn bundled_params() -> ParamsFile {
    BUNDLED_PARAMS.parse().expect("bundled params file is well-formed")
}

pub fn thread_count(flag: Option<usize>) -> usize {
    flag.filter(|&t| t >= 1).unwrap_or_else(default_thread_count)
}

/// Shortest decimal that survives a round trip, with trailing noise
/// removed beyond six places.
pub fn fmt_ratio(x: f64) -> String {
    let rounded = (x * 1e6).round() / 1e6;
    format!("{rounded}")
}

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use streamk_core::decompose::{decompose, fixup_peers_of, starting_k_offsets};
use streamk_core::simulate::{render_gantt, simulate, simulate_unit, utilization};
use streamk_core::{Exact, WorkAssignment};

use crate::common::{fmt_ratio, ProblemArgs, StrategyArgs};

#[derive(Args, Clone, Debug)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Write a Gantt chart of the simulated timeline.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Write the assignment text here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the simulated timeline as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn cmd_schedule(args: &ScheduleArgs) -> Result<String> {
    let grid = args.problem.grid()?;
    let plan = args.strategy.plan(&grid)?;
    let assignment = decompose(&grid, plan)?;
    let p = args.strategy.p as usize;

    let mut out = String::new();
    writeln!(
        out,
        "problem {}x{}x{} blk {} tiles {} ({}x{}) iters/tile {} total iters {}",
        grid.m,
        grid.n,
        grid.k,
        grid.blocking,
        grid.total_tiles,
        grid.tiles_m,
        grid.tiles_n,
        grid.iters_per_tile,
        grid.total_iters
    )?;
    writeln!(out, "strategy {} g={} p={p}", assignment.strategy, assignment.grid_size)?;

    // unit-cost utilization is exact; a params file changes only the makespan
    let unit = simulate_unit::<Exact>(&assignment, p)?;
    let u = utilization(&unit);
    writeln!(out, "utilization {} ({u})", fmt_ratio(*u.numer() as f64 / *u.denom() as f64))?;
    match args.strategy.cost_params()? {
        Some(params) => {
            let tl = simulate(&assignment, p, &params)?;
            writeln!(out, "makespan {} (modeled), {} iterations (unit cost)", tl.makespan, unit.makespan)?;
            write_outputs(args, &render_gantt(&tl), &tl.to_csv())?;
        }
        None => {
            writeln!(out, "makespan {}", unit.makespan)?;
            write_outputs(args, &render_gantt(&unit), &unit.to_csv())?;
        }
    }
    out.push_str(&share_line(&assignment));
    out.push_str(&peer_lines(&assignment));
    out.push_str(&skew_line(&assignment, p));

    let text = assignment.to_text();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "assignment written to {}", path.display())?;
        }
        None => {
            out.push('\n');
            out.push_str(&text);
        }
    }
    Ok(out)
}

fn write_outputs(args: &ScheduleArgs, svg: &str, csv: &str) -> Result<()> {
    if let Some(path) = &args.svg {
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn share_line(a: &WorkAssignment) -> String {
    match a.share_bounds() {
        Some((lo, hi)) if lo == hi => format!("{hi} iters/CTA\n"),
        Some((lo, hi)) => {
            let big = a.ranges.iter().filter(|r| r.len() == hi).count();
            let small = a.ranges.iter().filter(|r| !r.is_empty() && r.len() == lo).count();
            format!("{lo}/{hi} iters/CTA ({small} x {lo}, {big} x {hi})\n")
        }
        None => "0 iters/CTA\n".into(),
    }
}

fn peer_lines(a: &WorkAssignment) -> String {
    let peers = fixup_peers_of(a);
    let shared = peers.iter().filter(|p| p.len() > 1).count();
    let max = peers.iter().map(Vec::len).max().unwrap_or(0);
    let stores: usize = peers.iter().map(|p| p.len() - 1).sum();
    format!("fixup peers: max {max}, shared tiles {shared}/{}, partial stores {stores}\n", peers.len())
}

const SKEW_LISTED: usize = 12;

/// Distinct k-offsets at which the first wave of CTAs start.
fn skew_line(a: &WorkAssignment, p: usize) -> String {
    let offsets = starting_k_offsets(a);
    let mut first_wave: Vec<usize> = offsets.iter().take(p).map(|&(_, k)| k).collect();
    first_wave.sort_unstable();
    first_wave.dedup();
    let mut list: Vec<String> = first_wave.iter().take(SKEW_LISTED).map(usize::to_string).collect();
    if first_wave.len() > SKEW_LISTED {
        list.push("...".into());
    }
    format!("skew: {} distinct starting k-offsets in first wave [{}]\n", first_wave.len(), list.join(", "))
}

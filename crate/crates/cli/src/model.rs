use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use streamk_core::costmodel::{fixup_peers, iters_per_cta, predict_time, select_grid_size};
use streamk_core::{CostParamsF64, TileGrid};

use crate::common::{bundled_params, load_params, ProblemArgs};

#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Cost-model constants; the bundled host calibration when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 108, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    /// Write the predicted-time curve over g as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Predicted time for every `g` in `1..=p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelTable {
    pub rows: Vec<ModelRow>,
    /// Lowest predicted time over `1..=p`, ties to the larger `g`.
    pub argmin: usize,
    /// Every `g` in `1..=p` attaining the minimum. Grid sizes with equal
    /// iterations per CTA and peer count cost the same.
    pub minimizers: Vec<usize>,
    /// [`select_grid_size`] over `{1..=p} ∪ {t}`.
    pub selected: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelRow {
    pub g: usize,
    pub iters_per_cta: usize,
    pub peers: usize,
    pub time: f64,
}

pub fn model_table(params: &CostParamsF64, grid: &TileGrid, p: usize) -> ModelTable {
    let rows: Vec<ModelRow> = (1..=p)
        .map(|g| ModelRow {
            g,
            iters_per_cta: iters_per_cta(grid, g),
            peers: fixup_peers(grid, g),
            time: predict_time(params, grid, g),
        })
        .collect();
    let argmin = rows
        .iter()
        .fold(&rows[0], |best, r| if r.time <= best.time { r } else { best })
        .g;
    let best = rows.iter().find(|r| r.g == argmin).map_or(0.0, |r| r.time);
    let minimizers = rows.iter().filter(|r| r.time == best).map(|r| r.g).collect();
    ModelTable { rows, argmin, minimizers, selected: select_grid_size(params, grid, p) }
}

pub fn cmd_model(args: &ModelArgs) -> Result<String> {
    let grid = args.problem.grid()?;
    let file = match &args.params {
        Some(path) => load_params(path)?,
        None => bundled_params(),
    };
    let params = file.params;
    let table = model_table(&params, &grid, args.p as usize);

    let mut out = String::new();
    writeln!(
        out,
        "problem {}x{}x{} blk {} tiles {} iters/tile {} p={}",
        grid.m, grid.n, grid.k, grid.blocking, grid.total_tiles, grid.iters_per_tile, args.p
    )?;
    writeln!(out, "params a={} b={} c={} d={}", params.a, params.b, params.c, params.d)?;
    writeln!(out, "{:>6} {:>12} {:>6} {:>16}", "g", "iters/CTA", "peers", "predicted")?;
    for r in &table.rows {
        let mark = if table.minimizers.contains(&r.g) { " *" } else { "" };
        writeln!(out, "{:>6} {:>12} {:>6} {:>16.6}{mark}", r.g, r.iters_per_cta, r.peers, r.time)?;
    }
    let ties: Vec<String> = table.minimizers.iter().map(usize::to_string).collect();
    writeln!(out, "minimum at g={}", ties.join(","))?;
    writeln!(out, "argmin g={}", table.argmin)?;
    writeln!(out, "selected g={} (search over 1..{} and t={})", table.selected, args.p, grid.total_tiles)?;

    if let Some(path) = &args.svg {
        std::fs::write(path, render_curve(&table)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(out)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 50.0;

pub fn render_curve(table: &ModelTable) -> String {
    let (lo, hi) = table
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.time), hi.max(r.time)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let last = table.rows.last().map_or(1, |r| r.g).max(2);
    let x = |g: usize| MARGIN + (g - 1) as f64 / (last - 1) as f64 * (WIDTH - 2.0 * MARGIN);
    let y = |t: f64| HEIGHT - MARGIN - (t - lo) / span * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">grid size g</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(svg, r#"<text x="{x0}" y="{:.1}" text-anchor="end">{hi:.3}</text>"#, y1 + 4.0);
    let _ = writeln!(svg, r#"<text x="{x0}" y="{:.1}" text-anchor="end">{lo:.3}</text>"#, y0 + 4.0);
    let _ = writeln!(svg, r#"<text x="{x0}" y="{:.1}" text-anchor="middle">1</text>"#, y0 + 16.0);
    let _ = writeln!(svg, r#"<text x="{x1}" y="{:.1}" text-anchor="middle">{last}</text>"#, y0 + 16.0);

    let points: Vec<String> = table.rows.iter().map(|r| format!("{:.2},{:.2}", x(r.g), y(r.time))).collect();
    let _ = writeln!(svg, r#"<polyline class="curve" fill="none" stroke="steelblue" points="{}"/>"#, points.join(" "));
    if let Some(best) = table.rows.iter().find(|r| r.g == table.argmin) {
        let (cx, cy) = (x(best.g), y(best.time));
        let _ = writeln!(svg, r#"<circle class="argmin" cx="{cx:.2}" cy="{cy:.2}" r="4" fill="crimson"/>"#);
        let _ = writeln!(svg, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">g={}</text>"#, cy - 8.0, best.g);
    }
    svg.push_str("</svg>\n");
    svg
}

//! Idealized timelines of a [`WorkAssignment`] on an abstract `p`-core
//! machine, plus SVG/CSV rendering.
//!
//! CTAs are dispatched in cta_id order, each to the earliest-free core
//! (lowest index on ties), and run to completion. Waiting on peers is
//! treated as free: owners get a zero-length `fixup_wait` marker.

use std::fmt::Write as _;
use std::path::Path;

use crate::costmodel::CostParams;
use crate::decompose::fixup_peers_of;
use crate::domain::WorkAssignment;
use crate::error::{Error, Result};
use crate::scalar::TimeScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Fixed per-CTA cost `a`.
    Setup,
    Mac,
    /// Writing partials for an unstarted tile (cost `b`).
    FixupStore,
    FixupWait,
    /// Reducing `peers - 1` collaborators' partials (cost `d` each).
    FixupReduce,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Setup => "setup",
            EventKind::Mac => "mac",
            EventKind::FixupStore => "fixup_store",
            EventKind::FixupWait => "fixup_wait",
            EventKind::FixupReduce => "fixup_reduce",
        }
    }

    pub fn is_fixup(self) -> bool {
        matches!(self, EventKind::FixupStore | EventKind::FixupWait | EventKind::FixupReduce)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event<T> {
    pub core: usize,
    pub cta_id: usize,
    pub kind: EventKind,
    pub start: T,
    pub end: T,
    /// Global iteration range covered (mac events); the owning tile range
    /// otherwise.
    pub iter_begin: usize,
    pub iter_end: usize,
}

impl<T: TimeScalar> Event<T> {
    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Timeline<T> {
    pub p: usize,
    pub iters_per_tile: usize,
    /// Sorted by core, then start time.
    pub events: Vec<Event<T>>,
    pub makespan: T,
}

impl<T: TimeScalar> Timeline<T> {
    pub fn events_on(&self, core: usize) -> impl Iterator<Item = &Event<T>> {
        self.events.iter().filter(move |e| e.core == core)
    }

    pub fn mac_time(&self) -> T {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Mac)
            .fold(T::zero(), |acc, e| acc + e.duration())
    }

    /// `core_id,cta_id,kind,start,end` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("core_id,cta_id,kind,start,end\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{},{},{}", e.core, e.cta_id, e.kind.name(), e.start, e.end);
        }
        out
    }
}

/// Simulates `assignment` on `p` cores with per-CTA durations from the
/// cost constants: `a` once per non-empty CTA, `c` per iteration, `b` if
/// the CTA stores partials, and `d · (peers − 1)` per owned tile.
pub fn simulate<T: TimeScalar>(
    assignment: &WorkAssignment,
    p: usize,
    params: &CostParams<T>,
) -> Result<Timeline<T>> {
    if p == 0 {
        return Err(Error::InvalidParameter("core count must be at least 1".into()));
    }
    let grid = &assignment.grid;
    let ipt = grid.iters_per_tile;
    let peers = fixup_peers_of(assignment);
    let mut free = vec![T::zero(); p];
    let mut per_core: Vec<Vec<Event<T>>> = vec![Vec::new(); p];

    for range in &assignment.ranges {
        let core = free
            .iter()
            .enumerate()
            .fold(0, |best, (i, &t)| if t < free[best] { i } else { best });
        let mut clock = free[core];
        let events = &mut per_core[core];
        let mut push = |kind, duration: T, begin, end| {
            events.push(Event {
                core,
                cta_id: range.cta_id,
                kind,
                start: clock,
                end: clock + duration,
                iter_begin: begin,
                iter_end: end,
            });
            clock = clock + duration;
        };

        if !range.is_empty() && params.a > T::zero() {
            push(EventKind::Setup, params.a, range.iter_begin, range.iter_begin);
        }
        push(
            EventKind::Mac,
            params.c * T::from_count(range.len()),
            range.iter_begin,
            range.iter_end,
        );
        for (tile, local_begin, _) in range.tile_segments(ipt) {
            let tile_range = (tile * ipt, (tile + 1) * ipt);
            if local_begin != 0 {
                if params.b > T::zero() {
                    push(EventKind::FixupStore, params.b, tile_range.0, tile_range.1);
                }
            } else if peers[tile].len() > 1 {
                push(EventKind::FixupWait, T::zero(), tile_range.0, tile_range.1);
                let reduce = params.d * T::from_count(peers[tile].len() - 1);
                if reduce > T::zero() {
                    push(EventKind::FixupReduce, reduce, tile_range.0, tile_range.1);
                }
            }
        }
        free[core] = clock;
    }

    let makespan = free.iter().fold(T::zero(), |acc, &t| if t > acc { t } else { acc });
    Ok(Timeline {
        p,
        iters_per_tile: ipt,
        events: per_core.into_iter().flatten().collect(),
        makespan,
    })
}

/// [`simulate`] with unit cost: a CTA takes as long as its iteration count.
pub fn simulate_unit<T: TimeScalar>(assignment: &WorkAssignment, p: usize) -> Result<Timeline<T>> {
    simulate(assignment, p, &CostParams::unit())
}

/// Busy MAC time over `p × makespan`; zero for an empty timeline.
pub fn utilization<T: TimeScalar>(timeline: &Timeline<T>) -> T {
    let capacity = T::from_count(timeline.p) * timeline.makespan;
    if capacity == T::zero() {
        return T::zero();
    }
    timeline.mac_time() / capacity
}

const WIDTH: f64 = 960.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const ROW: f64 = 28.0;
const BAR: f64 = 20.0;
const TICKS: usize = 5;

fn tile_color(tile: usize) -> String {
    let hue = (tile as f64 * 137.508) % 360.0;
    format!("hsl({hue:.1},65%,62%)")
}

/// Deterministic SVG 1.1 Gantt chart: one row per core, one outlined bar
/// per event. Mac bars are filled with per-tile segments coloured by tile
/// index; fixup events are hatched.
pub fn render_gantt<T: TimeScalar>(timeline: &Timeline<T>) -> String {
    let rows = timeline.p;
    let plot_w = WIDTH - LEFT - RIGHT;
    let axis_y = TOP + rows as f64 * ROW + 6.0;
    let height = axis_y + 30.0;
    let span = timeline.makespan.to_f64().unwrap_or(0.0);
    let x_of = |t: T| {
        let t = t.to_f64().unwrap_or(0.0);
        if span > 0.0 {
            LEFT + plot_w * t / span
        } else {
            LEFT
        }
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    svg.push_str(concat!(
        "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\">",
        "<path d=\"M0,6 L6,0\" stroke=\"#333\" stroke-width=\"1\"/></pattern></defs>\n",
    ));
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{height:.0}" fill="white"/>"#);

    for core in 0..rows {
        let y = TOP + core as f64 * ROW;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="12" text-anchor="end">core {core}</text>"#,
            LEFT - 8.0,
            y + BAR * 0.75
        );
    }

    let _ = writeln!(
        svg,
        r##"<line class="axis" x1="{LEFT:.1}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="#000"/>"##,
        LEFT + plot_w
    );
    for i in 0..=TICKS {
        let x = LEFT + plot_w * i as f64 / TICKS as f64;
        let label = span * i as f64 / TICKS as f64;
        let _ = writeln!(
            svg,
            r##"<line class="tick" x1="{x:.1}" y1="{axis_y:.1}" x2="{x:.1}" y2="{:.1}" stroke="#000"/><text x="{x:.1}" y="{:.1}" font-family="monospace" font-size="11" text-anchor="middle">{label:.3}</text>"##,
            axis_y + 4.0,
            axis_y + 17.0
        );
    }

    for e in &timeline.events {
        let y = TOP + e.core as f64 * ROW;
        let (x0, x1) = (x_of(e.start), x_of(e.end));
        let w = x1 - x0;
        match e.kind {
            EventKind::Mac => {
                let len = e.iter_end - e.iter_begin;
                let mut iter = e.iter_begin;
                while iter < e.iter_end {
                    let tile = iter / timeline.iters_per_tile;
                    let seg_end = e.iter_end.min((tile + 1) * timeline.iters_per_tile);
                    let sx = x0 + w * (iter - e.iter_begin) as f64 / len as f64;
                    let sw = w * (seg_end - iter) as f64 / len as f64;
                    let _ = writeln!(
                        svg,
                        r#"<rect class="seg" x="{sx:.3}" y="{y:.1}" width="{sw:.3}" height="{BAR:.1}" fill="{}"><title>tile {tile}</title></rect>"#,
                        tile_color(tile)
                    );
                    iter = seg_end;
                }
                let _ = writeln!(
                    svg,
                    r##"<rect class="mac" x="{x0:.3}" y="{y:.1}" width="{w:.3}" height="{BAR:.1}" fill="none" stroke="#222"><title>cta {} iters [{}, {})</title></rect>"##,
                    e.cta_id, e.iter_begin, e.iter_end
                );
            }
            EventKind::FixupWait => {
                let _ = writeln!(
                    svg,
                    r##"<line class="fixup_wait" x1="{x0:.3}" y1="{:.1}" x2="{x0:.3}" y2="{:.1}" stroke="#c00" stroke-width="2"><title>cta {} waits</title></line>"##,
                    y - 2.0,
                    y + BAR + 2.0,
                    e.cta_id
                );
            }
            kind => {
                let fill = if kind.is_fixup() { "url(#hatch)" } else { "#bbb" };
                let _ = writeln!(
                    svg,
                    r##"<rect class="{}" x="{x0:.3}" y="{y:.1}" width="{w:.3}" height="{BAR:.1}" fill="{fill}" stroke="#222"><title>cta {} {}</title></rect>"##,
                    kind.name(),
                    e.cta_id,
                    kind.name()
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes [`render_gantt`] output to `path`.
pub fn write_gantt<T: TimeScalar>(timeline: &Timeline<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_gantt(timeline))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{data_parallel, fixed_split, quantization_efficiency, stream_k};
    use crate::domain::{BlockingFactors, Strategy, TileGrid};
    use num_rational::Rational64;

    fn grid(m: usize, n: usize, k: usize, bm: usize, bn: usize, bk: usize) -> TileGrid {
        TileGrid::new(m, n, k, BlockingFactors::new(bm, bn, bk).unwrap()).unwrap()
    }

    #[test]
    fn dp_nine_tiles_on_four_cores() {
        let a = data_parallel(&grid(384, 384, 128, 128, 128, 128));
        let tl = simulate_unit::<Rational64>(&a, 4).unwrap();
        assert_eq!(tl.makespan, Rational64::from_integer(3));
        assert_eq!(utilization(&tl), Rational64::new(3, 4));
        assert_eq!(tl.events_on(0).count(), 3);
        assert_eq!(tl.events_on(3).count(), 2);
    }

    #[test]
    fn eighteen_tiles_and_stream_k() {
        let a = data_parallel(&grid(384, 384, 128, 128, 64, 128));
        assert_eq!(utilization(&simulate_unit::<Rational64>(&a, 4).unwrap()), Rational64::new(9, 10));

        let a = fixed_split(&grid(384, 384, 128, 128, 128, 64), 2).unwrap();
        assert_eq!(utilization(&simulate_unit::<Rational64>(&a, 4).unwrap()), Rational64::new(9, 10));

        let a = stream_k(&grid(384, 384, 128, 128, 128, 4), 4).unwrap();
        let tl = simulate_unit::<Rational64>(&a, 4).unwrap();
        assert_eq!(tl.makespan, Rational64::from_integer(72));
        assert_eq!(utilization(&tl), Rational64::from_integer(1));
    }

    #[test]
    fn single_cta_quarter_utilization() {
        let a = data_parallel(&grid(64, 64, 64, 64, 64, 64));
        assert_eq!(utilization(&simulate_unit::<Rational64>(&a, 4).unwrap()), Rational64::new(1, 4));
    }

    #[test]
    fn dp_matches_quantization_efficiency() {
        for (m, n) in [(384, 384), (640, 256), (128, 1280)] {
            let g = grid(m, n, 256, 128, 128, 32);
            let tl = simulate_unit::<Rational64>(&data_parallel(&g), 4).unwrap();
            let q = quantization_efficiency(g.total_tiles, 4).unwrap();
            assert_eq!(utilization(&tl), Rational64::new(*q.numer() as i64, *q.denom() as i64));
        }
    }

    #[test]
    fn model_costs_appear_as_events() {
        let a = stream_k(&grid(384, 384, 128, 128, 128, 4), 4).unwrap();
        let params = CostParams::new(10.0, 5.0, 1.0, 2.0).unwrap();
        let tl = simulate(&a, 4, &params).unwrap();
        // cta 0: setup, mac, wait + reduce for tile 2
        let kinds: Vec<_> = tl.events_on(0).map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![EventKind::Setup, EventKind::Mac, EventKind::FixupWait, EventKind::FixupReduce]
        );
        // cta 3 only stores partials for tile 6
        let kinds: Vec<_> = tl.events_on(3).map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::Setup, EventKind::Mac, EventKind::FixupStore]);
        assert_eq!(tl.mac_time(), 288.0);
        assert_eq!(tl.makespan, 10.0 + 72.0 + 5.0 + 2.0);
    }

    #[test]
    fn events_do_not_overlap_per_core() {
        let a = fixed_split(&grid(300, 200, 96, 64, 64, 16), 4).unwrap();
        assert_eq!(a.strategy, Strategy::FixedSplit(4));
        let tl = simulate(&a, 3, &CostParams::new(1.0, 0.5, 1.0, 0.25).unwrap()).unwrap();
        for core in 0..3 {
            let evs: Vec<_> = tl.events_on(core).collect();
            for pair in evs.windows(2) {
                assert!(pair[0].end <= pair[1].start);
            }
        }
        let macs = tl.events.iter().filter(|e| e.kind == EventKind::Mac).count();
        assert_eq!(macs, a.grid_size);
    }

    #[test]
    fn rejects_zero_cores() {
        let a = data_parallel(&grid(64, 64, 64, 64, 64, 64));
        assert!(simulate_unit::<f64>(&a, 0).is_err());
    }

    #[test]
    fn csv_dump() {
        let a = data_parallel(&grid(128, 64, 64, 64, 64, 64));
        let tl = simulate_unit::<f64>(&a, 2).unwrap();
        assert_eq!(tl.to_csv(), "core_id,cta_id,kind,start,end\n0,0,mac,0,1\n1,1,mac,0,1\n");
    }

    #[test]
    fn gantt_shapes() {
        let a = stream_k(&grid(384, 384, 128, 128, 128, 4), 4).unwrap();
        let svg = render_gantt(&simulate_unit::<f64>(&a, 4).unwrap());
        assert_eq!(svg.matches(r#"class="mac""#).count(), 4);
        assert!(svg.contains(r#"width="870.000""#), "full-width bars");
        assert!(svg.starts_with("<?xml"));

        let a = data_parallel(&grid(384, 384, 128, 128, 128, 128));
        let tl = simulate_unit::<f64>(&a, 4).unwrap();
        let svg = render_gantt(&tl);
        assert_eq!(svg.matches(r#"class="mac""#).count(), 9);
        assert_eq!(svg.matches(r#"y="20.0" width"#).count(), 6, "3 bars (+segments) on core 0");
        assert_eq!(render_gantt(&tl), svg);
    }

    #[test]
    fn gantt_empty_has_axes() {
        let tl = Timeline::<f64> { p: 4, iters_per_tile: 1, events: vec![], makespan: 0.0 };
        let svg = render_gantt(&tl);
        assert!(svg.contains(r#"class="axis""#));
        assert!(!svg.contains(r#"class="mac""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn gantt_write_errors_on_bad_path() {
        let tl = Timeline::<f64> { p: 1, iters_per_tile: 1, events: vec![], makespan: 0.0 };
        assert!(matches!(write_gantt(&tl, "/nonexistent/dir/x.svg"), Err(Error::Io(_))));
    }
}

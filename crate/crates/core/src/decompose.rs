//! Work decompositions over the linearized MAC-iteration domain.
//!
//! Every strategy produces a [`WorkAssignment`]: one contiguous range of
//! global iterations per CTA. Tile-based strategies (data-parallel,
//! fixed-split) cut only at tile or split boundaries; Stream-K cuts the
//! aggregate iteration count into near-equal shares regardless of where
//! tile boundaries fall. The hybrids confine Stream-K balancing to a
//! tile-aligned tail region and run the rest as whole-tile waves.

use num_rational::Ratio;

use crate::domain::{CtaRange, Strategy, TileGrid, WorkAssignment};
use crate::error::{Error, Result};

/// The two hybrid schedules that mix whole-tile waves with a Stream-K region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HybridVariant {
    /// Full data-parallel waves, then the leftover partial wave's tiles
    /// balanced across `p` CTAs (each gets less than one tile).
    DpOneTileSk,
    /// One fewer full wave; the Stream-K region holds between `p` and
    /// `2p - 1` tiles so each CTA gets at least one and under two tiles.
    TwoTileSkDp,
}

impl HybridVariant {
    pub fn strategy(self) -> Strategy {
        match self {
            HybridVariant::DpOneTileSk => Strategy::DpOneTileSk,
            HybridVariant::TwoTileSkDp => Strategy::TwoTileSkDp,
        }
    }
}

/// Strategy plus the knob it needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Plan {
    DataParallel,
    FixedSplit { s: usize },
    StreamK { g: usize },
    Hybrid { p: usize, variant: HybridVariant },
}

impl Plan {
    pub fn strategy(&self) -> Strategy {
        match *self {
            Plan::DataParallel => Strategy::DataParallel,
            Plan::FixedSplit { s } => Strategy::FixedSplit(s),
            Plan::StreamK { .. } => Strategy::StreamK,
            Plan::Hybrid { variant, .. } => variant.strategy(),
        }
    }
}

/// Builds the assignment for `plan`.
pub fn decompose(grid: &TileGrid, plan: Plan) -> Result<WorkAssignment> {
    match plan {
        Plan::DataParallel => Ok(data_parallel(grid)),
        Plan::FixedSplit { s } => fixed_split(grid, s),
        Plan::StreamK { g } => stream_k(grid, g),
        Plan::Hybrid { p, variant } => hybrid(grid, p, variant),
    }
}

/// One CTA per output tile.
pub fn data_parallel(grid: &TileGrid) -> WorkAssignment {
    let ipt = grid.iters_per_tile;
    let ranges = (0..grid.total_tiles)
        .map(|x| CtaRange {
            cta_id: x,
            iter_begin: x * ipt,
            iter_end: (x + 1) * ipt,
        })
        .collect();
    WorkAssignment {
        grid_size: grid.total_tiles,
        ranges,
        strategy: Strategy::DataParallel,
        grid: *grid,
    }
}

/// `s` CTAs per tile, each taking a `ceil(iters_per_tile / s)` chunk; CTA
/// `x * s + y` handles chunk `y` of tile `x`. Trailing chunks may be short
/// or empty.
pub fn fixed_split(grid: &TileGrid, s: usize) -> Result<WorkAssignment> {
    if s == 0 {
        return Err(Error::InvalidParameter("split factor must be at least 1".into()));
    }
    let ipt = grid.iters_per_tile;
    let per_split = ipt.div_ceil(s);
    let mut ranges = Vec::with_capacity(grid.total_tiles * s);
    for x in 0..grid.total_tiles {
        let tile_begin = x * ipt;
        for y in 0..s {
            let local = (y * per_split).min(ipt);
            let local_end = (local + per_split).min(ipt);
            ranges.push(CtaRange {
                cta_id: x * s + y,
                iter_begin: tile_begin + local,
                iter_end: tile_begin + local_end,
            });
        }
    }
    Ok(WorkAssignment {
        grid_size: grid.total_tiles * s,
        ranges,
        strategy: Strategy::FixedSplit(s),
        grid: *grid,
    })
}

/// Basic Stream-K over `g` CTAs.
///
/// The first `total_iters % g` CTAs take `ceil(total_iters / g)` iterations
/// and the rest take the floor, so shares differ by at most one. Surplus
/// CTAs (when `g > total_iters`) get empty ranges.
pub fn stream_k(grid: &TileGrid, g: usize) -> Result<WorkAssignment> {
    if g == 0 {
        return Err(Error::InvalidParameter("grid size must be at least 1".into()));
    }
    Ok(WorkAssignment {
        grid_size: g,
        ranges: balanced_ranges(0, grid.total_iters, g, 0),
        strategy: Strategy::StreamK,
        grid: *grid,
    })
}

fn balanced_ranges(begin: usize, len: usize, count: usize, first_id: usize) -> Vec<CtaRange> {
    let base = len / count;
    let extra = len % count;
    let mut cursor = begin;
    (0..count)
        .map(|i| {
            let share = base + usize::from(i < extra);
            let r = CtaRange {
                cta_id: first_id + i,
                iter_begin: cursor,
                iter_end: cursor + share,
            };
            cursor += share;
            r
        })
        .collect()
}

/// Tile split between the whole-tile region and the Stream-K region of a
/// hybrid schedule: `(dp_tiles, sk_tiles)`. The Stream-K region is always
/// the trailing `sk_tiles` tiles.
pub fn hybrid_regions(total_tiles: usize, p: usize, variant: HybridVariant) -> (usize, usize) {
    let waves = total_tiles / p;
    if total_tiles % p == 0 {
        return (total_tiles, 0);
    }
    let dp_tiles = match variant {
        HybridVariant::DpOneTileSk => waves * p,
        HybridVariant::TwoTileSkDp => waves.saturating_sub(1) * p,
    };
    (dp_tiles, total_tiles - dp_tiles)
}

/// Hybrid data-parallel / Stream-K schedule on `p` cores.
///
/// `DpOneTileSk` numbers the whole-tile CTAs first and the `p` Stream-K
/// CTAs after them. `TwoTileSkDp` numbers the `p` Stream-K CTAs first. When
/// `p` divides the tile count there is no partial wave and the result is
/// range-identical to [`data_parallel`].
pub fn hybrid(grid: &TileGrid, p: usize, variant: HybridVariant) -> Result<WorkAssignment> {
    if p == 0 {
        return Err(Error::InvalidParameter("processor count must be at least 1".into()));
    }
    let (dp_tiles, sk_tiles) = hybrid_regions(grid.total_tiles, p, variant);
    let strategy = variant.strategy();
    if sk_tiles == 0 {
        return Ok(WorkAssignment { strategy, ..data_parallel(grid) });
    }
    let ipt = grid.iters_per_tile;
    let sk_begin = dp_tiles * ipt;
    let sk_len = sk_tiles * ipt;
    let dp_range = |tile: usize, cta_id: usize| CtaRange {
        cta_id,
        iter_begin: tile * ipt,
        iter_end: (tile + 1) * ipt,
    };
    let ranges = match variant {
        HybridVariant::DpOneTileSk => {
            let mut ranges: Vec<CtaRange> = (0..dp_tiles).map(|x| dp_range(x, x)).collect();
            ranges.extend(balanced_ranges(sk_begin, sk_len, p, dp_tiles));
            ranges
        }
        HybridVariant::TwoTileSkDp => {
            let mut ranges = balanced_ranges(sk_begin, sk_len, p, 0);
            ranges.extend((0..dp_tiles).map(|x| dp_range(x, p + x)));
            ranges
        }
    };
    Ok(WorkAssignment {
        grid_size: ranges.len(),
        ranges,
        strategy,
        grid: *grid,
    })
}

/// For each tile, the ascending ids of CTAs whose non-empty ranges touch it.
/// The first entry is the tile's owner: the CTA that runs its first
/// iteration and writes it to C.
pub fn fixup_peers_of(assignment: &WorkAssignment) -> Vec<Vec<usize>> {
    let grid = &assignment.grid;
    let mut peers = vec![Vec::new(); grid.total_tiles];
    for r in &assignment.ranges {
        for (tile, _, _) in r.tile_segments(grid.iters_per_tile) {
            peers[tile].push(r.cta_id);
        }
    }
    for list in &mut peers {
        list.sort_unstable();
    }
    peers
}

/// CTA that performs each tile's first (k = 0) iteration.
pub fn tile_owners(assignment: &WorkAssignment) -> Vec<usize> {
    let grid = &assignment.grid;
    let mut owners = vec![usize::MAX; grid.total_tiles];
    for r in &assignment.ranges {
        for (tile, local_begin, _) in r.tile_segments(grid.iters_per_tile) {
            if local_begin == 0 {
                owners[tile] = r.cta_id;
            }
        }
    }
    owners
}

/// Number of non-empty ranges that begin strictly inside a tile, i.e. the
/// seams that force a partial-sum exchange.
pub fn interior_seams(assignment: &WorkAssignment) -> usize {
    let ipt = assignment.grid.iters_per_tile;
    assignment
        .ranges
        .iter()
        .filter(|r| !r.is_empty() && r.iter_begin % ipt != 0)
        .count()
}

/// Starting k-offset (in elements) of each non-empty CTA, in cta_id order.
/// Distinct offsets among concurrently running CTAs are tile-processing skew.
pub fn starting_k_offsets(assignment: &WorkAssignment) -> Vec<(usize, usize)> {
    let grid = &assignment.grid;
    assignment
        .ranges
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| (r.cta_id, (r.iter_begin % grid.iters_per_tile) * grid.blocking.blk_k))
        .collect()
}

/// Utilization ceiling `t / (ceil(t / p) * p)` of a one-tile-per-CTA
/// schedule with uniform tiles.
pub fn quantization_efficiency(tiles: usize, p: usize) -> Result<Ratio<u64>> {
    if tiles == 0 || p == 0 {
        return Err(Error::InvalidParameter(format!(
            "tile and processor counts must be positive, got t={tiles} p={p}"
        )));
    }
    let waves = tiles.div_ceil(p);
    Ok(Ratio::new(tiles as u64, (waves * p) as u64))
}

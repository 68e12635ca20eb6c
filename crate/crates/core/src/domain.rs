//! Problem shapes, blocking factors and the tile/iteration arithmetic every
//! decomposition builds on.
//!
//! The MAC-iteration domain is linearized m → n → k: output tiles are
//! numbered row-major over `(tiles_m, tiles_n)`, and each tile owns a
//! contiguous run of `iters_per_tile` iterations along k.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Element type tag carried by a [`GemmProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DType {
    Int64,
    Float32,
    Float64,
}

impl DType {
    /// Numeric tag used by the binary matrix format.
    pub fn tag(self) -> u32 {
        match self {
            DType::Int64 => 1,
            DType::Float32 => 2,
            DType::Float64 => 3,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            1 => Some(DType::Int64),
            2 => Some(DType::Float32),
            3 => Some(DType::Float64),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DType::Int64 => "i64",
            DType::Float32 => "f32",
            DType::Float64 => "f64",
        }
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i64" | "int64" => Ok(DType::Int64),
            "f32" | "float32" => Ok(DType::Float32),
            "f64" | "float64" => Ok(DType::Float64),
            other => Err(Error::Parse(format!("unknown dtype `{other}`"))),
        }
    }
}

/// `C = alpha * A * B + beta * C` with `A: m×k`, `B: k×n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GemmProblem {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub dtype: DType,
}

impl GemmProblem {
    /// A plain product (`alpha = 1`, `beta = 0`) in `f64`.
    pub fn new(m: usize, n: usize, k: usize) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::InvalidShape(format!(
                "problem dimensions must be positive, got {m}x{n}x{k}"
            )));
        }
        Ok(Self {
            m,
            n,
            k,
            alpha: 1.0,
            beta: 0.0,
            dtype: DType::Float64,
        })
    }

    pub fn with_dtype(mut self, dtype: DType) -> Self {
        self.dtype = dtype;
        self
    }

    pub fn with_scalars(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }
}

/// Tile extents `BLK_M × BLK_N × BLK_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockingFactors {
    pub blk_m: usize,
    pub blk_n: usize,
    pub blk_k: usize,
}

impl BlockingFactors {
    pub fn new(blk_m: usize, blk_n: usize, blk_k: usize) -> Result<Self> {
        if blk_m == 0 || blk_n == 0 || blk_k == 0 {
            return Err(Error::InvalidShape(format!(
                "blocking factors must be positive, got {blk_m}x{blk_n}x{blk_k}"
            )));
        }
        Ok(Self { blk_m, blk_n, blk_k })
    }

    /// Elements in one output tile.
    pub fn tile_len(&self) -> usize {
        self.blk_m * self.blk_n
    }
}

impl fmt::Display for BlockingFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.blk_m, self.blk_n, self.blk_k)
    }
}

/// Parses `128x128x32`.
impl FromStr for BlockingFactors {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "blocking `{s}` is not of the form MxNxK"
            )));
        }
        let mut dims = [0usize; 3];
        for (slot, part) in dims.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad blocking extent `{part}` in `{s}`")))?;
        }
        Self::new(dims[0], dims[1], dims[2])
    }
}

/// Tile counts and iteration totals derived from a problem and its blocking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TileGrid {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub blocking: BlockingFactors,
    pub tiles_m: usize,
    pub tiles_n: usize,
    pub total_tiles: usize,
    pub iters_per_tile: usize,
    pub total_iters: usize,
}

/// Computes the tile grid for `problem` under `blocking`.
pub fn tile_grid(problem: &GemmProblem, blocking: BlockingFactors) -> TileGrid {
    TileGrid::from_dims(problem.m, problem.n, problem.k, blocking)
}

impl TileGrid {
    pub fn new(m: usize, n: usize, k: usize, blocking: BlockingFactors) -> Result<Self> {
        let problem = GemmProblem::new(m, n, k)?;
        Ok(tile_grid(&problem, blocking))
    }

    fn from_dims(m: usize, n: usize, k: usize, blocking: BlockingFactors) -> Self {
        let tiles_m = m.div_ceil(blocking.blk_m);
        let tiles_n = n.div_ceil(blocking.blk_n);
        let iters_per_tile = k.div_ceil(blocking.blk_k);
        let total_tiles = tiles_m * tiles_n;
        TileGrid {
            m,
            n,
            k,
            blocking,
            tiles_m,
            tiles_n,
            total_tiles,
            iters_per_tile,
            total_iters: total_tiles * iters_per_tile,
        }
    }

    /// Maps a global MAC-iteration index to `(tile_idx, local_iter)`.
    pub fn iter_to_coords(&self, iter: usize) -> Result<(usize, usize)> {
        if iter >= self.total_iters {
            return Err(Error::OutOfRange {
                what: "iteration",
                index: iter,
                bound: self.total_iters,
            });
        }
        Ok((iter / self.iters_per_tile, iter % self.iters_per_tile))
    }

    /// Row and column origin of an output tile in C.
    pub fn tile_origin(&self, tile_idx: usize) -> Result<(usize, usize)> {
        if tile_idx >= self.total_tiles {
            return Err(Error::OutOfRange {
                what: "tile",
                index: tile_idx,
                bound: self.total_tiles,
            });
        }
        let row = tile_idx / self.tiles_n;
        let col = tile_idx % self.tiles_n;
        Ok((row * self.blocking.blk_m, col * self.blocking.blk_n))
    }

    /// Row/column extents of a tile after clamping to the matrix edge.
    pub fn tile_extent(&self, tile_idx: usize) -> Result<(usize, usize)> {
        let (mm, nn) = self.tile_origin(tile_idx)?;
        Ok((
            self.blocking.blk_m.min(self.m - mm),
            self.blocking.blk_n.min(self.n - nn),
        ))
    }

    /// First global iteration of `tile_idx`.
    pub fn tile_start(&self, tile_idx: usize) -> usize {
        tile_idx * self.iters_per_tile
    }
}

/// Free-function form of [`TileGrid::iter_to_coords`].
pub fn iter_to_coords(grid: &TileGrid, iter: usize) -> Result<(usize, usize)> {
    grid.iter_to_coords(iter)
}

/// A CTA's contiguous slice `[iter_begin, iter_end)` of the global
/// iteration domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CtaRange {
    pub cta_id: usize,
    pub iter_begin: usize,
    pub iter_end: usize,
}

impl CtaRange {
    pub fn len(&self) -> usize {
        self.iter_end - self.iter_begin
    }

    pub fn is_empty(&self) -> bool {
        self.iter_begin == self.iter_end
    }

    /// Tiles this range touches, as `(tile_idx, local_begin, local_end)`.
    pub fn tile_segments(&self, iters_per_tile: usize) -> TileSegments {
        TileSegments {
            iter: self.iter_begin,
            end: self.iter_end,
            iters_per_tile,
        }
    }
}

/// Iterator over the per-tile pieces of a [`CtaRange`].
#[derive(Clone, Debug)]
pub struct TileSegments {
    iter: usize,
    end: usize,
    iters_per_tile: usize,
}

impl Iterator for TileSegments {
    type Item = (usize, usize, usize);

    fn next(&mut self) -> Option<Self::Item> {
        if self.iter >= self.end {
            return None;
        }
        let tile = self.iter / self.iters_per_tile;
        let tile_begin = tile * self.iters_per_tile;
        let tile_end = tile_begin + self.iters_per_tile;
        let seg_end = self.end.min(tile_end);
        let item = (tile, self.iter - tile_begin, seg_end - tile_begin);
        self.iter = seg_end;
        Some(item)
    }
}

/// Which decomposition produced an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    DataParallel,
    FixedSplit(usize),
    StreamK,
    DpOneTileSk,
    TwoTileSkDp,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::DataParallel => f.write_str("dp"),
            Strategy::FixedSplit(s) => write!(f, "split:{s}"),
            Strategy::StreamK => f.write_str("streamk"),
            Strategy::DpOneTileSk => f.write_str("dp-1sk"),
            Strategy::TwoTileSkDp => f.write_str("2sk-dp"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Strategy::DataParallel),
            "streamk" => Ok(Strategy::StreamK),
            "dp-1sk" => Ok(Strategy::DpOneTileSk),
            "2sk-dp" => Ok(Strategy::TwoTileSkDp),
            other => {
                let split = other
                    .strip_prefix("split:")
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|&v| v >= 1);
                split
                    .map(Strategy::FixedSplit)
                    .ok_or_else(|| Error::Parse(format!("unknown strategy `{other}`")))
            }
        }
    }
}

/// Per-CTA iteration ranges covering the whole iteration domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkAssignment {
    pub grid_size: usize,
    pub ranges: Vec<CtaRange>,
    pub strategy: Strategy,
    pub grid: TileGrid,
}

impl WorkAssignment {
    /// Checks that ranges are indexed by position, disjoint, and cover
    /// `[0, total_iters)` with no gaps.
    pub fn validate(&self) -> Result<()> {
        if self.ranges.len() != self.grid_size {
            return Err(Error::InvalidAssignment(format!(
                "{} ranges for grid size {}",
                self.ranges.len(),
                self.grid_size
            )));
        }
        for (pos, r) in self.ranges.iter().enumerate() {
            if r.cta_id != pos {
                return Err(Error::InvalidAssignment(format!(
                    "range at position {pos} carries cta_id {}",
                    r.cta_id
                )));
            }
            if r.iter_begin > r.iter_end || r.iter_end > self.grid.total_iters {
                return Err(Error::InvalidAssignment(format!(
                    "cta {} has malformed range [{}, {})",
                    r.cta_id, r.iter_begin, r.iter_end
                )));
            }
        }
        let mut sorted: Vec<&CtaRange> = self.ranges.iter().filter(|r| !r.is_empty()).collect();
        sorted.sort_by_key(|r| r.iter_begin);
        let mut cursor = 0;
        for r in sorted {
            if r.iter_begin != cursor {
                return Err(Error::InvalidAssignment(format!(
                    "cta {} begins at {} but coverage reached {}",
                    r.cta_id, r.iter_begin, cursor
                )));
            }
            cursor = r.iter_end;
        }
        if cursor != self.grid.total_iters {
            return Err(Error::InvalidAssignment(format!(
                "coverage stops at {cursor} of {}",
                self.grid.total_iters
            )));
        }
        Ok(())
    }

    /// Set of non-empty `(begin, end)` ranges, ignoring CTA numbering.
    pub fn range_set(&self) -> Vec<(usize, usize)> {
        let mut set: Vec<(usize, usize)> = self
            .ranges
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| (r.iter_begin, r.iter_end))
            .collect();
        set.sort_unstable();
        set
    }

    /// `(min, max)` length over non-empty ranges.
    pub fn share_bounds(&self) -> Option<(usize, usize)> {
        let lens = self.ranges.iter().filter(|r| !r.is_empty()).map(CtaRange::len);
        lens.fold(None, |acc, len| match acc {
            None => Some((len, len)),
            Some((lo, hi)) => Some((lo.min(len), hi.max(len))),
        })
    }

    /// Line-oriented text form:
    ///
    /// ```text
    /// m n k
    /// bm bn bk
    /// strategy g
    /// cta_id begin end      (one line per range)
    /// ```
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let b = &g.blocking;
        let mut out = format!(
            "{} {} {}\n{} {} {}\n{} {}\n",
            g.m, g.n, g.k, b.blk_m, b.blk_n, b.blk_k, self.strategy, self.grid_size
        );
        for r in &self.ranges {
            out.push_str(&format!("{} {} {}\n", r.cta_id, r.iter_begin, r.iter_end));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut header = |what: &str| {
            lines
                .next()
                .map(|l| l.split_whitespace().collect::<Vec<_>>())
                .ok_or_else(|| Error::Parse(format!("missing {what} line")))
        };
        let dims = parse_fields::<3>(&header("shape")?, "shape")?;
        let blk = parse_fields::<3>(&header("blocking")?, "blocking")?;
        let strat_line = header("strategy")?;
        if strat_line.len() != 2 {
            return Err(Error::Parse("strategy line must be `strategy g`".into()));
        }
        let strategy: Strategy = strat_line[0].parse()?;
        let grid_size: usize = strat_line[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad grid size `{}`", strat_line[1])))?;
        let grid = TileGrid::new(dims[0], dims[1], dims[2], BlockingFactors::new(blk[0], blk[1], blk[2])?)?;
        let mut ranges = Vec::with_capacity(grid_size);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [cta_id, iter_begin, iter_end] = parse_fields::<3>(&fields, "range")?;
            ranges.push(CtaRange { cta_id, iter_begin, iter_end });
        }
        let assignment = WorkAssignment { grid_size, ranges, strategy, grid };
        assignment.validate()?;
        Ok(assignment)
    }
}

fn parse_fields<const N: usize>(fields: &[&str], what: &str) -> Result<[usize; N]> {
    if fields.len() != N {
        return Err(Error::Parse(format!(
            "{what} line needs {N} fields, found {}",
            fields.len()
        )));
    }
    let mut out = [0usize; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer `{f}` in {what} line")))?;
    }
    Ok(out)
}

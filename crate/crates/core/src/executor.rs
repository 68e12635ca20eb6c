//! Multi-threaded execution of a [`WorkAssignment`] with partial-sum fixup.
//!
//! Each logical CTA walks its iteration range tile by tile. For a tile it
//! did not start, it stores its accumulator in the [`FixupStore`] and
//! signals. For a tile it did start, it waits on every other CTA covering
//! that tile, adds their partials in ascending cta_id order and writes the
//! tile to C. Peers of a tile always have higher ids than its owner, and
//! the pool hands out CTAs in descending id order, so every waiter's
//! signalers have already been dispatched when it runs.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use crate::decompose::fixup_peers_of;
use crate::domain::{BlockingFactors, TileGrid, WorkAssignment};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Element;

fn check_operands<E: Element>(a: &Matrix<E>, b: &Matrix<E>) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::InvalidShape(format!(
            "A is {}x{} but B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.rows() == 0 || a.cols() == 0 || b.cols() == 0 {
        return Err(Error::InvalidShape("operands must be non-empty".into()));
    }
    Ok(())
}

/// Sequential six-loop cache-blocked product `C = A * B`.
///
/// Each output tile is zeroed and then accumulated one `blk_k` slab at a
/// time. Tiles and slabs are clamped at the matrix edges.
pub fn gemm_reference<E: Element>(
    blocking: BlockingFactors,
    a: &Matrix<E>,
    b: &Matrix<E>,
) -> Result<Matrix<E>> {
    check_operands(a, b)?;
    let (m, n, k) = (a.rows(), b.cols(), a.cols());
    let BlockingFactors { blk_m, blk_n, blk_k } = blocking;
    let mut c = Matrix::zeros(m, n);
    for mm in (0..m).step_by(blk_m) {
        for nn in (0..n).step_by(blk_n) {
            for mmm in mm..(mm + blk_m).min(m) {
                for nnn in nn..(nn + blk_n).min(n) {
                    c.set(mmm, nnn, E::zero());
                }
            }
            for kk in (0..k).step_by(blk_k) {
                for mmm in mm..(mm + blk_m).min(m) {
                    for nnn in nn..(nn + blk_n).min(n) {
                        let mut acc = c.get(mmm, nnn);
                        for kkk in kk..(kk + blk_k).min(k) {
                            acc += a.get(mmm, kkk) * b.get(kkk, nnn);
                        }
                        c.set(mmm, nnn, acc);
                    }
                }
            }
        }
    }
    Ok(c)
}

/// Thread-local fragment buffers standing in for shared memory.
struct Fragments<E> {
    a: Vec<E>,
    b: Vec<E>,
}

impl<E: Element> Fragments<E> {
    fn new(blocking: BlockingFactors) -> Self {
        Self {
            a: vec![E::zero(); blocking.blk_m * blocking.blk_k],
            b: vec![E::zero(); blocking.blk_k * blocking.blk_n],
        }
    }
}

/// Runs local iterations `[iter_begin, iter_end)` of `tile_idx` and returns
/// the `blk_m × blk_n` row-major accumulator. Out-of-bounds fragment
/// elements load as zero.
pub fn mac_loop<E: Element>(
    grid: &TileGrid,
    tile_idx: usize,
    iter_begin: usize,
    iter_end: usize,
    a: &Matrix<E>,
    b: &Matrix<E>,
) -> Result<Vec<E>> {
    if iter_begin > iter_end || iter_end > grid.iters_per_tile {
        return Err(Error::InvalidParameter(format!(
            "MAC range [{iter_begin}, {iter_end}) outside [0, {})",
            grid.iters_per_tile
        )));
    }
    if a.rows() != grid.m || a.cols() != grid.k || b.rows() != grid.k || b.cols() != grid.n {
        return Err(Error::InvalidShape(format!(
            "operands {}x{} and {}x{} do not match grid {}x{}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            grid.m,
            grid.n,
            grid.k
        )));
    }
    let mut frags = Fragments::new(grid.blocking);
    let mut accum = vec![E::zero(); grid.blocking.tile_len()];
    mac_loop_into(grid, tile_idx, iter_begin, iter_end, a, b, &mut frags, &mut accum)?;
    Ok(accum)
}

#[allow(clippy::too_many_arguments)]
fn mac_loop_into<E: Element>(
    grid: &TileGrid,
    tile_idx: usize,
    iter_begin: usize,
    iter_end: usize,
    a: &Matrix<E>,
    b: &Matrix<E>,
    frags: &mut Fragments<E>,
    accum: &mut [E],
) -> Result<()> {
    let BlockingFactors { blk_n, blk_k, .. } = grid.blocking;
    let (mm, nn) = grid.tile_origin(tile_idx)?;
    let (rows, cols) = grid.tile_extent(tile_idx)?;
    accum.fill(E::zero());
    for iter in iter_begin..iter_end {
        let kk = iter * blk_k;
        let depth = blk_k.min(grid.k - kk);

        frags.a.fill(E::zero());
        for r in 0..rows {
            let src = &a.row(mm + r)[kk..kk + depth];
            frags.a[r * blk_k..r * blk_k + depth].copy_from_slice(src);
        }
        frags.b.fill(E::zero());
        for d in 0..depth {
            let src = &b.row(kk + d)[nn..nn + cols];
            frags.b[d * blk_n..d * blk_n + cols].copy_from_slice(src);
        }

        for r in 0..rows {
            let acc_row = &mut accum[r * blk_n..r * blk_n + cols];
            for d in 0..depth {
                let av = frags.a[r * blk_k + d];
                let b_row = &frags.b[d * blk_n..d * blk_n + cols];
                for (acc, &bv) in acc_row.iter_mut().zip(b_row) {
                    *acc += av * bv;
                }
            }
        }
    }
    Ok(())
}

struct Slot<E> {
    partial: Mutex<Option<Vec<E>>>,
    ready: Condvar,
}

/// Per-CTA partial-sum slabs with write-once completion flags.
///
/// A slab is published and its flag raised in one step under the slot's
/// lock, so a reader that observes the flag sees the whole slab. Storage
/// is allocated only for CTAs that actually store.
pub struct FixupStore<E> {
    slots: Vec<Slot<E>>,
    stores: AtomicUsize,
    aborted: AtomicBool,
}

impl<E: Element> FixupStore<E> {
    pub fn new(grid_size: usize) -> Self {
        Self {
            slots: (0..grid_size)
                .map(|_| Slot { partial: Mutex::new(None), ready: Condvar::new() })
                .collect(),
            stores: AtomicUsize::new(0),
            aborted: AtomicBool::new(false),
        }
    }

    /// Publishes `cta`'s partials.
    ///
    /// # Panics
    ///
    /// If `cta` has already signalled.
    pub fn store_and_signal(&self, cta: usize, partials: Vec<E>) {
        let slot = &self.slots[cta];
        let mut guard = slot.partial.lock().unwrap_or_else(|e| e.into_inner());
        assert!(guard.is_none(), "cta {cta} signalled its fixup flag twice");
        *guard = Some(partials);
        self.stores.fetch_add(1, Ordering::Relaxed);
        slot.ready.notify_all();
    }

    /// Blocks until `cta` has signalled, then adds its partials into `accum`.
    pub fn wait_and_accumulate(&self, cta: usize, accum: &mut [E]) {
        let slot = &self.slots[cta];
        let mut guard = slot.partial.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if let Some(partials) = guard.as_ref() {
                for (acc, &p) in accum.iter_mut().zip(partials) {
                    *acc += p;
                }
                return;
            }
            if self.aborted.load(Ordering::Acquire) {
                panic!("peer cta {cta} failed before signalling");
            }
            guard = slot.ready.wait(guard).unwrap_or_else(|e| e.into_inner());
        }
    }

    pub fn is_signalled(&self, cta: usize) -> bool {
        self.slots[cta]
            .partial
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .is_some()
    }

    /// Number of StorePartials events so far.
    pub fn store_count(&self) -> usize {
        self.stores.load(Ordering::Relaxed)
    }

    fn abort(&self) {
        self.aborted.store(true, Ordering::Release);
        for slot in &self.slots {
            let _guard = slot.partial.lock().unwrap_or_else(|e| e.into_inner());
            slot.ready.notify_all();
        }
    }
}

/// Wakes blocked waiters if a worker unwinds, so the scope can join.
struct AbortOnPanic<'a, E: Element>(&'a FixupStore<E>);

impl<E: Element> Drop for AbortOnPanic<'_, E> {
    fn drop(&mut self) {
        if thread::panicking() {
            self.0.abort();
        }
    }
}

/// Counters gathered while executing an assignment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExecStats {
    pub partials_stored: usize,
    pub tiles_stored: usize,
    /// Wall-clock time of each CTA from start to finish, including waits.
    pub cta_times: Vec<Duration>,
}

/// Default worker count: `STREAMK_LAB_THREADS` if set, else the host's
/// available parallelism.
pub fn default_thread_count() -> usize {
    std::env::var("STREAMK_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Executes `assignment` for `C = A * B` on `threads` workers.
pub fn execute<E: Element>(
    assignment: &WorkAssignment,
    a: &Matrix<E>,
    b: &Matrix<E>,
    threads: usize,
) -> Result<Matrix<E>> {
    let mut c = Matrix::zeros(a.rows(), b.cols());
    execute_gemm(assignment, E::one(), a, b, E::zero(), &mut c, threads)?;
    Ok(c)
}

/// Executes `C = alpha * A * B + beta * C`, returning fixup statistics.
pub fn execute_gemm<E: Element>(
    assignment: &WorkAssignment,
    alpha: E,
    a: &Matrix<E>,
    b: &Matrix<E>,
    beta: E,
    c: &mut Matrix<E>,
    threads: usize,
) -> Result<ExecStats> {
    check_operands(a, b)?;
    let grid = &assignment.grid;
    if (a.rows(), b.cols(), a.cols()) != (grid.m, grid.n, grid.k)
        || (c.rows(), c.cols()) != (grid.m, grid.n)
    {
        return Err(Error::InvalidShape(format!(
            "operands do not match assignment grid {}x{}x{}",
            grid.m, grid.n, grid.k
        )));
    }
    assignment.validate()?;
    let peers = fixup_peers_of(assignment);
    for (tile, list) in peers.iter().enumerate() {
        let owner = &assignment.ranges[list[0]];
        let start = grid.tile_start(tile);
        if !(owner.iter_begin <= start && start < owner.iter_end) {
            return Err(Error::InvalidAssignment(format!(
                "tile {tile}: lowest covering cta {} does not run its first iteration",
                owner.cta_id
            )));
        }
    }

    let g = assignment.grid_size;
    let store = FixupStore::<E>::new(g);
    let tiles: Vec<OnceLock<Vec<E>>> = (0..grid.total_tiles).map(|_| OnceLock::new()).collect();
    let cta_times: Vec<OnceLock<Duration>> = (0..g).map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    let workers = threads.clamp(1, g.max(1));

    let run_cta = |x: usize, frags: &mut Fragments<E>| -> Result<()> {
        let started = Instant::now();
        let range = assignment.ranges[x];
        for (tile, local_begin, local_end) in range.tile_segments(grid.iters_per_tile) {
            let mut accum = vec![E::zero(); grid.blocking.tile_len()];
            mac_loop_into(grid, tile, local_begin, local_end, a, b, frags, &mut accum)?;
            if local_begin != 0 {
                store.store_and_signal(x, accum);
            } else {
                for &peer in &peers[tile][1..] {
                    store.wait_and_accumulate(peer, &mut accum);
                }
                if tiles[tile].set(accum).is_err() {
                    panic!("tile {tile} stored twice");
                }
            }
        }
        let _ = cta_times[x].set(started.elapsed());
        Ok(())
    };

    let results: Vec<Result<()>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let _guard = AbortOnPanic(&store);
                    let mut frags = Fragments::new(grid.blocking);
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= g {
                            return Ok(());
                        }
                        run_cta(g - 1 - i, &mut frags)?;
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    results.into_iter().collect::<Result<()>>()?;

    let mut tiles_stored = 0;
    for (tile, slot) in tiles.into_iter().enumerate() {
        let accum = slot.into_inner().ok_or_else(|| {
            Error::InvalidAssignment(format!("tile {tile} was never written"))
        })?;
        store_tile(grid, tile, &accum, alpha, beta, c)?;
        tiles_stored += 1;
    }
    Ok(ExecStats {
        partials_stored: store.store_count(),
        tiles_stored,
        cta_times: cta_times
            .into_iter()
            .map(|t| t.into_inner().unwrap_or_default())
            .collect(),
    })
}

fn store_tile<E: Element>(
    grid: &TileGrid,
    tile: usize,
    accum: &[E],
    alpha: E,
    beta: E,
    c: &mut Matrix<E>,
) -> Result<()> {
    let (mm, nn) = grid.tile_origin(tile)?;
    let (rows, cols) = grid.tile_extent(tile)?;
    let blk_n = grid.blocking.blk_n;
    for r in 0..rows {
        for col in 0..cols {
            let v = alpha * accum[r * blk_n + col] + beta * c.get(mm + r, nn + col);
            c.set(mm + r, nn + col, v);
        }
    }
    Ok(())
}

/// Outcome of comparing a result against the reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyReport {
    pub max_abs_err: f64,
    /// `max |c - ref| / max(|ref|, 1)`.
    pub max_rel_err: f64,
    /// Relative bound `8 * eps * k`; zero for exact types.
    pub rel_bound: f64,
    pub exact: bool,
    pub pass: bool,
}

/// Exact types pass only when bit-identical. Floats pass when every
/// element satisfies `|c - ref| <= 8 * eps * k * max(|ref|, 1)`.
pub fn verify<E: Element>(c: &Matrix<E>, c_ref: &Matrix<E>, k: usize) -> Result<VerifyReport> {
    if (c.rows(), c.cols()) != (c_ref.rows(), c_ref.cols()) {
        return Err(Error::InvalidShape(format!(
            "cannot compare {}x{} against {}x{}",
            c.rows(),
            c.cols(),
            c_ref.rows(),
            c_ref.cols()
        )));
    }
    let rel_bound = E::epsilon().map_or(0.0, |eps| 8.0 * eps * k as f64);
    let mut report = VerifyReport {
        max_abs_err: 0.0,
        max_rel_err: 0.0,
        rel_bound,
        exact: true,
        pass: true,
    };
    for (&got, &want) in c.as_slice().iter().zip(c_ref.as_slice()) {
        if got != want {
            report.exact = false;
        }
        let diff = (got.as_f64() - want.as_f64()).abs();
        let scale = want.as_f64().abs().max(1.0);
        let rel = diff / scale;
        report.max_abs_err = report.max_abs_err.max(diff);
        report.max_rel_err = report.max_rel_err.max(rel);
        // NaN differences fail
        if !(rel <= rel_bound) {
            report.pass = false;
        }
    }
    if E::epsilon().is_none() {
        report.pass = report.exact;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{data_parallel, fixed_split, stream_k};

    fn naive<E: Element>(a: &Matrix<E>, b: &Matrix<E>) -> Matrix<E> {
        Matrix::from_fn(a.rows(), b.cols(), |r, c| {
            (0..a.cols()).fold(E::zero(), |acc, i| acc + a.get(r, i) * b.get(i, c))
        })
    }

    fn blk(m: usize, n: usize, k: usize) -> BlockingFactors {
        BlockingFactors::new(m, n, k).unwrap()
    }

    #[test]
    fn reference_identity_and_scalar() {
        let b = Matrix::<i64>::random(6, 5, 3);
        let c = gemm_reference(blk(4, 4, 4), &Matrix::identity(6), &b).unwrap();
        assert_eq!(c, b);

        let a = Matrix::from_vec(1, 1, vec![2i64]).unwrap();
        let b = Matrix::from_vec(1, 1, vec![3i64]).unwrap();
        assert_eq!(gemm_reference(blk(1, 1, 1), &a, &b).unwrap().as_slice(), &[6]);
    }

    #[test]
    fn reference_matches_naive() {
        let a = Matrix::<i64>::random(4, 4, 11);
        let b = Matrix::<i64>::random(4, 4, 12);
        assert_eq!(gemm_reference(blk(2, 2, 2), &a, &b).unwrap(), naive(&a, &b));
        let a = Matrix::<i64>::random(7, 5, 13);
        let b = Matrix::<i64>::random(5, 9, 14);
        assert_eq!(gemm_reference(blk(3, 4, 2), &a, &b).unwrap(), naive(&a, &b));
    }

    #[test]
    fn reference_rejects_mismatch() {
        let a = Matrix::<i64>::zeros(3, 4);
        let b = Matrix::<i64>::zeros(5, 2);
        assert!(matches!(gemm_reference(blk(2, 2, 2), &a, &b), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn mac_loop_ranges() {
        let grid = TileGrid::new(10, 9, 20, blk(4, 4, 3)).unwrap();
        let a = Matrix::<i64>::random(10, 20, 1);
        let b = Matrix::<i64>::random(20, 9, 2);
        let ipt = grid.iters_per_tile;
        let reference = gemm_reference(grid.blocking, &a, &b).unwrap();

        let empty = mac_loop(&grid, 3, 2, 2, &a, &b).unwrap();
        assert!(empty.iter().all(|&v| v == 0));

        for tile in 0..grid.total_tiles {
            let full = mac_loop(&grid, tile, 0, ipt, &a, &b).unwrap();
            let (mm, nn) = grid.tile_origin(tile).unwrap();
            let (rows, cols) = grid.tile_extent(tile).unwrap();
            for r in 0..4 {
                for c in 0..4 {
                    let v = full[r * 4 + c];
                    if r < rows && c < cols {
                        assert_eq!(v, reference.get(mm + r, nn + c));
                    } else {
                        assert_eq!(v, 0, "ragged edge must stay zero");
                    }
                }
            }
            let lo = mac_loop(&grid, tile, 0, 3, &a, &b).unwrap();
            let hi = mac_loop(&grid, tile, 3, ipt, &a, &b).unwrap();
            let sum: Vec<i64> = lo.iter().zip(&hi).map(|(x, y)| x + y).collect();
            assert_eq!(sum, full);
        }
        assert!(mac_loop(&grid, 0, 3, 2, &a, &b).is_err());
        assert!(mac_loop(&grid, 0, 0, ipt + 1, &a, &b).is_err());
        assert!(mac_loop(&grid, grid.total_tiles, 0, 1, &a, &b).is_err());
    }

    #[test]
    fn execute_data_parallel_float() {
        let grid = TileGrid::new(33, 40, 50, blk(16, 16, 8)).unwrap();
        let a = Matrix::<f64>::random(33, 50, 5);
        let b = Matrix::<f64>::random(50, 40, 6);
        let c = execute(&data_parallel(&grid), &a, &b, 3).unwrap();
        let reference = gemm_reference(grid.blocking, &a, &b).unwrap();
        assert!(verify(&c, &reference, 50).unwrap().pass);
    }

    #[test]
    fn execute_stream_k_int_exact() {
        let grid = TileGrid::new(384, 384, 128, blk(128, 128, 4)).unwrap();
        let a = Matrix::<i64>::random(384, 128, 21);
        let b = Matrix::<i64>::random(128, 384, 22);
        let reference = gemm_reference(grid.blocking, &a, &b).unwrap();
        for threads in [1, 2, 4] {
            let c = execute(&stream_k(&grid, 4).unwrap(), &a, &b, threads).unwrap();
            assert_eq!(c, reference);
        }
    }

    #[test]
    fn execute_fixed_split_int_exact() {
        let grid = TileGrid::new(128, 128, 96, blk(128, 128, 32)).unwrap();
        let a = Matrix::<i64>::random(128, 96, 31);
        let b = Matrix::<i64>::random(96, 128, 32);
        let c = execute(&fixed_split(&grid, 3).unwrap(), &a, &b, 2).unwrap();
        assert_eq!(c, gemm_reference(grid.blocking, &a, &b).unwrap());
    }

    #[test]
    fn fixup_traffic_matches_seams() {
        let grid = TileGrid::new(384, 384, 128, blk(128, 128, 4)).unwrap();
        let a = Matrix::<i64>::random(384, 128, 1);
        let b = Matrix::<i64>::random(128, 384, 2);
        let assignment = stream_k(&grid, 4).unwrap();
        let mut c = Matrix::zeros(384, 384);
        let stats = execute_gemm(&assignment, 1, &a, &b, 0, &mut c, 2).unwrap();
        assert_eq!(stats.partials_stored, 3);
        assert_eq!(stats.tiles_stored, 9);
        assert_eq!(stats.cta_times.len(), 4);
    }

    #[test]
    fn alpha_beta_epilogue() {
        let grid = TileGrid::new(8, 8, 8, blk(4, 4, 4)).unwrap();
        let a = Matrix::<i64>::random(8, 8, 1);
        let b = Matrix::<i64>::random(8, 8, 2);
        let c0 = Matrix::<i64>::random(8, 8, 3);
        let mut c = c0.clone();
        execute_gemm(&stream_k(&grid, 3).unwrap(), 2, &a, &b, -1, &mut c, 2).unwrap();
        let ab = naive(&a, &b);
        let expected = Matrix::from_fn(8, 8, |r, col| 2 * ab.get(r, col) - c0.get(r, col));
        assert_eq!(c, expected);
    }

    #[test]
    fn execute_rejects_shape_mismatch() {
        let grid = TileGrid::new(8, 8, 8, blk(4, 4, 4)).unwrap();
        let a = Matrix::<i64>::zeros(8, 9);
        let b = Matrix::<i64>::zeros(9, 8);
        assert!(execute(&data_parallel(&grid), &a, &b, 1).is_err());
    }

    #[test]
    fn execute_rejects_inverted_ownership() {
        let grid = TileGrid::new(4, 4, 8, blk(4, 4, 4)).unwrap();
        let mut assignment = stream_k(&grid, 2).unwrap();
        // swap ids so the tile starter has the higher id
        assignment.ranges.swap(0, 1);
        assignment.ranges[0].cta_id = 0;
        assignment.ranges[1].cta_id = 1;
        let a = Matrix::<i64>::zeros(4, 8);
        let b = Matrix::<i64>::zeros(8, 4);
        assert!(matches!(
            execute(&assignment, &a, &b, 1),
            Err(Error::InvalidAssignment(_))
        ));
    }

    #[test]
    #[should_panic(expected = "twice")]
    fn double_signal_panics() {
        let store = FixupStore::<i64>::new(2);
        store.store_and_signal(1, vec![1]);
        assert!(store.is_signalled(1));
        store.store_and_signal(1, vec![2]);
    }

    #[test]
    fn verify_behaviour() {
        let a = Matrix::<i64>::random(4, 4, 1);
        let r = verify(&a, &a, 4).unwrap();
        assert!(r.pass && r.exact);
        assert_eq!(r.max_abs_err, 0.0);

        let mut flipped = a.clone();
        flipped.set(2, 3, flipped.get(2, 3) + 1);
        assert!(!verify(&flipped, &a, 4).unwrap().pass);

        let f = Matrix::<f32>::from_vec(1, 2, vec![1.0, 100.0]).unwrap();
        let near = Matrix::<f32>::from_vec(1, 2, vec![1.0 + 1e-6, 100.0]).unwrap();
        assert!(verify(&near, &f, 16).unwrap().pass);
        let far = Matrix::<f32>::from_vec(1, 2, vec![1.1, 100.0]).unwrap();
        assert!(!verify(&far, &f, 16).unwrap().pass);
        let nan = Matrix::<f32>::from_vec(1, 2, vec![f32::NAN, 100.0]).unwrap();
        assert!(!verify(&nan, &f, 16).unwrap().pass);

        assert!(verify(&Matrix::<f32>::zeros(1, 3), &f, 1).is_err());
    }
}

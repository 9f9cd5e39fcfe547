//! Shared worker pool for batch work.
//!
//! The pool size is `POPDYN_THREADS` when set (min 1), otherwise the
//! machine's available parallelism. Because per-item randomness comes from
//! item-indexed streams, outputs never depend on the pool size; timing
//! code that needs a fair single-worker measurement can force sequential
//! execution with [`with_serial`].

use rayon::prelude::*;
use std::cell::Cell;
use std::sync::OnceLock;

pub fn max_workers() -> usize {
    static WORKERS: OnceLock<usize> = OnceLock::new();
    *WORKERS.get_or_init(|| {
        if let Ok(v) = std::env::var("POPDYN_THREADS") {
            match v.trim().parse::<usize>() {
                Ok(n) if n >= 1 => return n,
                _ => log_bad_threads(&v),
            }
        }
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    })
}

fn log_bad_threads(v: &str) {
    // Deliberately quiet: a malformed value falls back to auto-detection.
    eprintln!("ignoring invalid POPDYN_THREADS value `{v}`");
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(max_workers())
            .thread_name(|i| format!("popdyn-worker-{i}"))
            .build()
            .expect("failed to build worker pool")
    })
}

thread_local! {
    static FORCE_SERIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with all [`run_indexed`] calls on this thread executing
/// sequentially, regardless of pool size.
pub fn with_serial<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SERIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SERIAL.with(|c| c.set(prev));
    out
}

pub fn serial_forced() -> bool {
    FORCE_SERIAL.with(|c| c.get())
}

/// Maps `f` over `0..n` on the shared pool, returning results in index
/// order. Falls back to a plain loop when serial mode is forced or the
/// pool has a single worker.
pub fn run_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if serial_forced() || max_workers() == 1 {
        (0..n).map(f).collect()
    } else {
        pool().install(|| (0..n).into_par_iter().map(f).collect())
    }
}

//! Fork-join helper for grid sweeps: contiguous index chunks, results
//! reassembled in grid order so output bytes never depend on thread count.

use std::env;
use std::thread;

/// Thread-count resolution: explicit flag, then MOMENTUM_LAB_THREADS, then
/// the machine's available parallelism.
pub fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        env::var("MOMENTUM_LAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| {
        thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
    .max(1)
}

pub fn par_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut chunks: Vec<Vec<T>> = Vec::with_capacity(threads);
    thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                scope.spawn(move || {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(n);
                    (lo..hi).map(f).collect::<Vec<T>>()
                })
            })
            .collect();
        for h in handles {
            chunks.push(h.join().expect("sweep worker panicked"));
        }
    });
    chunks.into_iter().flatten().collect()
}

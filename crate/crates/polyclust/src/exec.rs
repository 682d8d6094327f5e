//! Scoped-thread implementation of [`Executor`].

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use polyclust_core::Executor;

/// Runs tasks on up to `workers` scoped threads that pull task indices from
/// a shared counter. Results are returned in task order.
#[derive(Clone, Copy, Debug, Default)]
pub struct Threads;

impl Executor for Threads {
    fn execute<R, F>(&self, workers: usize, tasks: usize, task: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        let workers = workers.clamp(1, tasks.max(1));
        if workers == 1 {
            return (0..tasks).map(task).collect();
        }
        let next = AtomicUsize::new(0);
        let parts: Vec<Vec<(usize, R)>> = thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= tasks {
                                break done;
                            }
                            done.push((i, task(i)));
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect()
        });
        let mut slots: Vec<Option<R>> = (0..tasks).map(|_| None).collect();
        for (i, r) in parts.into_iter().flatten() {
            slots[i] = Some(r);
        }
        slots
            .into_iter()
            .map(|r| r.expect("every task ran"))
            .collect()
    }
}

/// Hardware threads available to this process.
pub fn available_threads() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

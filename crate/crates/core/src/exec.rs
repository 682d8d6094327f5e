//! Pluggable task execution.

use alloc::vec::Vec;

/// Runs independent indexed tasks, possibly in parallel.
///
/// Implementations must return results in task-index order so that callers
/// observe the same output for any worker count.
pub trait Executor: Sync {
    fn execute<R, F>(&self, workers: usize, tasks: usize, task: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync;
}

/// Runs every task on the calling thread, ignoring the worker count.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn execute<R, F>(&self, _workers: usize, tasks: usize, task: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        (0..tasks).map(task).collect()
    }
}

/// Splits `0..len` into consecutive ranges of at most `chunk` elements.
pub(crate) fn chunk_range(len: usize, chunk: usize, index: usize) -> core::ops::Range<usize> {
    let start = index * chunk;
    start..len.min(start + chunk)
}

pub(crate) fn chunk_count(len: usize, chunk: usize) -> usize {
    len.div_ceil(chunk)
}

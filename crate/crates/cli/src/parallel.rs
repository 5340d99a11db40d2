//! Stripe-level parallelism.
//!
//! `EPSMSR_THREADS` caps the worker count (default: single-threaded). Work
//! items are claimed from a shared counter and results are reassembled by
//! index, so the output is identical no matter how many workers run.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use anyhow::{anyhow, Result};

pub fn thread_count(jobs: usize) -> usize {
    let hint = std::env::var("EPSMSR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(1);
    hint.min(jobs.max(1))
}

/// Applies `f` to `0..jobs` and returns the results in index order. The
/// first failing index (in order) decides the returned error.
pub fn map_indexed<T, F>(jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let threads = thread_count(jobs);
    let mut slots: Vec<Option<Result<T>>> = (0..jobs).map(|_| None).collect();
    if threads <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(f(i));
        }
    } else {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                let tx = tx.clone();
                let next = &next;
                let f = &f;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= jobs || tx.send((i, f(i))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for (i, result) in rx {
                slots[i] = Some(result);
            }
        });
    }
    let mut out = Vec::with_capacity(jobs);
    for (i, slot) in slots.into_iter().enumerate() {
        out.push(slot.ok_or_else(|| anyhow!("worker abandoned item {i}"))??);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order_and_reports_first_error() {
        let out = map_indexed(100, |i| Ok(i * i)).unwrap();
        assert_eq!(out[7], 49);
        assert_eq!(out.len(), 100);
        let err = map_indexed(10, |i| {
            if i >= 4 {
                Err(anyhow!("item {i} broke"))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert_eq!(err.to_string(), "item 4 broke");
    }

    #[test]
    fn thread_hint_is_capped_by_jobs() {
        // The env var is process-global; only exercise the pure logic here.
        assert_eq!(thread_count(0), 1.min(1));
        assert!(thread_count(5) >= 1);
    }
}

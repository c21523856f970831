//! Running several scenarios on a fixed number of worker threads.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::Result;

use super::format::load_scenario;
use super::run::{run, RunOptions, RunReport};

/// Loads and runs every path with up to `jobs` threads. Results come back
/// in input order; each run is independent, so the output does not depend
/// on `jobs`.
pub fn run_batch(paths: &[PathBuf], opts: &RunOptions, jobs: usize) -> Vec<Result<RunReport>> {
    let jobs = jobs.clamp(1, paths.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunReport>>>> = Mutex::new(vec![None; paths.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= paths.len() {
                    break;
                }
                let r = load_scenario(&paths[i]).and_then(|s| run(&s, opts)).map(|o| o.report);
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every index is visited"))
        .collect()
}

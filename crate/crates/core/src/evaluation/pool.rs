//! Work spread over several engine sessions, results kept in input order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::engine::{start_engine, EngineConfig, EngineError, EngineSession};

/// Runs `work` over `items` on up to `jobs` sessions of the same engine.
/// `first` is an already started session, reused by one worker. `Err`
/// from `work` still carries a result, but the session that produced it is
/// discarded and a fresh one started for that worker's next item.
pub(crate) fn pooled<T, R>(
    cfg: &EngineConfig,
    first: EngineSession,
    items: &[T],
    jobs: usize,
    work: impl Fn(&mut EngineSession, &T) -> Result<R, R> + Sync,
    start_failed: impl Fn(&T, EngineError) -> R + Sync,
) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, R)>();
    let workers = jobs.clamp(1, items.len().max(1));
    std::thread::scope(|scope| {
        let mut seed = Some(first);
        for _ in 0..workers {
            let tx = tx.clone();
            let mut session = seed.take();
            let (next, work, start_failed) = (&next, &work, &start_failed);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                if session.is_none() {
                    match start_engine(cfg) {
                        Ok(s) => session = Some(s),
                        Err(e) => {
                            tx.send((i, start_failed(item, e))).ok();
                            continue;
                        }
                    }
                }
                let result = match work(session.as_mut().expect("session started"), item) {
                    Ok(r) => r,
                    Err(r) => {
                        session = None;
                        r
                    }
                };
                tx.send((i, result)).ok();
            });
        }
    });
    drop(tx);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    for (i, r) in rx {
        slots[i] = Some(r);
    }
    slots.into_iter().map(|r| r.expect("every item produced a result")).collect()
}

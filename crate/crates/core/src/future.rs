//! Interruptible futures.
//!
//! A future is two one-shot cells: an interrupt cell holding `()` and a
//! result cell holding a [`FutureResult`]. [`fork_future`] starts two
//! threads:
//!
//! * the computation thread runs the task, publishes `Completed`, then
//!   fills the interrupt cell so the watcher can exit;
//! * the watcher blocks on the interrupt cell. When woken with the result
//!   cell still empty it cancels the task's token and publishes
//!   `Interrupted` itself.
//!
//! Waiters are therefore released as soon as an interrupt lands, without
//! waiting for the task to reach its next checkpoint. Whatever the task
//! produces afterwards loses the race for the result cell and is dropped.

use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use crate::cancel::CancelToken;
use crate::cell::OneShotCell;
use crate::error::Error;
use crate::runtime;

const WATCHER_STACK: usize = 64 * 1024;

static TASK_THREADS: AtomicUsize = AtomicUsize::new(0);
static WATCHER_THREADS: AtomicUsize = AtomicUsize::new(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FutureResult<T> {
    Completed(T),
    Interrupted,
}

impl<T> FutureResult<T> {
    pub fn is_completed(&self) -> bool {
        matches!(self, FutureResult::Completed(_))
    }

    pub fn completed(self) -> Option<T> {
        match self {
            FutureResult::Completed(v) => Some(v),
            FutureResult::Interrupted => None,
        }
    }
}

struct InterruptState {
    cell: OneShotCell<()>,
    token: CancelToken,
    interrupted: AtomicBool,
}

impl InterruptState {
    fn interrupt(&self) -> bool {
        let filled = self.cell.try_put(());
        if filled {
            self.interrupted.store(true, Ordering::Release);
        }
        filled
    }
}

/// The interrupt side of a future, detachable so it can be exported on its
/// own (slot 0 of a C future pair).
#[derive(Clone)]
pub struct InterruptHandle {
    state: Arc<InterruptState>,
}

impl InterruptHandle {
    /// Fills the interrupt cell. Returns `true` only for the call that
    /// filled it; `false` if an earlier interrupt or the task's completion
    /// got there first. Never blocks.
    pub fn interrupt(&self) -> bool {
        self.state.interrupt()
    }

    pub fn is_released(&self) -> bool {
        self.state.cell.is_filled()
    }
}

struct Shared<T> {
    interrupt: Arc<InterruptState>,
    result: OneShotCell<FutureResult<T>>,
    queried: AtomicBool,
}

/// A running or finished computation. Cloning shares the same future.
pub struct Future<T> {
    shared: Arc<Shared<T>>,
}

impl<T> Clone for Future<T> {
    fn clone(&self) -> Self {
        Future {
            shared: self.shared.clone(),
        }
    }
}

impl<T: Clone> Future<T> {
    /// Blocks until the future resolves. Repeatable: every call returns
    /// the same result.
    pub fn get(&self) -> FutureResult<T> {
        let r = self.shared.result.read();
        self.shared.queried.store(true, Ordering::Release);
        r
    }

    pub fn try_get(&self) -> Option<FutureResult<T>> {
        self.shared.result.try_read()
    }
}

impl<T> Future<T> {
    pub fn interrupt(&self) -> bool {
        self.shared.interrupt.interrupt()
    }

    pub fn interrupt_handle(&self) -> InterruptHandle {
        InterruptHandle {
            state: self.shared.interrupt.clone(),
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.shared.result.is_filled()
    }

    /// True once [`get`](Self::get) has returned at least once.
    pub fn was_queried(&self) -> bool {
        self.shared.queried.load(Ordering::Acquire)
    }

    /// True if an explicit interrupt (not task completion) filled the
    /// interrupt cell.
    pub fn was_interrupted(&self) -> bool {
        self.shared.interrupt.interrupted.load(Ordering::Acquire)
    }
}

impl<T> std::fmt::Debug for Future<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Future")
            .field("resolved", &self.is_resolved())
            .field("interrupted", &self.was_interrupted())
            .finish()
    }
}

struct ThreadCount(&'static AtomicUsize);

impl ThreadCount {
    fn enter(counter: &'static AtomicUsize) -> Self {
        counter.fetch_add(1, Ordering::AcqRel);
        ThreadCount(counter)
    }
}

impl Drop for ThreadCount {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::AcqRel);
    }
}

/// Computation and watcher threads currently alive, process-wide.
pub fn running_threads() -> (usize, usize) {
    (
        TASK_THREADS.load(Ordering::Acquire),
        WATCHER_THREADS.load(Ordering::Acquire),
    )
}

/// Starts `task` on its own thread and returns immediately.
///
/// The task receives the future's [`CancelToken`] and should poll it (or
/// sleep through [`cancellable_sleep`](crate::cancellable_sleep)) so that
/// it winds down after an interrupt. A task that panics resolves as
/// [`FutureResult::Interrupted`].
pub fn fork_future<T, F>(task: F) -> Result<Future<T>, Error>
where
    T: Send + 'static,
    F: FnOnce(&CancelToken) -> T + Send + 'static,
{
    runtime::ensure_initialized()?;

    let shared = Arc::new(Shared {
        interrupt: Arc::new(InterruptState {
            cell: OneShotCell::new(),
            token: CancelToken::new(),
            interrupted: AtomicBool::new(false),
        }),
        result: OneShotCell::new(),
        queried: AtomicBool::new(false),
    });

    let watcher_shared = shared.clone();
    let watcher_count = ThreadCount::enter(&WATCHER_THREADS);
    thread::Builder::new()
        .name("agdalache-watcher".into())
        .stack_size(WATCHER_STACK)
        .spawn(move || {
            let _count = watcher_count;
            let s = watcher_shared;
            s.interrupt.cell.read();
            if s.result.is_filled() {
                return;
            }
            // Publish before cancelling: a task woken by the cancel must
            // not be able to slip its own result in first.
            s.result.try_put(FutureResult::Interrupted);
            s.interrupt.token.cancel();
        })
        .map_err(|source| Error::Spawn {
            role: "watcher",
            source,
        })?;

    let task_shared = shared.clone();
    let task_count = ThreadCount::enter(&TASK_THREADS);
    let spawned = thread::Builder::new()
        .name("agdalache-task".into())
        .spawn(move || {
            let _count = task_count;
            let s = task_shared;
            let token = s.interrupt.token.clone();
            if let Ok(value) = panic::catch_unwind(AssertUnwindSafe(|| task(&token))) {
                s.result.try_put(FutureResult::Completed(value));
            }
            // Releases the watcher. After a panic the result cell is still
            // empty, so the watcher publishes Interrupted.
            s.interrupt.cell.try_put(());
        });
    if let Err(source) = spawned {
        // Let the watcher go so its thread does not linger.
        shared.interrupt.cell.try_put(());
        return Err(Error::Spawn {
            role: "task",
            source,
        });
    }

    Ok(Future { shared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cancel::{cancellable_sleep, checkpoint, Checkpoint};
    use std::sync::atomic::AtomicU64;
    use std::time::{Duration, Instant};

    fn init() {
        runtime::init();
    }

    #[test]
    fn constant_task_completes() {
        init();
        let f = fork_future(|_| 42).unwrap();
        assert_eq!(f.get(), FutureResult::Completed(42));
        assert_eq!(f.get(), FutureResult::Completed(42));
        assert!(f.was_queried());
        assert!(!f.was_interrupted());
    }

    #[test]
    fn interrupt_long_sleep() {
        init();
        let start = Instant::now();
        let f = fork_future(|t| {
            if cancellable_sleep(t, 10_000_000) == Checkpoint::Continue {
                7
            } else {
                -1
            }
        })
        .unwrap();
        assert!(f.interrupt());
        assert_eq!(f.get(), FutureResult::Interrupted);
        assert!(start.elapsed() < Duration::from_secs(1));
        assert!(f.was_interrupted());
    }

    #[test]
    fn hundred_futures_keep_their_values() {
        init();
        let inputs: Vec<u32> = (0..100).map(|i| i * 3 + 1).collect();
        let futures: Vec<_> = inputs
            .iter()
            .map(|&v| fork_future(move |_| v).unwrap())
            .collect();
        for (f, &v) in futures.iter().zip(&inputs) {
            assert_eq!(f.get(), FutureResult::Completed(v));
        }
    }

    #[test]
    fn concurrent_getters_agree() {
        init();
        let f = fork_future(|t| {
            cancellable_sleep(t, 50_000);
            "v"
        })
        .unwrap();
        let a = {
            let f = f.clone();
            thread::spawn(move || f.get())
        };
        let b = {
            let f = f.clone();
            thread::spawn(move || f.get())
        };
        let (a, b) = (a.join().unwrap(), b.join().unwrap());
        assert_eq!(a, b);
        assert_eq!(a, FutureResult::Completed("v"));
    }

    #[test]
    fn try_get_before_and_after() {
        init();
        let f = fork_future(|t| cancellable_sleep(t, 10_000_000)).unwrap();
        assert_eq!(f.try_get(), None);
        f.interrupt();
        let r = f.get();
        assert_eq!(f.try_get(), Some(r));
    }

    #[test]
    fn try_get_polling_loop_terminates() {
        init();
        let f = fork_future(|t| {
            cancellable_sleep(t, 100_000);
            5
        })
        .unwrap();
        let cap = Instant::now() + Duration::from_secs(5);
        let r = loop {
            if let Some(r) = f.try_get() {
                break r;
            }
            assert!(Instant::now() < cap, "poll loop exceeded 5 s");
            thread::sleep(Duration::from_millis(5));
        };
        assert_eq!(r, FutureResult::Completed(5));
    }

    #[test]
    fn interrupt_is_idempotent() {
        init();
        let f = fork_future(|t| cancellable_sleep(t, 10_000_000)).unwrap();
        assert!(f.interrupt());
        for _ in 0..5 {
            assert!(!f.interrupt());
        }
        assert_eq!(f.get(), FutureResult::Interrupted);
    }

    #[test]
    fn interrupt_after_completion_is_a_no_op() {
        init();
        for _ in 0..1000 {
            let f = fork_future(|_| 1_u8).unwrap();
            assert_eq!(f.get(), FutureResult::Completed(1));
            // The task releases the watcher right after publishing; wait
            // for that so the interrupt is strictly after completion.
            let h = f.interrupt_handle();
            while !h.is_released() {
                thread::yield_now();
            }
            assert!(!f.interrupt());
            assert_eq!(f.get(), FutureResult::Completed(1));
        }
    }

    #[test]
    fn partial_effects_persist() {
        init();
        let steps = Arc::new(AtomicU64::new(0));
        let s = steps.clone();
        let f = fork_future(move |t| {
            while checkpoint(t) == Checkpoint::Continue {
                s.fetch_add(1, Ordering::SeqCst);
                if cancellable_sleep(t, 10_000).is_stop() {
                    break;
                }
            }
        })
        .unwrap();
        thread::sleep(Duration::from_millis(60));
        f.interrupt();
        assert_eq!(f.get(), FutureResult::Interrupted);
        let seen = steps.load(Ordering::SeqCst);
        assert!(seen > 0);
        thread::sleep(Duration::from_millis(100));
        let after = steps.load(Ordering::SeqCst);
        assert!(after >= seen && after <= seen + 1, "{seen} -> {after}");
    }

    #[test]
    fn interrupt_of_running_task_always_reads_interrupted() {
        init();
        // The task can only finish after its token is cancelled, so an
        // interrupt that lands must win the result cell.
        let futures: Vec<_> = (0..500)
            .map(|_| fork_future(|t| cancellable_sleep(t, 10_000_000)).unwrap())
            .collect();
        for f in &futures {
            assert!(f.interrupt());
        }
        for f in &futures {
            assert_eq!(f.get(), FutureResult::Interrupted);
        }
    }

    #[test]
    fn racing_completion_and_interrupt_resolve_once() {
        init();
        for _ in 0..2000 {
            let f = fork_future(|_| 9_u8).unwrap();
            let won = f.interrupt();
            let r = f.get();
            // Losing the interrupt means the task already released the
            // watcher, which it only does after publishing.
            if !won {
                assert_eq!(r, FutureResult::Completed(9));
            }
            assert_eq!(f.get(), r);
        }
    }

    #[test]
    fn panicking_task_resolves_interrupted() {
        init();
        let f: Future<u8> = fork_future(|_| panic!("task failure")).unwrap();
        assert_eq!(f.get(), FutureResult::Interrupted);
    }
}

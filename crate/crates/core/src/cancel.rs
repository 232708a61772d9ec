//! Cooperative cancellation.
//!
//! A running task cannot be killed from outside, so interruption is
//! delivered by setting a [`CancelToken`] that the task polls at
//! [`checkpoint`]s and that cuts [`cancellable_sleep`] short.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

/// Upper bound on how long a sleeping task may overrun a cancellation.
pub const SLEEP_WAKE_BOUND: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checkpoint {
    Continue,
    Stop,
}

impl Checkpoint {
    pub fn is_stop(self) -> bool {
        self == Checkpoint::Stop
    }
}

#[derive(Default)]
struct Inner {
    stop: AtomicBool,
    lock: Mutex<()>,
    wake: Condvar,
}

/// Shared stop flag. Clones observe the same flag; once set it stays set.
#[derive(Clone, Default)]
pub struct CancelToken {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for CancelToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CancelToken")
            .field("stop_requested", &self.is_cancelled())
            .finish()
    }
}

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    /// Requests a stop and wakes any [`cancellable_sleep`] on this token.
    pub fn cancel(&self) {
        self.inner.stop.store(true, Ordering::Release);
        // Taking the lock orders the store before a sleeper's flag check.
        let _guard = self.inner.lock.lock().unwrap_or_else(|e| e.into_inner());
        self.inner.wake.notify_all();
    }

    pub fn is_cancelled(&self) -> bool {
        self.inner.stop.load(Ordering::Acquire)
    }
}

pub fn checkpoint(token: &CancelToken) -> Checkpoint {
    if token.is_cancelled() {
        Checkpoint::Stop
    } else {
        Checkpoint::Continue
    }
}

/// Sleeps for `micros` microseconds unless the token is cancelled first,
/// in which case it returns [`Checkpoint::Stop`] early.
pub fn cancellable_sleep(token: &CancelToken, micros: u64) -> Checkpoint {
    let deadline = Instant::now() + Duration::from_micros(micros);
    let inner = &token.inner;
    let mut guard = inner.lock.lock().unwrap_or_else(|e| e.into_inner());
    loop {
        if inner.stop.load(Ordering::Acquire) {
            return Checkpoint::Stop;
        }
        let now = Instant::now();
        if now >= deadline {
            return Checkpoint::Continue;
        }
        let wait = (deadline - now).min(SLEEP_WAKE_BOUND);
        guard = inner
            .wake
            .wait_timeout(guard, wait)
            .unwrap_or_else(|e| e.into_inner())
            .0;
    }
}

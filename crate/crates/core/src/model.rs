//! The EvenCounter model: a counter that only ever holds even integers.
//!
//! The counter is a signed 64-bit integer. Sums that would leave that
//! range are rejected with [`AddError::Overflow`] rather than wrapping.

use std::sync::atomic::{AtomicI64, Ordering};

use crate::cancel::{cancellable_sleep, checkpoint, CancelToken, Checkpoint};

/// Delay before each step of [`AppState::increase_continuously`].
pub const TICK_MICROS: u64 = 1_000_000;

/// Amount added per tick.
pub const TICK_STEP: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AddError {
    #[error("first parameter is odd")]
    FirstOdd,
    #[error("second parameter is odd")]
    SecondOdd,
    #[error("integer overflow")]
    Overflow,
}

impl AddError {
    pub const fn message(self) -> &'static str {
        match self {
            AddError::FirstOdd => "first parameter is odd",
            AddError::SecondOdd => "second parameter is odd",
            AddError::Overflow => "integer overflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("initial counter value {0} is odd")]
    OddInitialValue(i64),
}

pub fn is_even_integer(x: i64) -> bool {
    x % 2 == 0
}

/// Adds two even integers. The first parameter is checked first.
pub fn either_add_integer(x: i64, y: i64) -> Result<i64, AddError> {
    if !is_even_integer(x) {
        Err(AddError::FirstOdd)
    } else if !is_even_integer(y) {
        Err(AddError::SecondOdd)
    } else {
        x.checked_add(y).ok_or(AddError::Overflow)
    }
}

/// Application state shared between the frontend and background tasks.
#[derive(Debug)]
pub struct AppState {
    counter: AtomicI64,
}

impl AppState {
    pub fn new(initial: i64) -> Result<Self, ModelError> {
        if !is_even_integer(initial) {
            return Err(ModelError::OddInitialValue(initial));
        }
        Ok(AppState {
            counter: AtomicI64::new(initial),
        })
    }

    pub fn read(&self) -> i64 {
        self.counter.load(Ordering::SeqCst)
    }

    /// Adds `delta` to the counter as the second operand of
    /// [`either_add_integer`]. On error the counter is unchanged.
    pub fn increment(&self, delta: i64) -> Result<i64, AddError> {
        let mut current = self.counter.load(Ordering::SeqCst);
        loop {
            let next = either_add_integer(current, delta)?;
            match self.counter.compare_exchange_weak(
                current,
                next,
                Ordering::SeqCst,
                Ordering::SeqCst,
            ) {
                Ok(_) => return Ok(next),
                Err(actual) => current = actual,
            }
        }
    }

    /// Once per second for `duration` seconds: sleep, add 2, report the new
    /// value to `observer`. Stops early when `token` is cancelled; ticks
    /// already applied stay applied. Returns the counter at exit.
    pub fn increase_continuously(
        &self,
        duration: u32,
        token: &CancelToken,
        observer: impl FnMut(i64),
    ) -> i64 {
        self.increase_every(TICK_MICROS, duration, token, observer)
    }

    /// [`increase_continuously`](Self::increase_continuously) with a
    /// caller-chosen tick length.
    pub fn increase_every(
        &self,
        tick_micros: u64,
        ticks: u32,
        token: &CancelToken,
        mut observer: impl FnMut(i64),
    ) -> i64 {
        let mut remaining = ticks;
        while remaining > 0 && checkpoint(token) == Checkpoint::Continue {
            if cancellable_sleep(token, tick_micros).is_stop() {
                break;
            }
            match self.increment(TICK_STEP) {
                Ok(v) => observer(v),
                Err(_) => break,
            }
            remaining -= 1;
        }
        self.read()
    }
}

//! A write-once cell with blocking reads.
//!
//! This is the subset of MVar behaviour the futures need: the first
//! `try_put` wins, later ones fail without effect, and readers block until
//! a value is present. Reads clone the value and leave it in place.

use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

pub struct OneShotCell<T> {
    value: Mutex<Option<T>>,
    filled: Condvar,
}

impl<T> Default for OneShotCell<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> OneShotCell<T> {
    pub const fn new() -> Self {
        OneShotCell {
            value: Mutex::new(None),
            filled: Condvar::new(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Option<T>> {
        self.value.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Stores `value` if the cell is empty. Returns `false`, dropping
    /// `value`, if it was already filled. Never blocks on readers.
    pub fn try_put(&self, value: T) -> bool {
        let mut slot = self.lock();
        if slot.is_some() {
            return false;
        }
        *slot = Some(value);
        drop(slot);
        self.filled.notify_all();
        true
    }

    pub fn is_filled(&self) -> bool {
        self.lock().is_some()
    }
}

impl<T: Clone> OneShotCell<T> {
    /// Blocks until the cell is filled and returns a copy of its content.
    pub fn read(&self) -> T {
        let guard = self.lock();
        let guard = self
            .filled
            .wait_while(guard, |v| v.is_none())
            .unwrap_or_else(|e| e.into_inner());
        guard.clone().expect("woken with an empty cell")
    }

    pub fn try_read(&self) -> Option<T> {
        self.lock().clone()
    }

    /// [`read`](Self::read) with an upper bound on the wait.
    pub fn read_timeout(&self, timeout: Duration) -> Option<T> {
        let deadline = Instant::now() + timeout;
        let mut guard = self.lock();
        loop {
            if let Some(v) = guard.as_ref() {
                return Some(v.clone());
            }
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            guard = self
                .filled
                .wait_timeout(guard, deadline - now)
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use std::thread;

    #[test]
    fn first_writer_wins() {
        let cell = OneShotCell::new();
        assert!(cell.try_put(1));
        assert!(!cell.try_put(2));
        assert_eq!(cell.read(), 1);
        assert_eq!(cell.read(), 1);
    }

    #[test]
    fn empty_cell() {
        let cell: OneShotCell<u8> = OneShotCell::new();
        assert!(!cell.is_filled());
        assert_eq!(cell.try_read(), None);
        assert_eq!(cell.read_timeout(Duration::from_millis(10)), None);
    }

    #[test]
    fn read_blocks_until_put() {
        let cell = Arc::new(OneShotCell::new());
        let readers: Vec<_> = (0..4)
            .map(|_| {
                let cell = cell.clone();
                thread::spawn(move || cell.read())
            })
            .collect();
        thread::sleep(Duration::from_millis(20));
        assert!(cell.try_put("done"));
        for r in readers {
            assert_eq!(r.join().unwrap(), "done");
        }
    }

    #[test]
    fn racing_puts_store_exactly_one() {
        for _ in 0..200 {
            let cell = Arc::new(OneShotCell::new());
            let writers: Vec<_> = (0..4)
                .map(|i| {
                    let cell = cell.clone();
                    thread::spawn(move || cell.try_put(i))
                })
                .collect();
            let wins = writers
                .into_iter()
                .map(|w| w.join().unwrap())
                .filter(|&won| won)
                .count();
            assert_eq!(wins, 1);
            assert!(cell.is_filled());
        }
    }
}

//! Micro-benchmarks over the exported C functions.
//!
//! `interrupt` compares the non-blocking interrupt
//! (`al_future_try_put_interrupt`) with the full-call baseline
//! (`ec_interrupt_full`) on freshly forked long-running futures, alternating
//! which path goes first. `forkjoin` measures fork + get + free cycles of a
//! task that completes immediately.

use std::io;
use std::ptr;
use std::time::{Duration, Instant};

use agdalache::ffi::{self, AlHandle, AL_INTERRUPTED, AL_OK};
use serde::{Deserialize, Serialize};

pub use agdalache::live_count;

/// Smallest iteration count accepted by [`interrupt_latency`].
pub const MIN_INTERRUPT_ITERS: u64 = 100;

/// Duration handed to `ec_increase_async` for futures that must still be
/// running when they are interrupted.
const LONG_RUN_SECS: i32 = 3600;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub iterations: u64,
    pub median_ns: u64,
    pub p99_ns: u64,
}

impl BenchReport {
    /// Nearest-rank median and 99th percentile of `samples`.
    pub fn from_samples(scenario: impl Into<String>, samples: &[Duration]) -> Self {
        assert!(!samples.is_empty(), "no samples");
        let mut ns: Vec<u64> = samples
            .iter()
            .map(|d| u64::try_from(d.as_nanos()).unwrap_or(u64::MAX))
            .collect();
        ns.sort_unstable();
        BenchReport {
            scenario: scenario.into(),
            iterations: ns.len() as u64,
            median_ns: nearest_rank(&ns, 50),
            p99_ns: nearest_rank(&ns, 99),
        }
    }
}

fn nearest_rank(sorted: &[u64], pct: usize) -> u64 {
    let rank = (pct * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("iterations must be at least {min}, got {got}")]
    TooFewIterations { min: u64, got: u64 },
    #[error("{call} returned status {status} ({message})")]
    Status {
        call: &'static str,
        status: i32,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn check(call: &'static str, status: i32, expected: i32) -> Result<(), BenchError> {
    if status == expected {
        Ok(())
    } else {
        let message = ffi::error_message(status.abs())
            .to_string_lossy()
            .into_owned();
        Err(BenchError::Status {
            call,
            status,
            message,
        })
    }
}

/// Owns an exported app handle for the duration of a run.
struct App(AlHandle);

impl App {
    fn new() -> Result<Self, BenchError> {
        ffi::al_init();
        let h = ffi::ec_init_app();
        if h.is_null() {
            return Err(BenchError::Status {
                call: "ec_init_app",
                status: ffi::AL_NOT_INITIALIZED,
                message: "runtime not initialized".into(),
            });
        }
        Ok(App(h))
    }

    fn fork(&self, duration: i32) -> Result<[AlHandle; 2], BenchError> {
        let mut pair = [ptr::null_mut(); 2];
        let status = unsafe { ffi::ec_increase_async(self.0, duration, pair.as_mut_ptr()) };
        check("ec_increase_async", status, AL_OK)?;
        Ok(pair)
    }
}

impl Drop for App {
    fn drop(&mut self) {
        ffi::al_handle_free(self.0);
    }
}

#[derive(Clone, Copy)]
enum Path {
    Fast,
    Full,
}

fn interrupt_once(app: &App, path: Path) -> Result<Duration, BenchError> {
    let mut pair = app.fork(LONG_RUN_SECS)?;
    let (elapsed, filled) = match path {
        Path::Fast => {
            let start = Instant::now();
            let r = ffi::al_future_try_put_interrupt(pair[0]);
            (start.elapsed(), r)
        }
        Path::Full => {
            let start = Instant::now();
            let r = unsafe { ffi::ec_interrupt_full(pair.as_mut_ptr()) };
            (start.elapsed(), r)
        }
    };
    check("interrupt", filled, 1)?;
    let mut value = 0;
    let status = unsafe { ffi::al_future_get_int(pair.as_mut_ptr(), &mut value) };
    check("al_future_get_int", status, AL_INTERRUPTED)?;
    check("al_handle_free", ffi::al_handle_free(pair[1]), AL_OK)?;
    Ok(elapsed)
}

/// Times one interrupt per path per iteration, each on a fresh future.
/// Returns the fast-path report first.
pub fn interrupt_latency(iterations: u64) -> Result<[BenchReport; 2], BenchError> {
    if iterations < MIN_INTERRUPT_ITERS {
        return Err(BenchError::TooFewIterations {
            min: MIN_INTERRUPT_ITERS,
            got: iterations,
        });
    }
    ffi::set_tick_echo(false);
    let app = App::new()?;
    let mut fast = Vec::with_capacity(iterations as usize);
    let mut full = Vec::with_capacity(iterations as usize);
    for i in 0..iterations {
        if i % 2 == 0 {
            fast.push(interrupt_once(&app, Path::Fast)?);
            full.push(interrupt_once(&app, Path::Full)?);
        } else {
            full.push(interrupt_once(&app, Path::Full)?);
            fast.push(interrupt_once(&app, Path::Fast)?);
        }
    }
    Ok([
        BenchReport::from_samples("interrupt_fast", &fast),
        BenchReport::from_samples("interrupt_full", &full),
    ])
}

/// Fork, get and free a future that completes immediately.
pub fn fork_join(iterations: u64) -> Result<BenchReport, BenchError> {
    if iterations == 0 {
        return Err(BenchError::TooFewIterations { min: 1, got: 0 });
    }
    ffi::set_tick_echo(false);
    let app = App::new()?;
    let mut samples = Vec::with_capacity(iterations as usize);
    for _ in 0..iterations {
        let start = Instant::now();
        let mut pair = app.fork(0)?;
        let mut value = 0;
        let status = unsafe { ffi::al_future_get_int(pair.as_mut_ptr(), &mut value) };
        check("al_future_get_int", status, AL_OK)?;
        check("al_handle_free", ffi::al_handle_free(pair[0]), AL_OK)?;
        check("al_handle_free", ffi::al_handle_free(pair[1]), AL_OK)?;
        samples.push(start.elapsed());
    }
    Ok(BenchReport::from_samples("forkjoin", &samples))
}

/// Writes `scenario,iterations,median_ns,p99_ns` with a header row.
pub fn write_csv<W: io::Write>(out: W, reports: &[BenchReport]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<BenchReport>, BenchError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(BenchError::from))
        .collect()
}

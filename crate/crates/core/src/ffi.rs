//! Exported C surface, declared in `include/agdalache.h`.
//!
//! Handles cross the boundary as `void*` carrying a [`StableHandle`] token.
//! A future crosses as a caller-owned pair: slot 0 is the interrupt cell,
//! slot 1 the result cell. Both slots must be released by the caller,
//! either with [`al_handle_free`] or, for slot 0, by
//! [`al_future_try_put_interrupt`], which always consumes its argument.
//!
//! No exported function unwinds or aborts on bad handles; misuse comes
//! back as a status code. Pointer arguments other than handles must be
//! null or valid for the documented access.

use std::ffi::{c_char, c_void, CStr};
use std::panic::{self, UnwindSafe};
use std::ptr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::cancel::CancelToken;
use crate::error::{Error, HandleError};
use crate::future::{fork_future, Future, FutureResult, InterruptHandle};
use crate::model::{AddError, AppState};
use crate::registry::StableHandle;
use crate::runtime::{self, global_registry};

pub type AlHandle = *mut c_void;

pub const AL_OK: i32 = 0;
pub const AL_INTERRUPTED: i32 = 1;
pub const AL_FIRST_ODD: i32 = 1;
pub const AL_SECOND_ODD: i32 = 2;
pub const AL_OVERFLOW: i32 = 3;
pub const AL_NULL_HANDLE: i32 = 100;
pub const AL_STALE_HANDLE: i32 = 101;
pub const AL_NOT_INITIALIZED: i32 = 102;
pub const AL_WRONG_KIND: i32 = 103;

static TICK_ECHO: AtomicBool = AtomicBool::new(true);

/// Whether background increments print `counter = <value>` to stdout.
/// On by default; `al_init` turns it off when `AGDALACHE_TICKS=0`.
pub fn set_tick_echo(on: bool) {
    TICK_ECHO.store(on, Ordering::Relaxed);
}

fn to_handle(p: AlHandle) -> StableHandle {
    StableHandle::from_raw(p as usize as u64)
}

fn to_ptr(h: StableHandle) -> AlHandle {
    ptr::without_provenance_mut(h.raw() as usize)
}

fn handle_status(e: HandleError) -> i32 {
    match e {
        HandleError::Null => AL_NULL_HANDLE,
        HandleError::Stale => AL_STALE_HANDLE,
        HandleError::WrongKind => AL_WRONG_KIND,
    }
}

fn error_status(e: &Error) -> i32 {
    match e {
        Error::Handle(h) => handle_status(*h),
        Error::RuntimeNotInitialized => AL_NOT_INITIALIZED,
        // Thread exhaustion has no dedicated code; report it like a
        // runtime that cannot take work.
        Error::Spawn { .. } => AL_NOT_INITIALIZED,
    }
}

fn add_status(e: AddError) -> i32 {
    match e {
        AddError::FirstOdd => AL_FIRST_ODD,
        AddError::SecondOdd => AL_SECOND_ODD,
        AddError::Overflow => AL_OVERFLOW,
    }
}

fn guard<R>(fallback: R, f: impl FnOnce() -> R + UnwindSafe) -> R {
    panic::catch_unwind(f).unwrap_or(fallback)
}

/// The result side of an exported future, tagged with its payload type.
#[derive(Clone)]
pub enum AbiFuture {
    Int(Future<i64>),
    Unit(Future<()>),
    Ptr(Future<AbiPtr>),
}

impl AbiFuture {
    fn wait_resolved(&self) {
        match self {
            AbiFuture::Int(f) => drop(f.get()),
            AbiFuture::Unit(f) => drop(f.get()),
            AbiFuture::Ptr(f) => drop(f.get()),
        }
    }
}

/// Pointer payload. The library never dereferences it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbiPtr(pub usize);

impl AbiPtr {
    pub fn as_ptr(self) -> *mut c_void {
        ptr::without_provenance_mut(self.0)
    }
}

/// Payload types that have a typed getter on the C side.
pub trait AbiPayload: Clone + Send + 'static + sealed::Sealed {
    #[doc(hidden)]
    fn wrap(f: Future<Self>) -> AbiFuture;
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for i64 {}
    impl Sealed for () {}
    impl Sealed for super::AbiPtr {}
}

impl AbiPayload for i64 {
    fn wrap(f: Future<Self>) -> AbiFuture {
        AbiFuture::Int(f)
    }
}

impl AbiPayload for () {
    fn wrap(f: Future<Self>) -> AbiFuture {
        AbiFuture::Unit(f)
    }
}

impl AbiPayload for AbiPtr {
    fn wrap(f: Future<Self>) -> AbiFuture {
        AbiFuture::Ptr(f)
    }
}

/// Forks `task` and writes its handle pair to `future_out`. This is the
/// building block for exporting further asynchronous functions.
///
/// Returns a status code; on failure `future_out` is not written.
///
/// # Safety
/// `future_out` must be null or valid for writing two `AlHandle`s.
pub unsafe fn fork_into_pair<T, F>(future_out: *mut AlHandle, task: F) -> i32
where
    T: AbiPayload,
    F: FnOnce(&CancelToken) -> T + Send + 'static,
{
    if future_out.is_null() {
        return AL_NULL_HANDLE;
    }
    let future = match fork_future(task) {
        Ok(f) => f,
        Err(e) => return error_status(&e),
    };
    let reg = global_registry();
    let interrupt = reg.register(future.interrupt_handle());
    let result = reg.register(T::wrap(future));
    unsafe {
        future_out.write(to_ptr(interrupt));
        future_out.add(1).write(to_ptr(result));
    }
    AL_OK
}

/// # Safety
/// `future` must be null or valid for reading two `AlHandle`s.
unsafe fn result_side(future: *const AlHandle) -> Result<Arc<AbiFuture>, i32> {
    if !runtime::is_initialized() {
        return Err(AL_NOT_INITIALIZED);
    }
    if future.is_null() {
        return Err(AL_NULL_HANDLE);
    }
    let h = to_handle(unsafe { future.add(1).read() });
    global_registry()
        .resolve_as::<AbiFuture>(h)
        .map_err(handle_status)
}

#[no_mangle]
pub extern "C" fn al_init() {
    if std::env::var_os("AGDALACHE_TICKS").is_some_and(|v| v == "0") {
        set_tick_echo(false);
    }
    runtime::init();
}

/// Callers serialize `al_init`/`al_exit` themselves.
#[no_mangle]
pub extern "C" fn al_exit() {
    guard((), || {
        runtime::exit();
    });
}

#[no_mangle]
pub extern "C" fn ec_init_app() -> AlHandle {
    if !runtime::is_initialized() {
        return ptr::null_mut();
    }
    let state = AppState::new(0).expect("0 is even");
    to_ptr(global_registry().register(state))
}

/// # Safety
/// `out` must be null or valid for writing an `i64`.
#[no_mangle]
pub unsafe extern "C" fn ec_increment(app: AlHandle, delta: i64, out: *mut i64) -> i32 {
    if !runtime::is_initialized() {
        return AL_NOT_INITIALIZED;
    }
    if out.is_null() {
        return AL_NULL_HANDLE;
    }
    let state = match global_registry().resolve_as::<AppState>(to_handle(app)) {
        Ok(s) => s,
        Err(e) => return handle_status(e),
    };
    match state.increment(delta) {
        Ok(v) => {
            unsafe { out.write(v) };
            AL_OK
        }
        Err(e) => add_status(e),
    }
}

/// # Safety
/// `out` must be null or valid for writing an `i64`.
#[no_mangle]
pub unsafe extern "C" fn ec_read(app: AlHandle, out: *mut i64) -> i32 {
    if !runtime::is_initialized() {
        return AL_NOT_INITIALIZED;
    }
    if out.is_null() {
        return AL_NULL_HANDLE;
    }
    match global_registry().resolve_as::<AppState>(to_handle(app)) {
        Ok(s) => {
            unsafe { out.write(s.read()) };
            AL_OK
        }
        Err(e) => handle_status(e),
    }
}

/// Starts the once-per-second increase on a background future. A
/// non-positive duration completes at once with the current value.
///
/// # Safety
/// `future_out` must be null or valid for writing two `AlHandle`s.
#[no_mangle]
pub unsafe extern "C" fn ec_increase_async(
    app: AlHandle,
    duration_s: i32,
    future_out: *mut AlHandle,
) -> i32 {
    if !runtime::is_initialized() {
        return AL_NOT_INITIALIZED;
    }
    if future_out.is_null() {
        return AL_NULL_HANDLE;
    }
    let state = match global_registry().resolve_as::<AppState>(to_handle(app)) {
        Ok(s) => s,
        Err(e) => return handle_status(e),
    };
    let duration = u32::try_from(duration_s).unwrap_or(0);
    unsafe {
        fork_into_pair(future_out, move |token| {
            state.increase_continuously(duration, token, |v| {
                if TICK_ECHO.load(Ordering::Relaxed) {
                    println!("counter = {v}");
                }
            })
        })
    }
}

/// Blocks until the future resolves. Returns 0 and writes the value on
/// completion, 1 on interruption (leaving `out` untouched). Handles are
/// not freed.
///
/// # Safety
/// `future` must be null or valid for reading two `AlHandle`s; `out` must
/// be null or valid for writing an `i64`.
#[no_mangle]
pub unsafe extern "C" fn al_future_get_int(future: *mut AlHandle, out: *mut i64) -> i32 {
    let fut = match unsafe { result_side(future) } {
        Ok(f) => f,
        Err(code) => return code,
    };
    if out.is_null() {
        return AL_NULL_HANDLE;
    }
    let AbiFuture::Int(f) = &*fut else {
        return AL_WRONG_KIND;
    };
    match f.get() {
        FutureResult::Completed(v) => {
            unsafe { out.write(v) };
            AL_OK
        }
        FutureResult::Interrupted => AL_INTERRUPTED,
    }
}

/// # Safety
/// `future` must be null or valid for reading two `AlHandle`s.
#[no_mangle]
pub unsafe extern "C" fn al_future_get_unit(future: *mut AlHandle) -> i32 {
    let fut = match unsafe { result_side(future) } {
        Ok(f) => f,
        Err(code) => return code,
    };
    let AbiFuture::Unit(f) = &*fut else {
        return AL_WRONG_KIND;
    };
    match f.get() {
        FutureResult::Completed(()) => AL_OK,
        FutureResult::Interrupted => AL_INTERRUPTED,
    }
}

/// # Safety
/// `future` must be null or valid for reading two `AlHandle`s; `out` must
/// be null or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn al_future_get_ptr(future: *mut AlHandle, out: *mut *mut c_void) -> i32 {
    let fut = match unsafe { result_side(future) } {
        Ok(f) => f,
        Err(code) => return code,
    };
    if out.is_null() {
        return AL_NULL_HANDLE;
    }
    let AbiFuture::Ptr(f) = &*fut else {
        return AL_WRONG_KIND;
    };
    match f.get() {
        FutureResult::Completed(p) => {
            unsafe { out.write(p.as_ptr()) };
            AL_OK
        }
        FutureResult::Interrupted => AL_INTERRUPTED,
    }
}

/// Non-blocking interrupt through slot 0. Always frees the handle it is
/// given. Returns 1 if this call filled the interrupt cell, 0 if it was
/// already filled, or a negated status code for a bad handle (which is
/// then left alone).
#[no_mangle]
pub extern "C" fn al_future_try_put_interrupt(interrupt_handle: AlHandle) -> i32 {
    if !runtime::is_initialized() {
        return -AL_NOT_INITIALIZED;
    }
    match global_registry().take_as::<InterruptHandle>(to_handle(interrupt_handle)) {
        Ok(h) => i32::from(h.interrupt()),
        Err(e) => -handle_status(e),
    }
}

/// Slow-path interrupt used as the benchmark baseline. Resolves both slots
/// through the registry, interrupts, blocks until the result side has
/// acknowledged (the watcher published a result), then frees slot 0.
/// Return values match [`al_future_try_put_interrupt`].
///
/// # Safety
/// `future` must be null or valid for reading two `AlHandle`s.
#[no_mangle]
pub unsafe extern "C" fn ec_interrupt_full(future: *mut AlHandle) -> i32 {
    if !runtime::is_initialized() {
        return -AL_NOT_INITIALIZED;
    }
    if future.is_null() {
        return -AL_NULL_HANDLE;
    }
    let (slot0, slot1) = unsafe { (to_handle(future.read()), to_handle(future.add(1).read())) };
    let reg = global_registry();
    let interrupt = match reg.resolve_as::<InterruptHandle>(slot0) {
        Ok(h) => h,
        Err(e) => return -handle_status(e),
    };
    let result = match reg.resolve_as::<AbiFuture>(slot1) {
        Ok(f) => f,
        Err(e) => return -handle_status(e),
    };
    let filled = interrupt.interrupt();
    result.wait_resolved();
    match reg.free(slot0) {
        Ok(()) => i32::from(filled),
        Err(e) => -handle_status(e),
    }
}

#[no_mangle]
pub extern "C" fn al_handle_free(h: AlHandle) -> i32 {
    if !runtime::is_initialized() {
        return AL_NOT_INITIALIZED;
    }
    match global_registry().free(to_handle(h)) {
        Ok(()) => AL_OK,
        Err(e) => handle_status(e),
    }
}

/// Static message for a status code. Code 1 reads as the increment error;
/// negated codes from the interrupt functions map like their positive
/// counterparts. The returned string must not be freed.
#[no_mangle]
pub extern "C" fn al_error_message(code: i32) -> *const c_char {
    error_message(code).as_ptr()
}

pub fn error_message(code: i32) -> &'static CStr {
    let code = if (-AL_WRONG_KIND..=-AL_NULL_HANDLE).contains(&code) {
        -code
    } else {
        code
    };
    match code {
        AL_OK => c"ok",
        AL_FIRST_ODD => c"first parameter is odd",
        AL_SECOND_ODD => c"second parameter is odd",
        AL_OVERFLOW => c"integer overflow",
        AL_NULL_HANDLE => c"null handle",
        AL_STALE_HANDLE => c"stale handle",
        AL_NOT_INITIALIZED => c"runtime not initialized",
        AL_WRONG_KIND => c"handle refers to an object of a different kind",
        _ => c"unknown error",
    }
}

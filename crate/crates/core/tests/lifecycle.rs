//! Runtime init/exit. Kept in its own test binary because it toggles
//! process-global state.

use std::ptr;

use agdalache::ffi::*;
use agdalache::{fork_future, live_count, Error};

#[test]
fn init_exit_sequence() {
    // Before al_init every status-returning call reports it.
    let mut out = 0;
    let mut pair = [ptr::null_mut(); 2];
    assert!(ec_init_app().is_null());
    assert_eq!(
        unsafe { ec_read(ptr::null_mut(), &mut out) },
        AL_NOT_INITIALIZED
    );
    assert_eq!(
        unsafe { ec_increment(ptr::null_mut(), 2, &mut out) },
        AL_NOT_INITIALIZED
    );
    assert_eq!(
        unsafe { ec_increase_async(ptr::null_mut(), 1, pair.as_mut_ptr()) },
        AL_NOT_INITIALIZED
    );
    assert_eq!(
        unsafe { al_future_get_int(pair.as_mut_ptr(), &mut out) },
        AL_NOT_INITIALIZED
    );
    assert_eq!(
        unsafe { al_future_get_unit(pair.as_mut_ptr()) },
        AL_NOT_INITIALIZED
    );
    assert_eq!(
        al_future_try_put_interrupt(ptr::null_mut()),
        -AL_NOT_INITIALIZED
    );
    assert_eq!(al_handle_free(ptr::null_mut()), AL_NOT_INITIALIZED);
    assert!(matches!(
        fork_future(|_| 1),
        Err(Error::RuntimeNotInitialized)
    ));
    assert_eq!(pair, [ptr::null_mut(); 2]);

    al_init();
    al_init();
    let app = ec_init_app();
    assert!(!app.is_null());
    assert_eq!(unsafe { ec_read(app, &mut out) }, AL_OK);
    assert_eq!(al_handle_free(app), AL_OK);
    assert_eq!(live_count(), 0);
    al_exit();
    al_exit();
    assert!(ec_init_app().is_null());

    // Exit unpins leftovers; their handles are stale after re-init.
    al_init();
    let leaked = ec_init_app();
    al_exit();
    assert_eq!(live_count(), 0);
    al_init();
    assert_eq!(unsafe { ec_read(leaked, &mut out) }, AL_STALE_HANDLE);
    al_exit();
}

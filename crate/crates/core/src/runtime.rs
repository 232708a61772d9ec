//! Process-wide runtime state: the initialized flag and the global
//! registry shared by every exported function.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::OnceLock;

use crate::error::Error;
use crate::registry::Registry;

static INITIALIZED: AtomicBool = AtomicBool::new(false);
static REGISTRY: OnceLock<Registry> = OnceLock::new();

/// Marks the runtime ready. Calling it again is a no-op.
pub fn init() {
    global_registry();
    INITIALIZED.store(true, Ordering::Release);
}

/// Marks the runtime stopped and unpins anything the caller forgot to
/// free, returning how many handles that was. Running tasks keep their own
/// references and finish normally.
pub fn exit() -> usize {
    if INITIALIZED.swap(false, Ordering::AcqRel) {
        global_registry().clear()
    } else {
        0
    }
}

pub fn is_initialized() -> bool {
    INITIALIZED.load(Ordering::Acquire)
}

pub(crate) fn ensure_initialized() -> Result<(), Error> {
    if is_initialized() {
        Ok(())
    } else {
        Err(Error::RuntimeNotInitialized)
    }
}

pub fn global_registry() -> &'static Registry {
    REGISTRY.get_or_init(Registry::new)
}

/// Number of live handles in the global registry.
pub fn live_count() -> usize {
    global_registry().live_count()
}

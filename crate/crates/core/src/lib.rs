//! Interruptible futures that can be handed across a C boundary, a
//! generation-checked stable handle registry, and the EvenCounter model
//! that exercises both.
//!
//! The Rust API lives in [`future`], [`registry`] and [`model`]; the
//! exported C surface is in [`ffi`] and is described by
//! `include/agdalache.h`.

#[cfg(not(target_pointer_width = "64"))]
compile_error!("agdalache handles are 64-bit tokens carried in `void*`; 64-bit targets only");

pub mod cancel;
pub mod cell;
pub mod error;
pub mod ffi;
pub mod future;
pub mod model;
pub mod registry;
pub mod runtime;

pub use cancel::{cancellable_sleep, checkpoint, CancelToken, Checkpoint};
pub use cell::OneShotCell;
pub use error::{Error, HandleError};
pub use future::{fork_future, Future, FutureResult, InterruptHandle};
pub use model::{either_add_integer, is_even_integer, AddError, AppState, ModelError};
pub use registry::{Registry, StableHandle};
pub use runtime::{global_registry, live_count};

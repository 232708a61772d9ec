use std::io;

/// Misuse of a [`StableHandle`](crate::StableHandle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum HandleError {
    #[error("null handle")]
    Null,
    /// Freed, never issued, or the slot has since been reused.
    #[error("stale handle")]
    Stale,
    /// The handle is live but refers to an object of a different kind.
    #[error("handle refers to an object of a different kind")]
    WrongKind,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Handle(#[from] HandleError),
    #[error("runtime not initialized")]
    RuntimeNotInitialized,
    #[error("failed to spawn {role} thread: {source}")]
    Spawn {
        role: &'static str,
        #[source]
        source: io::Error,
    },
}

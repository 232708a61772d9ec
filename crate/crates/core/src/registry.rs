//! Generation-tagged table of pinned objects.
//!
//! A [`StableHandle`] is an index into the table plus the generation the
//! slot had when the object was registered. Freeing bumps the generation,
//! so a freed or reused handle is reported as [`HandleError::Stale`]
//! instead of silently resolving to whatever lives in the slot now.
//!
//! Every operation takes a short internal lock and may be called from any
//! thread, including threads the library did not create.

use std::any::Any;
use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::error::HandleError;

pub type Pinned = Arc<dyn Any + Send + Sync>;

/// Opaque 64-bit token: slot index in the upper 32 bits, generation in the
/// lower 32. Zero is the null handle and is never issued.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(transparent)]
pub struct StableHandle(u64);

impl StableHandle {
    pub const NULL: StableHandle = StableHandle(0);

    pub const fn from_raw(raw: u64) -> Self {
        StableHandle(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    pub const fn is_null(self) -> bool {
        self.0 == 0
    }

    fn new(slot: u32, generation: u32) -> Self {
        StableHandle((u64::from(slot) << 32) | u64::from(generation))
    }

    pub const fn slot(self) -> u32 {
        (self.0 >> 32) as u32
    }

    pub const fn generation(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Debug for StableHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_null() {
            f.write_str("StableHandle(null)")
        } else {
            write!(f, "StableHandle({}#{})", self.slot(), self.generation())
        }
    }
}

struct Slot {
    // Starts at 1 so that no issued handle is ever 0.
    generation: u32,
    occupant: Option<Pinned>,
}

#[derive(Default)]
struct Table {
    slots: Vec<Slot>,
    free: Vec<u32>,
    live: usize,
}

impl Table {
    fn lookup(&self, h: StableHandle) -> Result<&Pinned, HandleError> {
        if h.is_null() {
            return Err(HandleError::Null);
        }
        match self.slots.get(h.slot() as usize) {
            Some(Slot {
                generation,
                occupant: Some(obj),
            }) if *generation == h.generation() => Ok(obj),
            _ => Err(HandleError::Stale),
        }
    }

    fn vacate(&mut self, index: u32) -> Pinned {
        let slot = &mut self.slots[index as usize];
        let obj = slot.occupant.take().expect("vacate on an empty slot");
        self.live -= 1;
        // A slot whose generation would wrap is retired rather than reused,
        // so an old token can never match again.
        if slot.generation < u32::MAX {
            slot.generation += 1;
            self.free.push(index);
        }
        obj
    }
}

/// The handle table. The C ABI uses the single process-wide instance from
/// [`global_registry`](crate::runtime::global_registry); separate instances
/// are useful for isolated Rust-side use.
#[derive(Default)]
pub struct Registry {
    table: Mutex<Table>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, Table> {
        // The table is never left half-updated across a panic point, so a
        // poisoned lock is still consistent.
        self.table.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Pins `object` and returns a fresh, non-null handle to it.
    pub fn register<T: Any + Send + Sync>(&self, object: T) -> StableHandle {
        self.register_pinned(Arc::new(object))
    }

    /// Like [`register`](Self::register) but shares an existing `Arc`, so
    /// the same object can be registered more than once.
    pub fn register_pinned(&self, object: Pinned) -> StableHandle {
        let mut table = self.lock();
        let index = match table.free.pop() {
            Some(index) => index,
            None => {
                let index = u32::try_from(table.slots.len()).expect("handle table exhausted");
                table.slots.push(Slot {
                    generation: 1,
                    occupant: None,
                });
                index
            }
        };
        let slot = &mut table.slots[index as usize];
        slot.occupant = Some(object);
        let handle = StableHandle::new(index, slot.generation);
        table.live += 1;
        handle
    }

    pub fn resolve(&self, h: StableHandle) -> Result<Pinned, HandleError> {
        self.lock().lookup(h).cloned()
    }

    /// Resolves `h` and downcasts the pinned object to `T`.
    pub fn resolve_as<T: Any + Send + Sync>(&self, h: StableHandle) -> Result<Arc<T>, HandleError> {
        self.resolve(h)?
            .downcast::<T>()
            .map_err(|_| HandleError::WrongKind)
    }

    /// Unpins the object behind `h`. A second free of the same token fails
    /// with [`HandleError::Stale`] and touches nothing else.
    pub fn free(&self, h: StableHandle) -> Result<(), HandleError> {
        let mut table = self.lock();
        table.lookup(h)?;
        let obj = table.vacate(h.slot());
        drop(table);
        // Dropping outside the lock: the occupant's destructor may re-enter.
        drop(obj);
        Ok(())
    }

    /// Resolves and frees `h` in one step, provided it refers to a `T`.
    /// On [`HandleError::WrongKind`] the handle stays live.
    pub fn take_as<T: Any + Send + Sync>(&self, h: StableHandle) -> Result<Arc<T>, HandleError> {
        let mut table = self.lock();
        if !table.lookup(h)?.is::<T>() {
            return Err(HandleError::WrongKind);
        }
        let obj = table.vacate(h.slot());
        drop(table);
        Ok(obj.downcast::<T>().unwrap_or_else(|_| unreachable!()))
    }

    pub fn live_count(&self) -> usize {
        self.lock().live
    }

    /// Unpins everything. Outstanding handles become stale.
    pub(crate) fn clear(&self) -> usize {
        let mut table = self.lock();
        let occupied: Vec<u32> = table
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.occupant.is_some())
            .map(|(i, _)| i as u32)
            .collect();
        let dropped: Vec<Pinned> = occupied.iter().map(|&i| table.vacate(i)).collect();
        drop(table);
        dropped.len()
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("live", &self.live_count())
            .finish_non_exhaustive()
    }
}

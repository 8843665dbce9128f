//! A minimal behavioral-programming runtime.
//!
//! B-threads synchronize by declaring which events they request, wait for and
//! block. At every synchronization point the kernel picks one requested event
//! that no thread blocks, lets the shared [`World`] observe it, and resumes the
//! threads that requested or waited for it. A super-step repeats this until no
//! requested event is selectable.

mod event;
mod kernel;

pub use event::{select_event, Event, EventKind, EventSet, Name, SyncStatement};
pub use kernel::{
    schema_hash, BThread, Kernel, KernelError, KernelSnapshot, Registers, World,
    DEFAULT_EVENT_LIMIT,
};

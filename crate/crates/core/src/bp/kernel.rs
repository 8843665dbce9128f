use std::sync::Arc;

use thiserror::Error;

use super::event::{select_event, Event, Name, SyncStatement};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KernelError {
    #[error("a b-thread named '{0}' is already registered")]
    DuplicateThread(String),
    #[error("register '{register}' of '{thread}' is already exported by another b-thread")]
    DuplicateRegister { thread: String, register: String },
    #[error("cannot register b-threads after the kernel has started")]
    AlreadyStarted,
    #[error("b-thread '{thread}' failed after {} events: {message}", trace.len())]
    ThreadFailed {
        thread: String,
        message: String,
        trace: Vec<Event>,
    },
    #[error("super-step did not reach a deadlock within {limit} events")]
    Runaway { limit: usize, trace: Vec<Event> },
}

/// Shared state the kernel updates on every selected event before resuming threads.
pub trait World: Clone {
    fn on_event(&mut self, event: &Event) -> Result<(), String>;
}

impl World for () {
    fn on_event(&mut self, _: &Event) -> Result<(), String> {
        Ok(())
    }
}

/// Named numeric registers a b-thread exports into kernel snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Registers {
    names: Vec<Name>,
    values: Vec<f64>,
}

impl Registers {
    pub fn new<I, N>(names: I) -> Registers
    where
        I: IntoIterator<Item = N>,
        N: Into<Name>,
    {
        let names: Vec<Name> = names.into_iter().map(Into::into).collect();
        let values = vec![0.0; names.len()];
        Registers { names, values }
    }

    pub fn none() -> Registers {
        Registers {
            names: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn names(&self) -> &[Name] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.values[i])
    }

    pub fn set_at(&mut self, index: usize, value: f64) {
        self.values[index] = value;
    }

    pub fn get_at(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Applies an `Increment` or `SetState` event addressed to one of these registers.
    /// Returns false when the event does not target a register held here.
    pub fn apply(&mut self, event: &Event) -> bool {
        let name = match event {
            Event::Increment { counter, .. } => counter,
            Event::SetState { strategy, .. } => strategy,
            Event::Move { .. } => return false,
        };
        let Some(i) = self.index_of(name) else {
            return false;
        };
        match event {
            Event::Increment { amount, .. } => self.values[i] += *amount as f64,
            Event::SetState { value, .. } => self.values[i] = *value as f64,
            Event::Move { .. } => unreachable!(),
        }
        true
    }
}

/// A resumable behavior unit. The kernel asks for the current synchronization
/// statement with [`BThread::sync`] and calls [`BThread::resume`] whenever an
/// event the thread requested or waits for is selected.
pub trait BThread<W>: Send + Sync {
    fn name(&self) -> &str;
    fn registers(&self) -> &Registers;
    fn sync(&self, world: &W) -> SyncStatement;
    fn resume(&mut self, event: &Event, world: &W) -> Result<(), String>;
    fn clone_box(&self) -> Box<dyn BThread<W>>;
}

/// Register values in registration order.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSnapshot {
    pub names: Arc<[Name]>,
    pub values: Vec<f64>,
    pub schema_id: u64,
}

impl KernelSnapshot {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(|n| n.as_ref()).zip(self.values.iter().copied())
    }
}

/// FNV-1a over the newline-joined register names.
pub fn schema_hash<'a>(names: impl IntoIterator<Item = &'a str>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for name in names {
        for b in name.bytes().chain(std::iter::once(b'\n')) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

pub const DEFAULT_EVENT_LIMIT: usize = 10_000;

/// A strictly sequential behavioral-programming runtime.
pub struct Kernel<W: World> {
    threads: Vec<Box<dyn BThread<W>>>,
    statements: Vec<SyncStatement>,
    world: W,
    names: Arc<[Name]>,
    schema_id: u64,
    started: bool,
    event_limit: usize,
}

impl<W: World> Clone for Kernel<W> {
    fn clone(&self) -> Self {
        Kernel {
            threads: self.threads.iter().map(|t| t.clone_box()).collect(),
            statements: self.statements.clone(),
            world: self.world.clone(),
            names: Arc::clone(&self.names),
            schema_id: self.schema_id,
            started: self.started,
            event_limit: self.event_limit,
        }
    }
}

impl<W: World> Kernel<W> {
    pub fn new(world: W) -> Kernel<W> {
        Kernel {
            threads: Vec::new(),
            statements: Vec::new(),
            world,
            names: Arc::from(Vec::new()),
            schema_id: schema_hash([]),
            started: false,
            event_limit: DEFAULT_EVENT_LIMIT,
        }
    }

    pub fn with_event_limit(mut self, limit: usize) -> Self {
        self.event_limit = limit;
        self
    }

    /// Adds a b-thread; returns its registration position.
    pub fn register(&mut self, thread: Box<dyn BThread<W>>) -> Result<usize, KernelError> {
        if self.started {
            return Err(KernelError::AlreadyStarted);
        }
        if self.threads.iter().any(|t| t.name() == thread.name()) {
            return Err(KernelError::DuplicateThread(thread.name().to_string()));
        }
        if let Some(dup) = thread
            .registers()
            .names()
            .iter()
            .find(|n| self.names.contains(n))
        {
            return Err(KernelError::DuplicateRegister {
                thread: thread.name().to_string(),
                register: dup.to_string(),
            });
        }
        let mut names: Vec<Name> = self.names.to_vec();
        names.extend(thread.registers().names().iter().cloned());
        self.schema_id = schema_hash(names.iter().map(|n| n.as_ref()));
        self.names = Arc::from(names);
        self.statements.push(thread.sync(&self.world));
        self.threads.push(thread);
        Ok(self.threads.len() - 1)
    }

    pub fn world(&self) -> &W {
        &self.world
    }

    /// Mutable access to the shared world, e.g. to queue the next external move.
    /// Statements are re-read at the start of the next super-step.
    pub fn world_mut(&mut self) -> &mut W {
        &mut self.world
    }

    pub fn thread_names(&self) -> impl Iterator<Item = &str> {
        self.threads.iter().map(|t| t.name())
    }

    pub fn schema_id(&self) -> u64 {
        self.schema_id
    }

    pub fn register_names(&self) -> &Arc<[Name]> {
        &self.names
    }

    /// Selects and delivers events until no requested event is selectable.
    pub fn super_step(&mut self) -> Result<Vec<Event>, KernelError> {
        self.started = true;
        for (stmt, thread) in self.statements.iter_mut().zip(&self.threads) {
            *stmt = thread.sync(&self.world);
        }
        let mut trace = Vec::new();
        while let Some(event) = select_event(&self.statements) {
            trace.push(event.clone());
            if trace.len() > self.event_limit {
                return Err(KernelError::Runaway {
                    limit: self.event_limit,
                    trace,
                });
            }
            if let Err(message) = self.world.on_event(&event) {
                return Err(KernelError::ThreadFailed {
                    thread: "world".into(),
                    message,
                    trace,
                });
            }
            for (stmt, thread) in self.statements.iter_mut().zip(self.threads.iter_mut()) {
                if !stmt.notified_by(&event) {
                    continue;
                }
                if let Err(message) = thread.resume(&event, &self.world) {
                    return Err(KernelError::ThreadFailed {
                        thread: thread.name().to_string(),
                        message,
                        trace,
                    });
                }
                *stmt = thread.sync(&self.world);
            }
        }
        Ok(trace)
    }

    pub fn snapshot(&self) -> KernelSnapshot {
        let mut values = Vec::with_capacity(self.names.len());
        for t in &self.threads {
            values.extend_from_slice(t.registers().values());
        }
        KernelSnapshot {
            names: Arc::clone(&self.names),
            values,
            schema_id: self.schema_id,
        }
    }

    /// Independent deep copy.
    pub fn fork(&self) -> Kernel<W> {
        self.clone()
    }
}

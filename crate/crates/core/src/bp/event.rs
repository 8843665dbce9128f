use std::borrow::Cow;
use std::fmt;

pub type Name = Cow<'static, str>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Move,
    Increment,
    SetState,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Event {
    /// A game move: SAN text plus the resolved move identifier.
    Move { san: String, id: u32 },
    /// Adds `amount` to the named counter register.
    Increment { counter: Name, amount: i64 },
    /// Sets the named strategy register to an enum code or recomputed value.
    SetState { strategy: Name, value: i64 },
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::Move { .. } => EventKind::Move,
            Event::Increment { .. } => EventKind::Increment,
            Event::SetState { .. } => EventKind::SetState,
        }
    }

    /// Internal events are the bookkeeping a move triggers; they outrank moves.
    pub fn is_internal(&self) -> bool {
        !matches!(self, Event::Move { .. })
    }

    pub fn increment(counter: impl Into<Name>, amount: i64) -> Event {
        Event::Increment {
            counter: counter.into(),
            amount,
        }
    }

    pub fn set_state(strategy: impl Into<Name>, value: i64) -> Event {
        Event::SetState {
            strategy: strategy.into(),
            value,
        }
    }

    pub fn mv(san: impl Into<String>, id: u32) -> Event {
        Event::Move {
            san: san.into(),
            id,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Move { san, .. } => write!(f, "Move({san})"),
            Event::Increment { counter, amount } => write!(f, "Increment({counter}, {amount})"),
            Event::SetState { strategy, value } => write!(f, "SetState({strategy}, {value})"),
        }
    }
}

/// A named, pure membership test over events.
#[derive(Clone)]
pub enum EventSet {
    Empty,
    All,
    Kind(EventKind),
    Only(Vec<Event>),
    Predicate {
        name: &'static str,
        test: fn(&Event) -> bool,
    },
}

impl EventSet {
    pub fn contains(&self, event: &Event) -> bool {
        match self {
            EventSet::Empty => false,
            EventSet::All => true,
            EventSet::Kind(k) => event.kind() == *k,
            EventSet::Only(events) => events.contains(event),
            EventSet::Predicate { test, .. } => test(event),
        }
    }

    pub fn is_empty_set(&self) -> bool {
        match self {
            EventSet::Empty => true,
            EventSet::Only(v) => v.is_empty(),
            _ => false,
        }
    }

    pub fn name(&self) -> Cow<'static, str> {
        match self {
            EventSet::Empty => "none".into(),
            EventSet::All => "all".into(),
            EventSet::Kind(k) => format!("all {k:?} events").into(),
            EventSet::Only(v) => format!("{} listed events", v.len()).into(),
            EventSet::Predicate { name, .. } => (*name).into(),
        }
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EventSet({})", self.name())
    }
}

/// What a b-thread declares at a synchronization point.
#[derive(Debug, Clone)]
pub struct SyncStatement {
    pub request: Vec<Event>,
    pub wait_for: EventSet,
    pub block: EventSet,
}

impl Default for SyncStatement {
    fn default() -> Self {
        SyncStatement::idle()
    }
}

impl SyncStatement {
    pub fn idle() -> SyncStatement {
        SyncStatement {
            request: Vec::new(),
            wait_for: EventSet::Empty,
            block: EventSet::Empty,
        }
    }

    pub fn requesting(events: Vec<Event>) -> SyncStatement {
        SyncStatement {
            request: events,
            ..SyncStatement::idle()
        }
    }

    pub fn waiting_for(set: EventSet) -> SyncStatement {
        SyncStatement {
            wait_for: set,
            ..SyncStatement::idle()
        }
    }

    pub fn blocking(mut self, set: EventSet) -> SyncStatement {
        self.block = set;
        self
    }

    /// Whether the thread issuing this statement must be resumed by `event`.
    pub fn notified_by(&self, event: &Event) -> bool {
        self.request.contains(event) || self.wait_for.contains(event)
    }
}

/// Picks the next event: internal requests before moves, then registration
/// order, then position within a thread's request list. `None` means deadlock.
pub fn select_event(statements: &[SyncStatement]) -> Option<Event> {
    let blocked = |e: &Event| statements.iter().any(|s| s.block.contains(e));
    for internal in [true, false] {
        for s in statements {
            for e in &s.request {
                if e.is_internal() == internal && !blocked(e) {
                    return Some(e.clone());
                }
            }
        }
    }
    None
}

//! Opening strategies modeled as b-threads, and the feature schema they export.

mod threads;
mod world;

use thiserror::Error;

use crate::bp::{Event, Kernel, KernelError, KernelSnapshot};
use crate::chess::{Board, ChessError, Move};

pub use threads::{
    advanced_strategy_threads, basic_strategy_threads, counter_threads, GameSimulator,
    StrategyThread, MAX_DEVELOPED,
};
pub use world::{ChessWorld, LastMove, StrategyConfig};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Chess(#[from] ChessError),
    #[error("move {0} was never selected (blocked or not requested)")]
    MoveNotPlayed(String),
    #[error("snapshot schema {found:#018x} does not match feature schema {expected} ({expected_id:#018x})")]
    SchemaMismatch {
        expected: String,
        expected_id: u64,
        found: u64,
    },
}

/// Inclusive range a register stays in; `max = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterRange {
    pub min: i64,
    pub max: Option<i64>,
}

impl RegisterRange {
    const fn bounded(max: i64) -> Self {
        RegisterRange { min: 0, max: Some(max) }
    }
    const fn open() -> Self {
        RegisterRange { min: 0, max: None }
    }

    pub fn contains(&self, v: f64) -> bool {
        v.fract() == 0.0 && v >= self.min as f64 && self.max.is_none_or(|m| v <= m as f64)
    }
}

impl std::fmt::Display for RegisterRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.max {
            Some(m) => write!(f, "{}..={m}", self.min),
            None => write!(f, "{}..", self.min),
        }
    }
}

/// Per-color registers in feature order, with their ranges.
pub const BASIC_REGISTERS: [(&str, RegisterRange); 13] = [
    ("pawn_moves", RegisterRange::open()),
    ("knight_moves", RegisterRange::open()),
    ("bishop_moves", RegisterRange::open()),
    ("rook_moves", RegisterRange::open()),
    ("queen_moves", RegisterRange::open()),
    ("center_control", RegisterRange::bounded(8)),
    ("developed", RegisterRange::bounded(MAX_DEVELOPED as i64)),
    ("space", RegisterRange::bounded(32)),
    ("weak_square_pressure", RegisterRange::bounded(16)),
    ("pawn_weaknesses", RegisterRange::bounded(15)),
    ("early_queen_flag", RegisterRange::bounded(1)),
    ("useless_pawn_moves", RegisterRange::open()),
    // 0 not castled, 1 kingside, 2 queenside
    ("castle_state", RegisterRange::bounded(2)),
];

pub const ADVANCED_REGISTERS: [(&str, RegisterRange); 5] = [
    ("defended_pieces", RegisterRange::bounded(15)),
    ("attacks_made", RegisterRange::open()),
    ("pins_made", RegisterRange::open()),
    ("captures_made", RegisterRange::bounded(15)),
    ("material_points", RegisterRange::bounded(103)),
];

pub const PLY_RANGE: RegisterRange = RegisterRange::open();

/// Ordered numeric features: mover block, opponent block, ply.
pub type FeatureVector = Vec<f64>;

/// The counters and strategies replaying one game inside a BP kernel.
#[derive(Clone)]
pub struct ChessProgram {
    kernel: Kernel<ChessWorld>,
    advanced: bool,
}

impl ChessProgram {
    pub fn new(board: Board, advanced: bool, config: StrategyConfig) -> ChessProgram {
        let world = ChessWorld::new(board, config);
        let mut kernel = Kernel::new(world.clone());
        let mut add = |t: Box<dyn crate::bp::BThread<ChessWorld>>| {
            kernel.register(t).expect("strategy thread names are unique");
        };
        add(Box::new(GameSimulator::new(&world)));
        for t in counter_threads(&world) {
            add(Box::new(t));
        }
        for t in basic_strategy_threads(&world) {
            add(Box::new(t));
        }
        if advanced {
            for t in advanced_strategy_threads(&world) {
                add(Box::new(t));
            }
        }
        ChessProgram { kernel, advanced }
    }

    pub fn start(advanced: bool) -> ChessProgram {
        ChessProgram::new(Board::start(), advanced, StrategyConfig::default())
    }

    pub fn advanced(&self) -> bool {
        self.advanced
    }

    pub fn board(&self) -> &Board {
        self.kernel.world().board()
    }

    pub fn world(&self) -> &ChessWorld {
        self.kernel.world()
    }

    pub fn kernel(&self) -> &Kernel<ChessWorld> {
        &self.kernel
    }

    /// Plays a legal move through one super-step and returns its event trace.
    pub fn play(&mut self, mv: &Move, san: impl Into<String>) -> Result<Vec<Event>, StrategyError> {
        let san = san.into();
        self.kernel.world_mut().queue(san.clone(), *mv);
        let trace = self.kernel.super_step()?;
        if self.kernel.world().pending().is_some() {
            self.kernel.world_mut().pending = None;
            return Err(StrategyError::MoveNotPlayed(san));
        }
        Ok(trace)
    }

    pub fn play_san(&mut self, san: &str) -> Result<Vec<Event>, StrategyError> {
        let mv = self.board().parse_san(san)?;
        self.play(&mv, san)
    }

    pub fn snapshot(&self) -> KernelSnapshot {
        self.kernel.snapshot()
    }

    pub fn fork(&self) -> ChessProgram {
        self.clone()
    }
}

/// Which registers form a feature vector, and in what order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    advanced: bool,
    names: Vec<String>,
    ranges: Vec<RegisterRange>,
    kernel_schema_id: u64,
    /// Kernel register indices gathered for a White mover and a Black mover.
    gather: [Vec<usize>; 2],
    side_index: usize,
}

pub const BASIC_VERSION: &str = "bpchess-basic-v1";
pub const ADVANCED_VERSION: &str = "bpchess-advanced-v1";

impl FeatureSchema {
    pub fn new(advanced: bool) -> FeatureSchema {
        let program = ChessProgram::start(advanced);
        let snap = program.snapshot();
        let index = |name: &str| {
            snap.names
                .iter()
                .position(|n| n == name)
                .unwrap_or_else(|| panic!("register {name} missing"))
        };

        let mut per_color: Vec<(&str, RegisterRange)> = BASIC_REGISTERS.to_vec();
        if advanced {
            per_color.extend(ADVANCED_REGISTERS);
        }
        let mut names = Vec::new();
        let mut ranges = Vec::new();
        for block in ["own", "opp"] {
            for (base, range) in &per_color {
                names.push(format!("{block}_{base}"));
                ranges.push(*range);
            }
        }
        names.push(threads::PLY_INDEX.to_string());
        ranges.push(PLY_RANGE);

        let gather = [0usize, 1].map(|mover| {
            let mut idx = Vec::with_capacity(names.len());
            for side in [mover, 1 - mover] {
                let color = ["white", "black"][side];
                for (base, _) in &per_color {
                    idx.push(index(&format!("{color}.{base}")));
                }
            }
            idx.push(index(threads::PLY_INDEX));
            idx
        });

        FeatureSchema {
            advanced,
            names,
            ranges,
            kernel_schema_id: snap.schema_id,
            gather,
            side_index: index(threads::SIDE_TO_MOVE),
        }
    }

    pub fn basic() -> FeatureSchema {
        FeatureSchema::new(false)
    }

    pub fn advanced() -> FeatureSchema {
        FeatureSchema::new(true)
    }

    pub fn is_advanced(&self) -> bool {
        self.advanced
    }

    pub fn version(&self) -> &'static str {
        if self.advanced {
            ADVANCED_VERSION
        } else {
            BASIC_VERSION
        }
    }

    pub fn from_version(version: &str) -> Option<FeatureSchema> {
        match version {
            BASIC_VERSION => Some(FeatureSchema::basic()),
            ADVANCED_VERSION => Some(FeatureSchema::advanced()),
            _ => None,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ranges(&self) -> &[RegisterRange] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn kernel_schema_id(&self) -> u64 {
        self.kernel_schema_id
    }

    /// Orders a snapshot's registers from the point of view of its side to move.
    pub fn encode(&self, snapshot: &KernelSnapshot) -> Result<FeatureVector, StrategyError> {
        self.check(snapshot)?;
        let mover = snapshot.values[self.side_index] as usize;
        Ok(self.gather(snapshot, mover.min(1)))
    }

    fn gather(&self, snapshot: &KernelSnapshot, side: usize) -> FeatureVector {
        self.gather[side].iter().map(|&i| snapshot.values[i]).collect()
    }

    fn check(&self, snapshot: &KernelSnapshot) -> Result<(), StrategyError> {
        if snapshot.schema_id != self.kernel_schema_id {
            return Err(StrategyError::SchemaMismatch {
                expected: self.version().to_string(),
                expected_id: self.kernel_schema_id,
                found: snapshot.schema_id,
            });
        }
        Ok(())
    }

    /// Standalone schema description: version line, then `name:range` per register.
    pub fn to_schema_text(&self) -> String {
        let mut out = format!("# version {}\n", self.version());
        for (n, r) in self.names.iter().zip(&self.ranges) {
            out.push_str(&format!("{n}:{r}\n"));
        }
        out
    }
}

//! The counter, basic-strategy and advanced-strategy b-threads.
//!
//! Every thread exports one register per color (`white.<name>`, `black.<name>`).
//! Counters and event-driven strategies wait for a move and request
//! `Increment`/`SetState` events for their own registers; recomputed strategies
//! request a `SetState` whenever the value derived from the new position
//! differs from the register.

use crate::bp::{BThread, Event, EventKind, EventSet, Registers, SyncStatement};
use crate::chess::{Color, PieceKind, CENTER};

use super::world::ChessWorld;

macro_rules! per_color {
    ($base:literal) => {
        [concat!("white.", $base), concat!("black.", $base)]
    };
}

pub(crate) const PLY_INDEX: &str = "ply_index";
pub(crate) const SIDE_TO_MOVE: &str = "side_to_move";

pub(crate) const PAWN_MOVES: [&str; 2] = per_color!("pawn_moves");
pub(crate) const KNIGHT_MOVES: [&str; 2] = per_color!("knight_moves");
pub(crate) const BISHOP_MOVES: [&str; 2] = per_color!("bishop_moves");
pub(crate) const ROOK_MOVES: [&str; 2] = per_color!("rook_moves");
pub(crate) const QUEEN_MOVES: [&str; 2] = per_color!("queen_moves");
pub(crate) const CENTER_CONTROL: [&str; 2] = per_color!("center_control");
pub(crate) const DEVELOPED: [&str; 2] = per_color!("developed");
pub(crate) const SPACE: [&str; 2] = per_color!("space");
pub(crate) const WEAK_SQUARE: [&str; 2] = per_color!("weak_square_pressure");
pub(crate) const PAWN_WEAKNESSES: [&str; 2] = per_color!("pawn_weaknesses");
pub(crate) const EARLY_QUEEN: [&str; 2] = per_color!("early_queen_flag");
pub(crate) const USELESS_PAWN: [&str; 2] = per_color!("useless_pawn_moves");
pub(crate) const CASTLE_STATE: [&str; 2] = per_color!("castle_state");
pub(crate) const DEFENDED: [&str; 2] = per_color!("defended_pieces");
pub(crate) const ATTACKS_MADE: [&str; 2] = per_color!("attacks_made");
pub(crate) const PINS_MADE: [&str; 2] = per_color!("pins_made");
pub(crate) const CAPTURES_MADE: [&str; 2] = per_color!("captures_made");
pub(crate) const MATERIAL: [&str; 2] = per_color!("material_points");

/// Largest value the developed register reports (N, N, B, B, R, R, Q).
pub const MAX_DEVELOPED: u32 = 7;

pub(crate) fn castle_code(kind: crate::chess::MoveKind) -> Option<i64> {
    match kind {
        crate::chess::MoveKind::CastleKingside => Some(1),
        crate::chess::MoveKind::CastleQueenside => Some(2),
        _ => None,
    }
}

/// Whether a pawn standing on `sq` occupies or attacks a central square.
pub(crate) fn pawn_reaches_center(color: Color, sq: crate::chess::Square) -> bool {
    let f = color.forward();
    let mut reach = sq.bit();
    for df in [-1, 1] {
        if let Some(t) = sq.offset(df, f) {
            reach |= t.bit();
        }
    }
    reach & CENTER != 0
}

type Measure = fn(&ChessWorld, Color) -> i64;

#[derive(Clone, Copy)]
enum Rule {
    Counter(PieceKind),
    Measure(Measure),
    EarlyQueen,
    UselessPawn,
    Castle,
    AttackPin,
    Trade,
}

/// Requests the board updates of the game being replayed, one move per super-step.
#[derive(Clone)]
pub struct GameSimulator {
    regs: Registers,
    pending: Vec<Event>,
}

impl GameSimulator {
    pub fn new(world: &ChessWorld) -> GameSimulator {
        let mut regs = Registers::new([PLY_INDEX, SIDE_TO_MOVE]);
        regs.set_at(0, world.ply() as f64);
        regs.set_at(1, world.board().side_to_move().index() as f64);
        GameSimulator {
            regs,
            pending: Vec::new(),
        }
    }
}

impl BThread<ChessWorld> for GameSimulator {
    fn name(&self) -> &str {
        "Game Simulator"
    }

    fn registers(&self) -> &Registers {
        &self.regs
    }

    fn sync(&self, world: &ChessWorld) -> SyncStatement {
        if !self.pending.is_empty() {
            return SyncStatement::requesting(self.pending.clone());
        }
        match world.pending() {
            Some((san, mv)) => SyncStatement::requesting(vec![Event::mv(san.clone(), mv.id())]),
            None => SyncStatement::idle(),
        }
    }

    fn resume(&mut self, event: &Event, world: &ChessWorld) -> Result<(), String> {
        match event {
            Event::Move { .. } => {
                self.pending = vec![
                    Event::set_state(PLY_INDEX, world.ply() as i64),
                    Event::set_state(SIDE_TO_MOVE, world.board().side_to_move().index() as i64),
                ];
            }
            other => {
                self.regs.apply(other);
                remove_first(&mut self.pending, other);
            }
        }
        Ok(())
    }

    fn clone_box(&self) -> Box<dyn BThread<ChessWorld>> {
        Box::new(self.clone())
    }
}

/// One behavioral aspect: a counter or a strategy.
#[derive(Clone)]
pub struct StrategyThread {
    name: &'static str,
    regs: Registers,
    pending: Vec<Event>,
    rule: Rule,
}

fn remove_first(pending: &mut Vec<Event>, event: &Event) {
    if let Some(i) = pending.iter().position(|p| p == event) {
        pending.remove(i);
    }
}

impl StrategyThread {
    fn new(name: &'static str, registers: &[[&'static str; 2]], rule: Rule, world: &ChessWorld) -> Self {
        let regs = Registers::new(registers.iter().flatten().copied());
        let mut t = StrategyThread {
            name,
            regs,
            pending: Vec::new(),
            rule,
        };
        for color in Color::BOTH {
            match rule {
                Rule::Measure(m) => t.regs.set_at(color.index(), m(world, color) as f64),
                Rule::Trade => t.regs.set_at(2 + color.index(), material(world, color) as f64),
                _ => {}
            }
        }
        t
    }

    fn set_if_changed(&self, out: &mut Vec<Event>, offset: usize, color: Color, value: i64) {
        let index = offset + color.index();
        if self.regs.get_at(index) != value as f64 {
            out.push(Event::set_state(self.regs.names()[index].clone(), value));
        }
    }

    fn increment(&self, out: &mut Vec<Event>, offset: usize, color: Color) {
        out.push(Event::increment(self.regs.names()[offset + color.index()].clone(), 1));
    }

    /// Events this thread requests in reaction to the move just played.
    fn react(&self, world: &ChessWorld) -> Vec<Event> {
        let mut out = Vec::new();
        let Some(last) = world.last_move() else {
            return out;
        };
        let mover = last.mover;
        let mv = &last.mv;
        match self.rule {
            Rule::Counter(kind) => {
                let counted = if mv.is_castle() { PieceKind::Rook } else { mv.piece };
                if counted == kind {
                    self.increment(&mut out, 0, mover);
                }
            }
            Rule::Measure(m) => {
                for color in Color::BOTH {
                    self.set_if_changed(&mut out, 0, color, m(world, color));
                }
            }
            Rule::EarlyQueen => {
                if mv.piece == PieceKind::Queen && last.fullmove <= world.config().early_queen_moves {
                    self.set_if_changed(&mut out, 0, mover, 1);
                }
            }
            Rule::UselessPawn => {
                if mv.piece == PieceKind::Pawn && !pawn_reaches_center(mover, mv.to) {
                    self.increment(&mut out, 0, mover);
                }
            }
            Rule::Castle => {
                if let Some(code) = castle_code(mv.kind) {
                    self.set_if_changed(&mut out, 0, mover, code);
                }
            }
            Rule::AttackPin => {
                let before = world.prev_facts().side(mover).threatened;
                let after = world.facts().side(mover).threatened;
                if after & !before != 0 {
                    self.increment(&mut out, 0, mover);
                }
                let old: Vec<_> = world.prev_facts().pins_by(mover).collect();
                if world.facts().pins_by(mover).any(|p| !old.contains(&p)) {
                    self.increment(&mut out, 2, mover);
                }
            }
            Rule::Trade => {
                if mv.is_capture() {
                    self.increment(&mut out, 0, mover);
                }
                for color in Color::BOTH {
                    self.set_if_changed(&mut out, 2, color, material(world, color));
                }
            }
        }
        out
    }
}

impl BThread<ChessWorld> for StrategyThread {
    fn name(&self) -> &str {
        self.name
    }

    fn registers(&self) -> &Registers {
        &self.regs
    }

    fn sync(&self, _: &ChessWorld) -> SyncStatement {
        if self.pending.is_empty() {
            SyncStatement::waiting_for(EventSet::Kind(EventKind::Move))
        } else {
            SyncStatement::requesting(self.pending.clone())
        }
    }

    fn resume(&mut self, event: &Event, world: &ChessWorld) -> Result<(), String> {
        match event {
            Event::Move { .. } => self.pending = self.react(world),
            other => {
                if !self.regs.apply(other) {
                    return Err(format!("resumed with foreign event {other}"));
                }
                remove_first(&mut self.pending, other);
            }
        }
        Ok(())
    }

    fn clone_box(&self) -> Box<dyn BThread<ChessWorld>> {
        Box::new(self.clone())
    }
}

fn center_control(w: &ChessWorld, c: Color) -> i64 {
    w.facts().side(c).center_coverage as i64
}

fn developed(w: &ChessWorld, c: Color) -> i64 {
    w.facts().side(c).developed.min(MAX_DEVELOPED) as i64
}

fn space(w: &ChessWorld, c: Color) -> i64 {
    w.facts().side(c).space as i64
}

fn weak_square(w: &ChessWorld, c: Color) -> i64 {
    w.facts().side(c).weak_square_attackers as i64
}

fn pawn_weaknesses(w: &ChessWorld, c: Color) -> i64 {
    let s = w.facts().side(c);
    (s.doubled_pawns + s.isolated_pawns) as i64
}

fn defended(w: &ChessWorld, c: Color) -> i64 {
    w.facts().side(c).defended as i64
}

fn material(w: &ChessWorld, c: Color) -> i64 {
    w.facts().side(c).material as i64
}

/// Pawn, Knight, Bishop, Rook and Queen move counters.
pub fn counter_threads(world: &ChessWorld) -> Vec<StrategyThread> {
    [
        ("Pawn counter", PAWN_MOVES, PieceKind::Pawn),
        ("Knight counter", KNIGHT_MOVES, PieceKind::Knight),
        ("Bishop counter", BISHOP_MOVES, PieceKind::Bishop),
        ("Rook counter", ROOK_MOVES, PieceKind::Rook),
        ("Queen counter", QUEEN_MOVES, PieceKind::Queen),
    ]
    .into_iter()
    .map(|(name, regs, kind)| StrategyThread::new(name, &[regs], Rule::Counter(kind), world))
    .collect()
}

/// The eight opening principles.
pub fn basic_strategy_threads(world: &ChessWorld) -> Vec<StrategyThread> {
    vec![
        StrategyThread::new("Control Center", &[CENTER_CONTROL], Rule::Measure(center_control), world),
        StrategyThread::new("Development", &[DEVELOPED], Rule::Measure(developed), world),
        StrategyThread::new("Space", &[SPACE], Rule::Measure(space), world),
        StrategyThread::new("Weak Square", &[WEAK_SQUARE], Rule::Measure(weak_square), world),
        StrategyThread::new("Pawn Structure", &[PAWN_WEAKNESSES], Rule::Measure(pawn_weaknesses), world),
        StrategyThread::new("Early Queen", &[EARLY_QUEEN], Rule::EarlyQueen, world),
        StrategyThread::new("Useless Pawn Moves", &[USELESS_PAWN], Rule::UselessPawn, world),
        StrategyThread::new("Castling", &[CASTLE_STATE], Rule::Castle, world),
    ]
}

/// Defending, Attacking and Pinning, Trading Pieces.
pub fn advanced_strategy_threads(world: &ChessWorld) -> Vec<StrategyThread> {
    vec![
        StrategyThread::new("Defending", &[DEFENDED], Rule::Measure(defended), world),
        StrategyThread::new("Attacking and Pinning", &[ATTACKS_MADE, PINS_MADE], Rule::AttackPin, world),
        StrategyThread::new("Trading Pieces", &[CAPTURES_MADE, MATERIAL], Rule::Trade, world),
    ]
}

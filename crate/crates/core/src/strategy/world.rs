use crate::bp::{Event, World};
use crate::chess::{position_facts, Board, Color, Move, PositionFacts};

/// Tunables of the strategy definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyConfig {
    /// A queen move counts as premature while the mover's fullmove number is at most this.
    pub early_queen_moves: u32,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            early_queen_moves: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LastMove {
    pub mv: Move,
    pub mover: Color,
    /// Fullmove number of the position the move was played from.
    pub fullmove: u32,
}

/// The chess state every strategy b-thread observes.
#[derive(Debug, Clone)]
pub struct ChessWorld {
    pub(crate) board: Board,
    pub(crate) facts: PositionFacts,
    pub(crate) prev_facts: PositionFacts,
    pub(crate) last: Option<LastMove>,
    pub(crate) pending: Option<(String, Move)>,
    pub(crate) ply: u32,
    pub(crate) config: StrategyConfig,
}

impl ChessWorld {
    pub fn new(board: Board, config: StrategyConfig) -> ChessWorld {
        let facts = position_facts(&board);
        ChessWorld {
            board,
            prev_facts: facts.clone(),
            facts,
            last: None,
            pending: None,
            ply: 0,
            config,
        }
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn facts(&self) -> &PositionFacts {
        &self.facts
    }

    /// Facts of the position before the last move.
    pub fn prev_facts(&self) -> &PositionFacts {
        &self.prev_facts
    }

    pub fn last_move(&self) -> Option<&LastMove> {
        self.last.as_ref()
    }

    pub fn ply(&self) -> u32 {
        self.ply
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn pending(&self) -> Option<&(String, Move)> {
        self.pending.as_ref()
    }

    pub(crate) fn queue(&mut self, san: String, mv: Move) {
        self.pending = Some((san, mv));
    }
}

impl World for ChessWorld {
    fn on_event(&mut self, event: &Event) -> Result<(), String> {
        let Event::Move { id, san } = event else {
            return Ok(());
        };
        let (_, mv) = self
            .pending
            .take()
            .ok_or_else(|| format!("move {san} selected with nothing queued"))?;
        if mv.id() != *id {
            return Err(format!("move {san} does not match the queued move"));
        }
        let mover = self.board.side_to_move();
        let fullmove = self.board.fullmove_number();
        let next = self.board.play_unchecked(&mv).0;
        self.prev_facts = std::mem::replace(&mut self.facts, position_facts(&next));
        self.board = next;
        self.last = Some(LastMove { mv, mover, fullmove });
        self.ply += 1;
        Ok(())
    }
}

//! Chess rules: positions, legal moves, SAN/PGN reading and position facts.

mod board;
mod facts;
mod movegen;
mod pgn;
mod san;
mod types;

pub use board::{Board, CastlingRights, START_FEN};
pub use facts::{
    enemy_half, is_home_square, mask_names, position_facts, weak_square_target, Pin,
    PositionFacts, SideFacts, CENTER,
};
pub use movegen::{perft, Move, MoveKind, UndoRecord};
pub use pgn::{parse_pgn, Diagnostic, GameRecord, PgnParse};
pub use types::{squares_of, Color, Piece, PieceKind, Square};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ChessError {
    #[error("invalid FEN '{fen}': {reason}")]
    InvalidFen { fen: String, reason: String },
    #[error("invalid position {fen}: {reason}")]
    InvalidBoard { fen: String, reason: String },
    #[error("illegal move {mv} in {fen}")]
    IllegalMove { fen: String, mv: String },
    #[error("cannot play '{token}' in {fen}: {reason}")]
    San {
        fen: String,
        token: String,
        reason: String,
    },
}

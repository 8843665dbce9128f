use std::fmt;

use super::types::{Color, Piece, PieceKind, Square};
use super::ChessError;

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

pub(crate) const KNIGHT_OFFSETS: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];
pub(crate) const KING_OFFSETS: [(i8, i8); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];
pub(crate) const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
pub(crate) const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

/// Castling availability as four independent flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CastlingRights(u8);

impl CastlingRights {
    const WK: u8 = 1;
    const WQ: u8 = 2;
    const BK: u8 = 4;
    const BQ: u8 = 8;

    pub const ALL: CastlingRights = CastlingRights(0b1111);
    pub const NONE: CastlingRights = CastlingRights(0);

    fn bit(color: Color, kingside: bool) -> u8 {
        match (color, kingside) {
            (Color::White, true) => Self::WK,
            (Color::White, false) => Self::WQ,
            (Color::Black, true) => Self::BK,
            (Color::Black, false) => Self::BQ,
        }
    }

    pub fn has(self, color: Color, kingside: bool) -> bool {
        self.0 & Self::bit(color, kingside) != 0
    }

    pub fn set(&mut self, color: Color, kingside: bool, on: bool) {
        let b = Self::bit(color, kingside);
        if on {
            self.0 |= b;
        } else {
            self.0 &= !b;
        }
    }

    pub fn clear_color(&mut self, color: Color) {
        self.set(color, true, false);
        self.set(color, false, false);
    }

    fn swapped(self) -> CastlingRights {
        CastlingRights(((self.0 & 0b0011) << 2) | ((self.0 & 0b1100) >> 2))
    }
}

/// A chess position. Boards are plain values: every move produces a new one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Board {
    pub(crate) squares: [Option<Piece>; 64],
    pub(crate) side_to_move: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) en_passant: Option<Square>,
    pub(crate) halfmove_clock: u32,
    pub(crate) fullmove_number: u32,
}

impl Default for Board {
    fn default() -> Self {
        Board::start()
    }
}

impl Board {
    pub fn start() -> Board {
        Board::from_fen(START_FEN).expect("start position is valid")
    }

    pub fn empty(side_to_move: Color) -> Board {
        Board {
            squares: [None; 64],
            side_to_move,
            castling: CastlingRights::NONE,
            en_passant: None,
            halfmove_clock: 0,
            fullmove_number: 1,
        }
    }

    pub fn from_fen(fen: &str) -> Result<Board, ChessError> {
        let bad = |why: &str| ChessError::InvalidFen {
            fen: fen.to_string(),
            reason: why.to_string(),
        };
        let mut parts = fen.split_whitespace();
        let placement = parts.next().ok_or_else(|| bad("empty"))?;
        let mut board = Board::empty(Color::White);

        let ranks: Vec<&str> = placement.split('/').collect();
        if ranks.len() != 8 {
            return Err(bad("placement must have 8 ranks"));
        }
        for (i, row) in ranks.iter().enumerate() {
            let rank = 7 - i as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as u8;
                } else {
                    let piece = Piece::from_fen_char(c).ok_or_else(|| bad("unknown piece letter"))?;
                    let sq = Square::new(file, rank).ok_or_else(|| bad("rank overflows"))?;
                    board.squares[sq.index()] = Some(piece);
                    file += 1;
                }
                if file > 8 {
                    return Err(bad("rank overflows"));
                }
            }
            if file != 8 {
                return Err(bad("rank does not cover 8 files"));
            }
        }

        board.side_to_move = match parts.next().unwrap_or("w") {
            "w" => Color::White,
            "b" => Color::Black,
            _ => return Err(bad("side to move must be w or b")),
        };
        let castling = parts.next().unwrap_or("-");
        if castling != "-" {
            for c in castling.chars() {
                match c {
                    'K' => board.castling.set(Color::White, true, true),
                    'Q' => board.castling.set(Color::White, false, true),
                    'k' => board.castling.set(Color::Black, true, true),
                    'q' => board.castling.set(Color::Black, false, true),
                    _ => return Err(bad("bad castling field")),
                }
            }
        }
        board.en_passant = match parts.next().unwrap_or("-") {
            "-" => None,
            s => Some(Square::parse(s).ok_or_else(|| bad("bad en-passant square"))?),
        };
        board.halfmove_clock = parts
            .next()
            .unwrap_or("0")
            .parse()
            .map_err(|_| bad("bad halfmove clock"))?;
        board.fullmove_number = parts
            .next()
            .unwrap_or("1")
            .parse()
            .map_err(|_| bad("bad fullmove number"))?;

        board.validate()?;
        Ok(board)
    }

    pub fn to_fen(&self) -> String {
        let mut out = String::new();
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.squares[rank * 8 + file] {
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from_digit(empty, 10).unwrap());
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                out.push(char::from_digit(empty, 10).unwrap());
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(match self.side_to_move {
            Color::White => 'w',
            Color::Black => 'b',
        });
        out.push(' ');
        let mut rights = String::new();
        for (color, kingside, c) in [
            (Color::White, true, 'K'),
            (Color::White, false, 'Q'),
            (Color::Black, true, 'k'),
            (Color::Black, false, 'q'),
        ] {
            if self.castling.has(color, kingside) {
                rights.push(c);
            }
        }
        if rights.is_empty() {
            rights.push('-');
        }
        out.push_str(&rights);
        out.push(' ');
        match self.en_passant {
            Some(sq) => out.push_str(&sq.to_string()),
            None => out.push('-'),
        }
        out.push_str(&format!(" {} {}", self.halfmove_clock, self.fullmove_number));
        out
    }

    /// Checks the structural invariants every reachable position satisfies.
    pub fn validate(&self) -> Result<(), ChessError> {
        let invalid = |why: String| ChessError::InvalidBoard {
            fen: self.to_fen(),
            reason: why,
        };
        for color in Color::BOTH {
            let kings = self
                .squares
                .iter()
                .filter(|p| **p == Some(Piece::new(color, PieceKind::King)))
                .count();
            if kings != 1 {
                return Err(invalid(format!("{} has {kings} kings", color.name())));
            }
        }
        for sq in Square::all() {
            if let Some(p) = self.squares[sq.index()] {
                if p.kind == PieceKind::Pawn && (sq.rank() == 0 || sq.rank() == 7) {
                    return Err(invalid(format!("pawn on back rank at {sq}")));
                }
            }
        }
        let waiting = self.side_to_move.opponent();
        if self.in_check(waiting) {
            return Err(invalid(format!(
                "{} king can be captured",
                waiting.name()
            )));
        }
        for color in Color::BOTH {
            let home = if color == Color::White { 0 } else { 7 };
            let king_home = self.piece_at(Square::new(4, home).unwrap())
                == Some(Piece::new(color, PieceKind::King));
            for (kingside, rook_file) in [(true, 7), (false, 0)] {
                if !self.castling.has(color, kingside) {
                    continue;
                }
                let rook_home = self.piece_at(Square::new(rook_file, home).unwrap())
                    == Some(Piece::new(color, PieceKind::Rook));
                if !king_home || !rook_home {
                    return Err(invalid(format!(
                        "{} castling right without king and rook on home squares",
                        color.name()
                    )));
                }
            }
        }
        if let Some(ep) = self.en_passant {
            let expected_rank = match self.side_to_move {
                Color::White => 5,
                Color::Black => 2,
            };
            if ep.rank() != expected_rank {
                return Err(invalid(format!("en-passant square {ep} on wrong rank")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.squares[sq.index()]
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling_rights(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| self.squares[sq.index()].map(|p| (sq, p)))
    }

    pub fn king_square(&self, color: Color) -> Square {
        self.pieces()
            .find(|(_, p)| p.color == color && p.kind == PieceKind::King)
            .map(|(sq, _)| sq)
            .expect("validated board has a king per color")
    }

    pub fn occupancy(&self) -> u64 {
        self.pieces().fold(0, |m, (sq, _)| m | sq.bit())
    }

    /// Whether any unit of `by` reaches `target` (pawns by diagonal capture only).
    pub fn is_attacked(&self, target: Square, by: Color) -> bool {
        let has = |sq: Option<Square>, kind: PieceKind| {
            sq.and_then(|s| self.piece_at(s)) == Some(Piece::new(by, kind))
        };
        let back = -by.forward();
        if has(target.offset(-1, back), PieceKind::Pawn) || has(target.offset(1, back), PieceKind::Pawn) {
            return true;
        }
        if KNIGHT_OFFSETS
            .iter()
            .any(|&(df, dr)| has(target.offset(df, dr), PieceKind::Knight))
        {
            return true;
        }
        if KING_OFFSETS
            .iter()
            .any(|&(df, dr)| has(target.offset(df, dr), PieceKind::King))
        {
            return true;
        }
        for (dirs, kind) in [(ROOK_DIRS, PieceKind::Rook), (BISHOP_DIRS, PieceKind::Bishop)] {
            for (df, dr) in dirs {
                let mut cur = target.offset(df, dr);
                while let Some(sq) = cur {
                    if let Some(p) = self.piece_at(sq) {
                        if p.color == by && (p.kind == kind || p.kind == PieceKind::Queen) {
                            return true;
                        }
                        break;
                    }
                    cur = sq.offset(df, dr);
                }
            }
        }
        false
    }

    pub fn in_check(&self, color: Color) -> bool {
        self.is_attacked(self.king_square(color), color.opponent())
    }

    /// Squares reached by the unit on `from`, including friendly-occupied ones.
    /// Pawns reach only their capture diagonals.
    pub fn attacks_from(&self, from: Square) -> u64 {
        let Some(piece) = self.piece_at(from) else {
            return 0;
        };
        let mut mask = 0u64;
        let mut step = |offsets: &[(i8, i8)]| {
            for &(df, dr) in offsets {
                if let Some(sq) = from.offset(df, dr) {
                    mask |= sq.bit();
                }
            }
        };
        match piece.kind {
            PieceKind::Pawn => {
                let f = piece.color.forward();
                step(&[(-1, f), (1, f)]);
            }
            PieceKind::Knight => step(&KNIGHT_OFFSETS),
            PieceKind::King => step(&KING_OFFSETS),
            PieceKind::Bishop => mask = self.ray_mask(from, &BISHOP_DIRS),
            PieceKind::Rook => mask = self.ray_mask(from, &ROOK_DIRS),
            PieceKind::Queen => {
                mask = self.ray_mask(from, &BISHOP_DIRS) | self.ray_mask(from, &ROOK_DIRS)
            }
        }
        mask
    }

    fn ray_mask(&self, from: Square, dirs: &[(i8, i8)]) -> u64 {
        let mut mask = 0;
        for &(df, dr) in dirs {
            let mut cur = from.offset(df, dr);
            while let Some(sq) = cur {
                mask |= sq.bit();
                if self.piece_at(sq).is_some() {
                    break;
                }
                cur = sq.offset(df, dr);
            }
        }
        mask
    }

    /// Color-flipped, rank-mirrored copy of the position.
    pub fn mirrored(&self) -> Board {
        let mut out = Board::empty(self.side_to_move.opponent());
        for (sq, p) in self.pieces() {
            out.squares[sq.flip_rank().index()] = Some(Piece::new(p.color.opponent(), p.kind));
        }
        out.castling = self.castling.swapped();
        out.en_passant = self.en_passant.map(Square::flip_rank);
        out.halfmove_clock = self.halfmove_clock;
        out.fullmove_number = self.fullmove_number;
        out
    }

    pub(crate) fn put(&mut self, sq: Square, piece: Option<Piece>) {
        self.squares[sq.index()] = piece;
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Board({})", self.to_fen())
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rank in (0..8).rev() {
            for file in 0..8 {
                let c = self.squares[rank * 8 + file].map_or('.', Piece::fen_char);
                write!(f, "{c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

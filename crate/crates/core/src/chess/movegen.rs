use super::board::{Board, BISHOP_DIRS, KING_OFFSETS, KNIGHT_OFFSETS, ROOK_DIRS};
use super::types::{Color, Piece, PieceKind, Square};
use super::ChessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Normal,
    DoublePush,
    EnPassant,
    CastleKingside,
    CastleQueenside,
}

/// A fully resolved move. Castles are encoded as the king's from/to squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub piece: PieceKind,
    pub captured: Option<PieceKind>,
    pub promotion: Option<PieceKind>,
    pub kind: MoveKind,
    pub check: bool,
}

impl Move {
    pub fn is_castle(&self) -> bool {
        matches!(self.kind, MoveKind::CastleKingside | MoveKind::CastleQueenside)
    }

    pub fn is_en_passant(&self) -> bool {
        self.kind == MoveKind::EnPassant
    }

    pub fn is_capture(&self) -> bool {
        self.captured.is_some()
    }

    /// Compact identifier: from | to << 6 | promotion << 12.
    pub fn id(&self) -> u32 {
        let promo = self.promotion.map_or(0, |k| k as u32);
        self.from.index() as u32 | (self.to.index() as u32) << 6 | promo << 12
    }

    /// Long algebraic (UCI style) text, e.g. `e2e4` or `e7e8q`.
    pub fn uci(&self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let Some(p) = self.promotion {
            s.push(p.fen_char());
        }
        s
    }

    fn sort_key(&self) -> (usize, usize, Option<PieceKind>) {
        (self.from.index(), self.to.index(), self.promotion)
    }
}

/// State that `apply` overwrites and `undo` needs back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UndoRecord {
    captured: Option<Piece>,
    castling: super::board::CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

const PROMOTIONS: [PieceKind; 4] = [
    PieceKind::Knight,
    PieceKind::Bishop,
    PieceKind::Rook,
    PieceKind::Queen,
];

impl Board {
    /// All legal moves, sorted by from-square, to-square, then promotion piece.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(48);
        self.pseudo_legal(&mut moves);
        let us = self.side_to_move;
        moves.retain_mut(|m| {
            let (after, _) = self.play_unchecked(m);
            if after.in_check(us) {
                return false;
            }
            m.check = after.in_check(us.opponent());
            true
        });
        moves.sort_unstable_by_key(Move::sort_key);
        moves
    }

    /// Applies a move after checking it is legal here.
    pub fn apply_move(&self, mv: &Move) -> Result<Board, ChessError> {
        let legal = self
            .legal_moves()
            .into_iter()
            .find(|m| m.from == mv.from && m.to == mv.to && m.promotion == mv.promotion)
            .ok_or_else(|| ChessError::IllegalMove {
                fen: self.to_fen(),
                mv: mv.uci(),
            })?;
        Ok(self.play_unchecked(&legal).0)
    }

    /// Like [`Board::apply_move`] but also returns what [`Board::undo_move`] needs.
    pub fn apply_with_undo(&self, mv: &Move) -> Result<(Board, UndoRecord), ChessError> {
        let after = self.apply_move(mv)?;
        let record = UndoRecord {
            captured: if mv.is_en_passant() {
                Some(Piece::new(self.side_to_move.opponent(), PieceKind::Pawn))
            } else {
                self.piece_at(mv.to)
            },
            castling: self.castling,
            en_passant: self.en_passant,
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
        };
        Ok((after, record))
    }

    /// Reconstructs the position before `mv` from the position after it.
    pub fn undo_move(&self, mv: &Move, record: &UndoRecord) -> Board {
        let mut b = self.clone();
        let us = self.side_to_move.opponent();
        b.side_to_move = us;
        b.castling = record.castling;
        b.en_passant = record.en_passant;
        b.halfmove_clock = record.halfmove_clock;
        b.fullmove_number = record.fullmove_number;

        b.put(mv.to, None);
        b.put(mv.from, Some(Piece::new(us, mv.piece)));
        match mv.kind {
            MoveKind::EnPassant => {
                let victim = mv.to.offset(0, -us.forward()).expect("ep victim on board");
                b.put(victim, record.captured);
            }
            MoveKind::CastleKingside | MoveKind::CastleQueenside => {
                let (rook_from, rook_to) = castle_rook_squares(mv.kind, mv.from.rank());
                b.put(rook_to, None);
                b.put(rook_from, Some(Piece::new(us, PieceKind::Rook)));
            }
            _ => b.put(mv.to, record.captured),
        }
        b
    }

    /// Plays a move known to be pseudo-legal in this position without verifying it.
    pub(crate) fn play_unchecked(&self, mv: &Move) -> (Board, Option<Piece>) {
        let mut b = self.clone();
        let us = self.side_to_move;
        let mut captured = self.piece_at(mv.to);

        b.put(mv.from, None);
        let placed = Piece::new(us, mv.promotion.unwrap_or(mv.piece));
        b.put(mv.to, Some(placed));

        match mv.kind {
            MoveKind::EnPassant => {
                let victim = mv.to.offset(0, -us.forward()).expect("ep victim on board");
                captured = b.piece_at(victim);
                b.put(victim, None);
            }
            MoveKind::CastleKingside | MoveKind::CastleQueenside => {
                let (rook_from, rook_to) = castle_rook_squares(mv.kind, mv.from.rank());
                b.put(rook_from, None);
                b.put(rook_to, Some(Piece::new(us, PieceKind::Rook)));
            }
            _ => {}
        }

        if mv.piece == PieceKind::King {
            b.castling.clear_color(us);
        }
        for sq in [mv.from, mv.to] {
            match (sq.file(), sq.rank()) {
                (0, 0) => b.castling.set(Color::White, false, false),
                (7, 0) => b.castling.set(Color::White, true, false),
                (0, 7) => b.castling.set(Color::Black, false, false),
                (7, 7) => b.castling.set(Color::Black, true, false),
                _ => {}
            }
        }

        b.en_passant = if mv.kind == MoveKind::DoublePush {
            mv.from.offset(0, us.forward())
        } else {
            None
        };
        if mv.piece == PieceKind::Pawn || captured.is_some() {
            b.halfmove_clock = 0;
        } else {
            b.halfmove_clock += 1;
        }
        if us == Color::Black {
            b.fullmove_number += 1;
        }
        b.side_to_move = us.opponent();
        (b, captured)
    }

    fn pseudo_legal(&self, out: &mut Vec<Move>) {
        let us = self.side_to_move;
        for (from, piece) in self.pieces() {
            if piece.color != us {
                continue;
            }
            match piece.kind {
                PieceKind::Pawn => self.pawn_moves(from, out),
                PieceKind::Knight => self.step_moves(from, piece.kind, &KNIGHT_OFFSETS, out),
                PieceKind::King => {
                    self.step_moves(from, piece.kind, &KING_OFFSETS, out);
                    self.castle_moves(from, out);
                }
                PieceKind::Bishop => self.slide_moves(from, piece.kind, &BISHOP_DIRS, out),
                PieceKind::Rook => self.slide_moves(from, piece.kind, &ROOK_DIRS, out),
                PieceKind::Queen => {
                    self.slide_moves(from, piece.kind, &BISHOP_DIRS, out);
                    self.slide_moves(from, piece.kind, &ROOK_DIRS, out);
                }
            }
        }
    }

    fn quiet_or_capture(&self, from: Square, to: Square, piece: PieceKind) -> Option<Move> {
        match self.piece_at(to) {
            Some(p) if p.color == self.side_to_move => None,
            target => Some(Move {
                from,
                to,
                piece,
                captured: target.map(|p| p.kind),
                promotion: None,
                kind: MoveKind::Normal,
                check: false,
            }),
        }
    }

    fn step_moves(&self, from: Square, piece: PieceKind, offsets: &[(i8, i8)], out: &mut Vec<Move>) {
        for &(df, dr) in offsets {
            if let Some(to) = from.offset(df, dr) {
                out.extend(self.quiet_or_capture(from, to, piece));
            }
        }
    }

    fn slide_moves(&self, from: Square, piece: PieceKind, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
        for &(df, dr) in dirs {
            let mut cur = from.offset(df, dr);
            while let Some(to) = cur {
                out.extend(self.quiet_or_capture(from, to, piece));
                if self.piece_at(to).is_some() {
                    break;
                }
                cur = to.offset(df, dr);
            }
        }
    }

    fn pawn_moves(&self, from: Square, out: &mut Vec<Move>) {
        let us = self.side_to_move;
        let fwd = us.forward();
        let last_rank = if us == Color::White { 7 } else { 0 };
        let start_rank = if us == Color::White { 1 } else { 6 };

        let mut push = |to: Square, captured: Option<PieceKind>, kind: MoveKind| {
            let base = Move {
                from,
                to,
                piece: PieceKind::Pawn,
                captured,
                promotion: None,
                kind,
                check: false,
            };
            if to.rank() == last_rank {
                for p in PROMOTIONS {
                    out.push(Move {
                        promotion: Some(p),
                        ..base
                    });
                }
            } else {
                out.push(base);
            }
        };

        if let Some(one) = from.offset(0, fwd) {
            if self.piece_at(one).is_none() {
                push(one, None, MoveKind::Normal);
                if from.rank() == start_rank {
                    let two = one.offset(0, fwd).expect("double push stays on board");
                    if self.piece_at(two).is_none() {
                        push(two, None, MoveKind::DoublePush);
                    }
                }
            }
        }
        for df in [-1, 1] {
            let Some(to) = from.offset(df, fwd) else {
                continue;
            };
            match self.piece_at(to) {
                Some(p) if p.color != us => push(to, Some(p.kind), MoveKind::Normal),
                None if self.en_passant == Some(to) => {
                    push(to, Some(PieceKind::Pawn), MoveKind::EnPassant)
                }
                _ => {}
            }
        }
    }

    fn castle_moves(&self, from: Square, out: &mut Vec<Move>) {
        let us = self.side_to_move;
        let home = if us == Color::White { 0 } else { 7 };
        if from != Square::new(4, home).unwrap() {
            return;
        }
        let them = us.opponent();
        let sq = |file| Square::new(file, home).unwrap();
        let empty = |files: &[u8]| files.iter().all(|&f| self.piece_at(sq(f)).is_none());
        let safe = |files: &[u8]| files.iter().all(|&f| !self.is_attacked(sq(f), them));
        let rook = Some(Piece::new(us, PieceKind::Rook));

        if self.castling.has(us, true) && self.piece_at(sq(7)) == rook && empty(&[5, 6]) && safe(&[4, 5, 6])
        {
            out.push(Move {
                from,
                to: sq(6),
                piece: PieceKind::King,
                captured: None,
                promotion: None,
                kind: MoveKind::CastleKingside,
                check: false,
            });
        }
        if self.castling.has(us, false)
            && self.piece_at(sq(0)) == rook
            && empty(&[1, 2, 3])
            && safe(&[4, 3, 2])
        {
            out.push(Move {
                from,
                to: sq(2),
                piece: PieceKind::King,
                captured: None,
                promotion: None,
                kind: MoveKind::CastleQueenside,
                check: false,
            });
        }
    }
}

fn castle_rook_squares(kind: MoveKind, rank: u8) -> (Square, Square) {
    match kind {
        MoveKind::CastleKingside => (Square::new(7, rank).unwrap(), Square::new(5, rank).unwrap()),
        _ => (Square::new(0, rank).unwrap(), Square::new(3, rank).unwrap()),
    }
}

/// Number of leaf nodes of the legal move tree at `depth`.
pub fn perft(board: &Board, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = board.legal_moves();
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|m| perft(&board.play_unchecked(m).0, depth - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(s: &str) -> Square {
        Square::parse(s).unwrap()
    }

    fn find(b: &Board, uci: &str) -> Move {
        b.legal_moves()
            .into_iter()
            .find(|m| m.uci() == uci)
            .unwrap_or_else(|| panic!("{uci} not legal in {b:?}"))
    }

    #[test]
    fn start_position_has_twenty_moves() {
        let moves = Board::start().legal_moves();
        assert_eq!(moves.len(), 20);
        let mut sorted = moves.clone();
        sorted.sort_by_key(Move::sort_key);
        assert_eq!(moves, sorted);
    }

    #[test]
    fn shallow_perft_from_start() {
        let b = Board::start();
        assert_eq!(perft(&b, 0), 1);
        assert_eq!(perft(&b, 1), 20);
        assert_eq!(perft(&b, 2), 400);
        assert_eq!(perft(&b, 3), 8902);
    }

    #[test]
    fn stalemate_has_no_moves() {
        let b = Board::from_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(b.legal_moves().is_empty());
        assert!(!b.in_check(Color::Black));
    }

    #[test]
    fn double_push_sets_en_passant_square() {
        let b = Board::start();
        let after = b.apply_move(&find(&b, "e2e4")).unwrap();
        assert_eq!(after.piece_at(sq("e2")), None);
        assert_eq!(after.piece_at(sq("e4")), Some(Piece::new(Color::White, PieceKind::Pawn)));
        assert_eq!(after.en_passant(), Some(sq("e3")));
        assert_eq!(after.side_to_move(), Color::Black);
        assert_eq!(b, Board::start(), "input board untouched");
    }

    #[test]
    fn castling_moves_rook_and_clears_rights() {
        let b = Board::from_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        let castle = find(&b, "e1g1");
        assert_eq!(castle.kind, MoveKind::CastleKingside);
        let after = b.apply_move(&castle).unwrap();
        assert_eq!(after.piece_at(sq("g1")), Some(Piece::new(Color::White, PieceKind::King)));
        assert_eq!(after.piece_at(sq("f1")), Some(Piece::new(Color::White, PieceKind::Rook)));
        assert_eq!(after.piece_at(sq("h1")), None);
        assert!(!after.castling_rights().has(Color::White, true));
        assert!(!after.castling_rights().has(Color::White, false));
        assert!(after.castling_rights().has(Color::Black, true));
    }

    #[test]
    fn cannot_castle_through_attack() {
        let b = Board::from_fen("4kr2/8/8/8/8/8/8/R3K2R w KQ - 0 1").unwrap();
        assert!(b.legal_moves().iter().all(|m| m.kind != MoveKind::CastleKingside));
        assert!(b.legal_moves().iter().any(|m| m.kind == MoveKind::CastleQueenside));
    }

    #[test]
    fn en_passant_removes_bypassed_pawn() {
        let b = Board::from_fen("4k3/8/8/3pP3/8/8/8/4K3 w - d6 0 2").unwrap();
        let ep = find(&b, "e5d6");
        assert!(ep.is_en_passant());
        assert_eq!(ep.captured, Some(PieceKind::Pawn));
        let after = b.apply_move(&ep).unwrap();
        assert_eq!(after.piece_at(sq("d5")), None);
        assert_eq!(after.piece_at(sq("d6")), Some(Piece::new(Color::White, PieceKind::Pawn)));
        assert_eq!(after.halfmove_clock(), 0);
    }

    #[test]
    fn promotions_expand_to_four_pieces() {
        let b = Board::from_fen("8/4P3/8/8/8/8/k7/4K3 w - - 0 1").unwrap();
        let promos: Vec<_> = b
            .legal_moves()
            .into_iter()
            .filter(|m| m.from == sq("e7"))
            .map(|m| m.promotion.unwrap())
            .collect();
        assert_eq!(promos.len(), 4);
    }

    #[test]
    fn illegal_move_is_rejected() {
        let b = Board::start();
        let mut m = find(&b, "e2e4");
        m.to = sq("e5");
        assert!(matches!(b.apply_move(&m), Err(ChessError::IllegalMove { .. })));
    }

    #[test]
    fn undo_restores_castle_and_ep() {
        let b = Board::from_fen("r3k2r/8/8/3pP3/8/8/8/R3K2R w KQkq d6 0 7").unwrap();
        for m in b.legal_moves() {
            let (after, rec) = b.apply_with_undo(&m).unwrap();
            assert_eq!(after.undo_move(&m, &rec), b, "undo of {}", m.uci());
        }
    }

    #[test]
    fn check_flag_is_set() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/R3K3 w - - 0 1").unwrap();
        assert!(find(&b, "a1a8").check);
        assert!(!find(&b, "a1a2").check);
    }
}

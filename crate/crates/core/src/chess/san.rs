use super::board::Board;
use super::movegen::{Move, MoveKind};
use super::types::{PieceKind, Square};
use super::ChessError;

fn san_error(board: &Board, token: &str, reason: &str) -> ChessError {
    ChessError::San {
        fen: board.to_fen(),
        token: token.to_string(),
        reason: reason.to_string(),
    }
}

impl Board {
    /// Resolves a SAN token (check, mate and annotation suffixes allowed) to a legal move.
    pub fn parse_san(&self, san: &str) -> Result<Move, ChessError> {
        let core = san.trim_end_matches(['+', '#', '!', '?']);
        let legal = self.legal_moves();

        if matches!(core, "O-O" | "0-0" | "O-O-O" | "0-0-0") {
            let kind = if core.len() == 3 {
                MoveKind::CastleKingside
            } else {
                MoveKind::CastleQueenside
            };
            return legal
                .into_iter()
                .find(|m| m.kind == kind)
                .ok_or_else(|| san_error(self, san, "castling not legal"));
        }

        let mut chars: Vec<char> = core.chars().collect();
        let piece = match chars.first().copied().and_then(PieceKind::from_san_letter) {
            Some(p) => {
                chars.remove(0);
                p
            }
            None => PieceKind::Pawn,
        };

        let mut promotion = None;
        if let Some(&last) = chars.last() {
            if let Some(p) = PieceKind::from_san_letter(last) {
                if p == PieceKind::King {
                    return Err(san_error(self, san, "cannot promote to king"));
                }
                promotion = Some(p);
                chars.pop();
                if chars.last() == Some(&'=') {
                    chars.pop();
                }
            }
        }

        if chars.len() < 2 {
            return Err(san_error(self, san, "missing destination square"));
        }
        let dest: String = chars[chars.len() - 2..].iter().collect();
        let to = Square::parse(&dest).ok_or_else(|| san_error(self, san, "bad destination square"))?;

        let mut from_file = None;
        let mut from_rank = None;
        for &c in &chars[..chars.len() - 2] {
            match c {
                'a'..='h' => from_file = Some(c as u8 - b'a'),
                '1'..='8' => from_rank = Some(c as u8 - b'1'),
                'x' | ':' | '-' => {}
                _ => return Err(san_error(self, san, "unexpected character")),
            }
        }

        let mut found = legal.into_iter().filter(|m| {
            m.piece == piece
                && m.to == to
                && m.promotion == promotion
                && from_file.is_none_or(|f| m.from.file() == f)
                && from_rank.is_none_or(|r| m.from.rank() == r)
        });
        match (found.next(), found.next()) {
            (Some(m), None) => Ok(m),
            (None, _) => Err(san_error(self, san, "no legal move matches")),
            (Some(_), Some(_)) => Err(san_error(self, san, "ambiguous")),
        }
    }

    /// Standard algebraic text for a legal move in this position, with check/mate suffix.
    pub fn to_san(&self, mv: &Move) -> String {
        self.san_among(mv, &self.legal_moves())
    }

    /// SAN for every move of `legal`, which must be this position's legal moves.
    pub fn san_list(&self, legal: &[Move]) -> Vec<String> {
        legal.iter().map(|m| self.san_among(m, legal)).collect()
    }

    fn san_among(&self, mv: &Move, legal: &[Move]) -> String {
        let mut s = match mv.kind {
            MoveKind::CastleKingside => "O-O".to_string(),
            MoveKind::CastleQueenside => "O-O-O".to_string(),
            _ => {
                let mut s = String::new();
                match mv.piece.san_letter() {
                    Some(letter) => {
                        s.push(letter);
                        let rivals: Vec<&Move> = legal
                            .iter()
                            .filter(|m| m.piece == mv.piece && m.to == mv.to && m.from != mv.from)
                            .collect();
                        if !rivals.is_empty() {
                            let file_unique = rivals.iter().all(|m| m.from.file() != mv.from.file());
                            let rank_unique = rivals.iter().all(|m| m.from.rank() != mv.from.rank());
                            if file_unique {
                                s.push(mv.from.file_char());
                            } else if rank_unique {
                                s.push(mv.from.rank_char());
                            } else {
                                s.push(mv.from.file_char());
                                s.push(mv.from.rank_char());
                            }
                        }
                    }
                    None if mv.is_capture() => s.push(mv.from.file_char()),
                    None => {}
                }
                if mv.is_capture() {
                    s.push('x');
                }
                s.push_str(&mv.to.to_string());
                if let Some(p) = mv.promotion {
                    s.push('=');
                    s.push(p.san_letter().expect("promotion piece has a letter"));
                }
                s
            }
        };
        if mv.check {
            let (after, _) = self.play_unchecked(mv);
            s.push(if after.legal_moves().is_empty() { '#' } else { '+' });
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::types::Color;

    fn play(sans: &[&str]) -> Board {
        let mut b = Board::start();
        for s in sans {
            let m = b.parse_san(s).unwrap();
            b = b.apply_move(&m).unwrap();
        }
        b
    }

    #[test]
    fn pawn_push_resolves() {
        let m = Board::start().parse_san("e4").unwrap();
        assert_eq!((m.from.to_string(), m.to.to_string()), ("e2".into(), "e4".into()));
        assert_eq!(m.piece, PieceKind::Pawn);
    }

    #[test]
    fn ruy_lopez_bishop() {
        let b = play(&["e4", "e5", "Nf3", "Nc6"]);
        let m = b.parse_san("Bb5").unwrap();
        assert_eq!((m.from.to_string(), m.to.to_string()), ("f1".into(), "b5".into()));
    }

    #[test]
    fn castle_token() {
        let b = Board::from_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        let m = b.parse_san("O-O").unwrap();
        assert_eq!(m.kind, MoveKind::CastleKingside);
        assert_eq!(m.to.to_string(), "g1");
        assert_eq!(b.parse_san("O-O-O+").unwrap().kind, MoveKind::CastleQueenside);
    }

    #[test]
    fn disambiguation_by_file_and_rank() {
        let b = Board::from_fen("4k3/8/8/8/8/8/4K3/R6R w - - 0 1").unwrap();
        assert!(matches!(b.parse_san("Rf1"), Err(ChessError::San { .. })));
        assert_eq!(b.parse_san("Raf1").unwrap().from.to_string(), "a1");
        assert_eq!(b.parse_san("Rhf1").unwrap().from.to_string(), "h1");

        let b = Board::from_fen("4k3/8/8/R7/8/8/8/R3K3 w - - 0 1").unwrap();
        assert_eq!(b.parse_san("R1a3").unwrap().from.to_string(), "a1");
        let m = b.parse_san("R5a3").unwrap();
        assert_eq!(b.to_san(&m), "R5a3");
    }

    #[test]
    fn illegal_token_names_board_and_token() {
        let err = Board::start().parse_san("Ke2").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("Ke2"));
        assert!(text.contains("rnbqkbnr"));
        assert!(Board::start().parse_san("Zz9").is_err());
        assert!(Board::start().parse_san("").is_err());
    }

    #[test]
    fn to_san_round_trips_through_parse() {
        let b = play(&["e4", "d5", "exd5", "Qxd5", "Nc3", "Qa5", "d4", "Nf6"]);
        for m in b.legal_moves() {
            let text = b.to_san(&m);
            assert_eq!(b.parse_san(&text).unwrap(), m, "{text}");
        }
    }

    #[test]
    fn mate_suffix() {
        let b = play(&["f3", "e5", "g4"]);
        let m = b.parse_san("Qh4").unwrap();
        assert_eq!(b.to_san(&m), "Qh4#");
        let after = b.apply_move(&m).unwrap();
        assert!(after.in_check(Color::White));
        assert!(after.legal_moves().is_empty());
    }

    #[test]
    fn promotion_forms() {
        let b = Board::from_fen("1n2k3/P7/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        assert_eq!(b.parse_san("a8=Q").unwrap().promotion, Some(PieceKind::Queen));
        assert_eq!(b.parse_san("axb8N").unwrap().promotion, Some(PieceKind::Knight));
        assert!(b.parse_san("a8").is_err());
    }
}

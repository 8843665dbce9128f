//! Geometric facts about a position that the strategy b-threads read.

use super::board::{Board, BISHOP_DIRS, ROOK_DIRS};
use super::types::{squares_of, Color, PieceKind, Square};

/// c4, c5, d4, d5, e4, e5, f4, f5.
pub const CENTER: u64 = (0x3c << 24) | (0x3c << 32);

/// Squares in the opponent's half (ranks 5-8 for White, 1-4 for Black).
pub fn enemy_half(color: Color) -> u64 {
    match color {
        Color::White => 0xffff_ffff_0000_0000,
        Color::Black => 0x0000_0000_ffff_ffff,
    }
}

/// The f-pawn square next to the opposing king's home that only the king guards.
pub fn weak_square_target(color: Color) -> Square {
    match color {
        Color::White => Square::new(5, 6).unwrap(),
        Color::Black => Square::new(5, 1).unwrap(),
    }
}

/// Whether `sq` is a game-start square of a `kind` belonging to `color`.
pub fn is_home_square(color: Color, kind: PieceKind, sq: Square) -> bool {
    let home_rank = match color {
        Color::White => 0,
        Color::Black => 7,
    };
    if sq.rank() != home_rank {
        return false;
    }
    let files: &[u8] = match kind {
        PieceKind::Knight => &[1, 6],
        PieceKind::Bishop => &[2, 5],
        PieceKind::Rook => &[0, 7],
        PieceKind::Queen => &[3],
        PieceKind::King => &[4],
        PieceKind::Pawn => &[],
    };
    files.contains(&sq.file())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pin {
    pub by: Color,
    pub pinner: Square,
    pub pinned: Square,
    /// King (absolute pin) or queen (relative pin) behind the pinned unit.
    pub target: Square,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SideFacts {
    /// Every square some unit of this side reaches, friendly-occupied included.
    pub attacks: u64,
    /// Enemy non-pawn units currently attacked.
    pub threatened: u64,
    pub material: u32,
    pub developed: u32,
    pub defended: u32,
    pub center_coverage: u32,
    pub space: u32,
    pub weak_square_attackers: u32,
    pub doubled_pawns: u32,
    pub isolated_pawns: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionFacts {
    pub sides: [SideFacts; 2],
    pub pins: Vec<Pin>,
}

impl PositionFacts {
    pub fn side(&self, color: Color) -> &SideFacts {
        &self.sides[color.index()]
    }

    pub fn pins_by(&self, color: Color) -> impl Iterator<Item = &Pin> {
        self.pins.iter().filter(move |p| p.by == color)
    }
}

pub fn position_facts(board: &Board) -> PositionFacts {
    let mut sides = [SideFacts::default(); 2];
    let mut occupied = [0u64; 2];
    let mut non_pawn = [0u64; 2];
    let mut pawn_files = [[0u32; 8]; 2];
    let weak = [weak_square_target(Color::White), weak_square_target(Color::Black)];

    for (sq, p) in board.pieces() {
        let c = p.color.index();
        let reach = board.attacks_from(sq);
        let side = &mut sides[c];
        side.attacks |= reach;
        side.material += p.kind.points();
        occupied[c] |= sq.bit();
        if reach & weak[c].bit() != 0 {
            side.weak_square_attackers += 1;
        }
        match p.kind {
            PieceKind::Pawn => pawn_files[c][sq.file() as usize] += 1,
            PieceKind::King => {}
            kind => {
                non_pawn[c] |= sq.bit();
                if !is_home_square(p.color, kind, sq) {
                    side.developed += 1;
                }
            }
        }
    }

    for color in Color::BOTH {
        let c = color.index();
        let o = color.opponent().index();
        let side = &mut sides[c];
        side.defended = (non_pawn[c] & side.attacks).count_ones();
        side.threatened = side.attacks & (non_pawn[o] | king_mask(board, color.opponent()));
        side.center_coverage = ((side.attacks | occupied[c]) & CENTER).count_ones();
        side.space = (side.attacks & enemy_half(color)).count_ones();

        let files = &pawn_files[c];
        for f in 0..8 {
            let n = files[f];
            if n > 1 {
                side.doubled_pawns += n - 1;
            }
            let left = f.checked_sub(1).map_or(0, |g| files[g]);
            let right = files.get(f + 1).copied().unwrap_or(0);
            if n > 0 && left == 0 && right == 0 {
                side.isolated_pawns += n;
            }
        }
    }

    PositionFacts {
        sides,
        pins: find_pins(board),
    }
}

fn king_mask(board: &Board, color: Color) -> u64 {
    board.king_square(color).bit()
}

fn find_pins(board: &Board) -> Vec<Pin> {
    let mut pins = Vec::new();
    for (from, p) in board.pieces() {
        let dirs: &[(i8, i8)] = match p.kind {
            PieceKind::Bishop => &BISHOP_DIRS,
            PieceKind::Rook => &ROOK_DIRS,
            PieceKind::Queen => &[
                (1, 0),
                (0, 1),
                (-1, 0),
                (0, -1),
                (1, 1),
                (-1, 1),
                (-1, -1),
                (1, -1),
            ],
            _ => continue,
        };
        for &(df, dr) in dirs {
            let mut blockers = Vec::with_capacity(2);
            let mut cur = from.offset(df, dr);
            while let Some(sq) = cur {
                if let Some(q) = board.piece_at(sq) {
                    blockers.push((sq, q));
                    if blockers.len() == 2 {
                        break;
                    }
                }
                cur = sq.offset(df, dr);
            }
            let [(pinned_sq, pinned), (target_sq, target)] = blockers[..] else {
                continue;
            };
            let enemy = p.color.opponent();
            if pinned.color != enemy || target.color != enemy || pinned.kind == PieceKind::King {
                continue;
            }
            let valuable = match target.kind {
                PieceKind::King => true,
                PieceKind::Queen => pinned.kind != PieceKind::Queen,
                _ => false,
            };
            if valuable {
                pins.push(Pin {
                    by: p.color,
                    pinner: from,
                    pinned: pinned_sq,
                    target: target_sq,
                });
            }
        }
    }
    pins
}

/// Squares of the given mask as algebraic names, for diagnostics.
pub fn mask_names(mask: u64) -> Vec<String> {
    squares_of(mask).map(|s| s.to_string()).collect()
}

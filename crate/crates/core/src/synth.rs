//! Seeded synthetic rapid games in Lichess-style PGN.
//!
//! Moves come from a softmax over a small hand-written evaluation (material,
//! hanging pieces, development, center, castling); higher-rated players pick
//! the best-scored move more often. Useful for fixtures and offline grid runs,
//! not as a stand-in for human play.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chess::{position_facts, Board, Color, Move, PieceKind, PositionFacts};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub buckets: Vec<u32>,
    pub games_per_bucket: usize,
    pub seed: u64,
    /// Mix in games that the default filters reject (blitz, other ratings,
    /// unfinished, abandoned).
    pub with_rejects: bool,
    pub min_plies: usize,
    pub max_plies: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            buckets: vec![1200],
            games_per_bucket: 50,
            seed: 2024,
            with_rejects: false,
            min_plies: 24,
            max_plies: 70,
        }
    }
}

/// What a generated game is meant to exercise in the filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    Valid,
    Blitz,
    OtherRating,
    Unfinished,
    Abandoned,
}

impl GameKind {
    fn for_index(i: usize, with_rejects: bool) -> GameKind {
        if !with_rejects {
            GameKind::Valid
        } else if i % 10 == 3 {
            GameKind::Blitz
        } else if i % 10 == 7 {
            GameKind::OtherRating
        } else if i % 25 == 11 {
            GameKind::Unfinished
        } else if i % 25 == 19 {
            GameKind::Abandoned
        } else {
            GameKind::Valid
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthGame {
    pub kind: GameKind,
    pub headers: Vec<(&'static str, String)>,
    pub san: Vec<String>,
    pub result: &'static str,
}

fn hanging_value(board: &Board, facts: &PositionFacts, me: Color) -> f64 {
    let mine = facts.side(me);
    let theirs = facts.side(me.opponent());
    board
        .pieces()
        .filter(|(sq, p)| {
            p.color == me
                && p.kind != PieceKind::King
                && theirs.attacks & sq.bit() != 0
                && (mine.attacks & sq.bit() == 0 || p.kind.points() > 3)
        })
        .map(|(_, p)| p.kind.points() as f64)
        .sum()
}

fn move_score(board: &Board, before: &PositionFacts, mv: &Move) -> f64 {
    let me = board.side_to_move();
    let after_board = board.play_unchecked(mv).0;
    let after = position_facts(&after_board);
    let (b, a) = (before.side(me), after.side(me));
    let d = |x: u32, y: u32| y as f64 - x as f64;
    let mut s = 0.0;
    s += mv.captured.map_or(0.0, |k| k.points() as f64);
    s -= 0.9 * hanging_value(&after_board, &after, me);
    s += 0.5 * d(b.developed, a.developed);
    s += 0.25 * d(b.center_coverage, a.center_coverage);
    s += 0.1 * d(b.space, a.space);
    s += 0.05 * d(b.defended, a.defended);
    if mv.is_castle() {
        s += 1.5;
    } else if mv.piece == PieceKind::King {
        s -= 0.6;
    }
    if mv.piece == PieceKind::Queen && board.fullmove_number() <= 6 {
        s -= 0.8;
    }
    if mv.check {
        s += 0.3;
    }
    if let Some(p) = mv.promotion {
        s += p.points() as f64;
    }
    s
}

/// Softmax temperature: stronger players are greedier.
fn temperature(elo: u32) -> f64 {
    (1.0 - 0.15 * (elo as f64 - 1200.0) / 100.0).clamp(0.25, 1.4)
}

fn pick(board: &Board, legal: &[Move], elo: u32, rng: &mut ChaCha8Rng) -> Move {
    let t = temperature(elo);
    let before = position_facts(board);
    let scores: Vec<f64> = legal.iter().map(|m| move_score(board, &before, m) / t).collect();
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (m, w) in legal.iter().zip(&weights) {
        if u < *w {
            return *m;
        }
        u -= w;
    }
    *legal.last().expect("non-empty")
}

/// Plays one game; returns SAN moves and the result token.
pub fn play_game(white_elo: u32, black_elo: u32, plies: usize, rng: &mut ChaCha8Rng) -> (Vec<String>, &'static str) {
    let mut board = Board::start();
    let mut san = Vec::new();
    for _ in 0..plies {
        let legal = board.legal_moves();
        if legal.is_empty() {
            break;
        }
        let elo = if board.side_to_move() == Color::White { white_elo } else { black_elo };
        let mv = pick(&board, &legal, elo, rng);
        san.push(board.san_list(&legal)[legal.iter().position(|m| *m == mv).expect("picked from list")].clone());
        board = board.play_unchecked(&mv).0;
    }
    let result = if board.legal_moves().is_empty() {
        match (board.in_check(board.side_to_move()), board.side_to_move()) {
            (true, Color::White) => "0-1",
            (true, Color::Black) => "1-0",
            (false, _) => "1/2-1/2",
        }
    } else {
        let f = position_facts(&board);
        let diff = f.side(Color::White).material as i64 - f.side(Color::Black).material as i64;
        match diff {
            d if d >= 3 => "1-0",
            d if d <= -3 => "0-1",
            _ => "1/2-1/2",
        }
    };
    (san, result)
}

pub fn synth_games(cfg: &SynthConfig) -> Vec<SynthGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for &bucket in &cfg.buckets {
        for i in 0..cfg.games_per_bucket {
            let kind = GameKind::for_index(i, cfg.with_rejects);
            let mut elo = || bucket + rng.gen_range(0..100);
            let (mut we, mut be) = (elo(), elo());
            if kind == GameKind::OtherRating {
                we += 150;
                be += 200;
            }
            let plies = rng.gen_range(cfg.min_plies..=cfg.max_plies);
            let (san, mut result) = play_game(we, be, plies, &mut rng);
            let tc = match kind {
                GameKind::Blitz => "300+3",
                _ if i % 2 == 0 => "600+0",
                _ => "900+10",
            };
            let termination = match kind {
                GameKind::Abandoned => "Abandoned",
                GameKind::Unfinished => "Unterminated",
                _ => "Normal",
            };
            if kind == GameKind::Unfinished {
                result = "*";
            }
            let n = out.len() + 1;
            out.push(SynthGame {
                kind,
                headers: vec![
                    ("Event", "Rated Rapid game".into()),
                    ("Site", format!("https://synthetic.invalid/{n:06}")),
                    ("Date", "2024.01.01".into()),
                    ("Round", "-".into()),
                    ("White", format!("synth_w{n}")),
                    ("Black", format!("synth_b{n}")),
                    ("Result", result.into()),
                    ("WhiteElo", we.to_string()),
                    ("BlackElo", be.to_string()),
                    ("TimeControl", tc.into()),
                    ("Termination", termination.into()),
                ],
                san,
                result,
            });
        }
    }
    out
}

/// One game as PGN text; every third game carries clock comments.
pub fn game_to_pgn(g: &SynthGame, with_clock: bool) -> String {
    let mut out = String::new();
    for (k, v) in &g.headers {
        writeln!(out, "[{k} \"{v}\"]").unwrap();
    }
    out.push('\n');
    let mut tokens = Vec::new();
    for (i, s) in g.san.iter().enumerate() {
        if i % 2 == 0 {
            tokens.push(format!("{}.", i / 2 + 1));
        } else if with_clock {
            tokens.push(format!("{}...", i / 2 + 1));
        }
        tokens.push(s.clone());
        if with_clock {
            let secs = 600usize.saturating_sub(7 * (i / 2 + 1));
            tokens.push(format!("{{ [%clk 0:{:02}:{:02}] }}", secs / 60, secs % 60));
        }
    }
    tokens.push(g.result.to_string());
    let mut line = String::new();
    for t in tokens {
        if !line.is_empty() && line.len() + 1 + t.len() > 79 {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(&t);
    }
    out.push_str(&line);
    out.push_str("\n\n");
    out
}

pub fn synth_pgn(cfg: &SynthConfig) -> String {
    synth_games(cfg)
        .iter()
        .enumerate()
        .map(|(i, g)| game_to_pgn(g, i % 3 == 2))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::parse_pgn;

    #[test]
    fn generated_pgn_parses_and_replays() {
        let cfg = SynthConfig {
            games_per_bucket: 12,
            with_rejects: true,
            ..SynthConfig::default()
        };
        let text = synth_pgn(&cfg);
        let parsed = parse_pgn(&text, "s");
        assert!(parsed.diagnostics.is_empty(), "{}", parsed.diagnostic_report());
        assert_eq!(parsed.games.len(), 12);
        let games = synth_games(&cfg);
        for (g, rec) in games.iter().zip(&parsed.games) {
            assert_eq!(g.san, rec.san_moves);
            assert!(rec.replay().is_ok());
        }
        assert_eq!(synth_pgn(&cfg), text);
    }

    #[test]
    fn reject_mix_pattern() {
        let kinds: Vec<GameKind> = (0..50).map(|i| GameKind::for_index(i, true)).collect();
        let valid = kinds.iter().filter(|k| **k == GameKind::Valid).count();
        assert_eq!(valid, 36);
    }
}

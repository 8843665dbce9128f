#![allow(dead_code)]

pub mod naive;

use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture present")
}

use bpchess::chess::parse_pgn;
use bpchess::strategy::ChessProgram;
use naive::{registers, NBoard, NMove};

/// Register disagreements between the engine and the oracle for one program state.
pub fn mismatches(program: &ChessProgram, history: &[NMove], advanced: bool) -> Vec<String> {
    let snap = program.snapshot();
    registers(&NBoard::start(), history, advanced)
        .into_iter()
        .filter_map(|(name, want)| {
            let got = snap.get(&name);
            (got != Some(want)).then(|| format!("{name}: engine {got:?}, oracle {want}"))
        })
        .collect()
}

/// Compares every register before each ply and after every candidate move,
/// over the opening (plus a few plies) of each fixture game.
/// Returns the number of states checked and the mismatches found.
pub fn fixture_register_check() -> (usize, Vec<String>) {
    let parsed = parse_pgn(&fixture_text("fixture50.pgn"), "fixture50.pgn");
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for (g, game) in parsed.games.iter().enumerate() {
        let plies = bpchess::dataset::opening_length(&game.san_moves) + 4;
        let mut program = ChessProgram::start(true);
        let mut naive = NBoard::start();
        let mut history = Vec::new();
        for (ply, token) in game.san_moves.iter().take(plies).enumerate() {
            for e in mismatches(&program, &history, true) {
                bad.push(format!("game {g} ply {ply} before: {e}"));
            }
            checked += 1;
            for mv in program.board().legal_moves() {
                let mut child = program.fork();
                child.play(&mv, program.board().to_san(&mv)).unwrap();
                let mut h = history.clone();
                h.push(naive.find_uci(&mv.uci()).expect("oracle knows the move"));
                for e in mismatches(&child, &h, true) {
                    bad.push(format!("game {g} ply {ply} {}: {e}", mv.uci()));
                }
                checked += 1;
            }
            let n = naive.find_san(token).expect("oracle reads the token");
            program.play_san(token).unwrap();
            naive = naive.make(&n);
            history.push(n);
        }
    }
    (checked, bad)
}

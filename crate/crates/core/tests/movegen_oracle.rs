mod common;

use bpchess::chess::{perft, Board};
use common::naive::NBoard;

const POSITIONS: [&str; 3] = [
    // Italian game, both sides still able to castle
    "r1bqk1nr/pppp1ppp/2n5/2b1p3/2B1P3/5N2/PPPP1PPP/RNBQK2R w KQkq - 4 4",
    // castling through and out of check, promotions, en passant
    "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
    "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
];

#[test]
fn start_position_perft_matches_oracle() {
    let board = Board::start();
    let naive = NBoard::start();
    for (depth, expected) in [(1, 20), (2, 400), (3, 8902), (4, 197281)] {
        let oracle = naive.perft(depth);
        assert_eq!(oracle, expected, "oracle perft({depth})");
        assert_eq!(perft(&board, depth), oracle, "perft({depth})");
    }
}

#[test]
fn fixed_positions_match_oracle() {
    for fen in POSITIONS {
        let board = Board::from_fen(fen).unwrap();
        let naive = NBoard::from_fen(fen);
        for depth in 1..=3 {
            assert_eq!(perft(&board, depth), naive.perft(depth), "{fen} depth {depth}");
        }
    }
    // published values for the second and third positions
    assert_eq!(perft(&Board::from_fen(POSITIONS[1]).unwrap(), 3), 97862);
    assert_eq!(perft(&Board::from_fen(POSITIONS[2]).unwrap(), 3), 9467);
}

#[test]
fn divide_agrees_move_by_move() {
    let fen = POSITIONS[1];
    let board = Board::from_fen(fen).unwrap();
    let naive = NBoard::from_fen(fen);
    let mut ours: Vec<(String, u64)> = board
        .legal_moves()
        .iter()
        .map(|m| (m.uci(), perft(&board.apply_move(m).unwrap(), 2)))
        .collect();
    let mut theirs: Vec<(String, u64)> = naive
        .legal()
        .iter()
        .map(|m| (NBoard::uci(m), naive.make(m).perft(2)))
        .collect();
    ours.sort();
    theirs.sort();
    assert_eq!(ours, theirs);
}

#[test]
fn stalemate_has_no_moves() {
    let fen = "7k/5Q2/6K1/8/8/8/8/8 b - - 0 1";
    let board = Board::from_fen(fen).unwrap();
    assert!(board.legal_moves().is_empty());
    assert!(!board.in_check(bpchess::chess::Color::Black));
    assert!(NBoard::from_fen(fen).legal().is_empty());
}

#[test]
fn san_matches_oracle_on_fixture() {
    let parsed = bpchess::chess::parse_pgn(&common::fixture_text("fixture50.pgn"), "fixture50.pgn");
    assert_eq!(parsed.games.len(), 50);
    for game in &parsed.games {
        let mut board = Board::start();
        let mut naive = NBoard::start();
        for token in &game.san_moves {
            let mv = board.parse_san(token).unwrap();
            let n = naive.find_san(token).unwrap_or_else(|| panic!("oracle cannot read {token}"));
            assert_eq!(mv.uci(), NBoard::uci(&n), "{token}");
            assert_eq!(board.to_san(&mv).trim_end_matches(['+', '#']), naive.san(&n));
            board = board.apply_move(&mv).unwrap();
            naive = naive.make(&n);
            assert_eq!(board.to_fen().split(' ').next().unwrap(), naive.placement());
            assert_eq!(board.legal_moves().len(), naive.legal().len());
        }
        board.validate().unwrap();
    }
}

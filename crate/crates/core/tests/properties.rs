mod common;

use bpchess::chess::{position_facts, Board, Move, PositionFacts, Square};
use bpchess::strategy::{ChessProgram, FeatureSchema};
use common::naive::NBoard;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random legal playout from the start position, choosing with `picks`.
fn playout(picks: &[u16]) -> Vec<(Board, Move)> {
    let mut board = Board::start();
    let mut out = Vec::new();
    for &p in picks {
        let moves = board.legal_moves();
        if moves.is_empty() {
            break;
        }
        let mv = moves[p as usize % moves.len()];
        let next = board.apply_move(&mv).unwrap();
        out.push((board, mv));
        board = next;
    }
    out
}

fn flip(sq: Square) -> Square {
    sq.flip_rank()
}

fn mirrored_facts(f: &PositionFacts) -> PositionFacts {
    let mut pins: Vec<_> = f
        .pins
        .iter()
        .map(|p| bpchess::chess::Pin {
            by: p.by.opponent(),
            pinner: flip(p.pinner),
            pinned: flip(p.pinned),
            target: flip(p.target),
        })
        .collect();
    pins.sort_by_key(|p| (p.pinner.index(), p.pinned.index()));
    PositionFacts { sides: [f.sides[1], f.sides[0]], pins }
}

fn sorted(mut f: PositionFacts) -> PositionFacts {
    f.pins.sort_by_key(|p| (p.pinner.index(), p.pinned.index()));
    for s in &mut f.sides {
        s.attacks = 0;
        s.threatened = 0;
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn facts_swap_under_mirroring(picks in prop::collection::vec(any::<u16>(), 0..60)) {
        for (board, _) in playout(&picks) {
            let a = position_facts(&board);
            let b = position_facts(&board.mirrored());
            prop_assert_eq!(sorted(mirrored_facts(&a)), sorted(b.clone()));
            let flip_mask = |m: u64| m.swap_bytes();
            prop_assert_eq!(flip_mask(a.sides[0].attacks), b.sides[1].attacks);
            prop_assert_eq!(flip_mask(a.sides[1].threatened), b.sides[0].threatened);
        }
    }

    #[test]
    fn pins_are_sound(picks in prop::collection::vec(any::<u16>(), 0..80)) {
        for (board, _) in playout(&picks) {
            for pin in position_facts(&board).pins {
                let mut naive = NBoard::from_fen(&board.to_fen());
                let target = (pin.target.file() as i32, pin.target.rank() as i32);
                let pinner = (pin.pinner.file() as i32, pin.pinner.rank() as i32);
                prop_assert!(!naive.reach(pinner).contains(&target));
                naive.sq[pin.pinned.file() as usize][pin.pinned.rank() as usize] = None;
                prop_assert!(naive.reach(pinner).contains(&target), "{:?} in {}", pin, board.to_fen());
            }
        }
    }

    #[test]
    fn schema_registers_stay_in_range(picks in prop::collection::vec(any::<u16>(), 0..40)) {
        let schema = FeatureSchema::advanced();
        let mut program = ChessProgram::start(true);
        let mut prev = schema.encode(&program.snapshot()).unwrap();
        for (board, mv) in playout(&picks) {
            program.play(&mv, board.to_san(&mv)).unwrap();
            let v = schema.encode(&program.snapshot()).unwrap();
            for ((x, r), n) in v.iter().zip(schema.ranges()).zip(schema.names()) {
                prop_assert!(r.contains(*x), "{} = {} outside {}", n, x, r);
            }
            prop_assert_eq!(v[36], prev[36] + 1.0);
            prev = v;
        }
    }
}

#[test]
fn apply_then_undo_restores_the_board() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 10_000 {
        let mut board = Board::start();
        for _ in 0..rng.gen_range(1..120) {
            let moves = board.legal_moves();
            if moves.is_empty() {
                break;
            }
            let mv = moves[rng.gen_range(0..moves.len())];
            let (next, undo) = board.apply_with_undo(&mv).unwrap();
            assert_eq!(next.undo_move(&mv, &undo), board, "{mv:?}");
            checked += 1;
            board = next;
        }
    }
}

/// Over 10^4 random openings: ranges hold, pure counters never fall, and
/// forking then playing equals playing.
#[test]
fn registers_over_ten_thousand_random_openings() {
    let schema = FeatureSchema::advanced();
    let counters: Vec<usize> = schema
        .names()
        .iter()
        .enumerate()
        .filter(|(_, n)| {
            ["_moves", "attacks_made", "pins_made", "captures_made"].iter().any(|s| n.ends_with(s))
        })
        .map(|(i, _)| i)
        .collect();
    assert_eq!(counters.len(), 2 * 9);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let mut program = ChessProgram::start(true);
        let mut last = [0.0f64; 2].map(|_| vec![0.0; schema.len()]);
        for ply in 0..20 {
            let moves = program.board().legal_moves();
            if moves.is_empty() {
                break;
            }
            let mv = moves[rng.gen_range(0..moves.len())];
            let mut child = program.fork();
            child.play(&mv, program.board().to_san(&mv)).unwrap();
            program.play(&mv, program.board().to_san(&mv)).unwrap();
            assert_eq!(child.snapshot(), program.snapshot());
            // same mover orientation every other ply
            let v = schema.encode(&program.snapshot()).unwrap();
            for ((x, r), n) in v.iter().zip(schema.ranges()).zip(schema.names()) {
                assert!(r.contains(*x), "{n} = {x} outside {r}");
            }
            for &i in &counters {
                assert!(v[i] >= last[ply % 2][i], "{} fell", schema.names()[i]);
            }
            last[ply % 2] = v;
        }
    }
}

use std::sync::Arc;

use crate::chess::{Board, Diagnostic, GameRecord};
use crate::strategy::{ChessProgram, FeatureSchema, StrategyConfig};

use super::DatasetRow;

fn encode32(schema: &FeatureSchema, program: &ChessProgram) -> Result<Vec<f32>, String> {
    schema
        .encode(&program.snapshot())
        .map(|v| v.into_iter().map(|x| x as f32).collect())
        .map_err(|e| e.to_string())
}

/// One row per legal move at every ply of `record`, label 1 for the move played.
///
/// Rows come in ply order and, within a ply, in canonical move order.
pub fn extract_rows(
    record: &GameRecord,
    schema: &FeatureSchema,
    config: StrategyConfig,
) -> Result<Vec<DatasetRow>, Diagnostic> {
    let fail = |reason: String| Diagnostic {
        source: record.source.clone(),
        reason,
    };
    let game_id: Arc<str> = Arc::from(record.source.as_str());
    let mut program = ChessProgram::new(Board::start(), schema.is_advanced(), config);
    let mut rows = Vec::new();

    for (ply, san) in record.san_moves.iter().enumerate() {
        let board = program.board().clone();
        let played = board
            .parse_san(san)
            .map_err(|_| fail(format!("illegal SAN token '{san}' at ply {}", ply + 1)))?;
        let before = encode32(schema, &program).map_err(fail)?;
        let legal = board.legal_moves();
        let sans = board.san_list(&legal);
        let mut next = None;
        for (mv, mv_san) in legal.iter().zip(sans) {
            let mut child = program.fork();
            child
                .play(mv, mv_san.clone())
                .map_err(|e| fail(format!("replay failed at ply {}: {e}", ply + 1)))?;
            let mut features = before.clone();
            features.extend(encode32(schema, &child).map_err(fail)?);
            let is_played = mv.id() == played.id();
            rows.push(DatasetRow {
                game_id: game_id.clone(),
                ply: ply as u32,
                mv: mv_san,
                features,
                label: if is_played { 1.0 } else { 0.0 },
                synthetic: false,
            });
            if is_played {
                next = Some(child);
            }
        }
        program = next.ok_or_else(|| fail(format!("move '{san}' at ply {} is not legal", ply + 1)))?;
    }
    Ok(rows)
}

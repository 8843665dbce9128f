//! Tolerant PGN reader.
//!
//! Tag pairs are kept verbatim. Movetext is reduced to the main-line SAN tokens:
//! comments, variations, NAGs, move numbers and `%` escape lines are dropped and
//! the result token ends the game. Every game is replayed from the initial
//! position; a game with an unplayable token is skipped and reported instead of
//! aborting the whole stream.

use std::collections::BTreeMap;
use std::fmt;

use super::board::Board;
use super::movegen::Move;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRecord {
    /// `<source>#<1-based index within the source>`.
    pub source: String,
    pub headers: BTreeMap<String, String>,
    pub san_moves: Vec<String>,
}

impl GameRecord {
    pub fn header(&self, key: &str) -> Option<&str> {
        self.headers.get(key).map(String::as_str)
    }

    pub fn elo(&self, key: &str) -> Option<u32> {
        self.header(key).and_then(|v| v.trim().parse().ok())
    }

    /// Replays the movetext from the initial position, returning each position
    /// before its move together with the resolved move.
    pub fn replay(&self) -> Result<Vec<(Board, Move)>, super::ChessError> {
        let mut board = Board::start();
        let mut out = Vec::with_capacity(self.san_moves.len());
        for san in &self.san_moves {
            let mv = board.parse_san(san)?;
            let next = board.play_unchecked(&mv).0;
            out.push((board, mv));
            board = next;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub source: String,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.source, self.reason)
    }
}

#[derive(Debug, Default, Clone)]
pub struct PgnParse {
    pub games: Vec<GameRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl PgnParse {
    /// One line per skipped game: source id, tab, reason.
    pub fn diagnostic_report(&self) -> String {
        self.diagnostics.iter().map(|d| format!("{d}\n")).collect()
    }
}

#[derive(Default)]
struct RawGame {
    headers: BTreeMap<String, String>,
    tokens: Vec<String>,
    problems: Vec<String>,
}

impl RawGame {
    fn is_blank(&self) -> bool {
        self.headers.is_empty() && self.tokens.is_empty() && self.problems.is_empty()
    }
}

const RESULTS: [&str; 4] = ["1-0", "0-1", "1/2-1/2", "*"];

/// Parses zero or more concatenated games. `source_name` prefixes every game id.
pub fn parse_pgn(text: &str, source_name: &str) -> PgnParse {
    let mut out = PgnParse::default();
    let mut index = 0usize;
    let mut finish = |raw: RawGame, out: &mut PgnParse| {
        if raw.is_blank() {
            return;
        }
        index += 1;
        let source = format!("{source_name}#{index}");
        match validate(raw) {
            Ok((headers, san_moves)) => out.games.push(GameRecord {
                source,
                headers,
                san_moves,
            }),
            Err(reason) => out.diagnostics.push(Diagnostic { source, reason }),
        }
    };

    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut game = RawGame::default();
    let mut at_line_start = true;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            at_line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() || c == '\u{feff}' {
            i += 1;
            continue;
        }
        let line_start = std::mem::replace(&mut at_line_start, false);
        match c {
            '%' if line_start => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' => {
                while i < chars.len() && chars[i] != '}' {
                    i += 1;
                }
                if i == chars.len() {
                    game.problems.push("unterminated comment".into());
                }
                i += 1;
            }
            '(' => {
                let mut depth = 0usize;
                while i < chars.len() {
                    match chars[i] {
                        '(' => depth += 1,
                        ')' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        '{' => {
                            while i < chars.len() && chars[i] != '}' {
                                i += 1;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                if i >= chars.len() {
                    game.problems.push("unterminated variation".into());
                }
                i += 1;
            }
            ')' => {
                game.problems.push("unbalanced ')'".into());
                i += 1;
            }
            '[' => {
                if !game.tokens.is_empty() {
                    // next game started without a result token
                    game.problems.push("missing result token".into());
                    finish(std::mem::take(&mut game), &mut out);
                }
                let (tag, next) = read_tag(&chars, i);
                i = next;
                match tag {
                    Some((k, v)) => {
                        game.headers.insert(k, v);
                    }
                    None => game.problems.push("malformed tag pair".into()),
                }
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"{}()[];".contains(chars[i]) {
                    i += 1;
                }
                let token: String = chars[start..i].iter().collect();
                if RESULTS.contains(&token.as_str()) {
                    game.headers
                        .entry("Result".to_string())
                        .or_insert_with(|| token.clone());
                    finish(std::mem::take(&mut game), &mut out);
                    continue;
                }
                if let Some(san) = movetext_token(&token) {
                    game.tokens.push(san);
                }
            }
        }
    }
    if !game.is_blank() {
        if !game.tokens.is_empty() {
            game.problems.push("missing result token".into());
        }
        finish(game, &mut out);
    }
    out
}

/// Reads `[Name "value"]` starting at `chars[i] == '['`.
fn read_tag(chars: &[char], mut i: usize) -> (Option<(String, String)>, usize) {
    i += 1;
    let mut name = String::new();
    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
        name.push(chars[i]);
        i += 1;
    }
    while i < chars.len() && chars[i].is_whitespace() && chars[i] != '\n' {
        i += 1;
    }
    let mut value = None;
    if i < chars.len() && chars[i] == '"' {
        i += 1;
        let mut v = String::new();
        while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
            if chars[i] == '\\' && i + 1 < chars.len() {
                i += 1;
            }
            v.push(chars[i]);
            i += 1;
        }
        if i < chars.len() && chars[i] == '"' {
            i += 1;
            value = Some(v);
        }
    }
    while i < chars.len() && chars[i] != ']' && chars[i] != '\n' {
        i += 1;
    }
    let closed = i < chars.len() && chars[i] == ']';
    if closed {
        i += 1;
    }
    match value {
        Some(v) if closed && !name.is_empty() => (Some((name, v)), i),
        _ => (None, i),
    }
}

/// Strips move numbers and annotation glyphs; `None` when nothing of a move remains.
fn movetext_token(token: &str) -> Option<String> {
    if token.starts_with('$') {
        return None;
    }
    if token.starts_with("0-0") {
        return Some(token.trim_end_matches(['!', '?']).to_string());
    }
    let rest = token.trim_start_matches(|c: char| c.is_ascii_digit());
    let rest = if rest.len() < token.len() {
        rest.trim_start_matches('.')
    } else {
        rest
    };
    let rest = rest.trim_end_matches(['!', '?']);
    if rest.is_empty() || rest.chars().all(|c| c == '.') {
        None
    } else {
        Some(rest.to_string())
    }
}

fn validate(raw: RawGame) -> Result<(BTreeMap<String, String>, Vec<String>), String> {
    if let Some(p) = raw.problems.first() {
        return Err(p.clone());
    }
    if raw.headers.contains_key("FEN") || raw.headers.get("SetUp").is_some_and(|v| v == "1") {
        return Err("custom start position not supported".into());
    }
    if let Some(v) = raw.headers.get("Variant") {
        if !v.eq_ignore_ascii_case("standard") {
            return Err(format!("unsupported variant {v}"));
        }
    }
    if raw.tokens.is_empty() {
        return Err("no moves".into());
    }
    let mut board = Board::start();
    for (ply, san) in raw.tokens.iter().enumerate() {
        match board.parse_san(san) {
            Ok(mv) => board = board.play_unchecked(&mv).0,
            Err(_) => return Err(format!("illegal SAN token '{san}' at ply {}", ply + 1)),
        }
    }
    Ok((raw.headers, raw.tokens))
}

//! A slow, deliberately simple chess model used as an oracle.
//!
//! Nothing here touches the engine: boards are 8x8 arrays, moves are found by
//! trying every square pair, and strategy registers are recomputed from the
//! whole move history each time they are asked for.

#![allow(dead_code)]

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct P {
    pub white: bool,
    /// One of PNBRQK.
    pub kind: char,
}

pub type Sq = (i32, i32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NBoard {
    /// Indexed `[file][rank]`.
    pub sq: [[Option<P>; 8]; 8],
    pub white_to_move: bool,
    /// K, Q, k, q.
    pub castle: [bool; 4],
    pub ep: Option<Sq>,
    pub fullmove: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NMove {
    pub from: Sq,
    pub to: Sq,
    pub promo: Option<char>,
    /// 0 none, 1 kingside, 2 queenside.
    pub castle: u8,
    pub ep: bool,
}

const KNIGHT: [Sq; 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING: [Sq; 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const DIAG: [Sq; 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];
const ORTHO: [Sq; 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn on(s: Sq) -> bool {
    (0..8).contains(&s.0) && (0..8).contains(&s.1)
}

pub fn name(s: Sq) -> String {
    format!("{}{}", (b'a' + s.0 as u8) as char, s.1 + 1)
}

pub fn parse_sq(t: &str) -> Sq {
    let b = t.as_bytes();
    ((b[0] - b'a') as i32, (b[1] - b'1') as i32)
}

fn value(kind: char) -> i64 {
    match kind {
        'P' => 1,
        'N' | 'B' => 3,
        'R' => 5,
        'Q' => 9,
        _ => 0,
    }
}

impl NBoard {
    pub fn from_fen(fen: &str) -> NBoard {
        let f: Vec<&str> = fen.split_whitespace().collect();
        let mut sq = [[None; 8]; 8];
        for (i, row) in f[0].split('/').enumerate() {
            let rank = 7 - i as i32;
            let mut file = 0;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as i32;
                } else {
                    sq[file as usize][rank as usize] = Some(P {
                        white: c.is_ascii_uppercase(),
                        kind: c.to_ascii_uppercase(),
                    });
                    file += 1;
                }
            }
        }
        let castle = ['K', 'Q', 'k', 'q'].map(|c| f[2].contains(c));
        NBoard {
            sq,
            white_to_move: f[1] == "w",
            castle,
            ep: (f[3] != "-").then(|| parse_sq(f[3])),
            fullmove: f.get(5).and_then(|s| s.parse().ok()).unwrap_or(1),
        }
    }

    pub fn start() -> NBoard {
        NBoard::from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1")
    }

    pub fn at(&self, s: Sq) -> Option<P> {
        self.sq[s.0 as usize][s.1 as usize]
    }

    fn set(&mut self, s: Sq, p: Option<P>) {
        self.sq[s.0 as usize][s.1 as usize] = p;
    }

    pub fn placement(&self) -> String {
        let mut out = String::new();
        for r in (0..8).rev() {
            let mut empty = 0;
            for f in 0..8 {
                match self.at((f, r)) {
                    None => empty += 1,
                    Some(p) => {
                        if empty > 0 {
                            out.push_str(&empty.to_string());
                            empty = 0;
                        }
                        out.push(if p.white { p.kind } else { p.kind.to_ascii_lowercase() });
                    }
                }
            }
            if empty > 0 {
                out.push_str(&empty.to_string());
            }
            if r > 0 {
                out.push('/');
            }
        }
        out
    }

    pub fn squares(&self) -> Vec<(Sq, P)> {
        let mut v = Vec::new();
        for r in 0..8 {
            for f in 0..8 {
                if let Some(p) = self.at((f, r)) {
                    v.push(((f, r), p));
                }
            }
        }
        v
    }

    /// Squares the unit on `s` hits, stopping sliders at the first occupied square.
    pub fn reach(&self, s: Sq) -> Vec<Sq> {
        let Some(p) = self.at(s) else { return vec![] };
        let mut out = Vec::new();
        let step = |d: &[Sq], out: &mut Vec<Sq>| {
            for &(df, dr) in d {
                let t = (s.0 + df, s.1 + dr);
                if on(t) {
                    out.push(t);
                }
            }
        };
        let slide = |d: &[Sq], out: &mut Vec<Sq>| {
            for &(df, dr) in d {
                let mut t = (s.0 + df, s.1 + dr);
                while on(t) {
                    out.push(t);
                    if self.at(t).is_some() {
                        break;
                    }
                    t = (t.0 + df, t.1 + dr);
                }
            }
        };
        match p.kind {
            'P' => {
                let dr = if p.white { 1 } else { -1 };
                step(&[(-1, dr), (1, dr)], &mut out);
            }
            'N' => step(&KNIGHT, &mut out),
            'K' => step(&KING, &mut out),
            'B' => slide(&DIAG, &mut out),
            'R' => slide(&ORTHO, &mut out),
            _ => {
                slide(&DIAG, &mut out);
                slide(&ORTHO, &mut out);
            }
        }
        out
    }

    pub fn attacked_by(&self, target: Sq, white: bool) -> bool {
        self.squares()
            .into_iter()
            .any(|(s, p)| p.white == white && self.reach(s).contains(&target))
    }

    fn king(&self, white: bool) -> Sq {
        self.squares()
            .into_iter()
            .find(|(_, p)| p.white == white && p.kind == 'K')
            .map(|(s, _)| s)
            .expect("king on board")
    }

    pub fn in_check(&self, white: bool) -> bool {
        self.attacked_by(self.king(white), !white)
    }

    fn pseudo(&self) -> Vec<NMove> {
        let us = self.white_to_move;
        let mut out = Vec::new();
        let plain = |from: Sq, to: Sq| NMove { from, to, promo: None, castle: 0, ep: false };
        for (s, p) in self.squares() {
            if p.white != us {
                continue;
            }
            if p.kind == 'P' {
                let dr = if us { 1 } else { -1 };
                let last = if us { 7 } else { 0 };
                let mut targets = Vec::new();
                let one = (s.0, s.1 + dr);
                if on(one) && self.at(one).is_none() {
                    targets.push((one, false));
                    let home = if us { 1 } else { 6 };
                    let two = (s.0, s.1 + 2 * dr);
                    if s.1 == home && self.at(two).is_none() {
                        targets.push((two, false));
                    }
                }
                for t in self.reach(s) {
                    match self.at(t) {
                        Some(q) if q.white != us => targets.push((t, false)),
                        None if self.ep == Some(t) => targets.push((t, true)),
                        _ => {}
                    }
                }
                for (t, ep) in targets {
                    if t.1 == last {
                        for k in ['Q', 'R', 'B', 'N'] {
                            out.push(NMove { promo: Some(k), ..plain(s, t) });
                        }
                    } else {
                        out.push(NMove { ep, ..plain(s, t) });
                    }
                }
                continue;
            }
            for t in self.reach(s) {
                if self.at(t).is_none_or(|q| q.white != us) {
                    out.push(plain(s, t));
                }
            }
        }
        let rank = if us { 0 } else { 7 };
        let (ki, qi) = if us { (0, 1) } else { (2, 3) };
        let rook = Some(P { white: us, kind: 'R' });
        let king_home = self.at((4, rank)) == Some(P { white: us, kind: 'K' });
        let empty = |fs: &[i32]| fs.iter().all(|&f| self.at((f, rank)).is_none());
        let safe = |fs: &[i32]| fs.iter().all(|&f| !self.attacked_by((f, rank), !us));
        if king_home && self.castle[ki] && self.at((7, rank)) == rook && empty(&[5, 6]) && safe(&[4, 5, 6]) {
            out.push(NMove { castle: 1, ..plain((4, rank), (6, rank)) });
        }
        if king_home && self.castle[qi] && self.at((0, rank)) == rook && empty(&[1, 2, 3]) && safe(&[4, 3, 2]) {
            out.push(NMove { castle: 2, ..plain((4, rank), (2, rank)) });
        }
        out
    }

    pub fn make(&self, m: &NMove) -> NBoard {
        let mut b = self.clone();
        let p = b.at(m.from).expect("moving piece");
        b.set(m.from, None);
        b.set(m.to, Some(P { white: p.white, kind: m.promo.unwrap_or(p.kind) }));
        if m.ep {
            b.set((m.to.0, m.from.1), None);
        }
        match m.castle {
            1 => {
                b.set((5, m.from.1), b.at((7, m.from.1)));
                b.set((7, m.from.1), None);
            }
            2 => {
                b.set((3, m.from.1), b.at((0, m.from.1)));
                b.set((0, m.from.1), None);
            }
            _ => {}
        }
        if p.kind == 'K' {
            let (a, c) = if p.white { (0, 1) } else { (2, 3) };
            b.castle[a] = false;
            b.castle[c] = false;
        }
        for (i, corner) in [(7, 0), (0, 0), (7, 7), (0, 7)].into_iter().enumerate() {
            if m.from == corner || m.to == corner {
                b.castle[i] = false;
            }
        }
        b.ep = (p.kind == 'P' && (m.to.1 - m.from.1).abs() == 2).then(|| (m.from.0, (m.from.1 + m.to.1) / 2));
        if !p.white {
            b.fullmove += 1;
        }
        b.white_to_move = !b.white_to_move;
        b
    }

    pub fn legal(&self) -> Vec<NMove> {
        self.pseudo()
            .into_iter()
            .filter(|m| !self.make(m).in_check(self.white_to_move))
            .collect()
    }

    pub fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        let moves = self.legal();
        if depth == 1 {
            return moves.len() as u64;
        }
        moves.iter().map(|m| self.make(m).perft(depth - 1)).sum()
    }

    pub fn uci(m: &NMove) -> String {
        let mut s = format!("{}{}", name(m.from), name(m.to));
        if let Some(k) = m.promo {
            s.push(k.to_ascii_lowercase());
        }
        s
    }

    pub fn find_uci(&self, uci: &str) -> Option<NMove> {
        self.legal().into_iter().find(|m| NBoard::uci(m) == uci)
    }

    pub fn san(&self, m: &NMove) -> String {
        match m.castle {
            1 => return "O-O".into(),
            2 => return "O-O-O".into(),
            _ => {}
        }
        let p = self.at(m.from).unwrap();
        let capture = m.ep || self.at(m.to).is_some();
        let mut s = String::new();
        if p.kind == 'P' {
            if capture {
                s.push((b'a' + m.from.0 as u8) as char);
            }
        } else {
            s.push(p.kind);
            let rivals: Vec<NMove> = self
                .legal()
                .into_iter()
                .filter(|o| o.to == m.to && o.from != m.from && self.at(o.from).map(|q| q.kind) == Some(p.kind))
                .collect();
            if !rivals.is_empty() {
                if rivals.iter().all(|o| o.from.0 != m.from.0) {
                    s.push((b'a' + m.from.0 as u8) as char);
                } else if rivals.iter().all(|o| o.from.1 != m.from.1) {
                    s.push((b'1' + m.from.1 as u8) as char);
                } else {
                    s.push_str(&name(m.from));
                }
            }
        }
        if capture {
            s.push('x');
        }
        s.push_str(&name(m.to));
        if let Some(k) = m.promo {
            s.push('=');
            s.push(k);
        }
        s
    }

    pub fn find_san(&self, token: &str) -> Option<NMove> {
        let t = token.trim_end_matches(['+', '#', '!', '?']);
        let hits: Vec<NMove> = self.legal().into_iter().filter(|m| self.san(m) == t).collect();
        (hits.len() == 1).then(|| hits[0])
    }

    fn attack_set(&self, white: bool) -> Vec<Sq> {
        let mut seen = Vec::new();
        for (s, p) in self.squares() {
            if p.white == white {
                for t in self.reach(s) {
                    if !seen.contains(&t) {
                        seen.push(t);
                    }
                }
            }
        }
        seen
    }

    /// Enemy king and non-pawn units that `white` hits.
    pub fn threatened(&self, white: bool) -> Vec<Sq> {
        let hits = self.attack_set(white);
        self.squares()
            .into_iter()
            .filter(|(s, p)| p.white != white && p.kind != 'P' && hits.contains(s))
            .map(|(s, _)| s)
            .collect()
    }

    /// (pinner, pinned, target) triples for pins made by `white`.
    pub fn pins(&self, white: bool) -> Vec<(Sq, Sq, Sq)> {
        let mut out = Vec::new();
        for (s, p) in self.squares() {
            if p.white != white {
                continue;
            }
            let dirs: Vec<Sq> = match p.kind {
                'B' => DIAG.to_vec(),
                'R' => ORTHO.to_vec(),
                'Q' => DIAG.iter().chain(ORTHO.iter()).copied().collect(),
                _ => continue,
            };
            for (df, dr) in dirs {
                let mut hit = Vec::new();
                let mut t = (s.0 + df, s.1 + dr);
                while on(t) && hit.len() < 2 {
                    if let Some(q) = self.at(t) {
                        hit.push((t, q));
                    }
                    t = (t.0 + df, t.1 + dr);
                }
                if let [(a, pa), (b, pb)] = hit[..] {
                    let enemy = pa.white != white && pb.white != white;
                    let ok = pb.kind == 'K' || (pb.kind == 'Q' && pa.kind != 'Q');
                    if enemy && pa.kind != 'K' && ok {
                        out.push((s, a, b));
                    }
                }
            }
        }
        out
    }
}

const CENTER: [Sq; 8] = [(2, 3), (3, 3), (4, 3), (5, 3), (2, 4), (3, 4), (4, 4), (5, 4)];

fn home(white: bool, kind: char, s: Sq) -> bool {
    let rank = if white { 0 } else { 7 };
    let files: &[i32] = match kind {
        'N' => &[1, 6],
        'B' => &[2, 5],
        'R' => &[0, 7],
        'Q' => &[3],
        _ => &[],
    };
    s.1 == rank && files.contains(&s.0)
}

/// Static registers of one side, straight from the board.
fn position_registers(b: &NBoard, white: bool) -> Vec<(&'static str, i64)> {
    let attacks = b.attack_set(white);
    let own: Vec<(Sq, P)> = b.squares().into_iter().filter(|(_, p)| p.white == white).collect();
    let center = CENTER
        .iter()
        .filter(|c| attacks.contains(c) || own.iter().any(|(s, _)| s == *c))
        .count() as i64;
    let developed = own
        .iter()
        .filter(|(s, p)| !matches!(p.kind, 'P' | 'K') && !home(white, p.kind, *s))
        .count()
        .min(7) as i64;
    let space = attacks.iter().filter(|t| if white { t.1 >= 4 } else { t.1 <= 3 }).count() as i64;
    let weak = if white { (5, 6) } else { (5, 1) };
    let pressure = own.iter().filter(|(s, _)| b.reach(*s).contains(&weak)).count() as i64;
    let mut files = [0i64; 8];
    for (s, p) in &own {
        if p.kind == 'P' {
            files[s.0 as usize] += 1;
        }
    }
    let mut weaknesses = 0;
    for f in 0..8 {
        weaknesses += (files[f] - 1).max(0);
        let left = if f > 0 { files[f - 1] } else { 0 };
        let right = if f < 7 { files[f + 1] } else { 0 };
        if left == 0 && right == 0 {
            weaknesses += files[f];
        }
    }
    let defended = own
        .iter()
        .filter(|(s, p)| !matches!(p.kind, 'P' | 'K') && attacks.contains(s))
        .count() as i64;
    let material = own.iter().map(|(_, p)| value(p.kind)).sum();
    vec![
        ("center_control", center),
        ("developed", developed),
        ("space", space),
        ("weak_square_pressure", pressure),
        ("pawn_weaknesses", weaknesses),
        ("defended_pieces", defended),
        ("material_points", material),
    ]
}

const ADVANCED_ONLY: [&str; 5] = ["defended_pieces", "attacks_made", "pins_made", "captures_made", "material_points"];

/// Every register the strategy program should hold after `history` is played
/// from `start`, keyed as `white.<name>`, `black.<name>` and `ply_index`.
pub fn registers(start: &NBoard, history: &[NMove], advanced: bool) -> Vec<(String, f64)> {
    let mut boards = vec![start.clone()];
    for m in history {
        let next = boards.last().unwrap().make(m);
        boards.push(next);
    }
    let mut out = Vec::new();
    for white in [true, false] {
        let color = if white { "white" } else { "black" };
        let mut counts = [0i64; 5];
        let (mut early, mut useless, mut castle, mut attacks, mut pins, mut captures) = (0, 0, 0, 0, 0, 0);
        for (i, m) in history.iter().enumerate() {
            let b = &boards[i];
            if b.white_to_move != white {
                continue;
            }
            let kind = b.at(m.from).unwrap().kind;
            let counted = if m.castle > 0 { 'R' } else { kind };
            if let Some(k) = "PNBRQ".find(counted) {
                counts[k] += 1;
            }
            if kind == 'Q' && b.fullmove <= 6 {
                early = 1;
            }
            if kind == 'P' {
                let dr = if white { 1 } else { -1 };
                let touched = [m.to, (m.to.0 - 1, m.to.1 + dr), (m.to.0 + 1, m.to.1 + dr)];
                if !touched.iter().any(|t| CENTER.contains(t)) {
                    useless += 1;
                }
            }
            if m.castle > 0 {
                castle = m.castle as i64;
            }
            if m.ep || b.at(m.to).is_some() {
                captures += 1;
            }
            let after = &boards[i + 1];
            let before_t = b.threatened(white);
            if after.threatened(white).iter().any(|t| !before_t.contains(t)) {
                attacks += 1;
            }
            let before_p = b.pins(white);
            if after.pins(white).iter().any(|p| !before_p.contains(p)) {
                pins += 1;
            }
        }
        let mut regs: Vec<(&str, i64)> = ["pawn_moves", "knight_moves", "bishop_moves", "rook_moves", "queen_moves"]
            .into_iter()
            .zip(counts)
            .collect();
        regs.extend(position_registers(boards.last().unwrap(), white));
        regs.extend([
            ("early_queen_flag", early),
            ("useless_pawn_moves", useless),
            ("castle_state", castle),
            ("attacks_made", attacks),
            ("pins_made", pins),
            ("captures_made", captures),
        ]);
        for (n, v) in regs {
            if advanced || !ADVANCED_ONLY.contains(&n) {
                out.push((format!("{color}.{n}"), v as f64));
            }
        }
    }
    out.push(("ply_index".into(), history.len() as f64));
    out
}

use super::*;

fn game(headers: &[(&str, &str)], moves: &str) -> String {
    let mut s = String::new();
    for (k, v) in headers {
        s.push_str(&format!("[{k} \"{v}\"]\n"));
    }
    s.push('\n');
    s.push_str(moves);
    s.push_str("\n\n");
    s
}

fn rapid(white: &str, black: &str, result: &str) -> Vec<(&'static str, String)> {
    vec![
        ("TimeControl", "600+0".into()),
        ("WhiteElo", white.into()),
        ("BlackElo", black.into()),
        ("Result", result.into()),
    ]
}

fn records(games: &[Vec<(&str, String)>]) -> Vec<crate::chess::GameRecord> {
    let text: String = games
        .iter()
        .map(|h| {
            let pairs: Vec<(&str, &str)> = h.iter().map(|(k, v)| (*k, v.as_str())).collect();
            let result = h.iter().find(|(k, _)| *k == "Result").map_or("*", |(_, v)| v.as_str());
            game(&pairs, &format!("1. e4 e5 2. Nf3 Nc6 {result}"))
        })
        .collect();
    let parsed = parse_pgn(&text, "t");
    assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
    parsed.games
}

#[test]
fn filter_examples() {
    let mut blitz = rapid("1250", "1280", "1-0");
    blitz[0].1 = "300+3".into();
    let mut abandoned = rapid("1250", "1280", "0-1");
    abandoned.push(("Termination", "Abandoned".into()));
    let mut no_tc = rapid("1250", "1280", "1-0");
    no_tc.remove(0);
    let games = records(&[
        rapid("1250", "1280", "1-0"),
        blitz,
        rapid("1250", "1280", "*"),
        rapid("1200", "1299", "1/2-1/2"),
        rapid("1250", "1300", "1-0"),
        rapid("1199", "1250", "1-0"),
        abandoned,
        no_tc,
    ]);
    let out = filter_games(games, &FilterConfig::bucket(1200));
    let kept: Vec<&str> = out.games.iter().map(|g| g.source.as_str()).collect();
    assert_eq!(kept, ["t#1", "t#4"]);
    assert_eq!(
        out.counts,
        FilterCounts {
            input: 8,
            time_control: 6,
            elo: 4,
            complete: 2,
            sampled: 2
        }
    );
    assert_eq!(out.diagnostics.len(), 1);
    assert_eq!(out.diagnostics[0].source, "t#8");
    assert!(out.diagnostics[0].reason.contains("TimeControl"));
}

#[test]
fn time_base_parsing() {
    assert_eq!(time_base_seconds("600+0"), Some(600));
    assert_eq!(time_base_seconds("1200"), Some(1200));
    assert_eq!(time_base_seconds("-"), None);
}

#[test]
fn sampling_is_seeded_and_keeps_order() {
    let games = records(&vec![rapid("1250", "1250", "1-0"); 30]);
    let cfg = FilterConfig {
        max_games: Some(10),
        ..FilterConfig::bucket(1200)
    };
    let a = filter_games(games.clone(), &cfg);
    let b = filter_games(games.clone(), &cfg);
    assert_eq!(a.games, b.games);
    assert_eq!(a.games.len(), 10);
    let idx: Vec<usize> = a.games.iter().map(|g| g.source[2..].parse().unwrap()).collect();
    assert!(idx.windows(2).all(|w| w[0] < w[1]));
    let c = filter_games(games, &FilterConfig { seed: 7, ..cfg });
    assert_ne!(a.games, c.games);
}

#[test]
fn config_validation() {
    assert!(FilterConfig::bucket(1200).validate().is_ok());
    let bad = FilterConfig {
        elo_bucket_hi: 1200,
        ..FilterConfig::bucket(1200)
    };
    assert!(bad.validate().is_err());
    let bad = FilterConfig {
        time_base_min: 0,
        ..FilterConfig::bucket(1200)
    };
    assert!(bad.validate().is_err());
}

fn tokens(n: usize, castles: &[usize]) -> Vec<String> {
    (0..n)
        .map(|i| if castles.contains(&i) { "O-O".into() } else { "x".into() })
        .collect()
}

#[test]
fn opening_truncation() {
    // White castles on move 6, Black on move 9
    assert_eq!(opening_length(&tokens(60, &[10, 17])), 18);
    assert_eq!(opening_length(&tokens(80, &[])), 20);
    assert_eq!(opening_length(&tokens(7, &[])), 7);
    // only one side castles
    assert_eq!(opening_length(&tokens(40, &[4, 12])), 20);
    assert_eq!(opening_length(&tokens(60, &[25, 30])), 31);
}

fn sample_game(moves: &str) -> crate::chess::GameRecord {
    parse_pgn(&game(&[], &format!("{moves} *")), "g").games.remove(0)
}

#[test]
fn initial_ply_has_twenty_rows() {
    let schema = FeatureSchema::basic();
    let rows = extract_rows(&sample_game("1. e4"), &schema, StrategyConfig::default()).unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().filter(|r| r.label == 1.0).count(), 1);
    let played = rows.iter().find(|r| r.label == 1.0).unwrap();
    assert_eq!(played.mv, "e4");
    assert_eq!(played.features.len(), 54);
    assert!(played.before().iter().all(|&x| x == 0.0));
}

#[test]
fn rows_cover_every_legal_move_and_chain() {
    let moves = "1. e4 e5 2. Nf3 Nc6 3. Bc4 Bc5 4. O-O Nf6 5. d3 O-O";
    let g = sample_game(moves);
    let schema = FeatureSchema::advanced();
    let rows = extract_rows(&g, &schema, StrategyConfig::default()).unwrap();
    let expected: usize = g.replay().unwrap().iter().map(|(b, _)| b.legal_moves().len()).sum();
    assert_eq!(rows.len(), expected);
    let played: Vec<&DatasetRow> = rows.iter().filter(|r| r.label == 1.0).collect();
    assert_eq!(played.len(), g.san_moves.len());
    for (i, p) in played.iter().enumerate() {
        assert_eq!(p.ply as usize, i);
        assert_eq!(p.mv, g.san_moves[i]);
    }
    for w in played.windows(2) {
        assert_eq!(w[0].after(), w[1].before());
    }
    for r in &rows {
        assert_eq!(r.before(), played[r.ply as usize].before());
    }
}

#[test]
fn illegal_token_drops_game() {
    let g = crate::chess::GameRecord {
        source: "bad#1".into(),
        headers: Default::default(),
        san_moves: vec!["e4".into(), "e5".into(), "Qxf7".into()],
    };
    let err = extract_rows(&g, &FeatureSchema::basic(), StrategyConfig::default()).unwrap_err();
    assert_eq!(err.source, "bad#1");
    assert!(err.reason.contains("'Qxf7' at ply 3"), "{}", err.reason);
}

fn row(game: &str, ply: u32, features: Vec<f32>, label: f64) -> DatasetRow {
    DatasetRow {
        game_id: Arc::from(game),
        ply,
        mv: "m".into(),
        features,
        label,
        synthetic: false,
    }
}

fn imbalanced(minority: usize, majority: usize) -> Vec<DatasetRow> {
    let mut rows = Vec::new();
    for i in 0..minority + majority {
        let x = i as f32;
        let label = if i % ((minority + majority) / minority) == 0 && rows.iter().filter(|r: &&DatasetRow| r.label == 1.0).count() < minority {
            1.0
        } else {
            0.0
        };
        rows.push(row("g", i as u32, vec![x, (x * 0.37).sin(), 3.0 - x / 7.0, 1.0], label));
    }
    rows
}

#[test]
fn smote_reaches_parity_with_convex_points() {
    let rows = imbalanced(10, 90);
    assert_eq!(rows.iter().filter(|r| r.label == 1.0).count(), 10);
    let out = smote_balance(&rows, 5, 3).unwrap();
    let balanced = out.balanced(&rows);
    let pos = balanced.iter().filter(|r| r.label == 1.0).count();
    let neg = balanced.iter().filter(|r| r.label == 0.0).count();
    assert_eq!((pos, neg), (90, 90));
    assert_eq!(out.synthetic_count(), 80);
    assert_eq!(balanced.len(), 180);
    for (r, &(a, b)) in out.synthetic.iter().zip(&out.parents) {
        assert!(r.synthetic && r.mv == SYNTHETIC_MOVE);
        assert_ne!(a, b);
        assert_eq!(rows[a].label, 1.0);
        assert_eq!(rows[b].label, 1.0);
        for ((x, p), q) in r.features.iter().zip(&rows[a].features).zip(&rows[b].features) {
            assert!(*x >= p.min(*q) && *x <= p.max(*q));
        }
    }
    let again = smote_balance(&rows, 5, 3).unwrap();
    assert_eq!(again.synthetic, out.synthetic);
    assert_ne!(smote_balance(&rows, 5, 4).unwrap().synthetic, out.synthetic);
}

#[test]
fn smote_edge_cases() {
    let rows = imbalanced(2, 8);
    let out = smote_balance(&rows, 5, 1).unwrap();
    assert_eq!(out.k, 1);
    let mut one = imbalanced(2, 8);
    let i = one.iter().position(|r| r.label == 1.0).unwrap();
    one[i].label = 0.0;
    assert!(matches!(smote_balance(&one, 5, 1), Err(DatasetError::Smote(_))));
    let mut nonbinary = imbalanced(2, 8);
    nonbinary[0].label = 0.5;
    assert!(smote_balance(&nonbinary, 5, 1).is_err());
}

#[test]
fn neighbors_match_brute_force() {
    let d = 3;
    let pts: Vec<f32> = (0..40 * d).map(|i| ((i * 7919) % 101) as f32 / 10.0).collect();
    let nn = nearest_neighbors(&pts, d, 4);
    for (i, got) in nn.iter().enumerate() {
        let mut all: Vec<(f64, usize)> = (0..40)
            .filter(|&j| j != i)
            .map(|j| {
                let dist: f64 = (0..d).map(|c| ((pts[i * d + c] - pts[j * d + c]) as f64).powi(2)).sum();
                (dist, j)
            })
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let kth = all[3].0;
        for &j in got {
            let dist = all.iter().find(|(_, k)| *k == j).unwrap().0;
            assert!(dist <= kth + 1e-4);
        }
    }
}

#[test]
fn aggregation_frequencies() {
    let s = vec![1.0f32, 2.0];
    let mut rows = Vec::new();
    for g in 0..10 {
        let id = format!("g{g}");
        let m_played = g < 4;
        rows.push(row(&id, 0, [s.clone(), vec![5.0, 5.0]].concat(), m_played as u8 as f64));
        rows.push(row(&id, 0, [s.clone(), vec![6.0, 6.0]].concat(), !m_played as u8 as f64));
    }
    // a state seen once
    rows.push(row("h", 3, vec![9.0, 9.0, 1.0, 1.0], 1.0));
    rows.push(row("h", 3, vec![9.0, 9.0, 2.0, 2.0], 0.0));
    let agg = aggregate_probabilities(&rows);
    assert_eq!(agg.len(), 4);
    assert_eq!(agg[0].label, 0.4);
    assert!((agg[1].label - 0.6).abs() < 1e-12);
    assert_eq!(agg[2].label, 1.0);
    assert_eq!(agg[3].label, 0.0);
}

#[test]
fn aggregated_game_rows_normalize() {
    let schema = FeatureSchema::basic();
    let mut rows = Vec::new();
    for (i, moves) in ["1. e4 e5 2. Nf3", "1. e4 e5 2. Bc4", "1. d4 d5 2. c4", "1. e4 c5 2. Nf3"]
        .iter()
        .enumerate()
    {
        let mut g = sample_game(moves);
        g.source = format!("g#{i}");
        rows.extend(extract_rows(&g, &schema, StrategyConfig::default()).unwrap());
    }
    let agg = aggregate_probabilities(&rows);
    let mut sums: std::collections::HashMap<Vec<u32>, f64> = Default::default();
    for r in &agg {
        *sums.entry(r.before().iter().map(|x| x.to_bits()).collect()).or_default() += r.label;
    }
    for s in sums.values() {
        assert!((s - 1.0).abs() <= 1e-9);
    }
    // the initial position was seen 4 times, e4 three of them
    let e4 = agg.iter().find(|r| r.ply == 0 && r.mv == "e4").unwrap();
    assert_eq!(e4.label, 0.75);
}

#[test]
fn sig9_formatting() {
    assert_eq!(format_sig9(0.0), "0");
    assert_eq!(format_sig9(-0.0), "0");
    assert_eq!(format_sig9(12.0), "12");
    assert_eq!(format_sig9(-3.0), "-3");
    assert_eq!(format_sig9(0.5), "0.5");
    assert_eq!(format_sig9(0.1), "0.100000001");
    assert_eq!(format_sig9(1.0 / 3.0), "0.333333343");
    assert_eq!(format_sig9(-2.75), "-2.75");
    assert_eq!(format_sig9(1.5e-5), "0.0000149999996");
    assert_eq!(format_sig9(123456.79), "123456.789");
    for x in [0.1f32, 1.0 / 3.0, 7.123_457, -0.000_123_4, 4.2e7 + 0.5, 1e9, 3.5e12] {
        assert_eq!(format_sig9(x).parse::<f32>().unwrap(), x, "{x}");
    }
}

fn tiny_dataset(advanced: bool) -> Dataset {
    let schema = FeatureSchema::new(advanced);
    let rows = extract_rows(&sample_game("1. e4 e5 2. Nf3 Nc6"), &schema, StrategyConfig::default()).unwrap();
    let mut rows = rows;
    rows[3].features[0] = 0.123_456_79;
    rows[5].features[1] = -1.0 / 3.0;
    Dataset {
        schema,
        bucket: Some(1200),
        rows,
        provenance: Provenance {
            config: vec![("elo_lo".into(), "1200".into()), ("pgn".into(), "a.pgn,b.pgn".into())],
            counts: StageCounts {
                parsed: 3,
                rows: 9,
                ..Default::default()
            },
        },
    }
}

#[test]
fn csv_round_trip() {
    for advanced in [false, true] {
        let d = tiny_dataset(advanced);
        let text = dataset_to_string(&d);
        assert_eq!(dataset_from_str(&text, None).unwrap(), d);
        assert_eq!(dataset_to_string(&dataset_from_str(&text, None).unwrap()), text);
    }
}

#[test]
fn csv_header_shape() {
    let cols = header(&FeatureSchema::basic());
    assert_eq!(cols.len(), 27 * 2 + 4);
    assert_eq!(cols[3], "before_own_pawn_moves");
    assert_eq!(cols[30], "after_own_pawn_moves");
    assert_eq!(cols[57], "label");
}

#[test]
fn csv_rejects_unknown_columns_and_schema() {
    let text = dataset_to_string(&tiny_dataset(false));
    let bad = text.replacen("before_own_space", "before_own_spaec", 1);
    match dataset_from_str(&bad, None) {
        Err(DatasetError::UnknownColumn(c)) => assert_eq!(c, "before_own_spaec"),
        other => panic!("{other:?}"),
    }
    let err = dataset_from_str(&text, Some(&FeatureSchema::advanced())).unwrap_err();
    assert!(matches!(err, DatasetError::SchemaMismatch { .. }));
    let other = text.replacen("bpchess-basic-v1", "bpchess-basic-v0", 1);
    assert!(matches!(dataset_from_str(&other, None), Err(DatasetError::SchemaMismatch { .. })));
}

#[test]
fn build_pipeline_counts() {
    let moves = "1. e4 e5 2. Nf3 Nc6 3. Bb5 a6 4. O-O Nf6 5. Re1 Be7 6. Bxc6 dxc6 7. d3 O-O 8. h3 Re8";
    let mut text = String::new();
    text.push_str(&game(&[("TimeControl", "900+10"), ("WhiteElo", "1210"), ("BlackElo", "1290"), ("Result", "1-0")], &format!("{moves} 1-0")));
    text.push_str(&game(&[("TimeControl", "180+0"), ("WhiteElo", "1210"), ("BlackElo", "1290"), ("Result", "1-0")], "1. e4 1-0"));
    text.push_str(&game(&[("TimeControl", "600+0"), ("WhiteElo", "1210"), ("BlackElo", "1290"), ("Result", "0-1")], "1. e4 e5 2. Ke3 0-1"));
    let sources = [PgnSource {
        name: "fx.pgn".into(),
        text,
    }];
    let out = build_dataset(&sources, &BuildOptions::default()).unwrap();
    let c = out.dataset.provenance.counts;
    assert_eq!((c.parsed, c.parse_rejected, c.time_control, c.sampled, c.replayed), (2, 1, 1, 1, 1));
    assert!(c.is_monotone());
    assert_eq!(c.plies, 14);
    assert_eq!(c.rows, out.dataset.rows.len());
    assert_eq!(out.diagnostics.len(), 1);
    let again = build_dataset(&sources, &BuildOptions::default()).unwrap();
    assert_eq!(dataset_to_string(&again.dataset), dataset_to_string(&out.dataset));
    let empty = build_dataset(
        &sources,
        &BuildOptions {
            filter: FilterConfig::bucket(1500),
            ..Default::default()
        },
    );
    assert!(matches!(empty, Err(DatasetError::NoGames(_))));
}

#[test]
fn projection_matches_direct_build() {
    let g = sample_game("1. e4 e5 2. Nf3 Nc6 3. Bb5 a6 4. Bxc6 dxc6 5. O-O");
    let adv = extract_rows(&g, &FeatureSchema::advanced(), StrategyConfig::default()).unwrap();
    let basic = extract_rows(&g, &FeatureSchema::basic(), StrategyConfig::default()).unwrap();
    let d = Dataset {
        schema: FeatureSchema::advanced(),
        bucket: None,
        rows: adv,
        provenance: Provenance::default(),
    };
    let p = d.project(&FeatureSchema::basic()).unwrap();
    assert_eq!(p.rows, basic);
    assert!(Dataset { rows: basic, schema: FeatureSchema::basic(), ..d }.project(&FeatureSchema::advanced()).is_err());
}

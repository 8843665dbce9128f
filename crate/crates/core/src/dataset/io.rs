use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::strategy::FeatureSchema;

use super::{Dataset, DatasetError, DatasetRow, Provenance, StageCounts, SYNTHETIC_MOVE};

const MAGIC: &str = "# bpchess-dataset";

/// Decimal text with 9 significant digits, which round-trips every `f32`.
/// Integral values are written without a fractional part.
pub fn format_sig9(v: f32) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v.fract() == 0.0 && v.abs() < 1e9 {
        return (v as i64).to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    if v < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

pub fn header(schema: &FeatureSchema) -> Vec<String> {
    let mut cols = vec!["game_id".to_string(), "ply".into(), "move".into()];
    for prefix in ["before_", "after_"] {
        cols.extend(schema.names().iter().map(|n| format!("{prefix}{n}")));
    }
    cols.push("label".into());
    cols
}

fn bucket_text(bucket: Option<u32>) -> String {
    bucket.map_or("none".into(), |b| b.to_string())
}

pub fn dataset_to_string(d: &Dataset) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} schema={} bucket={}", d.schema.version(), bucket_text(d.bucket)).unwrap();
    for (k, v) in &d.provenance.config {
        writeln!(out, "# config {k}={v}").unwrap();
    }
    for (k, v) in d.provenance.counts.pairs() {
        writeln!(out, "# count {k}={v}").unwrap();
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header(&d.schema)).expect("in-memory write");
    let mut record = Vec::with_capacity(d.schema.len() * 2 + 4);
    for r in &d.rows {
        record.clear();
        record.push(r.game_id.to_string());
        record.push(r.ply.to_string());
        record.push(r.mv.clone());
        record.extend(r.features.iter().map(|&x| format_sig9(x)));
        record.push(r.label.to_string());
        w.write_record(&record).expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("flush")).expect("utf-8 fields"));
    out
}

pub fn write_dataset(d: &Dataset, path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, dataset_to_string(d)).map_err(|e| DatasetError::io(path, e))
}

fn bad(line: usize, reason: impl Into<String>) -> DatasetError {
    DatasetError::Format {
        line,
        reason: reason.into(),
    }
}

/// Parses dataset text. With `expect`, a different schema version is rejected.
pub fn dataset_from_str(text: &str, expect: Option<&FeatureSchema>) -> Result<Dataset, DatasetError> {
    let mut lines = text.split_inclusive('\n');
    let first = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let rest = first
        .trim_end()
        .strip_prefix(MAGIC)
        .ok_or_else(|| bad(1, format!("missing '{MAGIC}' preamble")))?;
    let mut version = None;
    let mut bucket = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("schema", v)) => version = Some(v.to_string()),
            Some(("bucket", "none")) => {}
            Some(("bucket", b)) => bucket = Some(b.parse().map_err(|_| bad(1, format!("bad bucket '{b}'")))?),
            _ => return Err(bad(1, format!("unexpected preamble field '{field}'"))),
        }
    }
    let version = version.ok_or_else(|| bad(1, "preamble lacks schema="))?;
    let schema = FeatureSchema::from_version(&version).ok_or_else(|| DatasetError::SchemaMismatch {
        expected: expect.map_or("a known schema".into(), |s| s.version().to_string()),
        found: version.clone(),
    })?;
    if let Some(e) = expect {
        if e.version() != schema.version() {
            return Err(DatasetError::SchemaMismatch {
                expected: e.version().into(),
                found: version,
            });
        }
    }

    let mut provenance = Provenance::default();
    let mut count_pairs = Vec::new();
    let mut consumed = first.len();
    let mut line_no = 1;
    for line in lines {
        let Some(body) = line.strip_prefix('#') else { break };
        line_no += 1;
        consumed += line.len();
        let body = body.trim();
        let (kind, kv) = body.split_once(' ').ok_or_else(|| bad(line_no, "malformed comment"))?;
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(line_no, "expected key=value"))?;
        match kind {
            "config" => provenance.config.push((k.to_string(), v.to_string())),
            "count" => count_pairs.push((
                k.to_string(),
                v.parse::<usize>().map_err(|_| bad(line_no, format!("bad count '{v}'")))?,
            )),
            _ => return Err(bad(line_no, format!("unknown comment kind '{kind}'"))),
        }
    }
    provenance.counts = StageCounts::from_pairs(&count_pairs).map_err(|r| bad(line_no, r))?;

    let body = &text[consumed..];
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let expected = header(&schema);
    let found = reader.headers().map_err(|e| bad(line_no + 1, e.to_string()))?.clone();
    for col in found.iter() {
        if !expected.iter().any(|e| e == col) {
            return Err(DatasetError::UnknownColumn(col.to_string()));
        }
    }
    if found.iter().ne(expected.iter().map(String::as_str)) {
        let missing = expected.iter().find(|e| !found.iter().any(|f| f == e.as_str()));
        return Err(match missing {
            Some(m) => DatasetError::MissingColumn(m.clone()),
            None => bad(line_no + 1, "columns out of order"),
        });
    }

    let width = schema.len() * 2;
    let mut rows = Vec::new();
    let mut game_id: Arc<str> = Arc::from("");
    for (i, rec) in reader.records().enumerate() {
        let at = line_no + 2 + i;
        let rec = rec.map_err(|e| bad(at, e.to_string()))?;
        let num = |j: usize| -> Result<f32, DatasetError> {
            rec[j].parse().map_err(|_| bad(at, format!("'{}' in column {} is not a number", &rec[j], expected[j])))
        };
        if *game_id != rec[0] {
            game_id = Arc::from(&rec[0]);
        }
        let mut features = Vec::with_capacity(width);
        for j in 3..3 + width {
            features.push(num(j)?);
        }
        let label: f64 = rec[3 + width]
            .parse()
            .map_err(|_| bad(at, format!("label '{}' is not a number", &rec[3 + width])))?;
        rows.push(DatasetRow {
            game_id: game_id.clone(),
            ply: rec[1].parse().map_err(|_| bad(at, format!("ply '{}' is not an integer", &rec[1])))?,
            synthetic: &rec[2] == SYNTHETIC_MOVE,
            mv: rec[2].to_string(),
            features,
            label,
        });
    }
    Ok(Dataset {
        schema,
        bucket,
        rows,
        provenance,
    })
}

pub fn read_dataset(path: &Path, expect: Option<&FeatureSchema>) -> Result<Dataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    dataset_from_str(&text, expect)
}

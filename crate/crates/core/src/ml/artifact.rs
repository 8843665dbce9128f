//! Plain-text model files: `key=value` header, then the standardizer and weights
//! as whitespace-separated shortest round-trip numbers.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{Family, Layer, MlError, ModelParams, Network, Standardizer, Weights};

const MAGIC: &str = "# bpchess-model v1";

fn nums(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

pub fn model_to_string(m: &ModelParams) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(MAGIC.into());
    line(format!("family={}", m.family));
    line(format!("task={}", m.family.task()));
    line(format!("schema={}", m.schema_version));
    line(format!("dims={}", m.dim()));
    line(format!("seed={}", m.seed));
    for (k, v) in &m.hyper {
        line(format!("{k}={v}"));
    }
    for (k, v) in &m.info {
        line(format!("info.{k}={v}"));
    }
    line("[standardizer]".into());
    line(format!("mean {}", nums(m.standardizer.mean.iter().copied())));
    line(format!("scale {}", nums(m.standardizer.scale.iter().copied())));
    match &m.weights {
        Weights::Linear { w, b } => {
            line("[linear]".into());
            line(format!("w {}", nums(w.iter().copied())));
            line(format!("b {b:?}"));
        }
        Weights::Mlp(net) => {
            line(format!("[mlp {}]", net.layers.len()));
            for l in &net.layers {
                line(format!("layer {} {}", l.w.nrows(), l.w.ncols()));
                for r in l.w.row_iter() {
                    line(nums(r.iter().copied()));
                }
                line(format!("bias {}", nums(l.b.iter().copied())));
            }
        }
    }
    out
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, MlError> {
        let (i, l) = self.it.next().ok_or_else(|| self.err("unexpected end of file"))?;
        self.at = i + 1;
        Ok(l)
    }

    fn err(&self, reason: impl Into<String>) -> MlError {
        MlError::Format {
            line: self.at,
            reason: reason.into(),
        }
    }

    fn floats(&self, s: &str, expect: usize) -> Result<Vec<f64>, MlError> {
        let v: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(format!("'{t}' is not a number"))))
            .collect::<Result<_, _>>()?;
        if v.len() != expect {
            return Err(self.err(format!("expected {expect} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn tagged(&mut self, tag: &str, expect: usize) -> Result<Vec<f64>, MlError> {
        let l = self.next()?;
        let rest = l
            .strip_prefix(tag)
            .and_then(|r| r.strip_prefix(' ').or((r.is_empty()).then_some("")))
            .ok_or_else(|| self.err(format!("expected '{tag}' line")))?;
        self.floats(rest, expect)
    }
}

pub fn model_from_str(text: &str) -> Result<ModelParams, MlError> {
    let mut lines = Lines {
        it: text.lines().enumerate(),
        at: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("missing '{MAGIC}'")));
    }
    let (mut family, mut schema, mut dims, mut seed) = (None, None, None, None);
    let mut hyper = Vec::new();
    let mut info = Vec::new();
    loop {
        let l = lines.next()?;
        if l == "[standardizer]" {
            break;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| lines.err("expected key=value"))?;
        match k {
            "family" => family = Some(v.parse::<Family>().map_err(|e| lines.err(e.to_string()))?),
            "task" => {}
            "schema" => schema = Some(v.to_string()),
            "dims" => dims = Some(v.parse::<usize>().map_err(|_| lines.err("bad dims"))?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| lines.err("bad seed"))?),
            _ => match k.strip_prefix("info.") {
                Some(ik) => info.push((ik.to_string(), v.to_string())),
                None => hyper.push((k.to_string(), v.to_string())),
            },
        }
    }
    let family = family.ok_or_else(|| lines.err("header lacks family"))?;
    let d = dims.ok_or_else(|| lines.err("header lacks dims"))?;
    let standardizer = Standardizer {
        mean: lines.tagged("mean", d)?,
        scale: lines.tagged("scale", d)?,
    };
    if standardizer.scale.iter().any(|&s| s <= 0.0) {
        return Err(lines.err("standardizer scale must be positive"));
    }
    let section = lines.next()?;
    let weights = if section == "[linear]" {
        let w = lines.tagged("w", d)?;
        let b = lines.tagged("b", 1)?[0];
        Weights::Linear { w, b }
    } else if let Some(n) = section.strip_prefix("[mlp ").and_then(|s| s.strip_suffix(']')) {
        let n: usize = n.parse().map_err(|_| lines.err("bad layer count"))?;
        let mut layers = Vec::with_capacity(n);
        let mut expect_in = d;
        for _ in 0..n {
            let head = lines.next()?;
            let dims: Vec<usize> = head
                .strip_prefix("layer ")
                .map(|r| r.split_whitespace().filter_map(|t| t.parse().ok()).collect())
                .unwrap_or_default();
            let [rows, cols] = dims[..] else {
                return Err(lines.err("expected 'layer <outputs> <inputs>'"));
            };
            if cols != expect_in {
                return Err(lines.err(format!("layer expects {cols} inputs, previous layer gives {expect_in}")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let l = lines.next()?;
                data.extend(lines.floats(l, cols)?);
            }
            let b = lines.tagged("bias", rows)?;
            layers.push(Layer {
                w: DMatrix::from_row_slice(rows, cols, &data),
                b: DVector::from_vec(b),
            });
            expect_in = rows;
        }
        if expect_in != 1 {
            return Err(lines.err("network must end in a single output"));
        }
        Weights::Mlp(Network { layers })
    } else {
        return Err(lines.err(format!("unknown weights section '{section}'")));
    };
    let m = ModelParams {
        family,
        schema_version: schema.ok_or_else(|| lines.err("header lacks schema"))?,
        seed: seed.unwrap_or_default(),
        hyper,
        info,
        standardizer,
        weights,
    };
    m.config()?;
    Ok(m)
}

pub fn write_model(m: &ModelParams, path: &Path) -> Result<(), MlError> {
    std::fs::write(path, model_to_string(m)).map_err(|source| MlError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_model(path: &Path) -> Result<ModelParams, MlError> {
    let text = std::fs::read_to_string(path).map_err(|source| MlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_str(&text)
}


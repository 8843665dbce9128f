//! Flat `key=value` run configuration: defaults, then `BPCHESS_SEED`, then a
//! config file, then command-line flags.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::anyhow;
use bpchess::dataset::{BuildOptions, FilterConfig};
use bpchess::experiment::StrategySet;
use bpchess::ml::{Family, TrainConfig};
use bpchess::strategy::StrategyConfig;

use crate::error::Failure;

pub const SEED_ENV: &str = "BPCHESS_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    entries: Vec<(String, String)>,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut entries = vec![("pgn".to_string(), String::new())];
        entries.extend(FilterConfig::bucket(1200).echo());
        let strategy = StrategyConfig::default();
        entries.push(("advanced".into(), "false".into()));
        entries.push(("early_queen_moves".into(), strategy.early_queen_moves.to_string()));
        let train = TrainConfig::default();
        entries.push(("test_fraction".into(), train.test_fraction.to_string()));
        entries.push(("repeats".into(), train.repeats.to_string()));
        entries.push(("smote_k".into(), train.smote_k.to_string()));
        for family in Family::ALL {
            for (k, v) in train.hyper(family) {
                entries.push((format!("{}.{k}", family.name()), v));
            }
        }
        entries.push(("buckets".into(), "1200,1300,1400,1500".into()));
        entries.push(("sets".into(), "basic,advanced".into()));
        entries.push(("families".into(), join(&Family::ALL.map(|f| f.name()))));
        RunConfig { entries }
    }
}

impl RunConfig {
    /// Defaults overlaid with `BPCHESS_SEED` and then the optional file.
    pub fn load(file: Option<&Path>) -> Result<RunConfig, Failure> {
        let mut cfg = RunConfig::default();
        if let Ok(seed) = std::env::var(SEED_ENV) {
            seed.trim()
                .parse::<u64>()
                .map_err(|_| Failure::Usage(anyhow!("{SEED_ENV}: cannot parse '{seed}' as a seed")))?;
            cfg.set("seed", seed.trim()).expect("known key");
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(anyhow!("cannot read config {}: {e}", path.display())))?;
            cfg.merge_text(&text)
                .map_err(|e| Failure::Usage(anyhow!("{}: {e}", path.display())))?;
        }
        Ok(cfg)
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn merge_text(&mut self, text: &str) -> anyhow::Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", n + 1))?;
            self.set(k.trim(), v.trim()).map_err(|e| anyhow!("line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        let slot = self
            .entries
            .iter_mut()
            .find(|(k, _)| k == key)
            .ok_or_else(|| anyhow!("unknown config key '{key}'"))?;
        slot.1 = value.to_string();
        Ok(())
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.set(key, &v.to_string()).expect("known key");
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("config key {key} missing"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, Failure> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| Failure::Usage(anyhow!("config key {key}: cannot parse '{v}'")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| Failure::Usage(anyhow!("config key {key}: {e}"))))
            .collect()
    }

    pub fn seed(&self) -> Result<u64, Failure> {
        self.parse("seed")
    }

    pub fn pgn_paths(&self) -> Vec<String> {
        self.get("pgn")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    }

    pub fn filter(&self) -> Result<FilterConfig, Failure> {
        let max_games = match self.get("max_games") {
            "none" | "" => None,
            _ => Some(self.parse("max_games")?),
        };
        let f = FilterConfig {
            elo_bucket_lo: self.parse("elo_lo")?,
            elo_bucket_hi: self.parse("elo_hi")?,
            time_base_min: self.parse("time_base_min")?,
            time_base_max: self.parse("time_base_max")?,
            require_complete: self.parse("require_complete")?,
            max_games,
            seed: self.seed()?,
        };
        f.validate().map_err(|e| Failure::Usage(e.into()))?;
        Ok(f)
    }

    pub fn strategy(&self) -> Result<StrategyConfig, Failure> {
        Ok(StrategyConfig {
            early_queen_moves: self.parse("early_queen_moves")?,
        })
    }

    pub fn build_options(&self) -> Result<BuildOptions, Failure> {
        Ok(BuildOptions {
            filter: self.filter()?,
            advanced: self.parse("advanced")?,
            strategy: self.strategy()?,
        })
    }

    pub fn train(&self) -> Result<TrainConfig, Failure> {
        let mut t = TrainConfig {
            test_fraction: self.parse("test_fraction")?,
            repeats: self.parse("repeats")?,
            smote_k: self.parse("smote_k")?,
            seed: self.seed()?,
            ..TrainConfig::default()
        };
        for (key, value) in &self.entries {
            let Some((prefix, name)) = key.split_once('.') else {
                continue;
            };
            let family: Family = prefix.parse().map_err(|e| Failure::Usage(anyhow!("{e}")))?;
            t.set_hyper(family, name, value)
                .map_err(|e| Failure::Usage(anyhow!("config key {key}: {e}")))?;
        }
        t.validate().map_err(|e| Failure::Usage(e.into()))?;
        Ok(t)
    }

    pub fn buckets(&self) -> Result<Vec<u32>, Failure> {
        self.list("buckets")
    }

    pub fn sets(&self) -> Result<Vec<StrategySet>, Failure> {
        self.list("sets")
    }

    pub fn families(&self) -> Result<Vec<Family>, Failure> {
        self.list("families")
    }

    /// Every key in definition order, one `key=value` per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }
}

//! Flat `key=value` experiment configs.
//!
//! One entry per line, `#` starts a comment, and the value runs to the end of
//! the line so map specs can contain `=` themselves:
//!
//! ```text
//! mode=dimension
//! map=cookie_cutter r1=3 r2=3
//! depth=12
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use pressurelab_core::{MapSpec, Potential};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Dimension,
    Pressure,
    Lyapunov,
    Stability,
    Entropy,
    Checks,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dimension => "dimension",
            Mode::Pressure => "pressure",
            Mode::Lyapunov => "lyapunov",
            Mode::Stability => "stability",
            Mode::Entropy => "entropy",
            Mode::Checks => "checks",
        }
    }
}

impl FromStr for Mode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Mode> {
        Ok(match s {
            "dimension" => Mode::Dimension,
            "pressure" => Mode::Pressure,
            "lyapunov" => Mode::Lyapunov,
            "stability" => Mode::Stability,
            "entropy" => Mode::Entropy,
            "checks" => Mode::Checks,
            other => bail!("unknown mode {other:?}"),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_MAP: &str = "cookie_cutter r1=3 r2=3";
pub const DEFAULT_SCHEDULE: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// `None` lets `checks` run over every built-in map.
    pub map: Option<String>,
    pub potential: String,
    /// Word length (dimension), depth cap (pressure), largest period
    /// (lyapunov) or fiber depth `N` (stability, entropy).
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub schedule: Option<Vec<f64>>,
    /// Number of base samples.
    pub seeds: usize,
    /// First base seed.
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Dimension,
            map: None,
            potential: "zero".into(),
            depth: None,
            tol: None,
            schedule: None,
            seeds: 16,
            seed: 0,
            out: PathBuf::from("pressurelab-out"),
        }
    }
}

pub fn parse_schedule(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("schedule entry {v:?} is not a number")))
        .collect()
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| anyhow!("{key}={value} is not a valid number"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
            if !seen.insert(key.to_string()) {
                bail!("line {}: duplicate key {key}", i + 1);
            }
            cfg.set(key, value).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "map" => self.map = Some(value.to_string()),
            "potential" => self.potential = value.to_string(),
            "depth" => self.depth = Some(number(key, value)?),
            "tol" => self.tol = Some(number(key, value)?),
            "schedule" => self.schedule = Some(parse_schedule(value)?),
            "seeds" => self.seeds = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => bail!("unknown key {other:?}"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == Some(0) {
            bail!("depth must be positive");
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("tol must be positive");
            }
        }
        if self.seeds == 0 {
            bail!("seeds must be positive");
        }
        if let Some(s) = &self.schedule {
            if s.is_empty() || s.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
                bail!("schedule entries must be non-negative");
            }
        }
        if let Some(m) = &self.map {
            MapSpec::parse(m).map_err(|e| anyhow!("map: {e}"))?;
        }
        Potential::parse(&self.potential).map_err(|e| anyhow!("potential: {e}"))?;
        Ok(())
    }

    pub fn map_or_default(&self) -> &str {
        self.map.as_deref().unwrap_or(DEFAULT_MAP)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (self.seed..self.seed + self.seeds as u64).collect()
    }

    /// Every field except the output directory, in a fixed order.
    pub fn canonical(&self) -> String {
        let mut out = format!("mode={}\n", self.mode);
        if let Some(m) = &self.map {
            out += &format!("map={}\n", MapSpec::parse(m).map(|s| s.to_string()).unwrap_or_else(|_| m.clone()));
        }
        out += &format!("potential={}\n", self.potential);
        if let Some(d) = self.depth {
            out += &format!("depth={d}\n");
        }
        if let Some(t) = self.tol {
            out += &format!("tol={t}\n");
        }
        if let Some(s) = &self.schedule {
            let s: Vec<String> = s.iter().map(f64::to_string).collect();
            out += &format!("schedule={}\n", s.join(","));
        }
        out + &format!("seeds={}\nseed={}\n", self.seeds, self.seed)
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_with_equals_signs() {
        let cfg = ExperimentConfig::parse(
            "# comment\nmode=stability\nmap=family=cookie_cutter r1=3 r2=3\nschedule=0.2, 0.1\nseeds=4\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Stability);
        assert_eq!(cfg.map.as_deref(), Some("family=cookie_cutter r1=3 r2=3"));
        assert_eq!(cfg.schedule, Some(vec![0.2, 0.1]));
        assert_eq!(cfg.seed_list(), vec![0, 1, 2, 3]);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("mode=plot").is_err());
        assert!(ExperimentConfig::parse("depth=3\ndepth=4").is_err());
        assert!(ExperimentConfig::parse("colour=red").is_err());
        assert!(ExperimentConfig::parse("no equals sign").is_err());
        for text in ["depth=0", "tol=-1", "seeds=0", "schedule=0.1,-0.1", "map=pentagon", "potential=cubic"] {
            assert!(ExperimentConfig::parse(text).unwrap().validate().is_err(), "{text}");
        }
    }

    #[test]
    fn hash_ignores_output_and_spelling() {
        let a = ExperimentConfig::parse("map=cookie_cutter r1=3 r2=3\nout=a").unwrap();
        let b = ExperimentConfig::parse("map=family=cookie_cutter r2=3 r1=3 alpha=1\nout=b").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::parse("map=cookie_cutter r1=3 r2=3\ndepth=10").unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}

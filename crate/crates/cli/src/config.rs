//! Run configuration: `key = value` files, the `CPOLAR_SEED` environment
//! variable and command-line flags, merged in that order of precedence
//! (flags win).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use compound_polar::sim::{SchemeKind, StoppingRule};

pub const SEED_ENV: &str = "CPOLAR_SEED";

const KEYS: &[&str] = &[
    "scheme",
    "block_length",
    "rate",
    "l",
    "ebn0",
    "construction",
    "construction_point",
    "epsilons",
    "construction_trials",
    "trials",
    "target_errors",
    "seed",
    "spec_dir",
    "output",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Exact Bhattacharyya recursion over erasure sub-channels.
    ExactBec,
    /// Genie-aided Monte Carlo over the 16-QAM link.
    McGenie,
}

impl FromStr for Construction {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_bec" => Ok(Self::ExactBec),
            "mc_genie" => Ok(Self::McGenie),
            other => bail!("unknown construction {other:?} (expected exact_bec or mc_genie)"),
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExactBec => "exact_bec",
            Self::McGenie => "mc_genie",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub block_length: usize,
    pub rate: f64,
    pub l: usize,
    pub ebn0_db: Vec<f64>,
    pub construction: Construction,
    /// Eb/N0 in dB for `mc_genie`, erasure rate for `exact_bec`.
    pub construction_point: f64,
    /// Per-sub-channel erasure rates for `exact_bec`; defaults to the
    /// construction point on every sub-channel.
    pub epsilons: Option<Vec<f64>>,
    pub construction_trials: u64,
    pub trials: u64,
    pub target_errors: Option<u64>,
    pub seed: u64,
    pub spec_dir: PathBuf,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Compound,
            block_length: 1024,
            rate: 0.5,
            l: 2,
            ebn0_db: vec![3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5],
            construction: Construction::McGenie,
            construction_point: 5.0,
            epsilons: None,
            construction_trials: 200_000,
            trials: 1_000_000,
            target_errors: Some(100),
            seed: 1,
            spec_dir: PathBuf::from("cpolar-out"),
            output: None,
        }
    }
}

/// Raw `key -> value` layers before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides(BTreeMap<String, String>);

impl Overrides {
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", number + 1))?;
            out.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", number + 1))?;
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown configuration key {key:?}");
        }
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Layers `other` on top of `self`.
    pub fn merge(mut self, other: Overrides) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn build(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        for (key, value) in &self.0 {
            let bad = || format!("invalid value {value:?} for {key}");
            match key.as_str() {
                "scheme" => c.scheme = value.parse().map_err(|e| anyhow!("{e}")).with_context(bad)?,
                "block_length" => c.block_length = value.parse().with_context(bad)?,
                "rate" => c.rate = value.parse().with_context(bad)?,
                "l" => c.l = value.parse().with_context(bad)?,
                "ebn0" => c.ebn0_db = parse_list(value).with_context(bad)?,
                "construction" => c.construction = value.parse()?,
                "construction_point" => c.construction_point = value.parse().with_context(bad)?,
                "epsilons" => c.epsilons = Some(parse_list(value).with_context(bad)?),
                "construction_trials" => c.construction_trials = value.parse().with_context(bad)?,
                "trials" => c.trials = value.parse().with_context(bad)?,
                "target_errors" => {
                    c.target_errors = match value.as_str() {
                        "none" | "0" => None,
                        v => Some(v.parse().with_context(bad)?),
                    }
                }
                "seed" => c.seed = value.parse().with_context(bad)?,
                "spec_dir" => c.spec_dir = PathBuf::from(value),
                "output" => c.output = Some(PathBuf::from(value)),
                _ => unreachable!("keys are checked on insert"),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(Into::into))
        .collect()
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.block_length;
        if self.l == 0 || n == 0 || n % self.l != 0 || !(n / self.l).is_power_of_two() {
            bail!("block length {n} is not l * 2^n for l = {}", self.l);
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            bail!("rate {} not in (0, 1]", self.rate);
        }
        let k = self.rate * n as f64;
        if (k - k.round()).abs() > 1e-9 {
            bail!("rate {} times N = {n} is not an integer", self.rate);
        }
        if self.trials == 0 || self.construction_trials == 0 {
            bail!("trial counts must be positive");
        }
        if self.ebn0_db.iter().any(|v| !v.is_finite()) {
            bail!("Eb/N0 values must be finite");
        }
        if let Some(eps) = &self.epsilons {
            if eps.len() != self.l {
                bail!("{} erasure rates given for l = {}", eps.len(), self.l);
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        (self.rate * self.block_length as f64).round() as usize
    }

    pub fn stopping_rule(&self) -> StoppingRule {
        StoppingRule {
            max_trials: self.trials,
            target_frame_errors: self.target_errors,
        }
    }

    pub fn erasure_rates(&self) -> Vec<f64> {
        self.epsilons
            .clone()
            .unwrap_or_else(|| vec![self.construction_point; self.l])
    }
}

/// Seed from the environment, if set.
pub fn env_overrides() -> Result<Overrides> {
    let mut o = Overrides::default();
    if let Ok(seed) = std::env::var(SEED_ENV) {
        seed.parse::<u64>()
            .with_context(|| format!("{SEED_ENV}={seed:?} is not an integer"))?;
        o.set("seed", &seed)?;
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = Overrides::parse_file("# sweep\nblock_length = 256\nrate=0.25\nebn0 = 4, 5.5\nseed = 3\n").unwrap();
        let mut flags = Overrides::default();
        flags.set("seed", "9").unwrap();
        let c = file.merge(flags).build().unwrap();
        assert_eq!(c.block_length, 256);
        assert_eq!(c.rate, 0.25);
        assert_eq!(c.ebn0_db, vec![4.0, 5.5]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.dimension(), 64);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Overrides::parse_file("n 256").is_err());
        assert!(Overrides::parse_file("colour = red").is_err());
        let build = |text: &str| Overrides::parse_file(text).unwrap().build();
        assert!(build("block_length = 768\nl = 2").is_err());
        assert!(build("block_length = 768\nl = 3").is_ok());
        assert!(build("trials = 0").is_err());
        assert!(build("rate = 0.3").is_err());
        assert!(build("scheme = joint").is_err());
        assert!(build("construction = density").is_err());
        assert!(build("l = 2\nepsilons = 0.1").is_err());
        assert_eq!(build("target_errors = none").unwrap().target_errors, None);
    }
}

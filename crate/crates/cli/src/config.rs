//! Run configuration: flat `key = value` files with flag overrides,
//! resolved into validated domain objects.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coinflow_core::dynamics::ModelKind;
use coinflow_core::groups::GroupDistribution;
use coinflow_core::weights::WeightSpec;

const KNOWN_KEYS: &[&str] = &[
    "model", "weight", "groups", "n", "coins", "temp", "scale", "steps", "seed", "out",
    "replicas", "snapshots", "init",
];

/// Raw settings: file contents first, command-line flags overlaid.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut settings = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            settings.set(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            bail!("unknown config key `{key}` (known: {})", KNOWN_KEYS.join(", "));
        }
        self.map.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key `{key}` = `{raw}`: {e}")),
        }
    }
}

/// A fully resolved run: every field validated, L derived when given as
/// temperature and scale.
#[derive(Debug)]
pub struct RunConfig {
    pub model: ModelKind,
    pub weight: WeightSpec,
    pub groups: GroupDistribution,
    pub n: usize,
    pub l: u64,
    pub temp: f64,
    pub a_n: f64,
    pub steps: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub replicas: usize,
    pub snapshots: u64,
    pub random_init: bool,
    /// Canonical one-line rendering (including the derived L) embedded in
    /// every artifact.
    pub resolved: String,
}

impl RunConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let model = match settings.get("model").unwrap_or("immediate") {
            "immediate" => ModelKind::ImmediateExchange,
            "saving" => ModelKind::RandomSaving,
            "saving_offer" => ModelKind::RandomSavingOffer,
            "reshuffle" => ModelKind::UniformReshuffling,
            other => bail!("unknown model `{other}` (immediate|saving|saving_offer|reshuffle)"),
        };
        let weight_syntax = settings.get("weight").unwrap_or("constant:1.0").to_string();
        let weight: WeightSpec = weight_syntax.parse()?;
        let n: usize = settings.parse("n", 1000)?;
        if n == 0 {
            bail!("n must be positive");
        }
        let groups_syntax = settings.get("groups").unwrap_or("pair_complete").to_string();
        let groups = GroupDistribution::from_config(&groups_syntax, n)?;

        let coins = settings.get("coins");
        let temp_raw = settings.get("temp");
        let scale_raw = settings.get("scale");
        let (l, temp, a_n) = match (coins, temp_raw, scale_raw) {
            (Some(_), None, None) => {
                let l: u64 = settings.parse("coins", 0)?;
                (l, l as f64 / n as f64, 1.0)
            }
            (None, Some(_), Some(_)) => {
                let temp: f64 = settings.parse("temp", 0.0)?;
                let a_n: f64 = settings.parse("scale", 0.0)?;
                if temp <= 0.0 || a_n <= 0.0 || !temp.is_finite() || !a_n.is_finite() {
                    bail!("temp and scale must be positive");
                }
                let l = (n as f64 * a_n * temp).round() as u64;
                (l, temp, a_n)
            }
            (None, None, None) => {
                // Default: one hundred coins per agent, unscaled.
                let l = 100 * n as u64;
                (l, 100.0, 1.0)
            }
            _ => bail!("give either coins, or temp and scale together, not a mixture"),
        };

        let steps: u64 = settings.parse("steps", 100_000)?;
        let seed: u64 = settings.parse("seed", 1)?;
        let out: PathBuf = settings.get("out").unwrap_or("out").into();
        let replicas: usize = settings.parse("replicas", 1)?;
        if replicas == 0 {
            bail!("replicas must be positive");
        }
        let snapshots: u64 = settings.parse("snapshots", 0)?;
        let random_init = match settings.get("init").unwrap_or("constant") {
            "constant" => false,
            "random" => true,
            other => bail!("unknown init `{other}` (constant|random)"),
        };

        let mut resolved = String::new();
        write!(
            resolved,
            "model={} weight={} groups={} n={} coins={} temp={} scale={} steps={} seed={} \
             replicas={} snapshots={} init={}",
            model.name(),
            weight_syntax,
            groups_syntax,
            n,
            l,
            temp,
            a_n,
            steps,
            seed,
            replicas,
            snapshots,
            if random_init { "random" } else { "constant" },
        )
        .unwrap();

        Ok(RunConfig {
            model,
            weight,
            groups,
            n,
            l,
            temp,
            a_n,
            steps,
            seed,
            out,
            replicas,
            snapshots,
            random_init,
            resolved,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, v).unwrap();
        }
        s
    }

    #[test]
    fn defaults_resolve() {
        let config = RunConfig::from_settings(&Settings::default()).unwrap();
        assert_eq!(config.model, ModelKind::ImmediateExchange);
        assert_eq!(config.n, 1000);
        assert_eq!(config.l, 100_000);
        assert_eq!(config.temp, 100.0);
        assert_eq!(config.a_n, 1.0);
        assert!(config.resolved.contains("coins=100000"));
    }

    #[test]
    fn temperature_and_scale_derive_the_coin_total() {
        let config = RunConfig::from_settings(&settings(&[
            ("n", "32"),
            ("temp", "1.0"),
            ("scale", "64"),
        ]))
        .unwrap();
        assert_eq!(config.l, 2048);
        assert_eq!(config.a_n, 64.0);
        assert!(config.resolved.contains("coins=2048"));
    }

    #[test]
    fn coins_and_temperature_are_mutually_exclusive() {
        assert!(RunConfig::from_settings(&settings(&[
            ("coins", "100"),
            ("temp", "1.0"),
            ("scale", "10"),
        ]))
        .is_err());
        assert!(RunConfig::from_settings(&settings(&[("temp", "1.0")])).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_settings(&settings(&[("model", "quantum")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("weight", "table:0,1:zero")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("n", "0")])).is_err());
        assert!(RunConfig::from_settings(&settings(&[("replicas", "0")])).is_err());
        assert!(Settings::default().set("temperature", "1").is_err());
    }

    #[test]
    fn file_parsing_handles_comments_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# a run\nmodel = saving\nn = 10  # agents\n\nseed = 7\n").unwrap();
        let mut s = Settings::from_file(&path).unwrap();
        s.set("seed", "9").unwrap();
        let config = RunConfig::from_settings(&s).unwrap();
        assert_eq!(config.model, ModelKind::RandomSaving);
        assert_eq!(config.n, 10);
        assert_eq!(config.seed, 9);
    }
}

//! Flat `key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Every key a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "problem.kind",
    "problem.eigenvalues",
    "problem.b",
    "problem.start",
    "problem.noise",
    "problem.sigma",
    "problem.w_true",
    "problem.label_sigma",
    "problem.batch",
    "problem.samples",
    "problem.features",
    "problem.classes",
    "problem.data_seed",
    "problem.separation",
    "problem.l2",
    "problem.minibatch",
    "optimizer.kind",
    "optimizer.alpha",
    "optimizer.nu",
    "optimizer.beta",
    "optimizer.nu1",
    "optimizer.nu2",
    "optimizer.beta1",
    "optimizer.beta2",
    "optimizer.eps",
    "optimizer.kp",
    "optimizer.ki",
    "optimizer.kd",
    "optimizer.r",
    "optimizer.gamma",
    "optimizer.delta",
    "optimizer.kappa",
    "optimizer.xi",
    "optimizer.betas",
    "optimizer.gammas",
    "optimizer.h",
    "optimizer.k",
    "optimizer.l",
    "optimizer.m",
    "optimizer.q",
    "optimizer.z",
    "schedule.alpha",
    "schedule.warmup",
    "schedule.decay_every",
    "schedule.decay_factor",
    "run.steps",
    "run.seed",
    "sweep.family",
    "sweep.alpha",
    "sweep.eps",
    "sweep.nu2",
    "sweep.beta2",
    "sweep.nu_grid",
    "sweep.beta_grid",
    "sweep.seeds",
    "sweep.steps",
    "output.path",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value, got `{line}`", n + 1));
            };
            cfg.set(k.trim(), v.trim())
                .map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    /// Sets a key, rejecting unknown names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return err(format!("unknown config key `{key}`"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        match assignment.split_once('=') {
            Some((k, v)) => self.set(k.trim(), v.trim()),
            None => err(format!("expected KEY=VALUE, got `{assignment}`")),
        }
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("bad value `{v}` for `{key}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get(key)?
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        self.str(key).map(|v| parse_list(key, v)).transpose()
    }
}

/// Comma-separated values.
pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse()
                .map_err(|_| ConfigError(format!("bad list entry `{s}` for `{key}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let cfg = Config::parse("# header\n\nrun.steps = 10  # trailing\noptimizer.betas=0,0.9\n").unwrap();
        assert_eq!(cfg.get::<u64>("run.steps").unwrap(), Some(10));
        assert_eq!(cfg.list::<f64>("optimizer.betas").unwrap(), Some(vec![0.0, 0.9]));
        assert_eq!(cfg.get::<f64>("optimizer.nu").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_by_name() {
        let e = Config::parse("run.stepz = 3").unwrap_err();
        assert!(e.0.contains("run.stepz") && e.0.contains("line 1"), "{e}");
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(Config::parse("run.steps").is_err());
        let cfg = Config::parse("run.steps = ten").unwrap();
        assert!(cfg.get::<u64>("run.steps").is_err());
    }

    #[test]
    fn overrides_replace_values() {
        let mut cfg = Config::parse("run.steps = 10").unwrap();
        cfg.apply_override("run.steps=20").unwrap();
        assert_eq!(cfg.require::<u64>("run.steps").unwrap(), 20);
        assert!(cfg.apply_override("nonsense").is_err());
    }
}

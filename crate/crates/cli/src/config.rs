//! Flat key=value configuration files and option resolution.
//!
//! Precedence: command-line flags override config-file values, which
//! override built-in defaults. `PHASEREPO_SEED` is the seed fallback when
//! neither the synthetic spec nor the config provides one.

use std::collections::HashMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default)]
pub struct ConfigMap {
    values: HashMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "config {}:{}: expected key=value, got {line:?}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// flag > config > default.
    pub fn resolve<T: Clone + std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))),
            None => Ok(default),
        }
    }

    pub fn resolve_opt<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))),
            None => Ok(None),
        }
    }
}

pub const SEED_ENV_VAR: &str = "PHASEREPO_SEED";

pub fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV_VAR}: cannot parse {raw:?} as seed"))),
        Err(_) => Ok(None),
    }
}

/// `n=64,m=512,seed=1[,snr=20][,variance=..]` synthetic instance spec.
#[derive(Clone, Debug, Default)]
pub struct SyntheticSpec {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub snr_db: Option<f64>,
    pub variance: Option<f64>,
}

impl SyntheticSpec {
    pub fn parse(raw: &str) -> Result<Self, CliError> {
        let mut spec = SyntheticSpec::default();
        for part in raw.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--synthetic: expected key=value, got {part:?}"))
            })?;
            let bad =
                |k: &str, v: &str| CliError::Usage(format!("--synthetic {k}: cannot parse {v:?}"));
            match key {
                "n" => spec.n = Some(value.parse().map_err(|_| bad(key, value))?),
                "m" => spec.m = Some(value.parse().map_err(|_| bad(key, value))?),
                "seed" => spec.seed = Some(value.parse().map_err(|_| bad(key, value))?),
                "snr" | "snr_db" => {
                    spec.snr_db = Some(value.parse().map_err(|_| bad(key, value))?)
                }
                "variance" => spec.variance = Some(value.parse().map_err(|_| bad(key, value))?),
                other => {
                    return Err(CliError::Usage(format!(
                        "--synthetic: unknown key {other:?} (known: n, m, seed, snr, variance)"
                    )))
                }
            }
        }
        Ok(spec)
    }

    pub fn echo(&self, seed: u64) -> String {
        let mut parts = Vec::new();
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Some(m) = self.m {
            parts.push(format!("m={m}"));
        }
        parts.push(format!("seed={seed}"));
        if let Some(snr) = self.snr_db {
            parts.push(format!("snr={snr}"));
        }
        if let Some(v) = self.variance {
            parts.push(format!("variance={v}"));
        }
        parts.join(",")
    }
}

/// Writes through a temp file in the target directory, renaming on success,
/// so failed runs never leave partial outputs behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(dir) => dir.join(format!(
            ".{}.tmp-{}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            std::process::id()
        )),
        None => Path::new(&format!(
            ".{}.tmp-{}",
            path.display(),
            std::process::id()
        ))
        .to_path_buf(),
    };
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        std::fs::remove_file(&tmp).ok();
        CliError::Usage(format!("cannot finalize {}: {e}", path.display()))
    })
}

use std::path::{Path, PathBuf};

use ats_core::{AnalyzerMode, Error, Result};
use serde::{Deserialize, Serialize};

/// Service settings, read from TOML. Every key can be overridden by an
/// environment variable of the same name, in either upper or lower case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind_address: String,
    /// Event log file. Without one the service keeps everything in memory.
    pub storage_path: Option<PathBuf>,
    pub threshold_path: Option<PathBuf>,
    pub catalog_path: Option<PathBuf>,
    pub admin_token: String,
    /// Clips analyzed at the same time.
    pub workers: usize,
    pub analyzer_mode: AnalyzerMode,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind_address: "127.0.0.1:8080".into(),
            storage_path: None,
            threshold_path: None,
            catalog_path: None,
            admin_token: "admin".into(),
            workers: 4,
            analyzer_mode: AnalyzerMode::Strict,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.admin_token.is_empty() {
            return Err(Error::Config("admin_token must not be empty".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies overrides from the process environment.
    pub fn with_env(self) -> Result<Self> {
        self.with_overrides(|name| std::env::var(name).ok())
    }

    pub fn with_overrides(mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let get = |name: &str| lookup(&name.to_ascii_uppercase()).or_else(|| lookup(name));
        if let Some(v) = get("bind_address") {
            self.bind_address = v;
        }
        if let Some(v) = get("storage_path") {
            self.storage_path = Some(v.into());
        }
        if let Some(v) = get("threshold_path") {
            self.threshold_path = Some(v.into());
        }
        if let Some(v) = get("catalog_path") {
            self.catalog_path = Some(v.into());
        }
        if let Some(v) = get("admin_token") {
            self.admin_token = v;
        }
        if let Some(v) = get("workers") {
            self.workers = v
                .parse()
                .map_err(|_| Error::Config(format!("workers: not a number: {v}")))?;
        }
        if let Some(v) = get("analyzer_mode") {
            self.analyzer_mode = match v.as_str() {
                "strict" => AnalyzerMode::Strict,
                "lenient" => AnalyzerMode::Lenient,
                _ => {
                    return Err(Error::Config(format!(
                        "analyzer_mode: expected strict or lenient, got {v}"
                    )))
                }
            };
        }
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn parses_and_overrides() {
        let cfg = ServiceConfig::from_toml_str(
            "bind_address = \"0.0.0.0:9000\"\nstorage_path = \"/tmp/x.jsonl\"\nadmin_token = \"s3cret\"\n",
        )
        .unwrap();
        assert_eq!(cfg.workers, 4);
        let env: HashMap<&str, &str> = [("BIND_ADDRESS", "127.0.0.1:1"), ("workers", "2")].into();
        let cfg = cfg
            .with_overrides(|k| env.get(k).map(|v| v.to_string()))
            .unwrap();
        assert_eq!(cfg.bind_address, "127.0.0.1:1");
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.admin_token, "s3cret");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ServiceConfig::from_toml_str("workers = 0").is_err());
        assert!(ServiceConfig::from_toml_str("colour = \"red\"").is_err());
        let bad = ServiceConfig::default()
            .with_overrides(|k| (k == "ANALYZER_MODE").then(|| "loose".into()));
        assert!(bad.is_err());
    }
}

//! Key-value configuration file for the endpoint client and run budgets.
//!
//! One `key = value` pair per line; `#` starts a comment. Recognized keys:
//!
//! ```text
//! endpoint_url = https://models.internal/complete
//! auth_header  = Bearer <token>
//! timeout_secs = 30
//! retries      = 2
//! ```
//!
//! The `UIREPLAY_AUTH` environment variable overrides `auth_header`;
//! credentials are the only thing the environment may override.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub endpoint_url: Option<String>,
    pub auth_header: Option<String>,
    pub timeout_secs: Option<u64>,
    pub retries: Option<u32>,
}

pub const AUTH_ENV_VAR: &str = "UIREPLAY_AUTH";

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut pairs = HashMap::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", line_no + 1))?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut cfg = FileConfig::default();
        for (key, value) in pairs {
            match key.as_str() {
                "endpoint_url" => cfg.endpoint_url = Some(value),
                "auth_header" => cfg.auth_header = Some(value),
                "timeout_secs" => {
                    cfg.timeout_secs =
                        Some(value.parse().map_err(|_| {
                            format!("timeout_secs must be a number, got `{value}`")
                        })?)
                }
                "retries" => {
                    cfg.retries = Some(
                        value
                            .parse()
                            .map_err(|_| format!("retries must be a number, got `{value}`"))?,
                    )
                }
                other => return Err(format!("unknown config key `{other}`")),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// Auth header after the credentials-only environment override.
    pub fn effective_auth(&self) -> Option<String> {
        std::env::var(AUTH_ENV_VAR)
            .ok()
            .or_else(|| self.auth_header.clone())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs.unwrap_or(30))
    }
}

//! Server configuration: defaults, then an optional TOML file, then `RINGVAULT_*`
//! environment overrides.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use ringvault_core::graphical::BUNDLED_ASSETS_DIR;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("environment variable {name}: cannot parse {value:?}")]
    Env { name: String, value: String },
    #[error("invalid setting: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    /// Defaults to `<data_dir>/outbox.txt`.
    pub outbox_path: Option<PathBuf>,
    /// Defaults to the bundled manifest.
    pub catalog_path: Option<PathBuf>,
    pub assets_dir: PathBuf,
    pub otp_ttl_secs: u64,
    pub graphical_ttl_secs: u64,
    pub grant_ttl_secs: u64,
    pub session_idle_secs: u64,
    pub lockout_threshold: u32,
    pub lockout_cooldown_secs: u64,
    pub password_iterations: u32,
    pub max_upload_bytes: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("ringvault-data"),
            outbox_path: None,
            catalog_path: None,
            assets_dir: PathBuf::from(BUNDLED_ASSETS_DIR),
            otp_ttl_secs: 600,
            graphical_ttl_secs: 600,
            grant_ttl_secs: 60,
            session_idle_secs: 30 * 60,
            lockout_threshold: 5,
            lockout_cooldown_secs: 15 * 60,
            password_iterations: 100_000,
            max_upload_bytes: 64 * 1024 * 1024,
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, value: String) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Env { name: name.to_owned(), value })
}

impl ServerConfig {
    /// Defaults, overlaid with `path` if given, overlaid with the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        macro_rules! env_override {
            ($name:literal, $field:expr) => {
                if let Some(v) = lookup($name) {
                    $field = parse_env($name, v)?;
                }
            };
            ($name:literal, opt $field:expr) => {
                if let Some(v) = lookup($name) {
                    $field = Some(parse_env($name, v)?);
                }
            };
        }
        env_override!("RINGVAULT_LISTEN", self.listen);
        env_override!("RINGVAULT_DATA_DIR", self.data_dir);
        env_override!("RINGVAULT_OUTBOX", opt self.outbox_path);
        env_override!("RINGVAULT_CATALOG", opt self.catalog_path);
        env_override!("RINGVAULT_ASSETS_DIR", self.assets_dir);
        env_override!("RINGVAULT_OTP_TTL", self.otp_ttl_secs);
        env_override!("RINGVAULT_GRAPHICAL_TTL", self.graphical_ttl_secs);
        env_override!("RINGVAULT_GRANT_TTL", self.grant_ttl_secs);
        env_override!("RINGVAULT_SESSION_IDLE", self.session_idle_secs);
        env_override!("RINGVAULT_LOCKOUT_THRESHOLD", self.lockout_threshold);
        env_override!("RINGVAULT_LOCKOUT_COOLDOWN", self.lockout_cooldown_secs);
        env_override!("RINGVAULT_PASSWORD_ITERATIONS", self.password_iterations);
        env_override!("RINGVAULT_MAX_UPLOAD_BYTES", self.max_upload_bytes);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("otp_ttl_secs", self.otp_ttl_secs),
            ("graphical_ttl_secs", self.graphical_ttl_secs),
            ("grant_ttl_secs", self.grant_ttl_secs),
            ("session_idle_secs", self.session_idle_secs),
            ("lockout_threshold", u64::from(self.lockout_threshold)),
            ("password_iterations", u64::from(self.password_iterations)),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn outbox_path(&self) -> PathBuf {
        self.outbox_path.clone().unwrap_or_else(|| self.data_dir.join("outbox.txt"))
    }
}

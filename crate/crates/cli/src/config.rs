use std::env;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_ENV: &str = "RINGVAULT_CONFIG";
pub const DEFAULT_SERVER: &str = "http://127.0.0.1:8080";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    server_url: Option<String>,
    token_path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub server_url: String,
    pub token_path: PathBuf,
    pub session_token: Option<String>,
}

fn config_home() -> PathBuf {
    if let Some(x) = env::var_os("XDG_CONFIG_HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(x).join("ringvault");
    }
    match env::var_os("HOME").filter(|v| !v.is_empty()) {
        Some(h) => PathBuf::from(h).join(".config").join("ringvault"),
        None => PathBuf::from(".ringvault"),
    }
}

impl ClientConfig {
    /// Reads the file named by `RINGVAULT_CONFIG` (or the default location if it
    /// exists), then applies the `--server` override and loads any cached token.
    pub fn load(server_override: Option<&str>) -> Result<Self, CliError> {
        let (path, required) = match env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()) {
            Some(p) => (PathBuf::from(p), true),
            None => (config_home().join("config.toml"), false),
        };
        let file = match fs::read_to_string(&path) {
            Ok(text) => toml::from_str::<ConfigFile>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound && !required => ConfigFile::default(),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let token_path = match file.token_path {
            Some(p) if p.is_relative() => base.join(p),
            Some(p) => p,
            None => base.join("session"),
        };
        let server_url = server_override
            .map(str::to_owned)
            .or(file.server_url)
            .unwrap_or_else(|| DEFAULT_SERVER.to_owned());
        let session_token = match fs::read_to_string(&token_path) {
            Ok(t) => Some(t.trim().to_owned()).filter(|t| !t.is_empty()),
            Err(_) => None,
        };
        Ok(ClientConfig { server_url: server_url.trim_end_matches('/').to_owned(), token_path, session_token })
    }

    /// Caches the session token, readable only by the current user.
    pub fn save_token(&mut self, token: &str) -> Result<(), CliError> {
        let path = &self.token_path;
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o600)).map_err(|e| CliError::io(tmp.path(), e))?;
        }
        tmp.write_all(token.as_bytes()).map_err(|e| CliError::io(path, e))?;
        tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
        self.session_token = Some(token.to_owned());
        Ok(())
    }
}

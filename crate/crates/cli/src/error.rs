use std::path::PathBuf;

use ringvault_core::classification::RatingError;
use ringvault_core::crypto::CryptoError;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_AUTH: u8 = 3;
pub const EXIT_SERVER: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Rating(#[from] RatingError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("server rejected the request ({status} {code}): {message}")]
    Api { status: u16, code: String, message: String },
    #[error("cannot reach server: {0}")]
    Transport(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Rating(_) | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Crypto(CryptoError::BadPadding) => EXIT_AUTH,
            CliError::Crypto(_) => EXIT_VALIDATION,
            CliError::Api { status, .. } => match status {
                401 | 403 | 429 => EXIT_AUTH,
                400..=499 => EXIT_VALIDATION,
                _ => EXIT_SERVER,
            },
            CliError::Transport(_) => EXIT_SERVER,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn api(status: u16) -> CliError {
        CliError::Api { status, code: String::new(), message: String::new() }
    }

    #[test]
    fn http_statuses_map_to_exit_codes() {
        for s in [401, 403, 429] {
            assert_eq!(api(s).exit_code(), EXIT_AUTH, "{s}");
        }
        for s in [400, 404, 409, 413] {
            assert_eq!(api(s).exit_code(), EXIT_VALIDATION, "{s}");
        }
        for s in [500, 502, 503] {
            assert_eq!(api(s).exit_code(), EXIT_SERVER, "{s}");
        }
    }

    #[test]
    fn wrong_passphrase_is_an_auth_failure() {
        assert_eq!(CliError::Crypto(CryptoError::BadPadding).exit_code(), EXIT_AUTH);
        assert_eq!(CliError::Transport("refused".into()).exit_code(), EXIT_SERVER);
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_VALIDATION);
    }
}

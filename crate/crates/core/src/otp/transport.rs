use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, SecondsFormat};
use thiserror::Error;

use super::{OtpCode, CODE_LEN};
use crate::clock::Clock;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("message delivery failed: {0}")]
    Delivery(String),
    #[error("field {0} contains a tab or newline")]
    BadField(&'static str),
}

/// Delivers OTP messages to a mobile number.
pub trait SmsTransport: Send + Sync {
    fn deliver(&self, mobile: &str, body: &str) -> Result<(), TransportError>;
}

impl<T: SmsTransport + ?Sized> SmsTransport for Arc<T> {
    fn deliver(&self, mobile: &str, body: &str) -> Result<(), TransportError> {
        (**self).deliver(mobile, body)
    }
}

pub fn message_body(code: &OtpCode, ttl_seconds: u64) -> String {
    let minutes = ttl_seconds.div_ceil(60);
    format!("Your RingVault one-time password is {code}. It expires in {minutes} minutes.")
}

/// Finds the first ten-hex-digit word in a message body.
pub fn extract_code(body: &str) -> Option<OtpCode> {
    body.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| w.len() == CODE_LEN)
        .find_map(|w| OtpCode::parse(w).ok())
}

fn check_field(name: &'static str, value: &str) -> Result<(), TransportError> {
    if value.contains(['\t', '\n', '\r']) {
        Err(TransportError::BadField(name))
    } else {
        Ok(())
    }
}

/// One line of the outbox file: `timestamp TAB mobile TAB body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutboxRecord {
    pub timestamp: String,
    pub mobile: String,
    pub body: String,
}

impl OutboxRecord {
    pub fn parse_line(line: &str) -> Option<Self> {
        let mut parts = line.splitn(3, '\t');
        Some(OutboxRecord {
            timestamp: parts.next()?.to_owned(),
            mobile: parts.next()?.to_owned(),
            body: parts.next()?.to_owned(),
        })
    }

    pub fn code(&self) -> Option<OtpCode> {
        extract_code(&self.body)
    }
}

/// Appends each message as a line to a local file, standing in for an SMS gateway.
pub struct OutboxTransport {
    path: PathBuf,
    clock: Arc<dyn Clock>,
    lock: Mutex<()>,
}

impl OutboxTransport {
    pub fn new(path: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Self {
        OutboxTransport { path: path.into(), clock, lock: Mutex::new(()) }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn read_records(path: impl AsRef<Path>) -> io::Result<Vec<OutboxRecord>> {
        match fs::read_to_string(path) {
            Ok(text) => Ok(text.lines().filter_map(OutboxRecord::parse_line).collect()),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    /// Most recent code sent to `mobile`, if any.
    pub fn latest_code_for(path: impl AsRef<Path>, mobile: &str) -> io::Result<Option<OtpCode>> {
        Ok(Self::read_records(path)?
            .into_iter()
            .rev()
            .filter(|r| r.mobile == mobile)
            .find_map(|r| r.code()))
    }
}

impl SmsTransport for OutboxTransport {
    fn deliver(&self, mobile: &str, body: &str) -> Result<(), TransportError> {
        check_field("mobile", mobile)?;
        check_field("body", body)?;
        let now = i64::try_from(self.clock.now()).unwrap_or(i64::MAX);
        let stamp = DateTime::from_timestamp(now, 0)
            .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
            .unwrap_or_default();
        let line = format!("{stamp}\t{mobile}\t{body}\n");

        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(parent) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| TransportError::Delivery(e.to_string()))?;
        }
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(|e| TransportError::Delivery(e.to_string()))
    }
}

/// Keeps messages in memory. Useful in tests and embedded setups.
#[derive(Default)]
pub struct MemoryTransport {
    messages: Mutex<Vec<(String, String)>>,
}

impl MemoryTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn messages(&self) -> Vec<(String, String)> {
        self.messages.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn last_code(&self) -> Option<OtpCode> {
        self.messages().last().and_then(|(_, body)| extract_code(body))
    }
}

impl SmsTransport for MemoryTransport {
    fn deliver(&self, mobile: &str, body: &str) -> Result<(), TransportError> {
        check_field("mobile", mobile)?;
        check_field("body", body)?;
        self.messages
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push((mobile.to_owned(), body.to_owned()));
        Ok(())
    }
}

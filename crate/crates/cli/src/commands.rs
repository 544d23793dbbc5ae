use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ringvault_core::classification::{classify, validate_rating};
use ringvault_core::crypto::{decrypt_from_bytes, derive_key, encrypt_to_bytes, EncryptionKey};
use ringvault_core::graphical::{enroll, ImageCatalog, ImageId};
use serde::Deserialize;
use serde_json::json;

use crate::client::ApiClient;
use crate::config::ClientConfig;
use crate::error::CliError;
use crate::prompt::Prompter;

pub const PASSPHRASE_ENV: &str = "RINGVAULT_PASSPHRASE";

/// Where a passphrase comes from when not typed interactively.
#[derive(Debug, Clone, Default)]
pub struct PassphraseSource {
    pub file: Option<PathBuf>,
    pub env: Option<String>,
}

impl PassphraseSource {
    pub fn from_env(file: Option<PathBuf>) -> Self {
        PassphraseSource { file, env: std::env::var(PASSPHRASE_ENV).ok() }
    }

    fn key(&self, prompter: &mut dyn Prompter) -> Result<EncryptionKey, CliError> {
        let phrase = if let Some(path) = &self.file {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            text.trim_end_matches(['\r', '\n']).to_owned()
        } else if let Some(p) = &self.env {
            p.clone()
        } else {
            prompter.secret("Passphrase: ").map_err(|e| CliError::Usage(format!("no passphrase: {e}")))?
        };
        Ok(derive_key(&phrase)?)
    }
}

#[derive(Debug, Deserialize)]
struct ObjectInfo {
    object_id: String,
    name: String,
    ring: u8,
    confidentiality: u8,
    integrity: u8,
    availability: u8,
    encrypted: bool,
    size_bytes: u64,
}

#[derive(Debug, Deserialize)]
struct Challenge {
    challenge_id: String,
    kind: String,
    #[serde(default)]
    presented_sets: Option<Vec<Vec<ImageId>>>,
}

#[derive(Debug, Deserialize)]
struct Grant {
    grant_id: String,
}

#[derive(Debug, Deserialize)]
struct Download {
    object: ObjectInfo,
    payload_b64: String,
}

#[derive(Debug, Deserialize)]
struct Session {
    token: String,
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Writes via a sibling temp file so a failure never leaves partial output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

pub fn parse_choices(text: &str) -> Result<Vec<ImageId>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<ImageId>().map_err(|_| CliError::Usage(format!("bad image id {s:?}"))))
        .collect()
}

pub fn cmd_classify(out: &mut dyn Write, c: i64, i: i64, a: i64) -> Result<(), CliError> {
    let rating = validate_rating(c, i, a)?;
    writeln!(out, "{}", classify(&rating).level()).map_err(out_err)
}

pub fn cmd_encrypt(
    input: &Path,
    output: &Path,
    passphrase: &PassphraseSource,
    prompter: &mut dyn Prompter,
) -> Result<(), CliError> {
    let key = passphrase.key(prompter)?;
    let plaintext = read_file(input)?;
    write_atomic(output, &encrypt_to_bytes(&plaintext, &key, &mut rand::rng()))
}

pub fn cmd_decrypt(
    input: &Path,
    output: &Path,
    passphrase: &PassphraseSource,
    prompter: &mut dyn Prompter,
) -> Result<(), CliError> {
    let key = passphrase.key(prompter)?;
    let envelope = read_file(input)?;
    write_atomic(output, &decrypt_from_bytes(&envelope, &key)?)
}

fn fetch_catalog(api: &ApiClient) -> Result<ImageCatalog, CliError> {
    let value: serde_json::Value = api.get("/catalog", false)?;
    ImageCatalog::from_json(&value.to_string()).map_err(|e| CliError::Transport(format!("bad catalog: {e}")))
}

fn render_sets(out: &mut dyn Write, catalog: &ImageCatalog, sets: &[Vec<ImageId>]) -> Result<(), CliError> {
    for (k, ids) in sets.iter().enumerate() {
        let name = catalog.sets().get(k).map_or("", |s| s.name.as_str());
        writeln!(out, "Set {} ({name}):", k + 1).map_err(out_err)?;
        for (n, id) in ids.iter().enumerate() {
            let label = catalog.entry(*id).map_or("?", |e| e.label.as_str());
            writeln!(out, "  {:>2}. {id} — {label}", n + 1).map_err(out_err)?;
        }
    }
    Ok(())
}

pub struct RegisterArgs {
    pub username: String,
    pub email: String,
    pub mobile: String,
    pub password: Option<String>,
    pub choices: Option<Vec<ImageId>>,
}

pub fn cmd_register(
    out: &mut dyn Write,
    config: &ClientConfig,
    args: RegisterArgs,
    prompter: &mut dyn Prompter,
) -> Result<(), CliError> {
    let api = ApiClient::new(&config.server_url, None)?;
    let catalog = fetch_catalog(&api)?;
    let choices = match args.choices {
        Some(c) => c,
        None => {
            let sets: Vec<Vec<ImageId>> = (0..catalog.sets().len()).map(|k| catalog.set_ids(k)).collect();
            render_sets(out, &catalog, &sets)?;
            out.flush().map_err(out_err)?;
            let line = prompter
                .line("Pick one image id from each set, comma-separated: ")
                .map_err(|e| CliError::Usage(e.to_string()))?;
            parse_choices(&line)?
        }
    };
    enroll(&catalog, &choices).map_err(|e| CliError::Usage(e.to_string()))?;
    let password = match args.password {
        Some(p) => p,
        None => prompter.secret("Password: ").map_err(|e| CliError::Usage(format!("no password: {e}")))?,
    };
    let body = json!({
        "username": args.username,
        "password": password,
        "email": args.email,
        "mobile": args.mobile,
        "graphical": choices,
    });
    let account: serde_json::Value = api.post("/register", Some(&body), false)?;
    writeln!(out, "registered {} ({})", args.username, account["user_id"].as_str().unwrap_or("?")).map_err(out_err)
}

pub fn cmd_login(
    out: &mut dyn Write,
    config: &mut ClientConfig,
    username: &str,
    password: Option<String>,
    prompter: &mut dyn Prompter,
) -> Result<(), CliError> {
    let password = match password {
        Some(p) => p,
        None => prompter.secret("Password: ").map_err(|e| CliError::Usage(format!("no password: {e}")))?,
    };
    let api = ApiClient::new(&config.server_url, None)?;
    let session: Session = api.post("/login", Some(&json!({"username": username, "password": password})), false)?;
    config.save_token(&session.token)?;
    writeln!(out, "logged in as {username}").map_err(out_err)
}

pub struct PutArgs {
    pub path: PathBuf,
    pub name: Option<String>,
    pub confidentiality: i64,
    pub integrity: i64,
    pub availability: i64,
    pub encrypted: bool,
}

pub fn cmd_put(
    out: &mut dyn Write,
    config: &ClientConfig,
    args: PutArgs,
    passphrase: &PassphraseSource,
    prompter: &mut dyn Prompter,
) -> Result<(), CliError> {
    validate_rating(args.confidentiality, args.integrity, args.availability)?;
    let mut payload = read_file(&args.path)?;
    if args.encrypted {
        let key = passphrase.key(prompter)?;
        payload = encrypt_to_bytes(&payload, &key, &mut rand::rng());
    }
    let name = match args.name {
        Some(n) => n,
        None => args
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| CliError::Usage("cannot derive an object name from the path".into()))?,
    };
    let api = ApiClient::new(&config.server_url, config.session_token.clone())?;
    let body = json!({
        "name": name,
        "payload_b64": B64.encode(&payload),
        "confidentiality": args.confidentiality,
        "integrity": args.integrity,
        "availability": args.availability,
        "encrypted": args.encrypted,
    });
    let obj: ObjectInfo = api.post("/objects", Some(&body), true)?;
    writeln!(out, "object_id: {}", obj.object_id).map_err(out_err)?;
    writeln!(out, "ring: {}", obj.ring).map_err(out_err)
}

pub fn cmd_list(out: &mut dyn Write, config: &ClientConfig) -> Result<(), CliError> {
    let api = ApiClient::new(&config.server_url, config.session_token.clone())?;
    let objects: Vec<ObjectInfo> = api.get("/objects", true)?;
    for o in objects {
        writeln!(
            out,
            "{}  ring {}  cia {}/{}/{}  {:>10} bytes  {}{}",
            o.object_id,
            o.ring,
            o.confidentiality,
            o.integrity,
            o.availability,
            o.size_bytes,
            o.name,
            if o.encrypted { "  (encrypted)" } else { "" },
        )
        .map_err(out_err)?;
    }
    Ok(())
}

pub struct GetArgs {
    pub object_id: String,
    pub output: Option<PathBuf>,
    pub otp: Option<String>,
    pub password: Option<String>,
    pub choices: Option<Vec<ImageId>>,
    pub decrypt: bool,
}

fn safe_file_name(name: &str) -> Option<PathBuf> {
    Path::new(name).file_name().map(PathBuf::from).filter(|p| p.as_os_str() != "." && p.as_os_str() != "..")
}

pub fn cmd_get(
    out: &mut dyn Write,
    config: &ClientConfig,
    args: GetArgs,
    passphrase: &PassphraseSource,
    prompter: &mut dyn Prompter,
) -> Result<(), CliError> {
    let api = ApiClient::new(&config.server_url, config.session_token.clone())?;
    let challenge: Challenge = api.post(&format!("/objects/{}/access-request", args.object_id), None, true)?;
    let ask = |prompter: &mut dyn Prompter, msg: &str| {
        prompter.line(msg).map_err(|e| CliError::Usage(format!("no answer: {e}")))
    };
    let answer = match challenge.kind.as_str() {
        "otp" => {
            let code = match args.otp {
                Some(c) => c,
                None => ask(prompter, "Enter the one-time password sent to your phone: ")?,
            };
            json!({ "otp": code.trim() })
        }
        "password_reentry" => {
            let pw = match args.password {
                Some(p) => p,
                None => prompter.secret("Re-enter your password: ").map_err(|e| CliError::Usage(format!("no password: {e}")))?,
            };
            json!({ "password": pw })
        }
        "graphical" => {
            let sets = challenge
                .presented_sets
                .ok_or_else(|| CliError::Transport("graphical challenge without image sets".into()))?;
            let catalog = fetch_catalog(&api)?;
            render_sets(out, &catalog, &sets)?;
            out.flush().map_err(out_err)?;
            let choices = match args.choices {
                Some(c) => c,
                None => parse_choices(&ask(prompter, "Your image from each set (ids, comma-separated): ")?)?,
            };
            json!({ "choices": choices })
        }
        other => return Err(CliError::Transport(format!("unknown challenge kind {other:?}"))),
    };
    let grant: Grant = api.post(&format!("/challenges/{}/answer", challenge.challenge_id), Some(&answer), true)?;
    let download: Download = api.get(&format!("/download/{}", grant.grant_id), true)?;
    let mut bytes = B64
        .decode(download.payload_b64.as_bytes())
        .map_err(|e| CliError::Transport(format!("bad payload: {e}")))?;
    if args.decrypt {
        if !download.object.encrypted {
            return Err(CliError::Usage("object was not uploaded encrypted".into()));
        }
        let key = passphrase.key(prompter)?;
        bytes = decrypt_from_bytes(&bytes, &key)?;
    }
    let output = match args.output {
        Some(p) => p,
        None => safe_file_name(&download.object.name)
            .ok_or_else(|| CliError::Usage("object name is not a usable file name; pass --output".into()))?,
    };
    write_atomic(&output, &bytes)?;
    writeln!(out, "saved {} bytes to {}", bytes.len(), output.display()).map_err(out_err)
}

//! Client for a RingVault server.
//!
//! Envelopes are built and opened locally; passphrases and keys never leave
//! the process.

pub mod client;
pub mod commands;
pub mod config;
pub mod error;
pub mod prompt;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{GetArgs, PassphraseSource, PutArgs, RegisterArgs};
use crate::config::ClientConfig;
use crate::error::{CliError, EXIT_OK};
use crate::prompt::Prompter;

#[derive(Debug, Parser)]
#[command(name = "ringvault", version, about = "RingVault client")]
pub struct Cli {
    /// Server base URL; overrides the config file.
    #[arg(long, global = true, env = "RINGVAULT_SERVER")]
    pub server: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an account and enroll a graphical password.
    Register {
        #[arg(long)]
        username: String,
        #[arg(long)]
        email: String,
        #[arg(long)]
        mobile: String,
        #[arg(long, env = "RINGVAULT_PASSWORD", hide_env_values = true)]
        password: Option<String>,
        /// One image id per set, e.g. 3,12,20.
        #[arg(long, value_parser = parse_choices)]
        choices: Option<Choices>,
    },
    /// Start a session and cache its token.
    Login {
        #[arg(long)]
        username: String,
        #[arg(long, env = "RINGVAULT_PASSWORD", hide_env_values = true)]
        password: Option<String>,
    },
    /// Print the protection ring for a CIA rating without contacting the server.
    Classify { confidentiality: i64, integrity: i64, availability: i64 },
    /// Wrap a file in a DES-CBC envelope.
    Encrypt {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        passphrase_file: Option<PathBuf>,
    },
    /// Open an envelope produced by `encrypt`.
    Decrypt {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        passphrase_file: Option<PathBuf>,
    },
    /// Upload a file with its CIA rating.
    Put {
        path: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        confidentiality: i64,
        #[arg(long, allow_negative_numbers = true)]
        integrity: i64,
        #[arg(long, allow_negative_numbers = true)]
        availability: i64,
        /// Encrypt locally before upload.
        #[arg(long)]
        encrypted: bool,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        passphrase_file: Option<PathBuf>,
    },
    /// Answer the object's ring challenge and download it.
    Get {
        object_id: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        otp: Option<String>,
        #[arg(long, env = "RINGVAULT_PASSWORD", hide_env_values = true)]
        password: Option<String>,
        #[arg(long, value_parser = parse_choices)]
        choices: Option<Choices>,
        /// Open the downloaded envelope locally.
        #[arg(long)]
        decrypt: bool,
        #[arg(long)]
        passphrase_file: Option<PathBuf>,
    },
    /// List your objects.
    List,
}

/// Comma-separated image ids, one per set.
#[derive(Debug, Clone)]
pub struct Choices(pub Vec<u32>);

fn parse_choices(s: &str) -> Result<Choices, String> {
    commands::parse_choices(s).map(Choices).map_err(|e| e.to_string())
}

pub fn execute(cli: Cli, out: &mut dyn Write, prompter: &mut dyn Prompter) -> Result<(), CliError> {
    if let Command::Classify { confidentiality, integrity, availability } = cli.command {
        return commands::cmd_classify(out, confidentiality, integrity, availability);
    }
    let mut config = ClientConfig::load(cli.server.as_deref())?;
    match cli.command {
        Command::Register { username, email, mobile, password, choices } => commands::cmd_register(
            out,
            &config,
            RegisterArgs { username, email, mobile, password, choices: choices.map(|c| c.0) },
            prompter,
        ),
        Command::Login { username, password } => commands::cmd_login(out, &mut config, &username, password, prompter),
        Command::Classify { .. } => unreachable!(),
        Command::Encrypt { input, output, passphrase_file } => {
            commands::cmd_encrypt(&input, &output, &PassphraseSource::from_env(passphrase_file), prompter)
        }
        Command::Decrypt { input, output, passphrase_file } => {
            commands::cmd_decrypt(&input, &output, &PassphraseSource::from_env(passphrase_file), prompter)
        }
        Command::Put { path, confidentiality, integrity, availability, encrypted, name, passphrase_file } => {
            commands::cmd_put(
                out,
                &config,
                PutArgs { path, name, confidentiality, integrity, availability, encrypted },
                &PassphraseSource::from_env(passphrase_file),
                prompter,
            )
        }
        Command::Get { object_id, output, otp, password, choices, decrypt, passphrase_file } => commands::cmd_get(
            out,
            &config,
            GetArgs { object_id, output, otp, password, choices: choices.map(|c| c.0), decrypt },
            &PassphraseSource::from_env(passphrase_file),
            prompter,
        ),
        Command::List => commands::cmd_list(out, &config),
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, prompter: &mut dyn Prompter) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { error::EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli, out, prompter) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ringvault: {e}");
            e.exit_code()
        }
    }
}

//! The `plexflow` command line: profiles, publishing, search, injection,
//! execution, analytics and the registry service.

mod commands;
pub mod http;
pub mod server;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plexflow_core::registry::RegistryError;

#[derive(Debug, Parser)]
#[command(name = "plexflow", version, about = "Publish, find, reuse and run semantically described workflows")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Registry service URL or local data directory [default: ~/.plexflow/registry]
    #[arg(long, global = true, env = "PLEXFLOW_REGISTRY")]
    pub registry: Option<String>,
    /// Profile file [default: ~/.plexflow/profile.yaml]
    #[arg(long, global = true, env = "PLEXFLOW_PROFILE")]
    pub profile: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manage the publishing identity
    #[command(subcommand)]
    Profile(ProfileCommand),
    /// Publish a step or workflow manifest
    Publish {
        manifest: PathBuf,
        /// Print the signed TriG instead of publishing
        #[arg(long)]
        dry_run: bool,
        /// Creation time (RFC 3339); defaults to SOURCE_DATE_EPOCH, then now
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Search published steps and workflows
    Search { query: Vec<String> },
    /// List published records, optionally of one kind
    List {
        #[arg(long)]
        kind: Option<String>,
    },
    /// Print a published nanopub as TriG
    Fetch {
        uri: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print a code template for a published step
    Inject {
        uri: String,
        /// Print the step or workflow manifest instead
        #[arg(long)]
        manifest: bool,
    },
    /// Execute a workflow manifest or a published workflow
    Run {
        target: String,
        /// Workflow input as name=value (values may be tagged: int:, float:, bool:, str:)
        #[arg(long = "input", short = 'i', value_name = "NAME=VALUE")]
        inputs: Vec<String>,
        /// Publish the execution record (target must be a published workflow)
        #[arg(long)]
        publish_prov: bool,
        /// Per-step timeout for shell steps, in seconds
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Run one of the built-in analytics queries
    Stats {
        #[arg(value_enum)]
        which: Stat,
    },
    /// Run a query from a file ("-" reads stdin)
    Query { file: PathBuf },
    /// Serve a registry over HTTP
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Data directory [default: the local registry directory]
        #[arg(long)]
        data: Option<PathBuf>,
        /// Directory of static web UI assets to serve at /
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Verify a nanopub file or published URI
    Verify { target: String },
}

#[derive(Debug, Subcommand)]
pub enum ProfileCommand {
    /// Generate a key pair and profile file
    Init {
        #[arg(long)]
        name: String,
        #[arg(long)]
        orcid: Option<String>,
        /// Replace an existing profile
        #[arg(long)]
        force: bool,
    },
    /// Show the current profile
    Show,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stat {
    Reuse,
    Executions,
    PlanSizes,
}

/// A failed command; user errors exit 1, everything else 2.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
    /// The command already printed its outcome; only the exit code remains.
    Reported(u8),
}

impl CliError {
    pub fn user(msg: impl fmt::Display) -> Self {
        CliError::User(msg.to_string())
    }

    pub fn internal(msg: impl fmt::Display) -> Self {
        CliError::Internal(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
            CliError::Reported(code) => *code,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) | CliError::Internal(m) => f.write_str(m),
            CliError::Reported(code) => write!(f, "exit status {code}"),
        }
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        match &e {
            RegistryError::Io(_) | RegistryError::Corrupt { .. } | RegistryError::Transport(_) => CliError::internal(e),
            RegistryError::Remote { status, .. } if *status >= 500 => CliError::internal(e),
            RegistryError::Partial { cause, .. } if matches!(**cause, RegistryError::Io(_) | RegistryError::Transport(_)) => {
                CliError::internal(e)
            }
            _ => CliError::user(e),
        }
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let format = cli.global.format;
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Reported(code)) => ExitCode::from(code),
        Err(e) => {
            if format == Format::Json {
                println!("{}", serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magicsq::experiment::SettingPolicy;
use magicsq::square::Variant;

mod classical;
mod eigen;
mod run;
mod verify;

/// Exit status when a rule or identity check fails.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for bad flags (clap also uses 2).
pub const EXIT_USAGE: u8 = 2;
/// Exit status for I/O or runtime failures such as a busy listen address.
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "magicsq",
    version,
    about = "Magic-square Bell experiment: simulate, verify, analyze, serve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a batch of rounds and report outcome frequencies and rule violations.
    Run(RunArgs),
    /// Check the operator identities, eigenbases, and no-signaling.
    Verify(CommonArgs),
    /// Enumerate colorings and compute classical game values.
    Classical(CommonArgs),
    /// Print the joint eigenbasis of every setting.
    Eigen(CommonArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Square variant: `standard` or `signed`.
    #[arg(long, default_value = "standard", value_parser = parse_variant)]
    pub variant: Variant,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// `random`, `cleve` (Alice rows, Bob columns), or `fixed:<A>:<B>`.
    #[arg(long, default_value = "random", value_parser = parse_policy)]
    pub policy: SettingPolicy,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,

    /// Append each session's records to `<dir>/<id>.jsonl`.
    #[arg(long)]
    journal_dir: Option<PathBuf>,

    /// Allowed CORS origin; any when omitted.
    #[arg(long)]
    cors_origin: Option<String>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: magicsq::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<SettingPolicy, String> {
    s.parse().map_err(|e: magicsq::Error| e.to_string())
}

fn serve(args: ServeArgs) -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let config = magicsq_service::ServiceConfig {
        journal_dir: args.journal_dir,
        cors_origin: args.cors_origin,
    };
    let result = runtime.block_on(async {
        tokio::select! {
            r = magicsq_service::serve(args.listen, config) => r,
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot serve on {}: {e}", args.listen);
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Command::Serve(args) = cli.command {
        return serve(args);
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Run(args) => run::run(&args, &mut out),
        Command::Verify(args) => verify::verify(&args, &mut out),
        Command::Classical(args) => classical::classical(&args, &mut out),
        Command::Eigen(args) => eigen::eigen(&args, &mut out),
        Command::Serve(_) => unreachable!("handled above"),
    };
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

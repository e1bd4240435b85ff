//! The `lzgate` command line: JSON-configured runs that write CSV or JSON.
//!
//! Exit codes: 0 success, 1 failed check or computation, 2 invalid
//! configuration or parameters, 3 I/O error.

pub mod commands;
pub mod config;
pub mod table;

use std::ffi::OsString;
use std::io::{IsTerminal, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// JSON config file; read from standard input when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population of the initially empty state through one crossing, in both bases.
    Crossing(Common),
    /// Rotation angles alpha(g) and Phi(g).
    Angles(Common),
    /// Gate error of single and composite pulses against the detuning offset.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Where to write the design sidecar; defaults to `<out>.design.json`
        /// next to `--out`, and is skipped when writing to standard output.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Cross-checks between independent computations; exit 1 if any fails.
    Verify(Common),
}

#[derive(Debug, Parser)]
#[command(name = "lzgate", version, about = "Landau-Zener gate design and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NotConverged(_) | Error::NonUnitary { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_CONFIG,
    }
}

fn read_config(path: &Option<PathBuf>, stdin: &mut dyn Read, stdin_is_tty: bool) -> crate::Result<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None if stdin_is_tty => Ok(String::new()),
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn write_output(path: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> crate::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render(t: &table::Table, format: Format) -> String {
    match format {
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json(),
    }
}

fn default_sidecar(out: &Path) -> PathBuf {
    out.with_extension("design.json")
}

fn execute(
    cli: Cli,
    stdin: &mut dyn Read,
    stdin_is_tty: bool,
    stdout: &mut dyn Write,
) -> crate::Result<i32> {
    match cli.command {
        Command::Crossing(c) => {
            let cfg: config::CrossingConfig = config::parse(&read_config(&c.config, stdin, stdin_is_tty)?)?;
            let t = commands::crossing(&cfg)?;
            write_output(&c.out, &render(&t, c.format.unwrap_or(Format::Csv)), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Angles(c) => {
            let cfg: config::AnglesConfig = config::parse(&read_config(&c.config, stdin, stdin_is_tty)?)?;
            let t = commands::angles(&cfg)?;
            write_output(&c.out, &render(&t, c.format.unwrap_or(Format::Csv)), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { common: c, sidecar } => {
            let cfg: config::SweepConfig = config::parse(&read_config(&c.config, stdin, stdin_is_tty)?)?;
            let out = commands::sweep(&cfg)?;
            let t = commands::sweep_table(&cfg, &out);
            write_output(&c.out, &render(&t, c.format.unwrap_or(Format::Csv)), stdout)?;
            let side = sidecar.or_else(|| c.out.as_deref().map(default_sidecar));
            if let Some(p) = side {
                std::fs::write(p, commands::sweep_sidecar(&cfg, &out))?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify(c) => {
            let cfg: config::VerifyConfig = config::parse(&read_config(&c.config, stdin, stdin_is_tty)?)?;
            let report = commands::verify(&cfg)?;
            let text = match c.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => commands::verify_table(&report).to_csv(),
            };
            write_output(&c.out, &text, stdout)?;
            Ok(if report.all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdin_is_tty: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli, stdin, stdin_is_tty, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "lzgate: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    let stdin = std::io::stdin();
    let tty = stdin.is_terminal();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        tty,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

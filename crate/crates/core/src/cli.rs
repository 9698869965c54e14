//! Command-line front end.
//!
//! Reports and traces go to standard output; diagnostics go to standard
//! error as `wasm-taint: <kind>: <message>`. Exit codes are listed in
//! [`exit`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::decoder::{decode_module, DecodeError};
use crate::harness::{self, HarnessError, ScalingThresholds};
use crate::runtime::trace::invoke_traced;
use crate::runtime::{Config, Instance, InvokeError, LiteralError, Trap, Value, DEFAULT_MAX_CALL_DEPTH};
use crate::taint::{SourceId, MAX_SOURCES};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A corpus or scaling check ran and found failures.
    pub const CHECK_FAILED: i32 = 1;
    /// Bad flags, argument literals or taint indices.
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    /// Bad magic, unsupported version, malformed section or unknown opcode.
    pub const MALFORMED: i32 = 4;
    /// Well-formed but uses an unsupported feature (imports, multiple memories).
    pub const UNSUPPORTED: i32 = 5;
    pub const EXPORT_NOT_FOUND: i32 = 6;
    pub const ARITY: i32 = 7;
    pub const TYPE_MISMATCH: i32 = 8;
    /// Trap during instantiation or execution.
    pub const TRAP: i32 = 9;
    /// Unreadable or invalid bench/corpus manifest or CSV.
    pub const MANIFEST: i32 = 10;
}

#[derive(Debug, Parser)]
#[command(name = "wasm-taint", version, about = "WebAssembly interpreter with dynamic taint tracking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invoke an exported function and print its results and taint report.
    Run {
        module: PathBuf,
        #[arg(long)]
        invoke: String,
        /// Typed literals, e.g. `i32:5,i64:-3`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        args: Vec<String>,
        /// Argument positions to treat as taint sources, e.g. `0,2`.
        #[arg(long, value_delimiter = ',')]
        taint: Vec<usize>,
        #[arg(long, value_enum, default_value = "json")]
        report: ReportFormat,
        /// Print one line per executed instruction before the report.
        #[arg(long)]
        trace: bool,
        #[arg(long, env = "WASM_TAINT_MAX_DEPTH", default_value_t = DEFAULT_MAX_CALL_DEPTH)]
        max_depth: usize,
    },
    /// Run a bench manifest and write `case,n,mode,median_ms,shadow_labels` CSV.
    Bench {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the manifest's repetition count.
        #[arg(long)]
        reps: Option<usize>,
        /// Also run the scaling check and fail if it does not pass.
        #[arg(long)]
        check: bool,
    },
    /// Run a fixture manifest and print a summary.
    Corpus { manifest: PathBuf },
    /// Check a bench CSV for linear scaling.
    CheckScaling { csv: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("instantiation trapped: {0}")]
    Instantiate(Trap),
    #[error(transparent)]
    Invoke(#[from] InvokeError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Decode(DecodeError::Unsupported(_)) => exit::UNSUPPORTED,
            CliError::Decode(_) => exit::MALFORMED,
            CliError::Instantiate(_) => exit::TRAP,
            CliError::Invoke(e) => match e {
                InvokeError::ExportNotFound(_) => exit::EXPORT_NOT_FOUND,
                InvokeError::ArityMismatch { .. } => exit::ARITY,
                InvokeError::TypeMismatch { .. } => exit::TYPE_MISMATCH,
                InvokeError::Trap(_) => exit::TRAP,
            },
            CliError::Harness(HarnessError::Io { .. }) => exit::IO,
            CliError::Harness(_) => exit::MANIFEST,
            CliError::CheckFailed(_) => exit::CHECK_FAILED,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Decode(DecodeError::Unsupported(_)) => "unsupported",
            CliError::Decode(_) => "malformed",
            CliError::Instantiate(_) => "trap",
            CliError::Invoke(InvokeError::Trap(_)) => "trap",
            CliError::Invoke(_) => "invoke",
            CliError::Harness(_) => "manifest",
            CliError::CheckFailed(_) => "check",
        }
    }

    /// Message after the kind prefix; traps lead with their short name.
    fn message(&self) -> String {
        match self {
            CliError::Decode(DecodeError::Unsupported(feature)) => feature.clone(),
            CliError::Instantiate(t) => format!("{}: during instantiation: {t}", t.reason()),
            CliError::Invoke(InvokeError::Trap(t)) => format!("{}: {t}", t.reason()),
            other => other.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(err, "wasm-taint: {}: {}", e.kind(), e.message());
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses literals and marks the `taint` positions as sources.
pub fn build_args(literals: &[String], taint: &[usize]) -> Result<Vec<Value>, CliError> {
    let mut args: Vec<Value> = literals
        .iter()
        .map(|s| s.parse::<Value>())
        .collect::<Result<_, LiteralError>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for &i in taint {
        if i >= args.len() || i >= MAX_SOURCES {
            return Err(CliError::Usage(format!(
                "taint index {i} out of range for {} argument(s)",
                args.len()
            )));
        }
        args[i] = args[i].tainted_by(SourceId::new(i).expect("checked above"));
    }
    Ok(args)
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run {
            module,
            invoke,
            args,
            taint,
            report,
            trace,
            max_depth,
        } => {
            let bytes = read(&module)?;
            let def = decode_module(&bytes)?;
            let args = build_args(&args, &taint)?;
            let config = Config {
                max_call_depth: max_depth,
                ..Config::default()
            };
            let mut instance = Instance::with_config(def, config).map_err(CliError::Instantiate)?;
            let result = if trace {
                let mut write_err = None;
                let r = invoke_traced(&mut instance, &invoke, &args, |event| {
                    if write_err.is_none() {
                        if let Err(e) = writeln!(out, "{event}") {
                            write_err = Some(e);
                        }
                    }
                });
                if let Some(e) = write_err {
                    return Err(io_out(e));
                }
                r
            } else {
                instance.invoke(&invoke, &args)
            };
            let invocation = result?;
            match report {
                ReportFormat::Json => writeln!(out, "{}", invocation.report.to_json()),
                ReportFormat::Text => write!(out, "{}", invocation.report),
            }
            .map_err(io_out)
        }
        Command::Bench {
            manifest,
            out: csv_path,
            reps,
            check,
        } => {
            let mut m = harness::BenchManifest::load(&manifest)?;
            if let Some(r) = reps {
                m.reps = r;
            }
            let base = manifest.parent().unwrap_or(Path::new("."));
            let rows = harness::run_bench(&m, base)?;
            let file = std::fs::File::create(&csv_path).map_err(|source| CliError::Io {
                path: csv_path.clone(),
                source,
            })?;
            harness::write_csv(&rows, file)?;
            let _ = writeln!(err, "wrote {} rows to {}", rows.len(), csv_path.display());
            if check {
                scaling(&rows, out)?;
            }
            Ok(())
        }
        Command::Corpus { manifest } => {
            let summary = harness::run_corpus(&manifest)?;
            write!(out, "{summary}").map_err(io_out)?;
            if summary.ok() {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!("{} fixture(s) failed", summary.failures.len())))
            }
        }
        Command::CheckScaling { csv } => {
            let file = std::fs::File::open(&csv).map_err(|source| CliError::Io { path: csv.clone(), source })?;
            let rows = harness::read_csv(file)?;
            scaling(&rows, out)
        }
    }
}

fn scaling(rows: &[harness::BenchRow], out: &mut dyn Write) -> Result<(), CliError> {
    let report = harness::check_scaling(rows, ScalingThresholds::default());
    write!(out, "{report}").map_err(io_out)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::CheckFailed("scaling check failed".into()))
    }
}

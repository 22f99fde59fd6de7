//! The `multibracket` command line.
//!
//! ```text
//! multibracket run <config> [--seed N]
//! multibracket figures <id> [--fast] [--out DIR] [--seed N]
//! multibracket aep verify [--p P] [--epsilon E] [--lengths 4,8,...] [--out FILE]
//! multibracket data validate <csv>
//! ```
//!
//! Exit status: 0 on success, 2 for configuration or input errors, 3 when a
//! resource cap is hit, 1 otherwise. `MULTIBRACKET_THREADS` sets the worker
//! thread count.

pub mod config;
pub mod figures;
pub mod run;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::picksix::RaceCard;
use crate::tournament::Field;
pub use config::{ConfigError, RunConfig};
pub use figures::FigureId;
pub use run::{run_config, run_config_file, RunOutcome};

/// Everything that can end a command.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Library(Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Library(e) => match e.root() {
                Error::Resource(_) => 3,
                Error::Domain(_) | Error::Data { .. } => 2,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Library(e) => e.fmt(f),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Library(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "multibracket", version, about = "Entropy-tuned strategies for multi-bracket pools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sweep described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regenerate the data behind a figure.
    Figures {
        #[arg(value_enum)]
        id: FigureId,
        /// Coarser grids and fewer Monte-Carlo draws.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Entropy-partition checks.
    Aep {
        #[command(subcommand)]
        action: AepAction,
    },
    /// Input file checks.
    Data {
        #[command(subcommand)]
        action: DataAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum AepAction {
    /// Check the counting bounds on the chalky/typical/rare classes.
    Verify {
        #[arg(long, default_value_t = 0.75)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12,16,20")]
        lengths: Vec<u32>,
        /// Also write the checks as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DataAction {
    /// Validate a race card or tournament field CSV.
    Validate { csv: PathBuf },
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    configure_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("MULTIBRACKET_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config, seed } => {
            let out = run_config_file(&config, seed)?;
            println!("wrote {} ({} points)", out.output.display(), out.points.len());
            if let Ok(best) = crate::optimizer::argmax(&out.points) {
                println!("best: {} -> {}", best.params, best.objective);
            }
            Ok(0)
        }
        Command::Figures { id, fast, out, seed } => {
            std::fs::create_dir_all(&out).map_err(|source| Error::Io { path: out.clone(), source })?;
            for (name, bytes) in figures::generate(id, fast, seed)? {
                let path = out.join(name);
                write_atomic(&path, &bytes)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Aep { action: AepAction::Verify { p, epsilon, lengths, out } } => {
            let report = crate::aep::verify_theorem1(p, &lengths, epsilon)?;
            print!("{}", report.render());
            if let Some(path) = out {
                write_atomic(&path, &run::aep_report_csv(&report)?)?;
            }
            Ok(if report.all_hold() { 0 } else { 1 })
        }
        Command::Data { action: DataAction::Validate { csv } } => {
            let text = std::fs::read_to_string(&csv).map_err(|source| Error::Io { path: csv.clone(), source })?;
            let origin = csv.display().to_string();
            let header = text.lines().find(|l| !l.trim_start().starts_with('#')).unwrap_or("");
            if header.contains("race_index") {
                let card = RaceCard::from_csv_str(&text, &origin)?;
                let sizes: Vec<String> = card.races().iter().map(|r| r.len().to_string()).collect();
                println!("ok: race card, {} races ({} runners), {} outcomes", card.len(), sizes.join("/"), card.outcomes());
            } else if header.contains("team_name") {
                let field = Field::from_csv_str(&text, &origin)?;
                let top = &field.teams()[0];
                println!("ok: tournament field, {} teams, top rating {} ({})", field.len(), top.elo, top.name);
            } else {
                return Err(CliError::Usage(format!(
                    "{origin}: unrecognized header (expected race_index,horse_index,win_prob or team_name,region,seed,elo)"
                )));
            }
            Ok(0)
        }
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> crate::Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub(crate) fn csv_writer(out: Vec<u8>) -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> crate::Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io { path: "<csv buffer>".into(), source: e.into_error() })
}

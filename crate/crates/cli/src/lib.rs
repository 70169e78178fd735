//! Command-line experiments over the `qactive` models.
//!
//! `qactive list` prints the registry; `qactive run <experiment> [--flags]`
//! writes one CSV or JSON result file.

pub mod error;
pub mod experiments;
pub mod output;
pub mod params;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::CliError;
use output::ResultRecord;
use params::Format;

/// Directory for result files when `--out` is absent.
pub const OUT_DIR_VAR: &str = "QACTIVE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "qactive", version, about = "Active quantum particle experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the experiments with their units and output columns.
    List,
    /// Run one experiment.
    ///
    /// Options: --config FILE, --out PATH, --format csv|json, --seed N,
    /// --t-log START END COUNT or --t-lin START END COUNT, and any model
    /// parameter as --name VALUE. Flags override the config file.
    Run {
        experiment: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
}

/// Rendered result file and where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub path: PathBuf,
    pub contents: String,
    pub record: ResultRecord,
}

/// Runs an experiment without touching the filesystem.
pub fn render(experiment: &str, args: &[String]) -> Result<Rendered, CliError> {
    let exp = experiments::find(experiment).ok_or_else(|| {
        CliError::usage(format!(
            "unknown experiment `{experiment}`; try `qactive list`"
        ))
    })?;
    let inv = params::resolve(exp.id, exp.block, exp.params, exp.grid, args)?;
    let table = exp.run(&inv)?;
    let record = ResultRecord::new(
        exp.id,
        inv.seed,
        inv.grid.map(|g| g.describe()),
        inv.params.echo(),
        table,
    );
    let contents = match inv.format {
        Format::Csv => record.to_csv(),
        Format::Json => record.to_json(),
    };
    let path = inv.out.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_VAR).unwrap_or_else(|| ".".into());
        PathBuf::from(dir).join(format!("{}.{}", exp.id, inv.format.extension()))
    });
    Ok(Rendered {
        path,
        contents,
        record,
    })
}

/// Runs an experiment and writes its file; nothing is written on failure.
pub fn run_experiment(experiment: &str, args: &[String]) -> Result<PathBuf, CliError> {
    let r = render(experiment, args)?;
    let io = |source| CliError::Io {
        path: r.path.clone(),
        source,
    };
    if let Some(parent) = r.path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(&r.path, &r.contents).map_err(io)?;
    Ok(r.path)
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", experiments::listing());
            0
        }
        Command::Run { experiment, args } => match run_experiment(&experiment, &args) {
            Ok(path) => {
                println!("wrote {}", path.display());
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    }
}

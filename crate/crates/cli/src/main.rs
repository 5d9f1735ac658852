use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use marketdyn::calibrate::{calibrate, parse_targets};
use marketdyn::tables::{render, Which};
use marketdyn::{csv, process, Action, CliError, Format, Options};

#[derive(Parser)]
#[command(name = "marketdyn", version, about = "Dynamic market models: simulate, tabulate, calibrate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size, overriding the scenario file (default 1000).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Scenarios of a batch evaluated at once.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of every channel.
    Simulate { file: PathBuf },
    /// Latencies, peaks and equilibria.
    Metrics { file: PathBuf },
    /// Reference latency tables.
    Tables {
        #[arg(value_enum)]
        which: Which,
    },
    /// Rates from T50, peak time or peak height targets.
    Calibrate { file: PathBuf },
    /// Rest points of feedback and competition models.
    Equilibrium { file: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    if cli.samples.is_some_and(|n| n < 2) {
        return Err(CliError::invalid("--samples: at least 2 points are needed".into()));
    }
    let opts = Options { samples: cli.samples, jobs: cli.jobs, format: cli.format };
    match &cli.command {
        Command::Simulate { file } => process(Action::Simulate, &read(file)?, &opts),
        Command::Metrics { file } => process(Action::Metrics, &read(file)?, &opts),
        Command::Equilibrium { file } => process(Action::Equilibrium, &read(file)?, &opts),
        Command::Tables { which } => render(*which),
        Command::Calibrate { file } => {
            let c = calibrate(&parse_targets(&read(file)?)?)?;
            let mut out = String::new();
            let mut rows = c.parameters;
            rows.extend(c.check.into_iter().map(|(k, v)| (format!("check_{k}"), v)));
            csv::write_metrics(&mut out, &rows, &[], cli.format);
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes()).map_err(CliError::from)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

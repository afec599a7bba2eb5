use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use downlink_cli::analytic::{run_analytic, write_reports, Params};
use downlink_cli::output::write_rows;
use downlink_cli::presets::{preset, DEFAULT_TRIALS};
use downlink_cli::runner::run_scenario;
use downlink_cli::scenario::Scenario;
use downlink_cli::CliError;

#[derive(Parser)]
#[command(name = "downlink", version, about = "Multi-user MIMO downlink simulator")]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario and write one CSV row per strategy and point.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the trial count in the scenario file.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a closed-form result, e.g. `--name Thm4 --params n=6,m=2,bits=5`.
    Analytic {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        params: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named figure preset and write DIR/NAME.csv.
    Figure {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, seed, trials, out } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::Config {
                path: config.display().to_string(),
                message: e.to_string(),
            })?;
            let mut scenario = Scenario::from_json(&text)?;
            if let Some(s) = seed {
                scenario.seed = s;
            }
            if let Some(t) = trials {
                scenario.trials = t;
            }
            let rows = run_scenario(&scenario)?;
            write_rows(&rows, create(&out)?)
        }
        Command::Analytic { name, params, out } => {
            let reports = run_analytic(&name, &Params::parse(&params)?)?;
            match out {
                Some(path) => write_reports(&reports, create(&path)?),
                None => write_reports(&reports, io::stdout().lock()),
            }
        }
        Command::Figure { preset: name, out, trials, seed } => {
            let scenarios = preset(&name, trials)?;
            let mut rows = Vec::new();
            for mut s in scenarios {
                s.seed = seed;
                rows.extend(run_scenario(&s)?);
            }
            fs::create_dir_all(&out)?;
            let mut file = create(&out.join(format!("{name}.csv")))?;
            write_rows(&rows, &mut file)?;
            file.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

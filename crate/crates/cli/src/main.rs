use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pwaffine_cli::{
    execute, write_outputs, Command, RunConfig, EXIT_INVALID_CONFIG, EXIT_PASS, EXIT_RUNTIME,
    EXIT_TOLERANCE, THREADS_ENV,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Lemma1,
    Lemma2,
    Converge,
    Bv,
    LocateDemo,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Lemma1 => Command::Lemma1,
            CommandArg::Lemma2 => Command::Lemma2,
            CommandArg::Converge => Command::Converge,
            CommandArg::Bv => Command::Bv,
            CommandArg::LocateDemo => Command::LocateDemo,
        }
    }
}

/// Interpolation experiments on shifted and scaled Kuhn triangulations.
///
/// Exit status: 0 when all tolerances pass, 1 on runtime errors, 2 for an
/// invalid configuration, 3 when a tolerance fails.
#[derive(Debug, Parser)]
#[command(
    version,
    after_help = "Set PWAFFINE_THREADS to fix the number of worker threads."
)]
struct Cli {
    command: CommandArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Scale schedule; overrides the config.
    #[arg(long, num_args = 1..)]
    r: Option<Vec<f64>>,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value.parse().map_err(|_| {
            anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {value:?}")
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    Ok(())
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::load(&cli.config)?;
    let requested: Command = cli.command.into();
    if config.command != requested {
        anyhow::bail!(
            "config is for {:?} but {:?} was requested",
            config.command.name(),
            requested.name()
        );
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    if let Some(r) = &cli.r {
        config.r_schedule = r.clone();
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match configure_threads().and_then(|_| load(&cli)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID_CONFIG as u8);
        }
    };
    let report = match execute(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME as u8);
        }
    };
    if let Err(e) = write_outputs(&report, &config.output.dir) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_RUNTIME as u8);
    }
    for check in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "tolerance failed: {} = {} ({:?} {})",
            check.name, check.value, check.relation, check.bound
        );
    }
    println!(
        "{}: {} in {:.2}s, report at {}",
        config.command.name(),
        if report.passed { "pass" } else { "FAIL" },
        report.wall_time_seconds,
        config.output.dir.join(&config.output.report).display()
    );
    ExitCode::from(if report.passed {
        EXIT_PASS
    } else {
        EXIT_TOLERANCE
    } as u8)
}

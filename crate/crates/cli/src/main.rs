use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};
use qbm_cli::{
    cmd_asymptote, cmd_compute, cmd_selfcheck, cmd_validate, Exit, Failure, Outcome, RunConfig, OVERRIDE_KEYS,
};

#[derive(Parser)]
#[command(
    name = "qbm",
    version,
    about = "Diffusion observables of a quantum particle in a heat bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the time grid and write `t,value,err_estimate` CSV.
    Compute(RunArgs),
    /// Check that the model's memory function is positive real.
    Validate(RunArgs),
    /// Compare the numeric series with its long-time law and fit the tail slope.
    Asymptote(RunArgs),
    /// Run the built-in identity suite.
    Selfcheck,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

/// `--<dotted key> <value>` for every config key, applied over the file.
struct Overrides(Vec<(String, String)>);

impl FromArgMatches for Overrides {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        let pairs = OVERRIDE_KEYS
            .iter()
            .filter_map(|(k, _)| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
            .collect();
        Ok(Overrides(pairs))
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for Overrides {
    fn augment_args(cmd: Command) -> Command {
        OVERRIDE_KEYS.iter().fold(cmd, |cmd, (key, help)| {
            cmd.arg(
                Arg::new(*key)
                    .long(*key)
                    .value_name("VALUE")
                    .help(*help)
                    .allow_hyphen_values(true)
                    .help_heading("Config overrides"),
            )
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    RunConfig::load_file(args.config.as_deref(), &args.overrides.0)
}

fn dispatch(cmd: &Cmd) -> Outcome {
    let stdout = io::stdout();
    let stderr = io::stderr();
    match cmd {
        Cmd::Compute(args) => {
            let cfg = load(args)?;
            let mut out = cfg.open_output()?;
            cmd_compute(&cfg, &mut out, &mut stderr.lock())
        }
        Cmd::Validate(args) => {
            let cfg = load(args)?;
            cmd_validate(&cfg, &mut stdout.lock())
        }
        Cmd::Asymptote(args) => {
            let cfg = load(args)?;
            let mut out = cfg.open_output()?;
            cmd_asymptote(&cfg, &mut out, &mut stdout.lock(), &mut stderr.lock())
        }
        Cmd::Selfcheck => cmd_selfcheck(&mut stdout.lock()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Exit::Success.into(),
                _ => Exit::Usage.into(),
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(exit) => exit.into(),
        Err(f) => {
            let _ = io::stdout().flush();
            eprintln!("error: {f}");
            f.exit.into()
        }
    }
}

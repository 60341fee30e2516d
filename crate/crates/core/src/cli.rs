//! The `collatz` command line.
//!
//! Exit status is 0 on success, 1 on domain errors (zero inputs, invalid
//! ranges, no cycle within budget) and 2 on usage errors.

use std::io::{self, Write};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cycles::find_cycle;
use crate::dynamics::{classify_trajectory, preimage, ClassifyOptions, DomainError, MapVariant, TrajectoryOutcome};
use crate::nat::Nat;
use crate::residue::{build_graph, ResidueError};
use crate::verifier::{default_workers, verify_range, ConfigError, VerifyConfig, DEFAULT_CHUNK_SIZE, DEFAULT_STEP_BUDGET};

#[derive(Debug, Parser)]
#[command(name = "collatz", version, about = "Collatz trajectories, residue graphs and range verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print the trajectory record of a start value
    Traj {
        x: Nat,
        #[arg(long, default_value_t = MapVariant::Standard)]
        variant: MapVariant,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        max_steps: u64,
        /// Also print every visited value
        #[arg(long)]
        values: bool,
    },
    /// Print all y with Col(y) = x, ascending
    Preimage { x: Nat },
    /// Print the canonical loop the orbit of x enters
    Cycle {
        x: Nat,
        #[arg(long, default_value_t = MapVariant::Standard)]
        variant: MapVariant,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        max_steps: u64,
    },
    /// Print the transition graph modulo M
    Graph {
        #[arg(long)]
        modulus: u64,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// Verify that every start in [from, to] reaches 1
    Verify {
        #[arg(long)]
        from: u128,
        #[arg(long)]
        to: u128,
        #[arg(long)]
        assume_verified_below: Option<u128>,
        /// Defaults to the available parallelism
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        max_steps: u64,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
    },
}

impl Command {
    pub fn parse_from<I, T>(argv: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Cli::try_parse_from(argv).map(|cli| cli.command)
    }

    /// Canonical argument list (without the program name), with every
    /// defaulted flag spelled out.
    pub fn to_args(&self) -> Vec<String> {
        let mut a: Vec<String> = Vec::new();
        let flag = |a: &mut Vec<String>, name: &str, value: String| {
            a.push(format!("--{name}"));
            a.push(value);
        };
        match self {
            Command::Traj { x, variant, max_steps, values } => {
                a.extend(["traj".into(), x.to_string()]);
                flag(&mut a, "variant", variant.to_string());
                flag(&mut a, "max-steps", max_steps.to_string());
                if *values {
                    a.push("--values".into());
                }
            }
            Command::Preimage { x } => a.extend(["preimage".into(), x.to_string()]),
            Command::Cycle { x, variant, max_steps } => {
                a.extend(["cycle".into(), x.to_string()]);
                flag(&mut a, "variant", variant.to_string());
                flag(&mut a, "max-steps", max_steps.to_string());
            }
            Command::Graph { modulus, format } => {
                a.push("graph".into());
                flag(&mut a, "modulus", modulus.to_string());
                flag(&mut a, "format", value_name(format));
            }
            Command::Verify {
                from,
                to,
                assume_verified_below,
                workers,
                format,
                max_steps,
                chunk_size,
            } => {
                a.push("verify".into());
                flag(&mut a, "from", from.to_string());
                flag(&mut a, "to", to.to_string());
                if let Some(c) = assume_verified_below {
                    flag(&mut a, "assume-verified-below", c.to_string());
                }
                if let Some(w) = workers {
                    flag(&mut a, "workers", w.to_string());
                }
                flag(&mut a, "format", value_name(format));
                flag(&mut a, "max-steps", max_steps.to_string());
                flag(&mut a, "chunk-size", chunk_size.to_string());
            }
        }
        a
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no cycle found within {0} steps")]
    NoCycle(u64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn join(values: &[Nat]) -> String {
    values.iter().map(Nat::to_string).collect::<Vec<_>>().join(" ")
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Traj { x, variant, max_steps, values } => {
            let opts = ClassifyOptions::new(variant, max_steps).keep_values(values);
            let rec = classify_trajectory(&x, &opts)?;
            writeln!(out, "start {}", rec.start)?;
            writeln!(out, "variant {variant}")?;
            match &rec.outcome {
                TrajectoryOutcome::ReachesOne { steps } => {
                    writeln!(out, "outcome reaches-one")?;
                    writeln!(out, "steps {steps}")?;
                }
                TrajectoryOutcome::EntersCycle { cycle, tail_length } => {
                    writeln!(out, "outcome enters-cycle")?;
                    writeln!(out, "loop {}", join(cycle.values()))?;
                    writeln!(out, "tail_length {tail_length}")?;
                }
                TrajectoryOutcome::Unresolved { steps_taken, max_value_seen } => {
                    writeln!(out, "outcome unresolved")?;
                    writeln!(out, "steps_taken {steps_taken}")?;
                    writeln!(out, "max_value_seen {max_value_seen}")?;
                }
            }
            writeln!(out, "max_excursion {}", rec.max_excursion)?;
            if let Some(values) = &rec.values {
                writeln!(out, "values {}", join(values))?;
            }
        }
        Command::Preimage { x } => {
            writeln!(out, "{}", join(&preimage(&x)?))?;
        }
        Command::Cycle { x, variant, max_steps } => {
            if x.is_zero() {
                return Err(DomainError::Zero.into());
            }
            let found = find_cycle(&x, variant, max_steps).ok_or(CliError::NoCycle(max_steps))?;
            writeln!(out, "{}", join(found.values()))?;
        }
        Command::Graph { modulus, format } => {
            let graph = build_graph(modulus)?;
            match format {
                GraphFormat::Dot => write!(out, "{}", graph.to_dot())?,
                GraphFormat::Json => writeln!(out, "{}", graph.to_json())?,
            }
        }
        Command::Verify {
            from,
            to,
            assume_verified_below,
            workers,
            format,
            max_steps,
            chunk_size,
        } => {
            let config = VerifyConfig::new(from, to)
                .assume_verified_below(assume_verified_below.unwrap_or(1))
                .workers(workers.unwrap_or_else(default_workers))
                .step_budget(max_steps)
                .chunk_size(chunk_size);
            let report = verify_range(&config)?;
            match format {
                ReportFormat::Json => writeln!(out, "{}", report.to_json())?,
                ReportFormat::Csv => write!(out, "{}", report.to_csv())?,
            }
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let command = match Cli::try_parse_from(argv) {
        Ok(cli) => cli.command,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
            };
        }
    };
    match run(command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

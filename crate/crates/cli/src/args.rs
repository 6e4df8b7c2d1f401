use std::io::Write;
use std::path::PathBuf;

use ccds_core::StructureKind;
use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_check, cmd_compare, cmd_cva, cmd_resolve, OutputFormat, RunConfig};
use crate::error::{CliError, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "ccds", version, about = "Close-out and CVA analysis of a securitization swap structure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolve the scenario's default under each structure.
    Resolve(CommonArgs),
    /// Run the invariant suite over randomized scenarios.
    Check(CommonArgs),
    /// Estimate CVA and the exposure profile by Monte Carlo.
    Cva(CommonArgs),
    /// Tabulate outcomes of the scenario under all structures.
    Compare(CommonArgs),
}

/// A single structure, or every structure when `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection(pub Option<StructureKind>);

fn parse_structure(s: &str) -> Result<Selection, String> {
    if s == "all" {
        return Ok(Selection(None));
    }
    s.parse().map(|k| Selection(Some(k))).map_err(|e: &str| format!("{e} or all"))
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of the [mc] or [sweep] section.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of Monte Carlo paths.
    #[arg(long)]
    pub paths: Option<u64>,
    /// Overrides the number of randomized scenarios for `check`.
    #[arg(long)]
    pub scenarios: Option<u64>,
    /// baseline, tpa, ccds_chain or all.
    #[arg(long, default_value = "all", value_parser = parse_structure)]
    pub structure: Selection,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Structured)]
    pub format: OutputFormat,
    /// Worker threads for Monte Carlo; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl From<&CommonArgs> for RunConfig {
    fn from(a: &CommonArgs) -> Self {
        RunConfig {
            config: a.config.clone(),
            structure: a.structure.0,
            seed: a.seed,
            paths: a.paths,
            scenarios: a.scenarios,
            out: a.out.clone(),
            format: a.format,
            threads: a.threads,
        }
    }
}

/// Dispatches `cli`, writing summaries to `out` and errors to `err`.
/// Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result: Result<(), CliError> = match &cli.command {
        Command::Resolve(a) => cmd_resolve(&a.into(), out),
        Command::Check(a) => cmd_check(&a.into(), out),
        Command::Cva(a) => cmd_cva(&a.into(), out),
        Command::Compare(a) => cmd_compare(&a.into(), out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn structure_selection() {
        assert_eq!(parse_structure("all").unwrap(), Selection(None));
        assert_eq!(parse_structure("tpa").unwrap(), Selection(Some(StructureKind::Tpa)));
        assert!(parse_structure("bilateral").is_err());
    }

    #[test]
    fn flags_map_to_run_config() {
        let cli = Cli::try_parse_from([
            "ccds",
            "cva",
            "--config",
            "s.toml",
            "--seed",
            "9",
            "--paths",
            "10",
            "--structure",
            "baseline",
            "--format",
            "csv",
            "--threads",
            "2",
        ])
        .unwrap();
        let Command::Cva(a) = &cli.command else { panic!("wrong subcommand") };
        let cfg = RunConfig::from(a);
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.paths, Some(10));
        assert_eq!(cfg.structure, Some(StructureKind::Baseline));
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.threads, Some(2));
        assert_eq!(cfg.out, PathBuf::from("out"));
    }
}

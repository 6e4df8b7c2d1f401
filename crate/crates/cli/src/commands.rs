//! Subcommand implementations.
//!
//! Every command writes its files under the output directory and a short
//! human summary to the given writer. File contents depend only on the
//! scenario file and the command-line overrides, never on thread count.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ccds_core::analytics::{compare_structures, run_invariant_suite, ComparisonRow, Invariant, Resolvers, Tally};
use ccds_core::{resolve, CloseoutReport, CvaResult, FlowLabel, Money, PartyId, StructureConfig, StructureKind};
use serde::{Deserialize, Serialize};

use crate::config::{load_scenario, Scenario};
use crate::error::CliError;
use crate::mc::run_cva;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    #[default]
    Structured,
}

/// Parsed command-line options shared by all subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub config: PathBuf,
    /// `None` selects every structure.
    pub structure: Option<StructureKind>,
    pub seed: Option<u64>,
    pub paths: Option<u64>,
    pub scenarios: Option<u64>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            config: config.into(),
            structure: None,
            seed: None,
            paths: None,
            scenarios: None,
            out: out.into(),
            format: OutputFormat::Structured,
            threads: None,
        }
    }

    fn kinds(&self) -> Vec<StructureKind> {
        match self.structure {
            Some(k) => vec![k],
            None => StructureKind::ALL.to_vec(),
        }
    }

    fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        Ok(self.out.join(name))
    }
}

fn structures(scenario: &Scenario, kinds: &[StructureKind]) -> Result<Vec<StructureConfig>, CliError> {
    kinds.iter().map(|&k| Ok(scenario.structure.as_kind(k)?)).collect()
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Engine(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Engine(e.to_string()))?;
    write_file(path, &bytes)
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) {
    // Summary lines are advisory; a closed stdout must not fail the run.
    let _ = writeln!(out, "{line}");
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolveDocument {
    pub currency: String,
    pub reports: Vec<CloseoutReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comparison: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct FlowRow {
    structure: &'static str,
    label: FlowLabel,
    from: PartyId,
    to: PartyId,
    amount: Money,
}

#[derive(Serialize)]
struct OutcomeRow {
    structure: &'static str,
    party: PartyId,
    realized_loss: Money,
    liquidity_delta: Money,
    termination_amount: Money,
}

fn write_reports(cfg: &RunConfig, doc: &ResolveDocument) -> Result<(), CliError> {
    match cfg.format {
        OutputFormat::Structured => write_json(&cfg.output("resolve.json")?, doc),
        OutputFormat::Csv => {
            let flows = doc.reports.iter().flat_map(|r| {
                r.flows.iter().map(|f| FlowRow {
                    structure: r.structure.name(),
                    label: f.label,
                    from: f.from,
                    to: f.to,
                    amount: f.amount,
                })
            });
            write_csv(&cfg.output("flows.csv")?, flows)?;
            let outcomes = doc.reports.iter().flat_map(|r| {
                PartyId::LEDGER.into_iter().map(|p| {
                    let o = r.outcome(p);
                    OutcomeRow {
                        structure: r.structure.name(),
                        party: p,
                        realized_loss: o.realized_loss,
                        liquidity_delta: o.liquidity_delta,
                        termination_amount: o.termination_amount,
                    }
                })
            });
            write_csv(&cfg.output("outcomes.csv")?, outcomes)?;
            if !doc.comparison.is_empty() {
                write_csv(&cfg.output("comparison.csv")?, &doc.comparison)?;
            }
            Ok(())
        }
    }
}

/// Resolves the scenario under the selected structures and writes the
/// reports with full flow traces. With every structure selected a
/// comparison table is added.
pub fn cmd_resolve(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = load_scenario(&cfg.config)?;
    let kinds = cfg.kinds();
    let mut reports = Vec::with_capacity(kinds.len());
    for s in structures(&scenario, &kinds)? {
        let r = resolve(&scenario.scenario, &s)?;
        say(
            out,
            format_args!(
                "{}: loss O {} loss V {} estate net {} ({} flows)",
                r.structure,
                r.outcome(PartyId::Originator).realized_loss,
                r.outcome(PartyId::Spv).realized_loss,
                r.estate_net,
                r.flows.len()
            ),
        );
        reports.push(r);
    }
    let comparison = if cfg.structure.is_none() {
        reports.iter().map(|r| ComparisonRow::from_report(0, r)).collect()
    } else {
        Vec::new()
    };
    write_reports(cfg, &ResolveDocument { currency: scenario.currency().to_string(), reports, comparison })
}

/// Resolves the scenario under all three structures and writes the
/// comparison table.
pub fn cmd_compare(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = load_scenario(&cfg.config)?;
    let rows = compare_structures(std::slice::from_ref(&scenario.scenario), &scenario.structure)?;
    say(
        out,
        format_args!(
            "{:<12} {:>18} {:>18} {:>18} {:>18}",
            "structure", "loss_O", "loss_V", "liquidity_V", "estate_net"
        ),
    );
    for r in &rows {
        say(
            out,
            format_args!(
                "{:<12} {:>18} {:>18} {:>18} {:>18}",
                r.structure.name(),
                r.realized_loss_o.to_string(),
                r.realized_loss_v.to_string(),
                r.liquidity_delta_v.to_string(),
                r.estate_net.to_string()
            ),
        );
    }
    match cfg.format {
        OutputFormat::Structured => write_json(&cfg.output("comparison.json")?, &rows),
        OutputFormat::Csv => write_csv(&cfg.output("comparison.csv")?, &rows),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckDocument {
    pub n: u64,
    pub seed: u64,
    pub tallies: BTreeMap<Invariant, Tally>,
    pub passed: bool,
}

/// File name of the minimal failing scenario written by `check`.
pub const COUNTEREXAMPLE: &str = "counterexample.toml";

/// [`cmd_check`] against the given resolvers.
pub fn cmd_check_with(cfg: &RunConfig, resolvers: &Resolvers, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = load_scenario(&cfg.config)?;
    let mut sweep = scenario.sweep();
    if let Some(n) = cfg.scenarios {
        sweep.n = n;
    }
    if let Some(seed) = cfg.seed {
        sweep.seed = seed;
    }
    let bounds = sweep.bounds()?;
    let suite = run_invariant_suite(sweep.n, sweep.seed, &bounds, &scenario.structure, resolvers)?;
    for (inv, t) in &suite.tallies {
        say(out, format_args!("{:<34} pass {:>8} fail {:>8}", inv.name(), t.passed, t.failed));
    }
    let doc = CheckDocument { n: sweep.n, seed: sweep.seed, tallies: suite.tallies.clone(), passed: suite.passed() };
    match cfg.format {
        OutputFormat::Structured => write_json(&cfg.output("check.json")?, &doc)?,
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                invariant: &'static str,
                passed: u64,
                failed: u64,
            }
            let rows = doc.tallies.iter().map(|(i, t)| Row { invariant: i.name(), passed: t.passed, failed: t.failed });
            write_csv(&cfg.output("check.csv")?, rows)?;
        }
    }
    let Some((case, failed)) = suite.minimal_failure() else {
        return Ok(());
    };
    let path = cfg.output(COUNTEREXAMPLE)?;
    let names: Vec<&str> = failed.iter().map(|i| i.name()).collect();
    let mut text = format!("# sweep seed {} case {}; violates: {}\n", sweep.seed, case.index, names.join(", "));
    text.push_str(&scenario.counterexample(case).to_toml());
    write_file(&path, text.as_bytes())?;
    say(out, format_args!("minimal counterexample: case {} written to {}", case.index, path.display()));
    Err(CliError::Invariant { n: sweep.n, failed: suite.failures.len() as u64, counterexample: path })
}

/// Runs the invariant suite over randomized scenarios.
pub fn cmd_check(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cmd_check_with(cfg, &Resolvers::default(), out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvaDelta {
    pub restructured: StructureKind,
    pub baseline_minus_restructured: f64,
}

/// CVA amounts are in major units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvaDocument {
    pub currency: String,
    pub seed: u64,
    pub n_paths: u64,
    pub horizon: f64,
    pub steps: usize,
    pub discount_rate: f64,
    pub results: Vec<CvaResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub headline: Option<CvaDelta>,
}

#[derive(Serialize)]
struct ProfileRow {
    structure: &'static str,
    time: f64,
    epe: f64,
    stderr: f64,
}

/// File name of the exposure profile written by `cva`.
pub const EXPOSURE_PROFILE: &str = "exposure_profile.csv";

/// Computes CVA for the selected structures on one shared path set.
pub fn cmd_cva(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = load_scenario(&cfg.config)?;
    let mut paths = scenario.path_config()?;
    if let Some(seed) = cfg.seed {
        paths.seed = seed;
    }
    if let Some(n) = cfg.paths {
        if n == 0 {
            return Err(CliError::validation("paths", "at least one path is required"));
        }
        paths.n_paths = n;
    }
    let kinds = cfg.kinds();
    let rate = scenario.file.discount_rate;
    let run = run_cva(&paths, &scenario.model, rate, &structures(&scenario, &kinds)?, cfg.threads)?;

    let find = |k| run.results.iter().find(|r| r.structure == k);
    let headline = find(StructureKind::Baseline).and_then(|b| {
        let r = find(StructureKind::CcdsChain).or_else(|| find(StructureKind::Tpa))?;
        Some(CvaDelta { restructured: r.structure, baseline_minus_restructured: b.cva - r.cva })
    });
    for r in &run.results {
        say(out, format_args!("{}: cva {:.2} stderr {:.2} ({} paths)", r.structure, r.cva, r.stderr, r.n_paths));
    }
    if let Some(h) = &headline {
        say(
            out,
            format_args!(
                "cva delta baseline - {}: {:.2} {}",
                h.restructured,
                h.baseline_minus_restructured,
                scenario.currency()
            ),
        );
    }

    let doc = CvaDocument {
        currency: scenario.currency().to_string(),
        seed: paths.seed,
        n_paths: paths.n_paths,
        horizon: paths.grid.horizon(),
        steps: paths.grid.len() - 1,
        discount_rate: rate,
        results: run.results,
        headline,
    };
    match cfg.format {
        OutputFormat::Structured => write_json(&cfg.output("cva.json")?, &doc)?,
        OutputFormat::Csv => write_csv(&cfg.output("cva.csv")?, &doc.results)?,
    }
    let rows = run.profiles.iter().flat_map(|p| {
        p.times.iter().zip(&p.epe).zip(&p.stderr).map(|((&time, &epe), &stderr)| ProfileRow {
            structure: p.structure.name(),
            time,
            epe,
            stderr,
        })
    });
    write_csv(&cfg.output(EXPOSURE_PROFILE)?, rows)
}

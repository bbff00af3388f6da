//! Command-line entry point: `list`, `run`, and `check`.
//!
//! Exit codes: 0 success (for `check`, overall conformance), 1 `check` found
//! violations or indeterminate results, 2 usage, configuration, or
//! runtime/safety failure.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::executor::{self, Isolation, RunConfig};
use crate::model::{Category, ExecutionMode, ProbeId, RedactionLevel, RunReport, VerdictStatus};
use crate::policy;
use crate::registry::{ProbeFilter, Registry};
use crate::report;

#[derive(Parser)]
#[command(
    name = "sandboxeval",
    version,
    about = "Probe suite that measures how well an execution sandbox confines untrusted code"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the probe catalog
    List(ListArgs),
    /// Execute probes and emit a run report
    Run(RunArgs),
    /// Execute probes and judge the outcomes against an expectation profile
    Check(CheckArgs),
    /// Internal: execute one probe as an isolation worker
    #[command(name = "__probe", hide = true)]
    ProbeWorker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Parser)]
struct ListArgs {
    /// Restrict to one category (e.g. expose-metadata)
    #[arg(long)]
    category: Option<Category>,
    /// Restrict to probes with this default mode
    #[arg(long)]
    mode: Option<ExecutionMode>,
    /// Restrict to specific probe ids (comma separated or repeated)
    #[arg(long = "probe", value_delimiter = ',')]
    probes: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
}

#[derive(Parser)]
struct SelectionArgs {
    /// Configuration file (JSON config document); flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run specific probe ids (comma separated or repeated)
    #[arg(long = "probe", value_delimiter = ',')]
    probes: Vec<String>,
    /// Run one category
    #[arg(long)]
    category: Option<Category>,
    /// Force an execution mode onto every selected probe
    #[arg(long)]
    mode: Option<ExecutionMode>,
    /// Scratch root (the only location probes may mutate)
    #[arg(long)]
    scratch: Option<PathBuf>,
    /// Per-probe timeout in seconds
    #[arg(long)]
    timeout: Option<u64>,
    /// Maximum enumeration depth
    #[arg(long)]
    depth: Option<usize>,
    /// Redaction level applied to report output
    #[arg(long)]
    redact: Option<RedactionLevel>,
    /// Isolation: subprocess (default) or in-process
    #[arg(long)]
    isolation: Option<IsolationArg>,
    /// Write the structured report to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Parser)]
struct RunArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    /// What to print on stdout when no --report file is given
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Parser)]
struct CheckArgs {
    #[command(flatten)]
    selection: SelectionArgs,
    /// Bundled profile name (dyff-hardened, unconfined) or a profile file
    #[arg(long)]
    profile: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IsolationArg {
    InProcess,
    Subprocess,
}

impl From<IsolationArg> for Isolation {
    fn from(value: IsolationArg) -> Isolation {
        match value {
            IsolationArg::InProcess => Isolation::InProcess,
            IsolationArg::Subprocess => Isolation::Subprocess,
        }
    }
}

/// On-disk configuration document; the same structured-JSON family as
/// reports, under a `config` key.
#[derive(Serialize, Deserialize)]
struct ConfigDocument {
    #[serde(default = "default_schema_version")]
    schema_version: u32,
    config: RunConfig,
}

fn default_schema_version() -> u32 {
    report::SCHEMA_VERSION
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("sandboxeval: error: {message}");
    2
}

pub fn main_impl() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::List(args) => cmd_list(args),
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::ProbeWorker => executor::probe_worker_main(),
    }
}

fn parse_probe_ids(raw: &[String]) -> Result<Option<BTreeSet<ProbeId>>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    let mut ids = BTreeSet::new();
    for value in raw {
        ids.insert(ProbeId::new(value.clone()).map_err(|e| e.to_string())?);
    }
    Ok(Some(ids))
}

fn cmd_list(args: ListArgs) -> i32 {
    let ids = match parse_probe_ids(&args.probes) {
        Ok(ids) => ids,
        Err(e) => return fail(e),
    };
    let filter = ProbeFilter { category: args.category, mode: args.mode, ids };
    let specs = match Registry::all_probes().filter(&filter) {
        Ok(specs) => specs,
        Err(e) => return fail(e),
    };
    match args.format {
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(&specs).expect("catalog serializes");
            println!("{json}");
        }
        OutputFormat::Table => {
            for spec in &specs {
                println!(
                    "{:<34} {:<24} {:<11} {}",
                    spec.id.to_string(),
                    spec.category.to_string(),
                    spec.default_mode.to_string(),
                    spec.description
                );
            }
            eprintln!("{} probes", specs.len());
        }
    }
    0
}

/// Builds the effective run configuration: file values first, then flag
/// overrides on top.
fn assemble_config(args: &SelectionArgs) -> Result<RunConfig, String> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            let document: ConfigDocument = serde_json::from_str(&text)
                .map_err(|e| format!("config {} is malformed: {e}", path.display()))?;
            if document.schema_version != report::SCHEMA_VERSION {
                return Err(format!(
                    "config schema version {} unsupported (expected {})",
                    document.schema_version,
                    report::SCHEMA_VERSION
                ));
            }
            document.config
        }
        None => RunConfig::default(),
    };
    if let Some(ids) = parse_probe_ids(&args.probes)? {
        config.selection.ids = Some(ids);
    }
    if let Some(category) = args.category {
        config.selection.category = Some(category);
    }
    if let Some(scratch) = &args.scratch {
        config.scratch_root = Some(scratch.clone());
    }
    if let Some(timeout) = args.timeout {
        config.per_probe_timeout_secs = timeout;
    }
    if let Some(depth) = args.depth {
        config.max_depth = depth;
    }
    if let Some(redact) = args.redact {
        config.redact = redact;
    }
    if let Some(isolation) = args.isolation {
        config.isolation = isolation.into();
    }
    if let Some(mode) = args.mode {
        // force the mode onto everything the selection resolves to
        let selected = Registry::all_probes()
            .filter(&config.selection)
            .map_err(|e| e.to_string())?;
        for spec in selected {
            config.mode_overrides.insert(spec.id.clone(), mode);
        }
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

/// Creates (and truncates) the report file up front so an unwritable path
/// fails before any probe runs.
fn preflight_report_file(path: &PathBuf) -> Result<(), String> {
    std::fs::File::create(path)
        .map(|_| ())
        .map_err(|e| format!("report path {} is not writable: {e}", path.display()))
}

fn execute(args: &SelectionArgs) -> Result<RunReport, String> {
    let config = assemble_config(args)?;
    if let Some(path) = &args.report {
        preflight_report_file(path)?;
    }
    let report = executor::run_suite(&config).map_err(|e| e.to_string())?;
    if let Some(path) = &args.report {
        let bytes = report::render_structured(&report, config.redact);
        std::fs::write(path, bytes)
            .map_err(|e| format!("cannot write report {}: {e}", path.display()))?;
    }
    Ok(report)
}

fn cmd_run(args: RunArgs) -> i32 {
    let redact = args.selection.redact.unwrap_or_default();
    let report = match execute(&args.selection) {
        Ok(report) => report,
        Err(e) => return fail(e),
    };
    if args.selection.report.is_some() {
        print!("{}", report::render_table(&report));
    } else {
        match args.format {
            OutputFormat::Json => {
                let bytes = report::render_structured(&report, redact);
                std::io::stdout().write_all(&bytes).ok();
                eprint!("{}", report::render_table(&report));
            }
            OutputFormat::Table => print!("{}", report::render_table(&report)),
        }
    }
    match report.safety_violation {
        // a completed run exits 0 regardless of outcomes; a safety violation
        // is a runtime failure
        Some(_) => 2,
        None => 0,
    }
}

fn cmd_check(args: CheckArgs) -> i32 {
    let profile_text = match policy::bundled_profile(&args.profile) {
        Some(text) => text.to_string(),
        None => match std::fs::read_to_string(&args.profile) {
            Ok(text) => text,
            Err(e) => return fail(format!("cannot read profile {}: {e}", args.profile)),
        },
    };
    let loaded = match policy::load_profile(&profile_text, Registry::all_probes()) {
        Ok(loaded) => loaded,
        Err(e) => return fail(e),
    };
    for warning in &loaded.warnings {
        eprintln!("sandboxeval: warning: {warning}");
    }
    let report = match execute(&args.selection) {
        Ok(report) => report,
        Err(e) => return fail(e),
    };
    if report.safety_violation.is_some() {
        eprintln!(
            "sandboxeval: error: {}",
            report.safety_violation.as_deref().unwrap_or("safety violation")
        );
        return 2;
    }
    let evaluation = policy::evaluate(&report, &loaded.policy);
    for verdict in &evaluation.verdicts {
        match verdict.status {
            VerdictStatus::Conform => {}
            VerdictStatus::Violation => {
                let expected: Vec<&str> = verdict.expected.iter().map(|o| o.as_str()).collect();
                println!(
                    "VIOLATION {} observed={} expected={}",
                    verdict.probe,
                    verdict.observed,
                    expected.join("|")
                );
            }
            VerdictStatus::Indeterminate => {
                println!("INDETERMINATE {} (outcome unknown)", verdict.probe);
            }
        }
    }
    println!(
        "profile={} probes={} violations={} indeterminate={} overall={}",
        loaded.policy.name,
        evaluation.verdicts.len(),
        evaluation.violations,
        evaluation.indeterminate,
        if evaluation.conform() { "CONFORM" } else { "NONCONFORM" }
    );
    if evaluation.conform() {
        0
    } else {
        1
    }
}

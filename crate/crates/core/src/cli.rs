//! Command-line front end. [`run`] parses arguments, dispatches, and returns
//! the process exit code: 0 on success, 1 when a verification fails, 2 on
//! usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::builder::{self, ChainFile, PcfStructure, Schedule, ScheduleParams, StructureExport};
use crate::kernel::{compat_oracle, Condition};
use crate::ordinal::{self, Kind};
use crate::verify::{self, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pcf-forcing",
    version,
    about = "Build and verify finite-condition forcing structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a schedule, write the structure export and print its report.
    Build(BuildArgs),
    /// Re-check an exported structure.
    Verify(VerifyArgs),
    /// Run the randomized kernel, oracle and dense-meet law suites.
    Laws(LawsArgs),
    /// Search for a common extension of two conditions.
    Oracle(OracleArgs),
    /// Normalize an ordinal expression.
    Parse(ParseArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long, conflicts_with = "schedule", required_unless_present = "schedule")]
    preset: Option<String>,
    /// Schedule parameters as JSON.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the schedule and every chain step here.
    #[arg(long)]
    chain_out: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Chain file from `build --chain-out`; enables every check.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Debug, Args)]
struct LawsArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
}

#[derive(Debug, Args)]
struct ParseArgs {
    expr: String,
    #[arg(long)]
    fund: Option<u64>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Laws(a) => cmd_laws(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Parse(a) => cmd_parse(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_report(out: &mut dyn Write, report: &Report, format: &str) -> anyhow::Result<i32> {
    let text = verify::render(report, format)?;
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        writeln!(out)?;
    }
    Ok(report.exit_code())
}

fn cmd_build(a: BuildArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    a.format.parse::<verify::Format>()?;
    let schedule: Schedule = match (&a.preset, &a.schedule) {
        (Some(name), _) => builder::preset(name)?,
        (None, Some(path)) => builder::schedule_from_params(read_json::<ScheduleParams>(path)?)?,
        (None, None) => return Err(anyhow!("one of --preset or --schedule is required")),
    };
    let chain = builder::run(&schedule)?;
    let structure = builder::extract(&chain);
    write_json(&a.out, &structure.export())?;
    if let Some(path) = &a.chain_out {
        write_json(
            path,
            &ChainFile {
                schedule: schedule.clone(),
                chain: chain.clone(),
            },
        )?;
    }
    let report = verify::check_structure(&structure, &chain, &schedule)?;
    print_report(out, &report, &a.format)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    a.format.parse::<verify::Format>()?;
    let export: StructureExport = read_json(&a.input)?;
    let structure = PcfStructure::from_export(export);
    let report = match &a.chain {
        None => verify::check_structure_only(&structure),
        Some(path) => {
            let file: ChainFile = read_json(path)?;
            let structure = structure.with_audit_from(&file.chain);
            verify::check_structure(&structure, &file.chain, &file.schedule)?
        }
    };
    print_report(out, &report, &a.format)
}

fn cmd_laws(a: LawsArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    a.format.parse::<verify::Format>()?;
    let mut checks = verify::check_condition_laws(a.samples, a.seed).checks;
    checks.extend(verify::oracle_equivalence(a.samples / 20, a.seed).checks);
    checks.extend(verify::dense_meet_contract(a.samples / 10, a.seed).checks);
    print_report(out, &Report::new(checks), &a.format)
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let p: Condition = read_json(&a.p)?;
    let q: Condition = read_json(&a.q)?;
    match compat_oracle(&p, &q)? {
        Some(r) => {
            writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            Ok(EXIT_OK)
        }
        None => {
            writeln!(out, "incompatible")?;
            Ok(EXIT_FAIL)
        }
    }
}

fn cmd_parse(a: ParseArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let x = match ordinal::parse(&a.expr) {
        Ok(x) => x,
        Err(e) => {
            writeln!(err, "{}", a.expr)?;
            if let Some(pos) = e.position() {
                writeln!(err, "{}^", " ".repeat(a.expr[..pos.min(a.expr.len())].chars().count()))?;
            }
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    match a.fund {
        None => writeln!(out, "{x} ({})", x.kind())?,
        Some(n) if x.kind() == Kind::Limit => writeln!(out, "{}", x.fund_seq(n)?)?,
        Some(_) => return Err(anyhow!("--fund needs a limit ordinal, {x} is {}", x.kind())),
    }
    Ok(EXIT_OK)
}

use clap::{Args, Parser, Subcommand};
use fracchem_lab::{
    catalog, parse_values, run_scenario, verify, write_outputs, CheckStatus, Format, LabError,
    RunReport, Scenario, Study, SweepParameter, Verification,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Periodic solutions of the fractional chemostat with sliding memory.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 when a
/// solve does not converge, 3 on input or I/O errors.
#[derive(Debug, Parser)]
#[command(name = "fracchem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario's own study
    Solve(RunArgs),
    /// Run a scenario as a multistart study
    Multistart {
        #[command(flatten)]
        run: RunArgs,
        /// Number of random starts
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Run a scenario once per parameter value
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// alpha, memory_length or theta
        #[arg(long)]
        param: SweepParameter,
        /// start:stop:step or a comma-separated list
        #[arg(long)]
        values: String,
    },
    /// Re-check a saved JSON report
    Verify { report: PathBuf },
    /// Write a saved JSON report in other formats
    Export {
        report: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
        format: Vec<Format>,
    },
    /// List built-in scenarios, or print one as a scenario file
    Catalog { name: Option<String> },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file or built-in catalog name
    scenario: String,
    /// Override the multistart seed
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files; nothing is written without it
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    format: Vec<Format>,
}

fn load_scenario(spec: &str) -> Result<Scenario, LabError> {
    if catalog::NAMES.contains(&spec) {
        return catalog::scenario(spec);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(LabError::UnknownScenario(spec.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_toml(&text, spec)
}

fn read_report(path: &Path) -> Result<RunReport, LabError> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunReport::from_json(&text)
}

fn print_verification(report: &RunReport, v: &Verification) {
    println!(
        "scenario {} | seed {} | {} run(s), {} not converged",
        report.scenario.name,
        report.seed,
        report.runs.len(),
        v.not_converged
    );
    if let Some(summary) = &report.buckets {
        for (i, b) in summary.buckets.iter().enumerate() {
            let s0 = report.runs[b.representative].solution.s_at_zero;
            println!(
                "  bucket {i}: {:?} x{} (s(0) = {s0:.6})",
                b.classification,
                b.count()
            );
        }
    }
    if report.runs.len() == 1 {
        let sol = &report.runs[0].solution;
        println!(
            "  {:?} after {} Newton steps, s(0) = {:.6}",
            sol.classification, sol.iterations, sol.s_at_zero
        );
    }
    for c in &v.checks {
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotApplicable => "N/A ",
            CheckStatus::Info => "INFO",
        };
        let measured = c
            .measured
            .map(|m| format!(" measured={m:.3e}"))
            .unwrap_or_default();
        let limit = c
            .limit
            .map(|m| format!(" limit={m:.3e}"))
            .unwrap_or_default();
        println!("  {tag} {:<22}{measured}{limit}  {}", c.name, c.detail);
    }
}

fn execute(
    scenario: Scenario,
    seed: Option<u64>,
    out: Option<PathBuf>,
    formats: &[Format],
) -> Result<i32, LabError> {
    let mut scenario = scenario;
    if let Some(seed) = seed {
        scenario.config.seed = seed;
    }
    let report = run_scenario(&scenario)?;
    let v = verify(&report)?;
    print_verification(&report, &v);
    if let Some(dir) = out {
        for path in write_outputs(&report, &dir, formats)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(v.exit_code())
}

fn run(cli: Cli) -> Result<i32, LabError> {
    match cli.command {
        Command::Solve(a) => execute(load_scenario(&a.scenario)?, a.seed, a.out, &a.format),
        Command::Multistart { run: a, n } => {
            let mut s = load_scenario(&a.scenario)?;
            s.study = Study::Multistart { starts: n };
            execute(s, a.seed, a.out, &a.format)
        }
        Command::Sweep {
            run: a,
            param,
            values,
        } => {
            let mut s = load_scenario(&a.scenario)?;
            s.study = Study::Sweep {
                parameter: param,
                values: parse_values(&values)?,
            };
            execute(s, a.seed, a.out, &a.format)
        }
        Command::Verify { report } => {
            let r = read_report(&report)?;
            let v = verify(&r)?;
            print_verification(&r, &v);
            Ok(v.exit_code())
        }
        Command::Export {
            report,
            out,
            format,
        } => {
            let r = read_report(&report)?;
            for path in write_outputs(&r, &out, &format)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Catalog { name: Some(name) } => {
            print!("{}", catalog::scenario(&name)?.to_toml());
            Ok(0)
        }
        Command::Catalog { name: None } => {
            for s in catalog::all() {
                let study = match &s.study {
                    Study::Single => "single solve".to_string(),
                    Study::Multistart { starts } => format!("multistart, {starts} starts"),
                    Study::Washout { starts } => format!("washout, {starts} starts"),
                    Study::Sweep { parameter, values } => {
                        format!("{parameter} sweep, {} values", values.len())
                    }
                    Study::Bangbang => "bang-bang schedule".to_string(),
                };
                println!("{:<20} N={:<4} {study}", s.name, s.config.node_count);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use adder_core::harness::{
    check_expectations, run_sweep, scenario, summarize, write_csv, write_json, RunConfig,
    Scenario, SweepOptions, SweepResult, SCENARIO_IDS,
};
use adder_core::model::UnitConvention;
use adder_core::oracle::TargetConvention;
use adder_core::protocol::HamiltonianPath;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Tolerance of `--check` on averages and minima (absolute, 1.5 percentage points).
const CHECK_TOLERANCE: f64 = 0.015;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "adder", version, about = "Fidelity sweeps for the transmon/two-cavity quantum adder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario or a TOML run file.
    Run(RunArgs),
    /// List the built-in scenarios.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Effective,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Angular,
    Cyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Nominal,
    ParityCorrected,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario id (see `adder list`).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// TOML run file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    theta_steps: Option<usize>,
    /// Single cavity-decay scale k.
    #[arg(long)]
    k: Option<f64>,
    /// Fock levels per cavity.
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, value_enum)]
    hamiltonian: Option<PathArg>,
    #[arg(long, value_enum)]
    unit_convention: Option<UnitsArg>,
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    /// Switch off every decay channel.
    #[arg(long)]
    noiseless: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
    /// Reserved; every code path is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Compare averages and minima with the scenario's expected values.
    #[arg(long)]
    check: bool,
}

fn build_scenario(args: &RunArgs) -> adder_core::Result<Scenario> {
    let mut s = match (&args.scenario, &args.config) {
        (Some(id), _) => scenario(id)?,
        (None, Some(path)) => RunConfig::load(path)?.to_scenario()?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(n) = args.theta_steps {
        s.theta.steps = n;
    }
    if let Some(k) = args.k {
        s.k_values = vec![k];
    }
    if let Some(n) = args.truncation {
        s.truncation = n;
    }
    if let Some(p) = args.hamiltonian {
        s.hamiltonian = match p {
            PathArg::Effective => HamiltonianPath::Effective,
            PathArg::Full => HamiltonianPath::Full,
        };
    }
    if let Some(u) = args.unit_convention {
        s.unit_convention = match u {
            UnitsArg::Angular => UnitConvention::Angular,
            UnitsArg::Cyclic => UnitConvention::Cyclic,
        };
    }
    if let Some(t) = args.target {
        s.target = match t {
            TargetArg::Nominal => TargetConvention::Nominal,
            TargetArg::ParityCorrected => TargetConvention::ParityCorrected,
        };
    }
    if args.noiseless {
        s.noiseless = true;
    }
    s.validate()?;
    Ok(s)
}

fn emit(result: &SweepResult, args: &RunArgs) -> adder_core::Result<()> {
    let out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match args.format {
        Format::Csv => write_csv(result, out),
        Format::Json => write_json(result, out),
    }
}

fn report(result: &SweepResult) {
    for s in summarize(result) {
        let pct = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.2}%", 100.0 * v));
        eprintln!(
            "k={} g_ab/g={} c={}: average {} minimum {} ({} rows, {} errors)",
            s.point.k,
            s.point.g_ab_over_g,
            s.point.c,
            pct(s.average),
            pct(s.minimum),
            s.rows,
            s.errors
        );
    }
}

fn run(args: RunArgs) -> ExitCode {
    if let Some(seed) = args.seed {
        eprintln!("note: --seed {seed} has no effect, nothing is sampled");
    }
    let s = match build_scenario(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match run_sweep(&s, SweepOptions { threads: args.threads }) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = emit(&result, &args) {
        eprintln!("error writing output: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    report(&result);
    if result.error_count() > 0 {
        eprintln!("{} of {} points failed", result.error_count(), result.rows.len());
        return ExitCode::from(EXIT_NUMERICAL);
    }
    if args.check {
        let outcomes = check_expectations(&result, &s.expectations, CHECK_TOLERANCE);
        let mut ok = true;
        for o in &outcomes {
            eprintln!(
                "check {}: expected avg {:?} min {:?}, got avg {:?} min {:?}",
                if o.passed { "ok" } else { "FAILED" },
                o.expectation.average,
                o.expectation.minimum,
                o.average,
                o.minimum
            );
            ok &= o.passed;
        }
        if !ok {
            return ExitCode::from(EXIT_CHECK);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            for id in SCENARIO_IDS {
                let s = scenario(id).expect("registered");
                println!(
                    "{id}\t{} k1={} k2={} Δ/α={} k={:?} g_ab/g={:?} c points={}",
                    s.scheme.variant,
                    s.scheme.k1,
                    s.scheme.k2,
                    s.ratio().map(|r| r.to_string()).unwrap_or_else(|e| e.to_string()),
                    s.k_values,
                    s.crosstalk,
                    s.inhomogeneity.len()
                );
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => run(args),
    }
}

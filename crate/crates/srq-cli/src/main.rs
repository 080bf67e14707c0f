//! `srq` - global entanglement Q and its symmetry-resolved decomposition.
//!
//! Subcommands: `sweep` (seeded ensembles to CSV), `decompose` (one state
//! file), `circuit` (interference-measurement simulation), `validate`
//! (invariant suites), `gen-state` (benchmark state files).
//!
//! Exit codes: 0 success, 2 domain/config error, 3 resource cap exceeded,
//! 4 validation or consistency failure.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use srq_core::circuit::reconstruct_q_interference;
use srq_core::entanglement::decompose;
use srq_core::error::{Result, SrqError};
use srq_core::states::{named_state, read_state_file, write_state_file, NamedState};
use srq_core::sweep::{run_sweep, write_csv, SweepConfig};
use srq_core::symmetry::ChargePartition;
use srq_core::validate::{run_validation, ValidateOptions};

#[derive(Parser)]
#[command(
    name = "srq",
    version,
    about = "Global entanglement Q of qudit pure states, resolved into charge-sector and interference contributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Haar-ensemble sweep over an (n, d, partition) grid and
    /// write per-term statistics against the closed-form averages as CSV
    Sweep(SweepArgs),
    /// Decompose a state file into sector and interference contributions
    Decompose(DecomposeArgs),
    /// Reconstruct one interference term through the measurement circuit
    Circuit(CircuitArgs),
    /// Run every invariant suite and report pass/fail counts
    Validate(ValidateArgs),
    /// Write a named benchmark state to a state file
    GenState(GenStateArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Particle counts, comma separated (default 3,4,5)
    #[arg(long = "n")]
    n_values: Option<String>,
    /// Local dimensions, comma separated (default 2,3,4,5,6)
    #[arg(long = "d")]
    d_values: Option<String>,
    /// `all`, `all:<cap>`, or explicit partitions like `1+1,2+1`
    #[arg(long, alias = "partition")]
    partitions: Option<String>,
    /// Haar samples per grid point (default 500)
    #[arg(long)]
    samples: Option<usize>,
    /// Master seed; child seeds are mixed per grid point and sample
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (default sweep.csv)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on the Hilbert space dimension d^n (default 1048576)
    #[arg(long = "dim-cap")]
    dim_cap: Option<usize>,
    /// Flat key = value config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// State file (line 1: `n d`; then `index re im` per nonzero amplitude)
    state: PathBuf,
    /// Partition spec, e.g. `d=6 sectors=3,2,1`
    #[arg(long)]
    partition: String,
    /// Also write the decomposition as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CircuitArgs {
    /// State file
    state: PathBuf,
    /// Partition spec, e.g. `d=2 sectors=1,1`
    #[arg(long)]
    partition: String,
    /// First sector index
    #[arg(long)]
    alpha: usize,
    /// Second sector index
    #[arg(long)]
    beta: usize,
    /// Shots per site; omit for the exact expectation
    #[arg(long)]
    shots: Option<u64>,
    /// Seed for shot sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Shrink validation grids to d^n below this cap
    #[arg(long = "dim-cap", default_value_t = srq_core::states::DEFAULT_DIM_CAP)]
    dim_cap: usize,
    /// Fault injection: skip the RDM symmetrization pass
    #[arg(long = "skip-symmetrization")]
    skip_symmetrization: bool,
}

#[derive(Args)]
struct GenStateArgs {
    /// One of: product-zero, ghz, w, bell, plus-product
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Output state file
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &SrqError) -> ExitCode {
    match err {
        SrqError::Resource(_) => ExitCode::from(3),
        SrqError::Consistency(_) => ExitCode::from(4),
        _ => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Circuit(args) => cmd_circuit(args),
        Command::Validate(args) => cmd_validate(args),
        Command::GenState(args) => cmd_gen_state(args),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut cfg = config::SweepSettings::default();
    if let Some(path) = &args.config {
        cfg.merge_file(path)?;
    }
    cfg.merge_flags(&args)?;
    let out_path = cfg.out.clone();
    let sweep_config: SweepConfig = cfg.into_config()?;

    let report = run_sweep(&sweep_config)?;
    write_csv(&report, &out_path)?;
    println!(
        "wrote {} rows to {} (generator {}, master seed {}, {} samples per point)",
        report.rows.len(),
        out_path.display(),
        report.generator,
        report.master_seed,
        report.samples
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_decompose(args: DecomposeArgs) -> Result<ExitCode> {
    let psi = read_state_file(&args.state)?;
    let partition = ChargePartition::parse(&args.partition)?;
    let dec = decompose(&psi, &partition)?;

    println!(
        "state: n={} d={} ({})",
        psi.n(),
        psi.d(),
        args.state.display()
    );
    println!("partition: {partition}");
    println!("q_total            = {:.16e}", dec.q_total);
    for (sector, q) in partition.sectors().iter().zip(&dec.q_sector) {
        println!("q_sector[{}]        = {:.16e}", sector.label, q);
    }
    for ((a, b), q) in &dec.q_interference {
        println!(
            "q_interference[{}|{}] = {:.16e}",
            partition.sectors()[*a].label,
            partition.sectors()[*b].label,
            q
        );
    }
    println!("sum-rule residual  = {:.3e}", dec.sum_rule_residual);

    if let Some(out) = &args.out {
        let mut csv = String::from("kind,label,value\n");
        csv.push_str(&format!("total,total,{:.16e}\n", dec.q_total));
        for (sector, q) in partition.sectors().iter().zip(&dec.q_sector) {
            csv.push_str(&format!("sector,{},{:.16e}\n", sector.label, q));
        }
        for ((a, b), q) in &dec.q_interference {
            csv.push_str(&format!(
                "interference,{}|{},{:.16e}\n",
                partition.sectors()[*a].label,
                partition.sectors()[*b].label,
                q
            ));
        }
        std::fs::write(out, csv)?;
        println!("wrote decomposition to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_circuit(args: CircuitArgs) -> Result<ExitCode> {
    let psi = read_state_file(&args.state)?;
    let partition = ChargePartition::parse(&args.partition)?;
    let rec = reconstruct_q_interference(
        &psi, &partition, args.alpha, args.beta, args.shots, args.seed,
    )?;
    let dec = decompose(&psi, &partition)?;
    let reference = dec.q_interference[&(args.alpha.min(args.beta), args.alpha.max(args.beta))];

    println!(
        "state: n={} d={} ({})",
        psi.n(),
        psi.d(),
        args.state.display()
    );
    println!(
        "partition: {partition}, sectors ({}, {})",
        args.alpha, args.beta
    );
    for o in &rec.outcomes {
        match (o.shot_estimate, o.standard_error) {
            (Some(est), Some(se)) => println!(
                "site {}: <Z> exact = {:.16e}, shots = {:.16e} (se {:.3e})",
                o.site, o.exact_expectation, est, se
            ),
            _ => println!("site {}: <Z> exact = {:.16e}", o.site, o.exact_expectation),
        }
    }
    println!("q_interference exact          = {:.16e}", rec.exact);
    println!(
        "deviation from decomposition  = {:.3e}",
        (rec.exact - reference).abs()
    );
    if let (Some(est), Some(se)) = (rec.shot_estimate, rec.standard_error) {
        println!("q_interference shot estimate  = {:.16e}", est);
        println!("binomial standard error       = {:.3e}", se);
        println!(
            "deviation from exact          = {:.3e}",
            (est - rec.exact).abs()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let opts = ValidateOptions {
        seed: args.seed,
        dim_cap: args.dim_cap,
        skip_symmetrization: args.skip_symmetrization,
    };
    let report = run_validation(&opts)?;
    let mut all_checks = 0;
    for suite in &report.suites {
        all_checks += suite.checks;
        let status = if suite.passed() { "pass" } else { "FAIL" };
        println!(
            "{status} {:<32} {:>5} checks, {} failures, worst {:.3e}",
            suite.name, suite.checks, suite.failures, suite.worst
        );
        if let Some(detail) = &suite.detail {
            println!("     {detail}");
        }
    }
    if report.all_passed() {
        println!(
            "all {} suites passed ({} checks)",
            report.suites.len(),
            all_checks
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!("failing suites: {}", report.failing_suites().join(", "));
        Ok(ExitCode::from(4))
    }
}

fn cmd_gen_state(args: GenStateArgs) -> Result<ExitCode> {
    let kind: NamedState = args.kind.parse()?;
    let psi = named_state(kind, args.n, args.d)?;
    write_state_file(&args.out, &psi)?;
    println!(
        "wrote {} state (n={}, d={}) to {}",
        kind,
        args.n,
        args.d,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

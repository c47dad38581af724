use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sharpbound::harness::{
    compute, gen_concordance_targets, gen_moment_instance, gen_pod_instance, joint_from_json, run_moment_sweep, run_pod_sweep, summarize,
    ComputeOptions, Method, MomentSweepConfig, PodSweepConfig, Problem, SweepRow, DEFAULT_ALPHA,
};
use sharpbound::{check_membership, AmbiguitySpec, BooleanHigherOrder, Error};

/// Sharp upper bounds on E[max_k a_k'ξ + b_k] over discrete ambiguity sets.
#[derive(Parser)]
#[command(name = "sharpbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the result document.
    Compute {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Cross-check against the exponential LP; fails if the values differ by more than 1e-6.
        #[arg(long)]
        verify: bool,
        /// Include an extremal distribution, checked for membership.
        #[arg(long)]
        extract: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random instance in the problem file format.
    Gen {
        #[arg(long, value_enum, default_value_t = Family::Pod)]
        kind: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Order of the Boolean targets (defaults to N).
        #[arg(long)]
        m: Option<usize>,
        /// Number of moments per coordinate.
        #[arg(long, default_value_t = 2)]
        l: usize,
        /// Marginal probabilities are drawn from [0, a].
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds for orders M = 1..m of the higher-order Boolean set, as CSV.
    SweepPod {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
    },
    /// Bounds for moment degrees L = 1..l, as CSV.
    SweepMoment {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        l: usize,
    },
    /// Check a problem against the exponential LP, or a distribution against a problem.
    Verify {
        problem: PathBuf,
        /// Distribution file to test for membership instead of re-solving.
        #[arg(long)]
        joint: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// First seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print summary statistics to stderr.
    #[arg(long)]
    summary: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Compact,
    Generic,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Compact => Method::Compact,
            MethodArg::Generic => Method::Generic,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Pod,
    Moment,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_problem(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Problem::from_json(&text)?)
}

fn write_rows(rows: &[SweepRow], sweep: &SweepArgs) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    emit(sweep.out.as_deref(), &String::from_utf8(w.into_inner()?)?)?;
    if sweep.summary {
        eprintln!("{}", serde_json::to_string_pretty(&summarize(rows))?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compute { problem, method, verify, extract, out } => {
            let problem = read_problem(&problem)?;
            let doc = compute(&problem, method.into(), ComputeOptions { verify, extract })?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))
        }
        Command::Gen { kind, seed, n, m, l, a, out } => {
            let problem = match kind {
                Family::Pod => {
                    let inst = gen_pod_instance(seed, n, a)?;
                    let m = m.unwrap_or(n);
                    let q = gen_concordance_targets(&inst.p, m, &DEFAULT_ALPHA)?;
                    Problem { spec: AmbiguitySpec::BooleanHigherOrder(BooleanHigherOrder { p: inst.p, m, q }), objective: inst.objective }
                }
                Family::Moment => {
                    let inst = gen_moment_instance(seed, n)?;
                    Problem { spec: AmbiguitySpec::Moment(inst.spec(l)), objective: inst.objective }
                }
            };
            emit(out.as_deref(), &(problem.to_json()? + "\n"))
        }
        Command::SweepPod { sweep, n, m, a } => {
            let cfg = PodSweepConfig { first_seed: sweep.seed, instances: sweep.instances, n, a, max_order: m.unwrap_or(n), ..Default::default() };
            write_rows(&run_pod_sweep(&cfg)?, &sweep)
        }
        Command::SweepMoment { sweep, n, l } => {
            let cfg = MomentSweepConfig { first_seed: sweep.seed, instances: sweep.instances, n, max_degree: l };
            write_rows(&run_moment_sweep(&cfg)?, &sweep)
        }
        Command::Verify { problem, joint, method } => {
            let problem = read_problem(&problem)?;
            match joint {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let joint = joint_from_json(&text)?;
                    let report = check_membership(&joint, &problem.spec);
                    println!("max marginal error {:e}, min slack {:e}", report.max_marginal_error, report.min_slack);
                    if !report.passes() {
                        return Err(Error::Verification(format!("{} violated constraints: {:?}", report.violations.len(), report.violations)).into());
                    }
                    println!("distribution belongs to the ambiguity set");
                }
                None => {
                    let doc = compute(&problem, method.into(), ComputeOptions { verify: true, extract: true })?;
                    println!("{} bound {} matches the exponential LP {}", doc.method, doc.value, doc.oracle_value.unwrap_or(f64::NAN));
                }
            }
            Ok(())
        }
    }
}

/// 1 for unreadable or invalid input, 2 for an empty ambiguity set, 3 for solver or
/// verification failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => 2,
        Some(Error::Parse(_) | Error::Invalid(_) | Error::InvalidSpec(_) | Error::DimensionMismatch { .. } | Error::LatticeTooLarge { .. }) => 1,
        Some(_) => 3,
        None if err.downcast_ref::<io::Error>().is_some() => 1,
        None => 3,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

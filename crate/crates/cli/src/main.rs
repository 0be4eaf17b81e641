//! Command-line front end for the norm-ratio recovery library.
//!
//! Exit discipline: 0 on success, 1 when a solve ends infeasible or
//! degenerate, 2 on usage errors (bad flags, unreadable files, parameters
//! outside their domains). Diagnostics go to standard error; data goes to
//! files or standard output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qratio::analysis::{cmsv_estimate_with, kernel_ratio_inf_ccp_with, kernel_ratio_inf_linf, CertificateReport};
use qratio::bench::{
    parse_experiment_config, run_phase_transition, run_toy_scan, ExperimentSpec, Method,
};
use qratio::ensembles::{noisy_measurements, sparse_signal, EnsembleSpec};
use qratio::model::rng::RNG_ALGORITHM;
use qratio::model::{load_matrix, load_vector, save_matrix, save_vector, RatioQ, Termination};
use qratio::solvers::{
    bpdn_solve, ccp_solve, dca_solve_q, l1_minus_l2_solve, lp_solve_linf, pm_solve,
};
use qratio::sparsity::{q_ratio_sparsity, support_count, SparsityOrder};
use qratio::{Matrix, Problem, Report, Signal};

#[derive(Parser)]
#[command(
    name = "qratio",
    version,
    about = "Sparse recovery by l1/lq norm-ratio minimization",
    long_about = None,
    propagate_version = true
)]
struct Cli {
    /// Worker threads for the parallel internals (default: all cores).
    /// Outputs are deterministic regardless of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance: matrix, sparse signal, measurements.
    Gen(GenArgs),
    /// Evaluate the q-ratio sparsity measure of a vector file.
    Sparsity(SparsityArgs),
    /// Recover a signal from a matrix file and a measurement file.
    Solve(SolveArgs),
    /// Evaluate the parametric gap F(lambda) on an instance.
    Fvalue(FvalueArgs),
    /// Kernel norm-ratio infimum and the induced recovery threshold.
    KernelRatio(KernelRatioArgs),
    /// Ratio-constrained minimal singular value estimate.
    Cmsv(CmsvArgs),
    /// Write the pedagogical objective-scan CSV tables.
    Toy(ToyArgs),
    /// Run a benchmark sweep from a key = value spec file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Matrix family: gaussian or dct.
    #[arg(long, default_value = "gaussian")]
    ensemble: String,
    /// Rows.
    #[arg(long)]
    m: usize,
    /// Columns.
    #[arg(long)]
    n: usize,
    /// Number of nonzeros in the planted signal.
    #[arg(long)]
    k: usize,
    /// Noise standard deviation (0 = noiseless).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma: f64,
    /// Oversampling factor for the dct family.
    #[arg(long, default_value_t = 5.0)]
    oversampling: f64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving matrix.txt, signal.txt, y.txt, instance.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SparsityArgs {
    /// Sparsity order: 0, a positive decimal, or inf.
    #[arg(long)]
    q: String,
    /// Vector file (`N` header line, then entries).
    #[arg(long)]
    vector: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Solver: pm, ccp, lp, bpdn, or l1l2.
    #[arg(long)]
    method: String,
    /// Ratio order q (decimal > 1, or inf).
    #[arg(long, default_value = "2")]
    q: String,
    /// Noise bound eta >= 0.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    eta: f64,
    /// Matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement file.
    #[arg(long)]
    y: PathBuf,
    /// Gap tolerance for the parametric method.
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    /// Scale cap for the convex-concave method (default: chosen from data).
    #[arg(long)]
    cap: Option<f64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FvalueArgs {
    /// Balance weight lambda >= 0.
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    /// Ratio order q (decimal > 1, or inf).
    #[arg(long, default_value = "2")]
    q: String,
    /// Noise bound eta >= 0.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    eta: f64,
    /// Matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement file.
    #[arg(long)]
    y: PathBuf,
}

#[derive(Args)]
struct KernelRatioArgs {
    /// Ratio order q (decimal > 1, or inf).
    #[arg(long)]
    q: String,
    /// Matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Random restarts for the finite-q search.
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    /// Seed for the finite-q search.
    #[arg(long, default_value_t = 1729)]
    seed: u64,
}

#[derive(Args)]
struct CmsvArgs {
    /// Ratio order q (decimal > 1, or inf).
    #[arg(long)]
    q: String,
    /// Sparsity level s in [1, N].
    #[arg(long, allow_negative_numbers = true)]
    s: f64,
    /// Matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Random starts for the search.
    #[arg(long, default_value_t = 100)]
    starts: usize,
    /// Seed for the search.
    #[arg(long, default_value_t = 1729)]
    seed: u64,
}

#[derive(Args)]
struct ToyArgs {
    /// Directory receiving sq_profile.csv and penalty_scan.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Key = value experiment file; omitted = the built-in desk-scale sweep.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory for rows.csv, summary.csv, meta.json.
    #[arg(long)]
    out: PathBuf,
    /// Paper-scale settings: without --spec runs the 64x1024 sweep at 100
    /// replications; with --spec raises replications to at least 100.
    #[arg(long)]
    full: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Infeasibility that escaped a command handler is a solver
            // verdict, not a usage mistake.
            match err.downcast_ref::<qratio::Error>() {
                Some(qratio::Error::Infeasible { .. }) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Sparsity(args) => cmd_sparsity(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Fvalue(args) => cmd_fvalue(args),
        Command::KernelRatio(args) => cmd_kernel_ratio(args),
        Command::Cmsv(args) => cmd_cmsv(args),
        Command::Toy(args) => cmd_toy(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn load_instance(matrix: &Path, y: &Path, eta: f64, q: RatioQ<f64>) -> Result<Problem> {
    if !(eta >= 0.0) || !eta.is_finite() {
        anyhow::bail!("--eta must be >= 0 and finite, got {eta}");
    }
    let a: Matrix =
        load_matrix(matrix).with_context(|| format!("reading {}", matrix.display()))?;
    let measurements: Signal =
        load_vector(y).with_context(|| format!("reading {}", y.display()))?;
    Ok(Problem::new(a, measurements, eta, q)?)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let spec = match args.ensemble.to_ascii_lowercase().as_str() {
        "gaussian" => EnsembleSpec::gaussian(args.m, args.n, args.seed)?,
        "dct" | "oversampled_dct" | "cosine" => {
            EnsembleSpec::oversampled_dct(args.m, args.n, args.oversampling, args.seed)?
        }
        other => anyhow::bail!("unknown ensemble '{other}' (expected gaussian or dct)"),
    };
    let a = spec.draw();
    let truth = sparse_signal::<f64>(args.n, args.k, args.seed.wrapping_add(1))?;
    let (y, eta) = noisy_measurements(&a, &truth.signal, args.sigma, args.seed.wrapping_add(2))?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    save_matrix(args.out_dir.join("matrix.txt"), &a)?;
    save_vector(args.out_dir.join("signal.txt"), &truth.signal)?;
    save_vector(args.out_dir.join("y.txt"), &y)?;
    let meta = json!({
        "ensemble": spec.kind.as_str(),
        "m": args.m,
        "n": args.n,
        "k": args.k,
        "sigma": args.sigma,
        "eta": eta,
        "seed": args.seed,
        "support": truth.support,
        "rng_algorithm": RNG_ALGORITHM,
        "files": {
            "matrix": "matrix.txt",
            "signal": "signal.txt",
            "measurements": "y.txt",
        },
    });
    emit(&meta, Some(&args.out_dir.join("instance.json")))?;
    emit(&meta, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sparsity(args: SparsityArgs) -> Result<ExitCode> {
    let order: SparsityOrder<f64> = SparsityOrder::parse(&args.q)?;
    let z: Signal = load_vector(&args.vector)
        .with_context(|| format!("reading {}", args.vector.display()))?;
    let value = q_ratio_sparsity(&z, order)?;
    let q_json = match order {
        SparsityOrder::Zero => json!(0.0),
        SparsityOrder::Finite(v) => json!(v),
        SparsityOrder::Infinity => json!("inf"),
    };
    let report = json!({
        "q": q_json,
        "value": value.value,
        "entropy": value.entropy,
        "dimension": z.len(),
        "support_count": support_count(&z),
    });
    emit(&report, None)?;
    Ok(ExitCode::SUCCESS)
}

fn dispatch_solve(method: Method, problem: &Problem, args: &SolveArgs) -> qratio::Result<Report> {
    match method {
        Method::Pm => pm_solve(problem, args.delta),
        Method::Ccp => ccp_solve(problem, args.cap),
        Method::LpInf => lp_solve_linf(problem),
        Method::Bpdn => bpdn_solve(problem),
        Method::L1MinusL2 => l1_minus_l2_solve(problem),
    }
}

fn exit_for(termination: Termination) -> ExitCode {
    match termination {
        Termination::Infeasible | Termination::DegenerateZero => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let method = Method::parse(&args.method)?;
    let q = RatioQ::parse(&args.q)?;
    let problem = load_instance(&args.matrix, &args.y, args.eta, q)?;
    match dispatch_solve(method, &problem, &args) {
        Ok(report) => {
            emit(&report.to_json(), args.out.as_deref())?;
            Ok(exit_for(report.termination))
        }
        Err(qratio::Error::Infeasible { excess }) => {
            // Solver verdict, not a usage mistake: report it as data.
            let report = json!({
                "method": method.as_str(),
                "q": q.to_json(),
                "termination": Termination::Infeasible.as_str(),
                "infeasibility_excess": excess,
            });
            emit(&report, args.out.as_deref())?;
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_fvalue(args: FvalueArgs) -> Result<ExitCode> {
    let q = RatioQ::parse(&args.q)?;
    let problem = load_instance(&args.matrix, &args.y, args.eta, q)?;
    match dca_solve_q(&problem, args.lambda) {
        Ok((iterate, f_value)) => {
            let report = json!({
                "lambda": args.lambda,
                "q": q.to_json(),
                "f_value": if f_value == f64::NEG_INFINITY {
                    json!("-inf")
                } else {
                    json!(f_value)
                },
                "iterate_l1": qratio::model::l1_norm(&iterate),
                "iterate_lq": qratio::model::lq_norm(&iterate, q),
            });
            emit(&report, None)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(qratio::Error::Infeasible { excess }) => {
            let report = json!({
                "lambda": args.lambda,
                "q": q.to_json(),
                "termination": Termination::Infeasible.as_str(),
                "infeasibility_excess": excess,
            });
            emit(&report, None)?;
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_kernel_ratio(args: KernelRatioArgs) -> Result<ExitCode> {
    let q: RatioQ<f64> = RatioQ::parse(&args.q)?;
    let a: Matrix = load_matrix(&args.matrix)
        .with_context(|| format!("reading {}", args.matrix.display()))?;
    let mut report = CertificateReport::<f64>::default();
    let ratio = if q.is_infinite() {
        report.notes.push("kernel_ratio_exact".into());
        kernel_ratio_inf_linf(&a)?
    } else {
        report.notes.push("kernel_ratio_upper_bound".into());
        kernel_ratio_inf_ccp_with(&a, q, args.restarts, args.seed)?
    };
    report.kernel_ratio_inf = Some(ratio);
    report.sufficient_k = Some(if ratio.is_infinite() {
        f64::INFINITY
    } else {
        let e = q.sparsity_exponent();
        3f64.powf(-e) * ratio.powf(e)
    });
    emit(&report.to_json(), None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cmsv(args: CmsvArgs) -> Result<ExitCode> {
    let q: RatioQ<f64> = RatioQ::parse(&args.q)?;
    let a: Matrix = load_matrix(&args.matrix)
        .with_context(|| format!("reading {}", args.matrix.display()))?;
    let value = cmsv_estimate_with(&a, q, args.s, args.starts, args.seed)?;
    let mut report = CertificateReport::<f64>::default();
    report.cmsv_estimate = Some(value);
    report.cmsv_level = Some(args.s);
    report.notes.push("cmsv_upper_bound".into());
    emit(&report.to_json(), None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_toy(args: ToyArgs) -> Result<ExitCode> {
    let scan = run_toy_scan::<f64>()?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let profile = args.out_dir.join("sq_profile.csv");
    let penalty = args.out_dir.join("penalty_scan.csv");
    fs::write(&profile, scan.sparsity_csv())
        .with_context(|| format!("writing {}", profile.display()))?;
    fs::write(&penalty, scan.penalty_csv())
        .with_context(|| format!("writing {}", penalty.display()))?;
    let meta = json!({
        "lambda_bar": scan.lambda_bar,
        "grid_points": scan.grid.len(),
        "files": {
            "sparsity_profile": "sq_profile.csv",
            "penalty_scan": "penalty_scan.csv",
        },
    });
    emit(&meta, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let mut spec: ExperimentSpec<f64> = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_experiment_config(&text)?
        }
        None if args.full => ExperimentSpec::full_scale(0),
        None => ExperimentSpec::desk_scale(0),
    };
    if args.spec.is_some() && args.full {
        spec.replications = spec.replications.max(100);
    }
    let table = run_phase_transition(&spec)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    fs::write(args.out.join("rows.csv"), table.rows_csv())?;
    fs::write(args.out.join("summary.csv"), table.summary_csv())?;
    emit(&table.meta_json(&spec), Some(&args.out.join("meta.json")))?;
    eprintln!(
        "wrote {} rows across {} cells to {}",
        table.rows.len(),
        table.summary.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

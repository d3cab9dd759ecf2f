//! `npa`: solve, generate, benchmark and verify multilinear systems.
//!
//! Exit codes: 0 on success, 1 on I/O or input errors, 2 when the solver
//! fails or a verification does not pass.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tensor_npa::bench::{run_bench, StartSpec};
use tensor_npa::bootstrap::StartSource;
use tensor_npa::generate::{self, ProblemInstance};
use tensor_npa::io::{self, IoError};
use tensor_npa::npa::{self, residual, ScaledProblem, SolveStatus, SolverConfig};
use tensor_npa::structure::{self, MTensorVerdict};
use tensor_npa::Execution;

#[derive(Parser)]
#[command(name = "npa", version, about = "Nonnegative solutions of M-tensor multilinear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Write a corpus of random instances.
    Generate(GenerateArgs),
    /// Solve every instance in a directory with invariant auditing.
    Bench(BenchArgs),
    /// Check a candidate solution against an instance.
    Verify(VerifyArgs),
    /// Write one of the built-in small instances.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.2)]
    delta1: f64,
    #[arg(long, default_value_t = 0.5)]
    delta2: f64,
    /// Starting point `v1,v2,...`; a single value fills every component.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Record deterministic mode in the outputs.
    #[arg(long)]
    deterministic: bool,
    /// Solve even when the tensor cannot be certified as an M-tensor.
    #[arg(long)]
    no_certify: bool,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            delta1: self.delta1,
            delta2: self.delta2,
            deterministic: self.deterministic,
            require_certificate: !self.no_certify,
            ..SolverConfig::default()
        }
    }

    fn start(&self) -> Result<StartSpec, String> {
        match &self.x0 {
            None => Ok(StartSpec::Auto),
            Some(text) => {
                let v = parse_vector(text, "--x0")?;
                Ok(if v.len() == 1 {
                    StartSpec::Constant(v[0])
                } else {
                    StartSpec::Vector(v)
                })
            }
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the iteration trace CSV here.
    #[arg(long)]
    out_trace: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhsKind {
    /// `b = A x*^{m-1}` for a sparse planted `x*`.
    Planted,
    /// Sparse uniform `b` independent of `A`.
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Fraction of zero entries in the nonnegative part of the tensor.
    #[arg(long, default_value_t = 0.8)]
    zero_frac: f64,
    /// Fraction of nonzero components in `x*` (planted) or `b` (random).
    #[arg(long, default_value_t = 0.4)]
    density: f64,
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    /// First seed; instance `k` uses `seed + k`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, value_enum, default_value_t = RhsKind::Planted)]
    rhs: RhsKind,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    corpus: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the summary JSON here.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Write the per-instance CSV here.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
    /// Solve instances one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// Candidate solution `v1,v2,...`.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Largest accepted residual norm of the scaled system.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FixtureArgs {
    /// One of example1-b01, example2-i, example2-ii.
    name: String,
    #[arg(long)]
    out: PathBuf,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn parse_vector(text: &str, flag: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{flag}: cannot parse {s:?} as a number"))
        })
        .collect()
}

fn load(path: &Path) -> Result<ProblemInstance, Failure> {
    Ok(io::read_instance(path)?.into_instance()?)
}

fn fmt_vector(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v:.8}")).collect::<Vec<_>>().join(" ")
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = load(&args.instance)?;
    let cfg = args.solver.config();
    let x0 = args
        .solver
        .start()
        .and_then(|s| s.resolve(inst.a.dim()))
        .map_err(input_error)?;
    let report = npa::solve(&inst.a, &inst.b, x0.as_deref(), &cfg).map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    if let Some(path) = &args.out_trace {
        io::write_text(path, &io::trace_csv(&report.trace))?;
    }
    if args.json {
        print_json(&io::report_to_json(&report));
    } else {
        if report.start_source == Some(StartSource::Bootstrap) {
            println!("start: bootstrap point (perturbed positive system)");
        } else {
            println!("start: user x0");
        }
        println!("status: {}", report.status.as_str());
        println!("iterations: {}", report.iterations);
        println!("ReErr: {:.6e}", report.re_err);
        println!("x: {}", fmt_vector(&report.x));
        if let Some(msg) = &report.message {
            println!("note: {msg}");
        }
    }
    if report.status == SolveStatus::Converged {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: format!(
                "solver stopped with status {}{}",
                report.status.as_str(),
                report.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
            ),
        })
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    std::fs::create_dir_all(&args.out_dir).map_err(|source| IoError::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    for k in 0..args.count {
        let seed = args.seed.wrapping_add(k);
        let inst = match args.rhs {
            RhsKind::Planted => {
                generate::gen_planted_instance(args.m, args.n, args.zero_frac, args.density, args.omega, seed)
            }
            RhsKind::Random => {
                generate::gen_random_rhs_instance(args.m, args.n, args.zero_frac, args.density, args.omega, seed)
            }
        }
        .map_err(|e| input_error(e.to_string()))?;
        let path = args.out_dir.join(format!("inst_{seed}.json"));
        io::write_instance(&path, &inst)?;
        if inst.redraws > 0 {
            eprintln!("{}: {} rejected draws", path.display(), inst.redraws);
        }
    }
    println!("wrote {} instances to {}", args.count, args.out_dir.display());
    Ok(())
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|source| IoError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(input_error(format!("{}: no instance files (*.json)", dir.display())));
    }
    Ok(files)
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let files = corpus_files(&args.corpus)?;
    let cfg = args.solver.config();
    let start = args.solver.start().map_err(input_error)?;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let summary = run_bench(
        &files,
        |p| {
            io::read_instance(p)
                .and_then(|f| f.into_instance())
                .map_err(|e| format!("{}: {e}", p.display()))
        },
        &start,
        &cfg,
        exec,
    );
    let json = serde_json::to_value(&summary).expect("serializable");
    if let Some(path) = &args.out_json {
        io::write_text(path, &(serde_json::to_string_pretty(&json).expect("serializable") + "\n"))?;
    }
    if let Some(path) = &args.out_csv {
        io::write_text(path, &summary.rows_csv())?;
    }
    if args.json {
        print_json(&json);
    } else {
        println!(
            "instances: {}  success: {:.1}%  failure: {:.1}%  invariant violations: {}",
            summary.total,
            100.0 * summary.success_rate,
            100.0 * summary.failure_rate,
            summary.invariant_violations
        );
        for (class, rate) in &summary.class_rates {
            println!("  {class:<24} {:5.1}%  ({})", 100.0 * rate, summary.class_counts[class]);
        }
        println!(
            "mean iterations: {:.1}  mean time: {:.3}s",
            summary.mean_iterations, summary.mean_wall_time_s
        );
        for r in summary.rows.iter().filter(|r| !r.success || r.violations > 0) {
            println!(
                "  red row seed {}: {} {}",
                r.seed,
                r.status,
                r.message.as_deref().unwrap_or("")
            );
        }
    }
    if summary.successes == summary.total && summary.invariant_violations == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: format!("{} of {} instances failed", summary.total - summary.successes, summary.total),
        })
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let inst = load(&args.instance)?;
    let x = parse_vector(&args.x, "--x").map_err(input_error)?;
    let n = inst.a.dim();
    if x.len() != n {
        return Err(input_error(format!("--x has {} components, instance has n = {n}", x.len())));
    }
    let problem = ScaledProblem::new(&inst.a, &inst.b).map_err(|e| input_error(e.to_string()))?;
    let f = residual(&problem.a, &problem.b, &x).map_err(|e| input_error(e.to_string()))?;
    let re_err = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nonneg = x.iter().all(|&v| v >= 0.0);
    let split = structure::mtensor_split(&inst.a, 0.0);
    let verdict = structure::certify_m_tensor(&inst.a);
    let certificate = match &verdict {
        Ok(MTensorVerdict::RowSumBound { .. }) => "row-sum-bound".to_string(),
        Ok(MTensorVerdict::Witness(_)) => "witness".to_string(),
        Ok(MTensorVerdict::Inconclusive) => "inconclusive".to_string(),
        Err(e) => format!("not an M-tensor: {e}"),
    };
    let certified = matches!(&verdict, Ok(v) if v.is_certified());
    let pass = re_err <= args.tol && nonneg && certified;
    if args.json {
        print_json(&serde_json::json!({
            "format": io::FORMAT_VERSION,
            "verdict": if pass { "PASS" } else { "FAIL" },
            "re_err": re_err,
            "nonnegative": nonneg,
            "certificate": certificate,
            "split_s": split.as_ref().ok().map(|s| s.s),
            "split_rho_upper": split.as_ref().ok().map(|s| s.rho_upper),
        }));
    } else {
        println!("ReErr: {re_err:.6e} (tol {:.1e})", args.tol);
        println!("nonnegative: {nonneg}");
        if let Ok(s) = &split {
            println!("split: s = {:.6e}, row-sum bound on rho(B) = {:.6e}", s.s, s.rho_upper);
        }
        println!("M-tensor certificate: {certificate}");
        println!("verdict: {}", if pass { "PASS" } else { "FAIL" });
    }
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: "verification failed".into(),
        })
    }
}

fn cmd_fixture(args: &FixtureArgs) -> Result<(), Failure> {
    let inst = generate::named_fixture(&args.name).map_err(|e| input_error(e.to_string()))?;
    io::write_instance(&args.out, &inst)?;
    println!("wrote {} to {}", args.name, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Fixture(a) => cmd_fixture(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dspoll_core::audit::{estimate_lambda_with, AuditConfig};
use dspoll_core::bench::results::{audit_csv, audit_trace, read_profile_input, read_trace, trace_csv, write_profiles, write_results};
use dspoll_core::bench::{fmt_f64, load_corpus, load_problem, run_benchmark, DEFAULT_TAUS};
use dspoll_core::polling::{strategy_pss, Strategy};
use dspoll_core::solver::{direct_search, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "dspoll", version, about = "Direct search with Lambda-positive-spanning polling sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and print the result.
    Solve {
        problem: PathBuf,
        /// Polling strategy: t, tn or full.
        #[arg(long, default_value = "full")]
        strategy: Strategy,
        #[arg(long)]
        alpha0: Option<f64>,
        /// Budget is this multiple of n + 1 evaluations.
        #[arg(long, default_value_t = 200)]
        budget_mult: usize,
        /// Accepted for interface compatibility; the method is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the iteration trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run all strategies on a corpus directory and write a results directory.
    Bench {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated strategies.
        #[arg(long, value_delimiter = ',', default_value = "t,tn,full")]
        variants: Vec<Strategy>,
        #[arg(long, default_value_t = 200)]
        budget_mult: usize,
    },
    /// Compute data and performance profiles from a results directory.
    Profiles {
        results: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-6")]
        tau: Vec<f64>,
        /// Output directory; defaults to `<results>/profiles`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one set of profiles per problem class.
        #[arg(long)]
        split_by_tag: bool,
    },
    /// Estimate Lambda of the polling set at every iteration of a trace.
    LambdaAudit {
        problem: PathBuf,
        trace: PathBuf,
        /// Override the strategy recorded in the trace.
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Use the more thorough (slower) estimator settings.
        #[arg(long)]
        thorough: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the polling set at a point.
    PollInspect {
        problem: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "full")]
        strategy: Strategy,
        /// Also estimate Lambda for the set.
        #[arg(long)]
        lambda: bool,
    },
}

enum Failure {
    Usage(String),
    Runtime(dspoll_core::Error),
}

impl From<dspoll_core::Error> for Failure {
    fn from(e: dspoll_core::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn vec_str(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| {
        Failure::Runtime(dspoll_core::Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            problem,
            strategy,
            alpha0,
            budget_mult,
            seed: _,
            trace,
        } => {
            let p = load_problem(&problem)?;
            let cfg = SolverConfig {
                strategy,
                alpha0,
                budget_multiplier: budget_mult,
                ..SolverConfig::default()
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let run = direct_search(&p, &cfg)?;
            println!("problem: {}", p.name);
            println!("strategy: {}", strategy);
            println!("termination: {}", run.termination.as_str());
            println!("evaluations: {}", run.eval_count);
            println!("iterations: {}", run.iterates.len());
            println!("successes: {}", run.successes());
            println!("f0: {}", fmt_f64(run.f0));
            println!("f_best: {}", fmt_f64(run.best_f()));
            println!("x_best: {}", vec_str(&run.x_final));
            if let Some(f) = p.f_ref {
                println!("f_ref: {}", fmt_f64(f));
            }
            if let Some(path) = trace {
                write_out(&path, &trace_csv(&run)?)?;
            }
        }
        Command::Bench {
            corpus,
            out,
            variants,
            budget_mult,
        } => {
            if variants.is_empty() {
                return Err(Failure::Usage("at least one variant is required".into()));
            }
            let problems = load_corpus(&corpus)?;
            if problems.is_empty() {
                return Err(Failure::Usage(format!("no problem files in {}", corpus.display())));
            }
            let cfg = SolverConfig {
                budget_multiplier: budget_mult,
                ..SolverConfig::default()
            };
            let res = run_benchmark(&problems, &variants, &cfg)?;
            write_results(&out, &res)?;
            let failed = res.runs.iter().filter(|r| r.result.is_err()).count();
            let flat = res.problems.iter().filter(|p| p.flat).count();
            println!(
                "{} problems, {} variants, {} runs ({} failed, {} problems without improvement) -> {}",
                res.problems.len(),
                variants.len(),
                res.runs.len(),
                failed,
                flat,
                out.display()
            );
        }
        Command::Profiles {
            results,
            tau,
            out,
            split_by_tag,
        } => {
            let taus = if tau.is_empty() { DEFAULT_TAUS.to_vec() } else { tau };
            if taus.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
                return Err(Failure::Usage(format!("tolerances must lie in (0, 1), got {taus:?}")));
            }
            let input = read_profile_input(&results)?;
            let out = out.unwrap_or_else(|| results.join("profiles"));
            let files = write_profiles(&input, &out, &taus, split_by_tag)?;
            for &t in &taus {
                let table = input.solved_table(t);
                for v in input.variants() {
                    let solved = table.iter().filter(|e| e.variant == v && e.evals.is_some()).count();
                    println!("tau {}: {v} solved {solved}/{}", fmt_f64(t), input.problems.len());
                }
            }
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::LambdaAudit {
            problem,
            trace,
            strategy,
            thorough,
            out,
        } => {
            let p = load_problem(&problem)?;
            let rows = read_trace(&trace, p.dim())?;
            let cfg = if thorough { AuditConfig::default() } else { AuditConfig::quick() };
            let audit = audit_trace(&p, &rows, strategy, &cfg)?;
            let text = audit_csv(&audit)?;
            match out {
                Some(path) => write_out(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::PollInspect {
            problem,
            x,
            alpha,
            strategy,
            lambda,
        } => {
            let p = load_problem(&problem)?;
            if x.len() != p.dim() {
                return Err(Failure::Usage(format!("--x has {} entries, problem has n = {}", x.len(), p.dim())));
            }
            if !(alpha > 0.0) {
                return Err(Failure::Usage(format!("--alpha must be positive, got {alpha}")));
            }
            if !p.omega.is_feasible_tol(&x, 1e-9)? {
                return Err(Failure::Runtime(dspoll_core::Error::InvalidInput(
                    "the point is not feasible".into(),
                )));
            }
            let set = strategy_pss(&x, alpha, &p.omega, strategy)?;
            println!("strategy: {}", strategy);
            println!("case: {}", set.construction_case.as_str());
            println!("directions: {}", set.len());
            if let Some(l) = set.certified_lambda {
                println!("certified_lambda: {}", fmt_f64(l));
            }
            for d in &set.directions {
                println!("{} {}", d.provenance.as_str(), vec_str(&d.d));
            }
            if lambda {
                let est = estimate_lambda_with(&set, &p.omega, &AuditConfig::default())?;
                println!("lambda_estimate: {}", fmt_f64(est.lambda));
                println!("lambda_over_sqrt_n: {}", fmt_f64(est.lambda_over_sqrt_n));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

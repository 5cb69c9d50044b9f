//! Problem corpus, batch runner and benchmark profiles.

pub mod emit;
pub mod expr;
pub mod problem;
pub mod profile;
pub mod results;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polling::Strategy;
use crate::solver::{direct_search, ProblemInstance, SolverConfig, SolverRun};

pub use emit::{emit, fmt_f64, parse_f64, profile_csv, profile_svg, EmitFormat};
pub use problem::{load_corpus, load_problem, parse_problem, ProblemFile, TAG_BOUND, TAG_LINEAR};
pub use profile::{
    data_profile, performance_profile, solved_after, Curve, History, ProfileInput, ProfileKind, ProfileTable,
    ProblemRecord, SolvedEntry,
};

/// Tolerances of the default profiles.
pub const DEFAULT_TAUS: [f64; 2] = [1e-3, 1e-6];

/// One (problem, variant) pair; a failed run keeps its error message.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub problem: String,
    pub variant: Strategy,
    pub n: usize,
    pub result: std::result::Result<SolverRun, String>,
}

#[derive(Debug, Clone)]
pub struct BenchResults {
    pub problems: Vec<ProblemRecord>,
    /// Problem-major, variants in the order given.
    pub runs: Vec<RunOutcome>,
}

impl BenchResults {
    pub fn run(&self, problem: &str, variant: Strategy) -> Option<&SolverRun> {
        self.runs
            .iter()
            .find(|r| r.problem == problem && r.variant == variant)
            .and_then(|r| r.result.as_ref().ok())
    }

    pub fn profile_input(&self) -> ProfileInput {
        ProfileInput {
            problems: self.problems.clone(),
            histories: self
                .runs
                .iter()
                .map(|r| History {
                    problem: r.problem.clone(),
                    variant: r.variant.as_str().to_string(),
                    best: r.result.as_ref().map(|s| s.best_history.clone()).unwrap_or_default(),
                })
                .collect(),
        }
    }
}

/// Runs every variant on every problem with the same configuration.
/// Individual failures are recorded and the batch continues.
pub fn run_benchmark(problems: &[ProblemInstance], variants: &[Strategy], config: &SolverConfig) -> Result<BenchResults> {
    if variants.is_empty() {
        return Err(Error::InvalidInput("at least one variant is required".into()));
    }
    if problems.is_empty() {
        return Err(Error::InvalidInput("the corpus is empty".into()));
    }
    config.validate()?;
    let pairs: Vec<(usize, Strategy)> = (0..problems.len())
        .flat_map(|i| variants.iter().map(move |&v| (i, v)))
        .collect();
    let runs: Vec<RunOutcome> = pairs
        .par_iter()
        .map(|&(i, v)| {
            let p = &problems[i];
            let cfg = SolverConfig {
                strategy: v,
                ..config.clone()
            };
            RunOutcome {
                problem: p.name.clone(),
                variant: v,
                n: p.dim(),
                result: direct_search(p, &cfg).map_err(|e| e.to_string()),
            }
        })
        .collect();

    let records = problems
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let f0 = p.eval(&p.x0).unwrap_or(f64::NAN);
            let mine = &runs[i * variants.len()..(i + 1) * variants.len()];
            let f_min = mine
                .iter()
                .filter_map(|r| r.result.as_ref().ok())
                .map(|s| s.best_f())
                .fold(f0, f64::min);
            ProblemRecord {
                name: p.name.clone(),
                n: p.dim(),
                tags: p.tags.clone(),
                f0,
                f_min,
                flat: !(f_min < f0),
            }
        })
        .collect();
    Ok(BenchResults { problems: records, runs })
}

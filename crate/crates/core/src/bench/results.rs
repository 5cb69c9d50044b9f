//! Results directory layout, trace files and the per-iteration Λ audit.
//!
//! ```text
//! <dir>/problems.csv                      name,n,tags,f0,f_min,flat
//! <dir>/runs.csv                          one row per (problem, variant)
//! <dir>/history/<problem>__<variant>.csv  eval,best_f
//! <dir>/traces/<problem>__<variant>.csv   one row per iteration
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::emit::{csv_err, csv_string, fmt_f64, parse_f64, profile_csv, profile_svg, write_file};
use super::profile::{data_profile, performance_profile, History, ProfileInput, ProblemRecord};
use super::problem::{TAG_BOUND, TAG_LINEAR};
use super::BenchResults;
use crate::audit::{estimate_lambda_with, AuditConfig};
use crate::error::{Error, Result};
use crate::polling::{strategy_pss, Strategy};
use crate::solver::{ProblemInstance, SolverRun};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn parse_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        context: format!("{}: row {row}", path.display()),
        message: message.into(),
    }
}

/// Rows of a CSV file as header-keyed maps.
fn read_csv(path: &Path) -> Result<Vec<HashMap<String, String>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header: Vec<String> = rdr.headers().map_err(|e| io_err(path, e))?.iter().map(String::from).collect();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        out.push(header.iter().cloned().zip(rec.iter().map(String::from)).collect());
    }
    Ok(out)
}

fn field<'a>(row: &'a HashMap<String, String>, key: &str, path: &Path, i: usize) -> Result<&'a str> {
    row.get(key)
        .map(String::as_str)
        .ok_or_else(|| parse_err(path, i + 1, format!("missing column '{key}'")))
}

fn float(row: &HashMap<String, String>, key: &str, path: &Path, i: usize) -> Result<f64> {
    let s = field(row, key, path, i)?;
    parse_f64(s).ok_or_else(|| parse_err(path, i + 1, format!("bad number '{s}' in column '{key}'")))
}

fn int(row: &HashMap<String, String>, key: &str, path: &Path, i: usize) -> Result<usize> {
    let s = field(row, key, path, i)?;
    s.parse()
        .map_err(|_| parse_err(path, i + 1, format!("bad integer '{s}' in column '{key}'")))
}

pub fn run_file_name(problem: &str, variant: &str) -> String {
    format!("{problem}__{variant}.csv")
}

/// Per-iteration trace of a run.
pub fn trace_csv(run: &SolverRun) -> Result<String> {
    let n = run.x_final.len();
    let mut header: Vec<String> = ["k", "f", "alpha", "success", "provenance", "evals", "case", "strategy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n).map(|i| format!("x{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = run
        .iterates
        .iter()
        .map(|r| {
            let mut row = vec![
                r.k.to_string(),
                fmt_f64(r.f),
                fmt_f64(r.alpha),
                r.success.to_string(),
                r.provenance.map(|p| p.as_str()).unwrap_or("").to_string(),
                r.evals.to_string(),
                r.case.as_str().to_string(),
                run.strategy.as_str().to_string(),
            ];
            row.extend(r.x.iter().map(|&v| fmt_f64(v)));
            row
        })
        .collect();
    csv_string(&header_refs, &rows)
}

fn history_csv(best: &[f64]) -> Result<String> {
    let rows: Vec<Vec<String>> = best
        .iter()
        .enumerate()
        .map(|(i, &b)| vec![(i + 1).to_string(), fmt_f64(b)])
        .collect();
    csv_string(&["eval", "best_f"], &rows)
}

/// Writes the full results directory.
pub fn write_results(dir: &Path, results: &BenchResults) -> Result<()> {
    let hist_dir = dir.join("history");
    let trace_dir = dir.join("traces");
    mkdir(&hist_dir)?;
    mkdir(&trace_dir)?;

    let prob_rows: Vec<Vec<String>> = results
        .problems
        .iter()
        .map(|p| {
            vec![
                p.name.clone(),
                p.n.to_string(),
                p.tags.join(";"),
                fmt_f64(p.f0),
                fmt_f64(p.f_min),
                p.flat.to_string(),
            ]
        })
        .collect();
    write_file(
        &dir.join("problems.csv"),
        &csv_string(&["name", "n", "tags", "f0", "f_min", "flat"], &prob_rows)?,
    )?;

    let mut run_rows = Vec::new();
    for r in &results.runs {
        let variant = r.variant.as_str();
        let file = run_file_name(&r.problem, variant);
        match &r.result {
            Ok(run) => {
                run_rows.push(vec![
                    r.problem.clone(),
                    variant.to_string(),
                    r.n.to_string(),
                    "ok".to_string(),
                    run.eval_count.to_string(),
                    run.iterates.len().to_string(),
                    run.successes().to_string(),
                    fmt_f64(run.f0),
                    fmt_f64(run.best_f()),
                    run.termination.as_str().to_string(),
                    String::new(),
                ]);
                write_file(&hist_dir.join(&file), &history_csv(&run.best_history)?)?;
                write_file(&trace_dir.join(&file), &trace_csv(run)?)?;
            }
            Err(msg) => {
                run_rows.push(vec![
                    r.problem.clone(),
                    variant.to_string(),
                    r.n.to_string(),
                    "failed".to_string(),
                    "0".to_string(),
                    "0".to_string(),
                    "0".to_string(),
                    "nan".to_string(),
                    "nan".to_string(),
                    String::new(),
                    msg.clone(),
                ]);
            }
        }
    }
    write_file(
        &dir.join("runs.csv"),
        &csv_string(
            &[
                "problem",
                "variant",
                "n",
                "status",
                "evals",
                "iterations",
                "successes",
                "f0",
                "best_f",
                "termination",
                "message",
            ],
            &run_rows,
        )?,
    )
}

/// Reads back what [`write_results`] produced, as profile input.
pub fn read_profile_input(dir: &Path) -> Result<ProfileInput> {
    let ppath = dir.join("problems.csv");
    let mut problems = Vec::new();
    for (i, row) in read_csv(&ppath)?.iter().enumerate() {
        let tags = field(row, "tags", &ppath, i)?;
        problems.push(ProblemRecord {
            name: field(row, "name", &ppath, i)?.to_string(),
            n: int(row, "n", &ppath, i)?,
            tags: tags.split(';').filter(|s| !s.is_empty()).map(String::from).collect(),
            f0: float(row, "f0", &ppath, i)?,
            f_min: float(row, "f_min", &ppath, i)?,
            flat: field(row, "flat", &ppath, i)? == "true",
        });
    }
    let rpath = dir.join("runs.csv");
    let mut histories = Vec::new();
    for (i, row) in read_csv(&rpath)?.iter().enumerate() {
        let problem = field(row, "problem", &rpath, i)?.to_string();
        let variant = field(row, "variant", &rpath, i)?.to_string();
        let mut best = Vec::new();
        if field(row, "status", &rpath, i)? == "ok" {
            let hpath = dir.join("history").join(run_file_name(&problem, &variant));
            for (j, h) in read_csv(&hpath)?.iter().enumerate() {
                best.push(float(h, "best_f", &hpath, j)?);
            }
        }
        histories.push(History { problem, variant, best });
    }
    Ok(ProfileInput { problems, histories })
}

fn solved_csv(input: &ProfileInput, taus: &[f64]) -> Result<String> {
    let mut rows = Vec::new();
    for &tau in taus {
        for e in input.solved_table(tau) {
            rows.push(vec![
                e.problem,
                e.variant,
                e.n.to_string(),
                fmt_f64(tau),
                e.evals.map(|k| k.to_string()).unwrap_or_else(|| "inf".into()),
            ]);
        }
    }
    csv_string(&["problem", "variant", "n", "tau", "evals"], &rows)
}

/// Writes profile CSVs and SVGs; with `split_by_tag`, also one set per
/// problem class. Returns the written paths.
pub fn write_profiles(input: &ProfileInput, out: &Path, taus: &[f64], split_by_tag: bool) -> Result<Vec<PathBuf>> {
    if taus.is_empty() || taus.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidInput(format!("tolerances must lie in (0, 1), got {taus:?}")));
    }
    mkdir(out)?;
    let mut subsets = vec![(String::new(), input.clone())];
    if split_by_tag {
        for tag in [TAG_BOUND, TAG_LINEAR] {
            subsets.push((format!("_{tag}"), input.filter_tag(tag)));
        }
    }
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let path = out.join(name);
        write_file(&path, &text)?;
        written.push(path);
        Ok(())
    };
    for (suffix, sub) in &subsets {
        let data: Vec<_> = taus.iter().map(|&t| data_profile(sub, t)).collect();
        let perf: Vec<_> = taus.iter().map(|&t| performance_profile(sub, t)).collect();
        put(format!("data_profile{suffix}.csv"), profile_csv(&data)?)?;
        put(format!("performance_profile{suffix}.csv"), profile_csv(&perf)?)?;
        put(format!("solved{suffix}.csv"), solved_csv(sub, taus)?)?;
        for t in data.iter().chain(perf.iter()) {
            put(
                format!("{}_profile{suffix}_tau{:e}.svg", t.kind.as_str(), t.tau),
                profile_svg(t),
            )?;
        }
    }
    Ok(written)
}

/// One iteration read back from a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub strategy: Option<Strategy>,
}

pub fn read_trace(path: &Path, n: usize) -> Result<Vec<TraceRow>> {
    let mut out = Vec::new();
    for (i, row) in read_csv(path)?.iter().enumerate() {
        let x = (1..=n)
            .map(|j| float(row, &format!("x{j}"), path, i))
            .collect::<Result<Vec<_>>>()?;
        let strategy = match row.get("strategy").map(String::as_str) {
            None | Some("") => None,
            Some(s) => Some(s.parse().map_err(|e: Error| parse_err(path, i + 1, e.to_string()))?),
        };
        out.push(TraceRow {
            k: int(row, "k", path, i)?,
            alpha: float(row, "alpha", path, i)?,
            x,
            strategy,
        });
    }
    if out.is_empty() {
        return Err(parse_err(path, 0, "trace has no rows"));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub k: usize,
    pub alpha: f64,
    pub case: String,
    pub directions: usize,
    pub lambda: f64,
    pub lambda_over_sqrt_n: f64,
}

/// Rebuilds each iteration's polling set and estimates its Λ.
/// `strategy` overrides the one recorded in the trace.
pub fn audit_trace(
    problem: &ProblemInstance,
    trace: &[TraceRow],
    strategy: Option<Strategy>,
    cfg: &AuditConfig,
) -> Result<Vec<AuditRow>> {
    trace
        .iter()
        .map(|row| {
            let s = strategy.or(row.strategy).unwrap_or(Strategy::FullLambdaPSS);
            let set = strategy_pss(&row.x, row.alpha, &problem.omega, s)?;
            let est = estimate_lambda_with(&set, &problem.omega, cfg)?;
            Ok(AuditRow {
                k: row.k,
                alpha: row.alpha,
                case: set.construction_case.as_str().to_string(),
                directions: set.len(),
                lambda: est.lambda,
                lambda_over_sqrt_n: est.lambda_over_sqrt_n,
            })
        })
        .collect()
}

pub fn audit_csv(rows: &[AuditRow]) -> Result<String> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                fmt_f64(r.alpha),
                r.case.clone(),
                r.directions.to_string(),
                fmt_f64(r.lambda),
                fmt_f64(r.lambda_over_sqrt_n),
            ]
        })
        .collect();
    csv_string(&["k", "alpha", "case", "directions", "lambda", "lambda_over_sqrt_n"], &body).map_err(csv_err)
}

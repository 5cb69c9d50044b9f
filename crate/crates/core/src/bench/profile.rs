//! Solved criterion, data profiles and performance profiles.

use serde::{Deserialize, Serialize};

/// Best-value history of one (problem, variant) run.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub problem: String,
    pub variant: String,
    /// Best value after each evaluation; empty for a failed run.
    pub best: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub name: String,
    pub n: usize,
    pub tags: Vec<String>,
    pub f0: f64,
    /// Best value found by any variant (or `f0` when none improved).
    pub f_min: f64,
    /// No variant improved on the start value.
    pub flat: bool,
}

/// Problems and histories, the input of every profile.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileInput {
    pub problems: Vec<ProblemRecord>,
    pub histories: Vec<History>,
}

impl ProfileInput {
    /// Variants in order of first appearance.
    pub fn variants(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for h in &self.histories {
            if !out.contains(&h.variant) {
                out.push(h.variant.clone());
            }
        }
        out
    }

    /// Restriction to the problems carrying `tag`.
    pub fn filter_tag(&self, tag: &str) -> ProfileInput {
        let problems: Vec<ProblemRecord> = self
            .problems
            .iter()
            .filter(|p| p.tags.iter().any(|t| t == tag))
            .cloned()
            .collect();
        let histories = self
            .histories
            .iter()
            .filter(|h| problems.iter().any(|p| p.name == h.problem))
            .cloned()
            .collect();
        ProfileInput { problems, histories }
    }

    fn history(&self, problem: &str, variant: &str) -> Option<&History> {
        self.histories.iter().find(|h| h.problem == problem && h.variant == variant)
    }

    /// Evaluations each variant needed on each problem, problem-major.
    pub fn solved_table(&self, tau: f64) -> Vec<SolvedEntry> {
        let variants = self.variants();
        let mut out = Vec::new();
        for p in &self.problems {
            for v in &variants {
                let evals = self
                    .history(&p.name, v)
                    .and_then(|h| solved_after(&h.best, p.f_min, p.f0, tau));
                out.push(SolvedEntry {
                    problem: p.name.clone(),
                    variant: v.clone(),
                    n: p.n,
                    tau,
                    evals,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvedEntry {
    pub problem: String,
    pub variant: String,
    pub n: usize,
    pub tau: f64,
    /// `None` means never solved.
    pub evals: Option<usize>,
}

/// First evaluation (1-based) whose best value reaches
/// `f_min + tau (f0 - f_min)`.
pub fn solved_after(best: &[f64], f_min: f64, f0: f64, tau: f64) -> Option<usize> {
    let target = f_min + tau * (f0 - f_min);
    best.iter().position(|&b| b <= target).map(|i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    Data,
    Performance,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Data => "data",
            ProfileKind::Performance => "performance",
        }
    }
}

/// Step function: `proportion` holds from `x` up to the next point.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub variant: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub kind: ProfileKind,
    pub tau: f64,
    pub curves: Vec<Curve>,
}

fn step_curve(variant: &str, start: f64, mut values: Vec<f64>, total: usize) -> Curve {
    values.sort_by(f64::total_cmp);
    let mut points = Vec::new();
    let below = values.iter().filter(|&&v| v <= start).count();
    points.push((start, below as f64 / total.max(1) as f64));
    let mut i = below;
    while i < values.len() {
        let x = values[i];
        while i < values.len() && values[i] == x {
            i += 1;
        }
        points.push((x, i as f64 / total as f64));
    }
    Curve {
        variant: variant.to_string(),
        points,
    }
}

/// Proportion of problems solved within `c (n + 1)` evaluations, against `c`.
pub fn data_profile(input: &ProfileInput, tau: f64) -> ProfileTable {
    let table = input.solved_table(tau);
    let total = input.problems.len();
    let curves = input
        .variants()
        .iter()
        .map(|v| {
            let xs = table
                .iter()
                .filter(|e| &e.variant == v)
                .filter_map(|e| e.evals.map(|k| k as f64 / (e.n + 1) as f64))
                .collect();
            step_curve(v, 0.0, xs, total)
        })
        .collect();
    ProfileTable {
        kind: ProfileKind::Data,
        tau,
        curves,
    }
}

/// Proportion of problems solved within a factor of the fastest variant.
pub fn performance_profile(input: &ProfileInput, tau: f64) -> ProfileTable {
    let table = input.solved_table(tau);
    let total = input.problems.len();
    let variants = input.variants();
    let curves = variants
        .iter()
        .map(|v| {
            let ratios = input
                .problems
                .iter()
                .filter_map(|p| {
                    let entries: Vec<&SolvedEntry> = table.iter().filter(|e| e.problem == p.name).collect();
                    let best = entries.iter().filter_map(|e| e.evals).min()?;
                    let mine = entries.iter().find(|e| &e.variant == v)?.evals?;
                    Some(mine as f64 / best as f64)
                })
                .collect();
            step_curve(v, 1.0, ratios, total)
        })
        .collect();
    ProfileTable {
        kind: ProfileKind::Performance,
        tau,
        curves,
    }
}

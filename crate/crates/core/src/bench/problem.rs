//! JSON problem files and corpus loading.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::polyhedron::{Constraint, Polyhedron};
use crate::solver::ProblemInstance;

pub const TAG_BOUND: &str = "bound-constrained";
pub const TAG_LINEAR: &str = "linear-inequality";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSpec {
    /// `null` entries mean no bound.
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub n: usize,
    /// Infix string or JSON expression tree.
    pub objective: Value,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub f_ref: Option<f64>,
    #[serde(default)]
    pub x_ref: Option<Vec<f64>>,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub description: Option<String>,
}

fn field_err(ctx: &str, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        context: format!("{ctx}: field '{field}'"),
        message: message.into(),
    }
}

fn check_len(ctx: &str, field: &str, got: usize, n: usize) -> Result<()> {
    if got != n {
        return Err(field_err(ctx, field, format!("expected {n} entries, found {got}")));
    }
    Ok(())
}

impl ProblemFile {
    pub fn from_json_str(text: &str, ctx: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            context: ctx.to_string(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })
    }

    /// All rows: explicit constraints first, then bound rows per coordinate.
    pub fn polyhedron(&self, ctx: &str) -> Result<Polyhedron> {
        let n = self.n;
        let mut rows = Vec::with_capacity(self.constraints.len() + 2 * n);
        for (i, c) in self.constraints.iter().enumerate() {
            check_len(ctx, &format!("constraints[{i}].a"), c.a.len(), n)?;
            rows.push(c.clone());
        }
        if let Some(b) = &self.bounds {
            check_len(ctx, "bounds.lower", b.lower.len(), n)?;
            check_len(ctx, "bounds.upper", b.upper.len(), n)?;
            for j in 0..n {
                if let (Some(l), Some(u)) = (b.lower[j], b.upper[j]) {
                    if l >= u {
                        return Err(field_err(ctx, "bounds", format!("lower[{j}] = {l} is not below upper[{j}] = {u}")));
                    }
                }
                if let Some(l) = b.lower[j] {
                    let mut a = vec![0.0; n];
                    a[j] = -1.0;
                    rows.push(Constraint::new(a, -l));
                }
                if let Some(u) = b.upper[j] {
                    let mut a = vec![0.0; n];
                    a[j] = 1.0;
                    rows.push(Constraint::new(a, u));
                }
            }
        }
        Polyhedron::new(n, rows)
    }

    /// Validates the document and builds a solver instance with a feasible start.
    pub fn to_instance(&self, ctx: &str) -> Result<ProblemInstance> {
        if self.n == 0 {
            return Err(field_err(ctx, "n", "dimension must be positive"));
        }
        check_len(ctx, "x0", self.x0.len(), self.n)?;
        if let Some(xr) = &self.x_ref {
            check_len(ctx, "x_ref", xr.len(), self.n)?;
        }
        let omega = self.polyhedron(ctx).map_err(|e| match e {
            Error::EmptyFeasibleSet(_) => Error::InfeasibleProblem(self.name.clone()),
            other => other,
        })?;
        let class = if omega.bounds().is_some() { TAG_BOUND } else { TAG_LINEAR };
        let mut tags = self.tags.clone();
        for t in [TAG_BOUND, TAG_LINEAR] {
            if t != class && tags.iter().any(|s| s == t) {
                return Err(field_err(ctx, "tags", format!("'{t}' does not match the constraints (expected '{class}')")));
            }
        }
        if !tags.iter().any(|s| s == class) {
            tags.insert(0, class.to_string());
        }
        let expr = Arc::new(Expr::from_json(&self.objective, self.n, &format!("{ctx}: field 'objective'"))?);
        let f = Arc::clone(&expr);
        let g = Arc::clone(&expr);
        let mut inst = ProblemInstance::new(self.name.clone(), omega, self.x0.clone(), move |x| f.eval(x))
            .map_err(|e| match e {
                Error::InfeasibleProblem(_) | Error::EmptyFeasibleSet(_) => Error::InfeasibleProblem(self.name.clone()),
                other => other,
            })?
            .gradient(move |x| g.eval_grad(x).1);
        let f0 = expr.eval(&inst.x0);
        if !f0.is_finite() {
            return Err(field_err(ctx, "objective", format!("value {f0} at the start point is not finite")));
        }
        inst.f_ref = self.f_ref;
        inst.x_ref = self.x_ref.clone();
        inst.tags = tags;
        Ok(inst)
    }
}

pub fn parse_problem(text: &str, ctx: &str) -> Result<ProblemInstance> {
    ProblemFile::from_json_str(text, ctx)?.to_instance(ctx)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let ctx = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: ctx.clone(),
        message: e.to_string(),
    })?;
    parse_problem(&text, &ctx)
}

/// `*.json` files of a directory in file-name order.
pub fn corpus_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let io = |e: std::io::Error| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(io)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<ProblemInstance>> {
    corpus_files(dir)?.iter().map(load_problem).collect()
}

//! Polyhedral feasible sets `{x : a_i^T x <= b_i}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, norm_inf, DenseMatrix};

/// Default relative feasibility tolerance, applied as `tol * max(1, |b_i|)`.
pub const FEAS_TOL: f64 = 1e-12;
pub const PROJECT_TOL: f64 = 1e-10;
pub const PROJECT_MAX_ITER: usize = 10_000;

/// A single halfspace `a^T x <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Constraint {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }
}

/// Per-coordinate view of a polyhedron whose rows are all `+-c e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStructure {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    n: usize,
    constraints: Vec<Constraint>,
    bounds: Option<BoundStructure>,
}

/// Indices of the constraints nearly active at `(x, alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    pub indices: Vec<usize>,
    pub x: Vec<f64>,
    pub alpha: f64,
}

impl ActiveSet {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

impl Polyhedron {
    /// Builds `{x in R^n : a_i^T x <= b_i}`.
    ///
    /// Zero rows with `b >= 0` are dropped; a zero row with `b < 0` makes the
    /// set empty and is rejected. When every remaining row is a positive or
    /// negative multiple of a coordinate vector the bound view is filled in.
    pub fn new(n: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let mut kept = Vec::with_capacity(constraints.len());
        for (i, c) in constraints.into_iter().enumerate() {
            if c.a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.a.len(),
                });
            }
            if c.a.iter().any(|v| !v.is_finite()) || !c.b.is_finite() {
                return Err(Error::InvalidInput(format!("constraint {i} has non-finite data")));
            }
            if c.a.iter().all(|&v| v == 0.0) {
                if c.b < 0.0 {
                    return Err(Error::EmptyFeasibleSet(format!(
                        "constraint {i} reads 0 <= {}",
                        c.b
                    )));
                }
                continue;
            }
            kept.push(c);
        }
        let bounds = detect_bounds(n, &kept)?;
        Ok(Self {
            n,
            constraints: kept,
            bounds,
        })
    }

    /// The whole space `R^n`.
    pub fn unconstrained(n: usize) -> Self {
        Self {
            n,
            constraints: Vec::new(),
            bounds: Some(BoundStructure {
                lower: vec![f64::NEG_INFINITY; n],
                upper: vec![f64::INFINITY; n],
            }),
        }
    }

    /// Box `lower <= x <= upper`; infinite entries produce no row. For each
    /// coordinate the lower-bound row precedes the upper-bound row.
    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let n = lower.len();
        let mut rows = Vec::new();
        for j in 0..n {
            if lower[j].is_nan() || upper[j].is_nan() {
                return Err(Error::InvalidInput(format!("bound {j} is NaN")));
            }
            if lower[j] >= upper[j] {
                return Err(Error::EmptyFeasibleSet(format!(
                    "bounds on coordinate {j} leave no interior ({} >= {})",
                    lower[j], upper[j]
                )));
            }
            if lower[j].is_finite() {
                let mut a = vec![0.0; n];
                a[j] = -1.0;
                rows.push(Constraint::new(a, -lower[j]));
            }
            if upper[j].is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                rows.push(Constraint::new(a, upper[j]));
            }
        }
        Self::new(n, rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn bounds(&self) -> Option<&BoundStructure> {
        self.bounds.as_ref()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Feasibility with the default relative tolerance.
    pub fn is_feasible(&self, x: &[f64]) -> Result<bool> {
        self.is_feasible_tol(x, FEAS_TOL)
    }

    /// `a_i^T x <= b_i + tol * max(1, |b_i|)` for every row.
    pub fn is_feasible_tol(&self, x: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self
            .constraints
            .iter()
            .all(|c| dot(&c.a, x) <= c.b + tol * c.b.abs().max(1.0)))
    }

    /// Largest relative violation `max_i (a_i^T x - b_i) / max(1, |b_i|)`, or 0.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| (dot(&c.a, x) - c.b) / c.b.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Slacks `s_i = b_i - a_i^T x`; negative values are returned as-is.
    pub fn slacks(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.constraints.iter().map(|c| c.b - dot(&c.a, x)).collect())
    }

    /// Constraints with `b_i - alpha ||a_i||^2 <= a_i^T x`.
    pub fn nearly_active(&self, x: &[f64], alpha: f64) -> Result<ActiveSet> {
        self.check_dim(x)?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        let indices = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.b - alpha * dot(&c.a, &c.a) <= dot(&c.a, x))
            .map(|(i, _)| i)
            .collect();
        Ok(ActiveSet {
            indices,
            x: x.to_vec(),
            alpha,
        })
    }

    /// Ratio test: the largest `t in [0, cap]` keeping `x + t u` feasible.
    pub fn max_feasible_scale(&self, x: &[f64], u: &[f64], cap: f64) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(u)?;
        let mut t = cap.max(0.0);
        for c in &self.constraints {
            let au = dot(&c.a, u);
            if au > 0.0 {
                let s = (c.b - dot(&c.a, x)).max(0.0);
                t = t.min(s / au);
            }
        }
        Ok(t)
    }

    /// `n x |indices|` matrix whose columns are the selected `a_i`.
    pub fn row_matrix(&self, indices: &[usize]) -> DenseMatrix {
        let cols: Vec<Vec<f64>> = indices.iter().map(|&i| self.constraints[i].a.clone()).collect();
        DenseMatrix::from_columns(self.n, &cols).expect("rows have the polyhedron dimension")
    }

    /// Affine slice through `x` along an orthonormal `basis`, expressed in
    /// basis coordinates: `{z : a_i^T (x + Q z) <= b_i}`. Rows that vanish on
    /// the slice are dropped.
    pub fn slice(&self, x: &[f64], basis: &[Vec<f64>]) -> Result<Polyhedron> {
        self.check_dim(x)?;
        let k = basis.len();
        let mut rows = Vec::new();
        for c in &self.constraints {
            let a: Vec<f64> = basis.iter().map(|q| dot(q, &c.a)).collect();
            if norm(&a) <= 1e-12 * norm(&c.a) {
                continue;
            }
            let s = (c.b - dot(&c.a, x)).max(0.0);
            rows.push(Constraint::new(a, s));
        }
        Polyhedron::new(k, rows)
    }

    /// Euclidean projection with the default tolerance and iteration cap.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.project_with(z, PROJECT_TOL, PROJECT_MAX_ITER)
    }

    /// Euclidean projection onto the polyhedron.
    ///
    /// Boxes are clipped componentwise. A point violating a single halfspace
    /// whose closed-form projection is feasible gets that projection. Anything
    /// else runs Dykstra's alternating projections over the halfspaces.
    pub fn project_with(&self, z: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        if self.is_feasible(z)? {
            return Ok(z.to_vec());
        }
        if let Some(b) = &self.bounds {
            return Ok(z
                .iter()
                .enumerate()
                .map(|(j, &v)| v.max(b.lower[j]).min(b.upper[j]))
                .collect());
        }
        let violated: Vec<&Constraint> = self
            .constraints
            .iter()
            .filter(|c| dot(&c.a, z) > c.b)
            .collect();
        if violated.len() == 1 {
            let p = project_halfspace(z, violated[0]);
            if self.is_feasible(&p)? {
                return Ok(p);
            }
        }
        dykstra(z, &self.constraints, None, tol, max_iter)
    }
}

fn detect_bounds(n: usize, rows: &[Constraint]) -> Result<Option<BoundStructure>> {
    let mut lower = vec![f64::NEG_INFINITY; n];
    let mut upper = vec![f64::INFINITY; n];
    for c in rows {
        let mut nz = c.a.iter().enumerate().filter(|(_, v)| **v != 0.0);
        let (j, &v) = match (nz.next(), nz.next()) {
            (Some(p), None) => p,
            _ => return Ok(None),
        };
        let bound = c.b / v;
        if v > 0.0 {
            upper[j] = upper[j].min(bound);
        } else {
            lower[j] = lower[j].max(bound);
        }
    }
    if let Some(j) = (0..n).find(|&j| lower[j] > upper[j]) {
        return Err(Error::EmptyFeasibleSet(format!(
            "coordinate {j} has lower bound {} above upper bound {}",
            lower[j], upper[j]
        )));
    }
    Ok(Some(BoundStructure { lower, upper }))
}

pub(crate) fn project_halfspace(z: &[f64], c: &Constraint) -> Vec<f64> {
    let viol = dot(&c.a, z) - c.b;
    if viol <= 0.0 {
        return z.to_vec();
    }
    let t = viol / dot(&c.a, &c.a);
    z.iter().zip(&c.a).map(|(zi, ai)| zi - t * ai).collect()
}

fn project_ball(z: &[f64], radius: f64) -> Vec<f64> {
    let nz = norm(z);
    if nz <= radius {
        z.to_vec()
    } else {
        z.iter().map(|v| v * radius / nz).collect()
    }
}

/// Dykstra's alternating projections onto the intersection of halfspaces and,
/// optionally, the ball `||x|| <= radius`.
pub(crate) fn dykstra(
    z: &[f64],
    halfspaces: &[Constraint],
    ball: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let nsets = halfspaces.len() + usize::from(ball.is_some());
    let n = z.len();
    let mut x = z.to_vec();
    let mut incr = vec![vec![0.0; n]; nsets];
    let mut change = f64::INFINITY;
    // Rounding in the increments grows with the size of the input.
    let tol = tol.max(64.0 * f64::EPSILON * norm_inf(z).max(1.0));
    for _ in 0..max_iter {
        let prev = x.clone();
        for (k, inc) in incr.iter_mut().enumerate() {
            let w: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
            let p = if k < halfspaces.len() {
                project_halfspace(&w, &halfspaces[k])
            } else {
                project_ball(&w, ball.unwrap_or(f64::INFINITY))
            };
            for j in 0..n {
                inc[j] = w[j] - p[j];
            }
            x = p;
        }
        change = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let viol = halfspaces
            .iter()
            .map(|c| (dot(&c.a, &x) - c.b) / norm(&c.a))
            .fold(0.0, f64::max)
            .max(ball.map_or(0.0, |r| norm(&x) - r));
        if change <= 0.1 * tol && viol <= tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        what: "Dykstra projection",
        iterations: max_iter,
        residual: change,
    })
}

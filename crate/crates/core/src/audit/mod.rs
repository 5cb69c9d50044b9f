//! Quality measurement of direction sets: Λ estimation and cosine measure.

pub mod direct;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::min_l1_decomposition;
use crate::numerics::{dot, norm, DenseMatrix, Lu};
use crate::polling::PollingSet;
use crate::polyhedron::Polyhedron;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    DividingRectangles,
    Multistart,
}

/// Lower bound on the Λ of a polling set, with the maximizing displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEstimate {
    /// `+inf` when some admissible `v` has no nonnegative decomposition.
    pub lambda: f64,
    pub lambda_over_sqrt_n: f64,
    pub witness_v: Vec<f64>,
    pub inner_lp_calls: usize,
    pub method: EstimateMethod,
    /// Always true: the estimate maximizes over samples.
    pub lower_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    /// Dividing-rectangles iterations; `None` means `10 n`.
    pub direct_iterations: Option<usize>,
    pub direct_max_evals: usize,
    /// Number of best samples refined by local coordinate search.
    pub refinements: usize,
    pub refine_max_evals: usize,
    /// Local search stops when its step falls below this fraction of alpha.
    pub refine_min_step: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            direct_iterations: None,
            direct_max_evals: 2000,
            refinements: 50,
            refine_max_evals: 4000,
            refine_min_step: 1e-7,
        }
    }
}

impl AuditConfig {
    /// A cheaper setting for batch audits.
    pub fn quick() -> Self {
        Self {
            direct_iterations: None,
            direct_max_evals: 400,
            refinements: 8,
            refine_max_evals: 800,
            refine_min_step: 1e-6,
        }
    }
}

/// Inner LP value at a displacement, counting calls.
struct Inner<'a> {
    dirs: &'a [Vec<f64>],
    x: &'a [f64],
    alpha: f64,
    omega: &'a Polyhedron,
    calls: usize,
}

impl Inner<'_> {
    /// Pushes `v` radially to the boundary of `{||v|| <= alpha, x + v in omega}`
    /// and returns the LP value there. The inner value is positively
    /// homogeneous and the region is star-shaped about 0, so the maximum over
    /// each ray sits on the boundary.
    fn radial(&mut self, v: &[f64]) -> Result<(f64, Vec<f64>)> {
        let nv = norm(v);
        if nv == 0.0 {
            return Ok((0.0, v.to_vec()));
        }
        let t = self.omega.max_feasible_scale(self.x, v, self.alpha / nv)?;
        let w: Vec<f64> = v.iter().map(|a| a * t).collect();
        Ok((self.value(&w)?, w))
    }

    fn value(&mut self, v: &[f64]) -> Result<f64> {
        self.calls += 1;
        let r = min_l1_decomposition(self.dirs, v)?;
        Ok(if r.is_optimal() { r.value } else { f64::INFINITY })
    }
}

/// Estimates `max_v min { sum c_i : sum c_i d_i = v, c >= 0 }` over
/// `||v|| <= alpha`, `x + v in omega`.
///
/// Dividing rectangles over the box hull of the ball (clipped to the bounds
/// when the polyhedron is a box) followed by coordinate search from the best
/// samples. The result is a lower bound on the true value.
pub fn estimate_lambda(set: &PollingSet, omega: &Polyhedron) -> Result<LambdaEstimate> {
    estimate_lambda_with(set, omega, &AuditConfig::default())
}

pub fn estimate_lambda_with(set: &PollingSet, omega: &Polyhedron, cfg: &AuditConfig) -> Result<LambdaEstimate> {
    estimate_lambda_dirs(&set.vectors(), &set.x, set.alpha, omega, cfg)
}

pub fn estimate_lambda_dirs(
    dirs: &[Vec<f64>],
    x: &[f64],
    alpha: f64,
    omega: &Polyhedron,
    cfg: &AuditConfig,
) -> Result<LambdaEstimate> {
    let n = omega.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let sqrt_n = (n as f64).sqrt();
    let mut inner = Inner {
        dirs,
        x,
        alpha,
        omega,
        calls: 0,
    };
    if dirs.is_empty() {
        // Any nonzero admissible v is undecomposable.
        let mut witness = vec![0.0; n];
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                let t = omega.max_feasible_scale(x, &e, alpha)?;
                if t > 0.0 && witness.iter().all(|&w| w == 0.0) {
                    witness = e.iter().map(|v| v * t).collect();
                }
            }
        }
        let lambda = if witness.iter().any(|&w| w != 0.0) { f64::INFINITY } else { 0.0 };
        return Ok(LambdaEstimate {
            lambda,
            lambda_over_sqrt_n: lambda / sqrt_n,
            witness_v: witness,
            inner_lp_calls: 0,
            method: EstimateMethod::DividingRectangles,
            lower_bound: true,
        });
    }
    for d in dirs {
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.len(),
            });
        }
    }

    let mut lower = vec![-alpha; n];
    let mut upper = vec![alpha; n];
    if let Some(b) = omega.bounds() {
        for i in 0..n {
            lower[i] = lower[i].max(b.lower[i] - x[i]).min(0.0);
            upper[i] = upper[i].min(b.upper[i] - x[i]).max(0.0);
        }
    }

    let iterations = cfg.direct_iterations.unwrap_or(10 * n.max(1));
    let mut failure: Option<Error> = None;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let samples = direct::maximize(
        |v| match inner.radial(v) {
            Ok((val, w)) => {
                if val > best.0 {
                    best = (val, w);
                }
                val
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        &lower,
        &upper,
        iterations,
        cfg.direct_max_evals,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut method = EstimateMethod::DividingRectangles;
    if best.0.is_infinite() && best.0 > 0.0 {
        return Ok(finish(best, inner.calls, method, sqrt_n));
    }

    // Refine from the best distinct sample directions.
    let mut starts: Vec<&direct::Sample> = samples.iter().filter(|s| s.value.is_finite()).collect();
    starts.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut picked: Vec<Vec<f64>> = Vec::new();
    for s in starts {
        if picked.len() >= cfg.refinements {
            break;
        }
        let ns = norm(&s.point);
        if ns == 0.0 {
            continue;
        }
        let u: Vec<f64> = s.point.iter().map(|v| v / ns).collect();
        if picked.iter().any(|p| dot(p, &u) > 1.0 - 1e-6) {
            continue;
        }
        picked.push(u);
    }
    let per_start = (cfg.refine_max_evals / picked.len().max(1)).max(4 * n + 2);
    for u in picked {
        let start: Vec<f64> = u.iter().map(|v| v * alpha).collect();
        let (val, w) = coordinate_search(&mut inner, &start, alpha, cfg.refine_min_step * alpha, per_start)?;
        if val > best.0 {
            best = (val, w);
            method = EstimateMethod::Multistart;
        }
        if best.0 == f64::INFINITY {
            break;
        }
    }
    Ok(finish(best, inner.calls, method, sqrt_n))
}

fn finish(best: (f64, Vec<f64>), calls: usize, method: EstimateMethod, sqrt_n: f64) -> LambdaEstimate {
    LambdaEstimate {
        lambda: best.0.max(0.0),
        lambda_over_sqrt_n: best.0.max(0.0) / sqrt_n,
        witness_v: best.1,
        inner_lp_calls: calls,
        method,
        lower_bound: true,
    }
}

/// Compass search on the radially extended inner value.
fn coordinate_search(
    inner: &mut Inner<'_>,
    start: &[f64],
    alpha: f64,
    min_step: f64,
    max_evals: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = start.len();
    let mut v = start.to_vec();
    let (mut val, mut w) = inner.radial(&v)?;
    let mut step = alpha / 4.0;
    let mut used = 1;
    while step >= min_step && used < max_evals && val.is_finite() {
        let mut improved = false;
        'dirs: for i in 0..n {
            for s in [step, -step] {
                if used >= max_evals {
                    break 'dirs;
                }
                let mut trial = v.clone();
                trial[i] += s;
                let (tv, tw) = inner.radial(&trial)?;
                used += 1;
                if tv > val + 1e-13 * val.abs().max(1.0) {
                    v = trial;
                    val = tv;
                    w = tw;
                    improved = true;
                    break 'dirs;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((val, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CosineMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineMeasure {
    pub value: f64,
    pub witness: Vec<f64>,
    /// True for the sampled mode, whose value can only overestimate.
    pub upper_bound_only: bool,
}

pub const EXACT_MAX_DIM: usize = 4;
pub const EXACT_MAX_DIRS: usize = 12;
pub const SAMPLED_POINTS: usize = 100_000;

fn max_cosine(units: &[Vec<f64>], v: &[f64]) -> f64 {
    let nv = norm(v);
    units.iter().map(|u| dot(u, v) / nv).fold(f64::NEG_INFINITY, f64::max)
}

/// `cm(D) = min_{v != 0} max_{d in D} d^T v / (||d|| ||v||)`.
pub fn cosine_measure(dirs: &[Vec<f64>], mode: CosineMode) -> Result<CosineMeasure> {
    let Some(first) = dirs.first() else {
        return Err(Error::InvalidInput("cosine measure of an empty set".into()));
    };
    let n = first.len();
    let mut units = Vec::with_capacity(dirs.len());
    for d in dirs {
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.len(),
            });
        }
        let nd = norm(d);
        if nd == 0.0 {
            return Err(Error::InvalidInput("cosine measure of a set with a zero vector".into()));
        }
        units.push(d.iter().map(|v| v / nd).collect::<Vec<f64>>());
    }
    match mode {
        CosineMode::Exact => {
            if n > EXACT_MAX_DIM || units.len() > EXACT_MAX_DIRS {
                return Err(Error::InvalidInput(format!(
                    "exact cosine measure limited to n <= {EXACT_MAX_DIM} and at most {EXACT_MAX_DIRS} directions"
                )));
            }
            Ok(cosine_exact(&units, n))
        }
        CosineMode::Sampled => Ok(cosine_sampled(&units, n)),
    }
}

fn cosine_exact(units: &[Vec<f64>], n: usize) -> CosineMeasure {
    let mut cands: Vec<Vec<f64>> = Vec::new();
    let m = units.len();
    // Equal-cosine points in the span of every independent subset of size <= n,
    // plus directions orthogonal to that span.
    for mask in 1u32..(1u32 << m) {
        let k = mask.count_ones() as usize;
        if k > n {
            continue;
        }
        let sub: Vec<&Vec<f64>> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| &units[i]).collect();
        let gram = DenseMatrix::new(
            k,
            k,
            sub.iter().flat_map(|a| sub.iter().map(move |b| dot(a, b))).collect(),
        )
        .expect("square gram matrix");
        let Some(lu) = Lu::factor(&gram) else { continue };
        let lam = lu.solve(&vec![1.0; k]);
        let mut v = vec![0.0; n];
        for (l, u) in lam.iter().zip(&sub) {
            for (vi, ui) in v.iter_mut().zip(u.iter()) {
                *vi += l * ui;
            }
        }
        if norm(&v) > 0.0 {
            cands.push(v.clone());
            cands.push(v.iter().map(|a| -a).collect());
        }
        if k < n {
            let owned: Vec<Vec<f64>> = sub.iter().map(|s| (*s).clone()).collect();
            let basis = crate::numerics::complete_basis(
                &crate::numerics::range_basis(&DenseMatrix::from_columns(n, &owned).expect("columns")),
                n,
            );
            for (i, b) in basis.iter().enumerate() {
                cands.push(b.clone());
                cands.push(b.iter().map(|a| -a).collect());
                for c in &basis[i + 1..] {
                    for s in [1.0, -1.0] {
                        cands.push(b.iter().zip(c).map(|(p, q)| p + s * q).collect());
                        cands.push(b.iter().zip(c).map(|(p, q)| -p - s * q).collect());
                    }
                }
            }
        }
    }
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[j] = s;
            cands.push(e);
        }
    }
    let mut scored: Vec<(f64, Vec<f64>)> = cands
        .into_iter()
        .map(|v| {
            let nv = norm(&v);
            let v: Vec<f64> = v.iter().map(|a| a / nv).collect();
            (max_cosine(units, &v), v)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].clone();
    for (_, v) in scored.iter().take(8) {
        let (val, w) = sphere_descent(units, v);
        if val < best.0 {
            best = (val, w);
        }
    }
    CosineMeasure {
        value: best.0,
        witness: best.1,
        upper_bound_only: false,
    }
}

/// Compass search on the unit sphere for the max-cosine function.
fn sphere_descent(units: &[Vec<f64>], start: &[f64]) -> (f64, Vec<f64>) {
    let n = start.len();
    let mut v = start.to_vec();
    let mut val = max_cosine(units, &v);
    let mut step = 0.05;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..n {
            for s in [step, -step] {
                let mut t = v.clone();
                t[i] += s;
                let nt = norm(&t);
                if nt == 0.0 {
                    continue;
                }
                t.iter_mut().for_each(|a| *a /= nt);
                let tv = max_cosine(units, &t);
                if tv < val - 1e-15 {
                    v = t;
                    val = tv;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (val, v)
}

const PRIMES: [u32; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Quasi-random unit vectors from a Halton sequence, rejecting cube points
/// outside the unit ball in low dimension.
pub fn halton_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut i: u64 = 1;
    while out.len() < count {
        let v: Vec<f64> = (0..n)
            .map(|j| {
                let base = PRIMES.get(j).copied().unwrap_or(PRIMES[j % PRIMES.len()] + 2 * j as u32 + 1);
                2.0 * radical_inverse(i, base) - 1.0
            })
            .collect();
        i += 1;
        let nv = norm(&v);
        if nv == 0.0 || (n <= 8 && nv > 1.0) {
            continue;
        }
        out.push(v.iter().map(|a| a / nv).collect());
    }
    out
}

fn cosine_sampled(units: &[Vec<f64>], n: usize) -> CosineMeasure {
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for v in halton_directions(n, SAMPLED_POINTS) {
        let c = max_cosine(units, &v);
        if c < best.0 {
            best = (c, v);
        }
    }
    CosineMeasure {
        value: best.0,
        witness: best.1,
        upper_bound_only: true,
    }
}

/// Consistency between Λ, the cosine measure and the direction lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPropertyReport {
    pub cosine: f64,
    pub cosine_exact: bool,
    pub lambda_estimate: f64,
    /// `1 / (d_min cm)`, or `+inf` when `cm <= 0`.
    pub lambda_upper: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// `cm * d_max * lambda_upper >= 1`.
    pub descent_bound_holds: bool,
    /// `lambda_estimate <= lambda_upper + tol`; vacuous when `cm <= 0`.
    pub lambda_bound_holds: bool,
}

/// Checks both directions of the Λ / cosine-measure relation for a set of
/// directions at radius `alpha` (ball without constraints).
pub fn check_lambda_properties(dirs: &[Vec<f64>], x: &[f64], alpha: f64, tol: f64) -> Result<LambdaPropertyReport> {
    let n = x.len();
    let mode = if n <= EXACT_MAX_DIM && dirs.len() <= EXACT_MAX_DIRS {
        CosineMode::Exact
    } else {
        CosineMode::Sampled
    };
    let cm = cosine_measure(dirs, mode)?;
    let norms: Vec<f64> = dirs.iter().map(|d| norm(d) / alpha).collect();
    let d_min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let d_max = norms.iter().copied().fold(0.0, f64::max);
    let est = estimate_lambda_dirs(dirs, x, alpha, &Polyhedron::unconstrained(n), &AuditConfig::default())?;
    let lambda_upper = if cm.value > 0.0 { 1.0 / (d_min * cm.value) } else { f64::INFINITY };
    let descent_bound_holds = cm.value > 0.0 && cm.value * d_max * lambda_upper >= 1.0 - tol;
    let lambda_bound_holds = cm.value <= 0.0 || est.lambda <= lambda_upper + tol;
    Ok(LambdaPropertyReport {
        cosine: cm.value,
        cosine_exact: mode == CosineMode::Exact,
        lambda_estimate: est.lambda,
        lambda_upper,
        d_min,
        d_max,
        descent_bound_holds,
        lambda_bound_holds,
    })
}

//! Direct search with opportunistic polling, plus the criticality measure.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, norm_inf};
use crate::polling::{strategy_pss, ConstructionCase, Provenance, Strategy};
use crate::polyhedron::{dykstra, Constraint, Polyhedron, PROJECT_MAX_ITER};

pub type ObjectiveFn = Arc<dyn Fn(&[f64]) -> std::result::Result<f64, String> + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gamma_dec: f64,
    pub gamma_inc: f64,
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub forcing_eps: f64,
    /// Evaluation budget is `budget_multiplier * (n + 1)`.
    pub budget_multiplier: usize,
    pub strategy: Strategy,
    pub alpha0: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma_dec: 0.5,
            gamma_inc: 2.0,
            alpha_max: 1e3,
            alpha_min: 1e-6,
            forcing_eps: 1e-5,
            budget_multiplier: 200,
            strategy: Strategy::FullLambdaPSS,
            alpha0: None,
        }
    }
}

impl SolverConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_dec > 0.0 && self.gamma_dec < 1.0) {
            return Err(Error::InvalidInput(format!("gamma_dec must lie in (0,1), got {}", self.gamma_dec)));
        }
        if !(self.gamma_inc > 1.0) || !self.gamma_inc.is_finite() {
            return Err(Error::InvalidInput(format!("gamma_inc must exceed 1, got {}", self.gamma_inc)));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max) || !self.alpha_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need 0 < alpha_min <= alpha_max, got {} and {}",
                self.alpha_min, self.alpha_max
            )));
        }
        if !(self.forcing_eps >= 0.0) {
            return Err(Error::InvalidInput("forcing_eps must be nonnegative".into()));
        }
        if self.budget_multiplier == 0 {
            return Err(Error::InvalidInput("budget multiplier must be positive".into()));
        }
        if let Some(a) = self.alpha0 {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidInput(format!("alpha0 must be positive, got {a}")));
            }
        }
        Ok(())
    }

    /// `clamp(0.1 * max(||x0||_inf, 1), alpha_min, alpha_max)` unless set.
    pub fn initial_alpha(&self, x0: &[f64]) -> f64 {
        self.alpha0.unwrap_or_else(|| {
            (0.1 * norm_inf(x0).max(1.0)).clamp(self.alpha_min, self.alpha_max)
        })
    }

    /// Sufficient decrease threshold `min(eps, eps * alpha^2)`.
    pub fn forcing(&self, alpha: f64) -> f64 {
        self.forcing_eps.min(self.forcing_eps * alpha * alpha)
    }

    pub fn budget(&self, n: usize) -> usize {
        self.budget_multiplier.saturating_mul(n + 1)
    }
}

/// `min_{x in omega} f(x)` with a start point and optional reference data.
#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub objective: ObjectiveFn,
    pub omega: Polyhedron,
    /// Feasible start point (projected at construction when needed).
    pub x0: Vec<f64>,
    pub f_ref: Option<f64>,
    pub gradient: Option<GradientFn>,
    /// Known minimizer, when available.
    pub x_ref: Option<Vec<f64>>,
    pub tags: Vec<String>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("n", &self.omega.dim())
            .field("constraints", &self.omega.len())
            .field("x0", &self.x0)
            .field("f_ref", &self.f_ref)
            .finish()
    }
}

impl ProblemInstance {
    /// Wraps an infallible objective.
    pub fn new<F>(name: impl Into<String>, omega: Polyhedron, x0: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::with_objective(name, omega, x0, Arc::new(move |x: &[f64]| Ok(f(x))))
    }

    /// Builds an instance, replacing an infeasible `x0` by its projection.
    pub fn with_objective(
        name: impl Into<String>,
        omega: Polyhedron,
        x0: Vec<f64>,
        objective: ObjectiveFn,
    ) -> Result<Self> {
        let name = name.into();
        if x0.len() != omega.dim() {
            return Err(Error::DimensionMismatch {
                expected: omega.dim(),
                found: x0.len(),
            });
        }
        let x0 = if omega.is_feasible(&x0)? {
            x0
        } else {
            let p = omega.project(&x0).map_err(|_| Error::InfeasibleProblem(name.clone()))?;
            if !omega.is_feasible_tol(&p, 1e-9)? {
                return Err(Error::InfeasibleProblem(name));
            }
            p
        };
        Ok(Self {
            name,
            objective,
            omega,
            x0,
            f_ref: None,
            gradient: None,
            x_ref: None,
            tags: Vec::new(),
        })
    }

    pub fn f_ref(mut self, f_ref: f64) -> Self {
        self.f_ref = Some(f_ref);
        self
    }

    pub fn gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn eval(&self, x: &[f64]) -> std::result::Result<f64, String> {
        (self.objective)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    AlphaMin,
    Budget,
    UserStop,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::AlphaMin => "AlphaMin",
            Termination::Budget => "Budget",
            Termination::UserStop => "UserStop",
        }
    }
}

/// One iteration: the iterate `x_k` it started from and what happened.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub alpha: f64,
    pub success: bool,
    pub provenance: Option<Provenance>,
    pub case: ConstructionCase,
    /// Evaluations used so far, including this iteration's.
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub problem: String,
    pub strategy: Strategy,
    pub iterates: Vec<IterationRecord>,
    pub eval_count: usize,
    /// Best objective value after each evaluation; entry `e - 1` is after evaluation `e`.
    pub best_history: Vec<f64>,
    pub termination: Termination,
    pub f0: f64,
    pub x_final: Vec<f64>,
    pub f_final: f64,
}

impl SolverRun {
    pub fn successes(&self) -> usize {
        self.iterates.iter().filter(|r| r.success).count()
    }

    /// Sequence `x_0, x_1, ...` including the final iterate.
    pub fn iterate_points(&self) -> Vec<Vec<f64>> {
        let mut xs: Vec<Vec<f64>> = self.iterates.iter().map(|r| r.x.clone()).collect();
        xs.push(self.x_final.clone());
        xs
    }

    pub fn best_f(&self) -> f64 {
        self.best_history.last().copied().unwrap_or(self.f0)
    }
}

/// Stop hook consulted at the start of every iteration with `(k, x_k, f_k)`.
pub type StopHook<'a> = &'a mut dyn FnMut(usize, &[f64], f64) -> bool;

pub fn direct_search(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolverRun> {
    direct_search_with(problem, config, &mut |_, _, _| false)
}

pub fn direct_search_with(
    problem: &ProblemInstance,
    config: &SolverConfig,
    stop: StopHook<'_>,
) -> Result<SolverRun> {
    config.validate()?;
    let n = problem.dim();
    let omega = &problem.omega;
    let budget = config.budget(n);
    let failure = |iteration: usize, point: &[f64], message: String| Error::ObjectiveEvaluationFailure {
        iteration,
        point: point.to_vec(),
        message,
    };

    let mut x = problem.x0.clone();
    let mut f = problem.eval(&x).map_err(|m| failure(0, &x, m))?;
    if !f.is_finite() {
        return Err(failure(0, &x, format!("objective is {f} at the start point")));
    }
    let f0 = f;
    let mut evals = 1usize;
    let mut best_history = vec![f];
    let mut alpha = config.initial_alpha(&x);
    let mut iterates = Vec::new();
    let mut k = 0usize;

    let termination = loop {
        if evals >= budget {
            break Termination::Budget;
        }
        if stop(k, &x, f) {
            break Termination::UserStop;
        }
        let set = strategy_pss(&x, alpha, omega, config.strategy)?;
        let threshold = f - config.forcing(alpha);
        let mut accepted = None;
        let mut out_of_budget = false;
        for p in &set.directions {
            if evals >= budget {
                out_of_budget = true;
                break;
            }
            let y: Vec<f64> = x.iter().zip(&p.d).map(|(a, b)| a + b).collect();
            let fy = problem.eval(&y).map_err(|m| failure(k, &y, m))?;
            evals += 1;
            let best = best_history.last().copied().unwrap_or(f);
            best_history.push(if fy.is_finite() && fy < best { fy } else { best });
            if fy.is_finite() && fy < threshold {
                accepted = Some((y, fy, p.provenance));
                break;
            }
        }
        let success = accepted.is_some();
        iterates.push(IterationRecord {
            k,
            x: x.clone(),
            f,
            alpha,
            success,
            provenance: accepted.as_ref().map(|a| a.2),
            case: set.construction_case,
            evals,
        });
        k += 1;
        if let Some((y, fy, _)) = accepted {
            x = y;
            f = fy;
            alpha = (config.gamma_inc * alpha).min(config.alpha_max);
        } else {
            if out_of_budget {
                break Termination::Budget;
            }
            alpha *= config.gamma_dec;
            if alpha <= config.alpha_min {
                break Termination::AlphaMin;
            }
        }
    };

    Ok(SolverRun {
        problem: problem.name.clone(),
        strategy: config.strategy,
        iterates,
        eval_count: evals,
        best_history,
        termination,
        f0,
        x_final: x,
        f_final: f,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityResult {
    /// `|min g^T v|` over feasible unit-ball displacements.
    pub value: f64,
    pub witness: Vec<f64>,
    pub iterations: usize,
}

pub const PI_MAX_ITER: usize = 2000;
const PI_INNER_TOL: f64 = 1e-10;
/// Step sizes double from `1/||g||` up to this multiple of it.
const PI_STEP_CAP: f64 = 1e2;

/// Criticality measure `|min {g^T v : x + v in omega, ||v|| <= 1}|`.
///
/// Projected gradient on the linear objective with Dykstra projections onto
/// the shifted polyhedron intersected with the unit ball. With a linear
/// objective any step length is admissible, so steps grow geometrically up
/// to a cap; the accumulated step length bounds the optimality gap.
pub fn criticality_pi(x: &[f64], g: &[f64], omega: &Polyhedron, tol: f64) -> Result<CriticalityResult> {
    let n = omega.dim();
    if x.len() != n || g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if x.len() != n { x.len() } else { g.len() },
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("gradient has non-finite entries".into()));
    }
    let gn = norm(g);
    if gn == 0.0 {
        return Ok(CriticalityResult {
            value: 0.0,
            witness: vec![0.0; n],
            iterations: 0,
        });
    }
    let shifted: Vec<Constraint> = omega
        .constraints()
        .iter()
        .map(|c| Constraint::new(c.a.clone(), (c.b - dot(&c.a, x)).max(0.0)))
        .collect();
    let project = |z: &[f64]| dykstra(z, &shifted, Some(1.0), PI_INNER_TOL, PROJECT_MAX_ITER);

    let mut v = vec![0.0; n];
    let mut best_val = 0.0;
    let mut best_v = v.clone();
    let mut step_sum = 0.0;
    let mut step = 1.0 / gn;
    for t in 1..=PI_MAX_ITER {
        let z: Vec<f64> = v.iter().zip(g).map(|(vi, gi)| vi - step * gi).collect();
        let next = project(&z)?;
        let moved = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        step_sum += step;
        let val = dot(g, &v);
        if val < best_val {
            best_val = val;
            best_v = v.clone();
        }
        // Optimality gap of a linear objective after projected steps.
        let gap = 2.0 / step_sum;
        if moved <= 1e-13 || gap <= tol * gn.max(1.0) {
            return Ok(CriticalityResult {
                value: (-best_val).max(0.0),
                witness: best_v,
                iterations: t,
            });
        }
        step = (2.0 * step).min(PI_STEP_CAP / gn);
    }
    Err(Error::NoConvergence {
        what: "criticality measure",
        iterations: PI_MAX_ITER,
        residual: -best_val,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityCheck {
    /// Iterations until the gradient norm first fell to `eps`, if it did.
    pub observed: Option<usize>,
    pub bound: f64,
    pub alpha_min: f64,
}

/// Worst-case iteration bound for unconstrained direct search with a
/// `Λ`-PSS, `||d|| <= d_max alpha` and decrease `(sigma/2) alpha^2`.
#[allow(clippy::too_many_arguments)]
pub fn complexity_bound(
    f0: f64,
    f_low: f64,
    lipschitz: f64,
    sigma: f64,
    lambda: f64,
    d_max: f64,
    alpha0: f64,
    gamma_dec: f64,
    gamma_inc: f64,
    eps: f64,
) -> (f64, f64) {
    let alpha_min = gamma_dec * 2.0 * eps / ((lipschitz * d_max * d_max + sigma) * lambda);
    let ld = (1.0 / gamma_dec).ln();
    let bound = (1.0 + gamma_inc.ln() / ld) * (2.0 * (f0 - f_low) / (sigma * alpha_min * alpha_min))
        + (alpha0 / alpha_min).ln() / ld;
    (bound, alpha_min)
}

/// Runs the solver on an unconstrained problem with a gradient oracle and
/// counts iterations until `||grad f(x_k)|| <= eps`, next to the theoretical
/// bound evaluated with `Λ = sqrt(n)`, `d_max = 1`, `sigma = 2 forcing_eps`.
pub fn empirical_complexity_check(
    problem: &ProblemInstance,
    lipschitz: f64,
    f_low: f64,
    config: &SolverConfig,
    eps: f64,
) -> Result<ComplexityCheck> {
    let grad = problem
        .gradient
        .clone()
        .ok_or_else(|| Error::InvalidInput("complexity check needs a gradient oracle".into()))?;
    if !problem.omega.is_empty() {
        return Err(Error::InvalidInput("complexity check applies to unconstrained problems".into()));
    }
    let n = problem.dim();
    let f0 = problem.eval(&problem.x0).map_err(|m| Error::ObjectiveEvaluationFailure {
        iteration: 0,
        point: problem.x0.clone(),
        message: m,
    })?;
    let alpha0 = config.initial_alpha(&problem.x0);
    let (bound, alpha_min) = complexity_bound(
        f0,
        f_low,
        lipschitz,
        2.0 * config.forcing_eps,
        (n as f64).sqrt(),
        1.0,
        alpha0,
        config.gamma_dec,
        config.gamma_inc,
        eps,
    );
    let mut observed = None;
    let mut hook = |k: usize, x: &[f64], _f: f64| {
        if norm(&grad(x)) <= eps {
            observed = Some(k);
            true
        } else {
            false
        }
    };
    direct_search_with(problem, config, &mut hook)?;
    Ok(ComplexityCheck {
        observed,
        bound,
        alpha_min,
    })
}

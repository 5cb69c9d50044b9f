//! Dense primal simplex for standard-form linear programs
//! `min c^T x  s.t.  E x = r, x >= 0`.
//!
//! Two phases with artificial variables and Bland's rule throughout. The
//! basis matrix is refactorized with a fresh LU at every pivot; problems here
//! have at most a few dozen rows.

use crate::error::{Error, Result};
use crate::numerics::{dot, norm_inf, DenseMatrix, Lu};

/// Phase-I optimum above this (relative to `max(1, ||r||_inf)`) means infeasible.
pub const PHASE1_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const OPT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct StandardLP {
    pub c: Vec<f64>,
    pub e: DenseMatrix,
    pub r: Vec<f64>,
}

impl StandardLP {
    pub fn new(c: Vec<f64>, e: DenseMatrix, r: Vec<f64>) -> Result<Self> {
        if e.cols() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: e.cols(),
                found: c.len(),
            });
        }
        if e.rows() != r.len() {
            return Err(Error::DimensionMismatch {
                expected: e.rows(),
                found: r.len(),
            });
        }
        if c.iter().chain(&r).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("LP data must be finite".into()));
        }
        Ok(Self { c, e, r })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPResult {
    pub status: LpStatus,
    /// Objective value; `NaN` unless optimal.
    pub value: f64,
    /// Primal solution; empty unless optimal.
    pub solution: Vec<f64>,
    /// Equality-row multipliers `y` with `E^T y <= c`; empty unless optimal.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LPResult {
    fn status_only(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            value: f64::NAN,
            solution: Vec::new(),
            duals: Vec::new(),
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Working problem: columns `0..p` are structural, `p..p+m` artificial.
struct Tableau<'a> {
    e: &'a DenseMatrix,
    r: Vec<f64>,
    m: usize,
    p: usize,
    /// Row sign flips so that `r >= 0`.
    sign: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<'a> Tableau<'a> {
    fn column(&self, j: usize) -> Vec<f64> {
        if j < self.p {
            (0..self.m).map(|i| self.sign[i] * self.e.get(i, j)).collect()
        } else {
            let mut col = vec![0.0; self.m];
            col[j - self.p] = 1.0;
            col
        }
    }

    fn factor(&self) -> Result<Lu> {
        let cols: Vec<Vec<f64>> = self.basis.iter().map(|&j| self.column(j)).collect();
        let b = DenseMatrix::from_columns(self.m, &cols)?;
        Lu::factor(&b).ok_or_else(|| {
            Error::NumericalBreakdown(format!("singular basis after {} pivots", self.pivots))
        })
    }

    /// Bland-rule simplex on cost vector `cost` (length `p + m`); columns with
    /// `allowed[j] == false` never enter.
    fn run(&mut self, cost: &[f64], allowed: &[bool], phase_two: bool) -> Result<(Outcome, Lu)> {
        let limit = 50 * (self.m + self.p + 10).pow(2);
        let cscale = cost.iter().fold(1.0_f64, |a, c| a.max(c.abs()));
        loop {
            let lu = self.factor()?;
            let xb = lu.solve(&self.r);
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let y = lu.solve_transpose(&cb);
            let entering = (0..self.p + self.m).find(|&j| {
                allowed[j]
                    && !self.basis.contains(&j)
                    && cost[j] - dot(&y, &self.column(j)) < -OPT_TOL * cscale
            });
            let Some(q) = entering else {
                return Ok((Outcome::Optimal, lu));
            };
            let d = lu.solve(&self.column(q));
            let dscale = norm_inf(&d).max(1.0);
            let mut leave: Option<(usize, f64)> = None;
            for (pos, &di) in d.iter().enumerate() {
                let art = self.basis[pos] >= self.p;
                let ratio = if di > PIVOT_TOL * dscale {
                    xb[pos].max(0.0) / di
                } else if phase_two && art && di.abs() > PIVOT_TOL * dscale {
                    // Leftover artificials are pinned at zero.
                    0.0
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((lp, lr)) => {
                        ratio < lr - 1e-14 * lr.abs().max(1.0)
                            || (ratio <= lr + 1e-14 * lr.abs().max(1.0)
                                && self.basis[pos] < self.basis[lp])
                    }
                };
                if better {
                    leave = Some((pos, ratio));
                }
            }
            let Some((pos, _)) = leave else {
                return Ok((Outcome::Unbounded, lu));
            };
            self.basis[pos] = q;
            self.pivots += 1;
            if self.pivots > limit {
                return Err(Error::NumericalBreakdown(format!(
                    "simplex exceeded {limit} pivots"
                )));
            }
        }
    }
}

/// Solves `min c^T x  s.t.  E x = r, x >= 0`.
pub fn solve_lp(lp: &StandardLP) -> Result<LPResult> {
    let (m, p) = (lp.e.rows(), lp.e.cols());
    let sign: Vec<f64> = lp.r.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let r: Vec<f64> = lp.r.iter().zip(&sign).map(|(v, s)| v * s).collect();
    let mut tab = Tableau {
        e: &lp.e,
        r,
        m,
        p,
        sign,
        basis: (p..p + m).collect(),
        pivots: 0,
    };

    // Phase I: minimize the sum of artificials.
    let mut cost1 = vec![0.0; p + m];
    for c in &mut cost1[p..] {
        *c = 1.0;
    }
    let allowed_all = vec![true; p + m];
    let (_, lu) = tab.run(&cost1, &allowed_all, false)?;
    let xb = lu.solve(&tab.r);
    let infeas: f64 = tab
        .basis
        .iter()
        .zip(&xb)
        .filter(|(&j, _)| j >= p)
        .map(|(_, &v)| v.max(0.0))
        .sum();
    if infeas > PHASE1_TOL * norm_inf(&tab.r).max(1.0) {
        return Ok(LPResult::status_only(LpStatus::Infeasible, tab.pivots));
    }

    // Phase II: original costs, artificials barred from entering.
    let mut cost2 = vec![0.0; p + m];
    cost2[..p].copy_from_slice(&lp.c);
    let mut allowed = vec![true; p + m];
    for a in &mut allowed[p..] {
        *a = false;
    }
    let (outcome, lu) = tab.run(&cost2, &allowed, true)?;
    if let Outcome::Unbounded = outcome {
        return Ok(LPResult::status_only(LpStatus::Unbounded, tab.pivots));
    }
    let xb = lu.solve(&tab.r);
    let mut x = vec![0.0; p];
    for (&j, &v) in tab.basis.iter().zip(&xb) {
        if j < p {
            x[j] = v.max(0.0);
        }
    }
    let cb: Vec<f64> = tab.basis.iter().map(|&j| cost2[j]).collect();
    let y_signed = lu.solve_transpose(&cb);
    let duals: Vec<f64> = y_signed.iter().zip(&tab.sign).map(|(y, s)| y * s).collect();
    Ok(LPResult {
        status: LpStatus::Optimal,
        value: dot(&lp.c, &x),
        solution: x,
        duals,
        pivots: tab.pivots,
    })
}

/// Minimal `||c||_1` with `v = sum_i c_i d_i`, `c >= 0`.
///
/// The data are rescaled by the largest direction norm before solving; the
/// returned coefficients refer to the original directions.
pub fn min_l1_decomposition(directions: &[Vec<f64>], v: &[f64]) -> Result<LPResult> {
    let n = v.len();
    if let Some(bad) = directions.iter().find(|d| d.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let scale = directions.iter().map(|d| norm_inf(d)).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let cols: Vec<Vec<f64>> = directions.iter().map(|d| d.iter().map(|x| x / scale).collect()).collect();
    let e = DenseMatrix::from_columns(n, &cols)?;
    let r: Vec<f64> = v.iter().map(|x| x / scale).collect();
    let lp = StandardLP::new(vec![1.0; directions.len()], e, r)?;
    solve_lp(&lp)
}

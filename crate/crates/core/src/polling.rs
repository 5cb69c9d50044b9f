//! Polling-set constructions: the bound-constraint formula, the full-rank
//! linear-constraint formula and the practical recursive procedure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cones::{tangent_generators_dd, tangent_generators_fullrank, ConeGenerators};
use crate::error::{Error, Result};
use crate::numerics::{complete_basis, condition_number, dot, norm, range_basis, scaled, DenseMatrix};
use crate::polyhedron::{ActiveSet, Polyhedron};

/// Directions longer than `alpha * (1 + NORM_SLACK)` are rejected.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Tangent,
    NegativeTangent,
    Normal,
    Nullspace,
}

impl Provenance {
    /// Position of the class in a polling set; tangent directions come first.
    fn rank(self) -> u8 {
        match self {
            Provenance::Tangent => 0,
            Provenance::Nullspace => 1,
            Provenance::NegativeTangent => 2,
            Provenance::Normal => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Tangent => "tangent",
            Provenance::NegativeTangent => "negative-tangent",
            Provenance::Normal => "normal",
            Provenance::Nullspace => "nullspace",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    TangentOnly,
    TangentPlusNormal,
    FullLambdaPSS,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::TangentOnly,
        Strategy::TangentPlusNormal,
        Strategy::FullLambdaPSS,
    ];

    /// Short CLI name: `t`, `tn` or `full`.
    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::TangentOnly => "t",
            Strategy::TangentPlusNormal => "tn",
            Strategy::FullLambdaPSS => "full",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::TangentOnly => "TangentOnly",
            Strategy::TangentPlusNormal => "TangentPlusNormal",
            Strategy::FullLambdaPSS => "FullLambdaPSS",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "tangent" | "TangentOnly" => Ok(Strategy::TangentOnly),
            "tn" | "tangent-normal" | "TangentPlusNormal" => Ok(Strategy::TangentPlusNormal),
            "full" | "FullLambdaPSS" => Ok(Strategy::FullLambdaPSS),
            other => Err(Error::InvalidInput(format!(
                "unknown strategy '{other}' (expected t, tn or full)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructionCase {
    Unconstrained,
    BoundFormula,
    FullRank,
    DoubleDesc,
    NormalGens,
    Recursive,
}

impl ConstructionCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstructionCase::Unconstrained => "Unconstrained",
            ConstructionCase::BoundFormula => "BoundFormula",
            ConstructionCase::FullRank => "FullRank",
            ConstructionCase::DoubleDesc => "DoubleDesc",
            ConstructionCase::NormalGens => "NormalGens",
            ConstructionCase::Recursive => "Recursive",
        }
    }
}

impl fmt::Display for ConstructionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConstructionCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ConstructionCase::Unconstrained,
            ConstructionCase::BoundFormula,
            ConstructionCase::FullRank,
            ConstructionCase::DoubleDesc,
            ConstructionCase::NormalGens,
            ConstructionCase::Recursive,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown construction case '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollDirection {
    pub d: Vec<f64>,
    pub provenance: Provenance,
    /// Factor applied to the underlying generator.
    pub scale_applied: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollingSet {
    pub directions: Vec<PollDirection>,
    pub x: Vec<f64>,
    pub alpha: f64,
    pub strategy: Strategy,
    pub construction_case: ConstructionCase,
    /// Analytic upper bound on the set's Λ, when the construction carries one.
    pub certified_lambda: Option<f64>,
}

impl PollingSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Every candidate direction scaled to zero; polling is bound to fail.
    pub fn is_degenerate(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.directions.iter().map(|p| p.d.clone()).collect()
    }

    /// Poll points `x + d` in polling order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.directions
            .iter()
            .map(|p| self.x.iter().zip(&p.d).map(|(a, b)| a + b).collect())
            .collect()
    }
}

/// Collects directions, dropping zero-length or infeasible ones.
struct Collector<'a> {
    x: &'a [f64],
    alpha: f64,
    omega: &'a Polyhedron,
    out: Vec<PollDirection>,
}

impl<'a> Collector<'a> {
    fn new(x: &'a [f64], alpha: f64, omega: &'a Polyhedron) -> Self {
        Self {
            x,
            alpha,
            omega,
            out: Vec::new(),
        }
    }

    fn push(&mut self, d: Vec<f64>, provenance: Provenance, scale: f64) -> Result<()> {
        if !(scale > 0.0) {
            return Ok(());
        }
        let nd = norm(&d);
        if nd == 0.0 || nd > self.alpha * (1.0 + NORM_SLACK) {
            return Ok(());
        }
        let p: Vec<f64> = self.x.iter().zip(&d).map(|(a, b)| a + b).collect();
        if !self.omega.is_feasible(&p)? {
            return Ok(());
        }
        self.out.push(PollDirection {
            d,
            provenance,
            scale_applied: scale,
        });
        Ok(())
    }

    fn finish(
        mut self,
        strategy: Strategy,
        construction_case: ConstructionCase,
        certified_lambda: Option<f64>,
    ) -> PollingSet {
        self.out.sort_by_key(|p| p.provenance.rank());
        PollingSet {
            directions: self.out,
            x: self.x.to_vec(),
            alpha: self.alpha,
            strategy,
            construction_case,
            certified_lambda,
        }
    }
}

fn check_inputs(x: &[f64], alpha: f64, omega: &Polyhedron) -> Result<()> {
    if x.len() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: omega.dim(),
            found: x.len(),
        });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// Which sides of each coordinate are nearly active, from the bound rows.
fn active_sides(omega: &Polyhedron, active: &ActiveSet) -> (Vec<bool>, Vec<bool>) {
    let n = omega.dim();
    let mut lower = vec![false; n];
    let mut upper = vec![false; n];
    for &i in &active.indices {
        let a = &omega.constraints()[i].a;
        if let Some(j) = a.iter().position(|&v| v != 0.0) {
            if a[j] > 0.0 {
                upper[j] = true;
            } else {
                lower[j] = true;
            }
        }
    }
    (lower, upper)
}

/// Bound-constraint polling set: `alpha_i e_i` and `-alpha_{-i} e_i` with the
/// step lengths cut at the bounds. Sides whose bound is nearly active are
/// tagged as normal directions, the rest as tangent.
pub fn bound_pss(x: &[f64], alpha: f64, omega: &Polyhedron) -> Result<PollingSet> {
    bound_pss_for(x, alpha, omega, Strategy::FullLambdaPSS)
}

fn bound_pss_for(x: &[f64], alpha: f64, omega: &Polyhedron, strategy: Strategy) -> Result<PollingSet> {
    check_inputs(x, alpha, omega)?;
    let bounds = omega
        .bounds()
        .ok_or_else(|| Error::InvalidInput("polyhedron has no bound structure".into()))?;
    let n = x.len();
    let active = omega.nearly_active(x, alpha)?;
    let (lo_active, up_active) = active_sides(omega, &active);
    let mut col = Collector::new(x, alpha, omega);
    let mut min_gap = alpha;
    for j in 0..n {
        let up_gap = (bounds.upper[j] - x[j]).max(0.0);
        let lo_gap = (x[j] - bounds.lower[j]).max(0.0);
        for gap in [up_gap, lo_gap] {
            if gap > 0.0 && gap < min_gap {
                min_gap = gap;
            }
        }
        let up = alpha.min(up_gap);
        let lo = alpha.min(lo_gap);
        let mut e = vec![0.0; n];
        e[j] = up;
        let prov = if up_active[j] { Provenance::Normal } else { Provenance::Tangent };
        col.push(e, prov, up)?;
        let mut e = vec![0.0; n];
        e[j] = -lo;
        let prov = if lo_active[j] { Provenance::Normal } else { Provenance::Tangent };
        col.push(e, prov, lo)?;
    }
    let nf = n as f64;
    let lambda = nf.min(nf.sqrt() * alpha / min_gap);
    let case = if active.is_empty() {
        ConstructionCase::Unconstrained
    } else {
        ConstructionCase::BoundFormula
    };
    Ok(col.finish(strategy, case, Some(lambda)))
}

fn is_full_column_rank(a: &DenseMatrix) -> bool {
    a.cols() <= a.rows() && condition_number(a).is_ok()
}

/// Full-rank polling set: tangent directions `d_i = alpha d̂_i / ||d̂_i||`,
/// negative tangents `-alpha_i d_i` with `alpha_i = min(||d̂_i|| s_i / alpha, 1)`
/// and `+-alpha u` along the complement of the active normals.
pub fn fullrank_pss(x: &[f64], alpha: f64, omega: &Polyhedron, active: &ActiveSet) -> Result<PollingSet> {
    fullrank_pss_for(x, alpha, omega, active, Strategy::FullLambdaPSS, true)
}

fn fullrank_pss_for(
    x: &[f64],
    alpha: f64,
    omega: &Polyhedron,
    active: &ActiveSet,
    strategy: Strategy,
    negatives: bool,
) -> Result<PollingSet> {
    check_inputs(x, alpha, omega)?;
    let n = x.len();
    if active.is_empty() {
        let mut col = Collector::new(x, alpha, omega);
        push_coordinate_pairs(&mut col, n)?;
        return Ok(col.finish(strategy, ConstructionCase::Unconstrained, Some((n as f64).sqrt())));
    }
    let a = omega.row_matrix(&active.indices);
    let kappa = condition_number(&a)?;
    let cone = tangent_generators_fullrank(&a)?;
    let slacks = omega.slacks(x)?;
    let mut col = Collector::new(x, alpha, omega);
    let mut tangents = Vec::with_capacity(cone.generators.len());
    for g in &cone.generators {
        let ng = norm(g);
        let s = alpha / ng;
        let d = scaled(g, s);
        col.push(d.clone(), Provenance::Tangent, s)?;
        tangents.push((d, ng));
    }
    for u in &cone.lineality {
        col.push(scaled(u, alpha), Provenance::Nullspace, alpha)?;
        col.push(scaled(u, -alpha), Provenance::Nullspace, alpha)?;
    }
    if negatives {
        for ((d, ng), &i) in tangents.iter().zip(&active.indices) {
            let s = slacks[i].max(0.0);
            let ai = (ng * s / alpha).min(1.0);
            col.push(scaled(d, -ai), Provenance::NegativeTangent, ai)?;
        }
    }
    let q = active.len() as f64;
    let lambda = q * kappa + (n as f64 - q).sqrt();
    Ok(col.finish(strategy, ConstructionCase::FullRank, negatives.then_some(lambda)))
}

fn push_coordinate_pairs(col: &mut Collector<'_>, n: usize) -> Result<()> {
    let alpha = col.alpha;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = alpha;
        col.push(e.clone(), Provenance::Tangent, alpha)?;
        e[j] = -alpha;
        col.push(e, Provenance::Tangent, alpha)?;
    }
    Ok(())
}

/// Nearly active normals `alpha_i a_i`, each as long as possible while the poll
/// point stays feasible and within `B(x, alpha)`.
fn push_scaled_normals(col: &mut Collector<'_>, active: &ActiveSet) -> Result<()> {
    for &i in &active.indices {
        let a = col.omega.constraints()[i].a.clone();
        let reach = col.omega.max_feasible_scale(col.x, &a, f64::INFINITY)?;
        let s = reach.min(col.alpha / norm(&a));
        col.push(scaled(&a, s), Provenance::Normal, s)?;
    }
    Ok(())
}

/// Practical construction on a general polyhedron.
///
/// 1. No nearly active constraint: `+-alpha e_i`.
/// 2. Linearly independent active normals: [`fullrank_pss`].
/// 3. Otherwise double-description generators `G`: (a) `alpha g` with
///    feasibly shortened negatives; (b) scaled normals when the tangent cone
///    is `{0}`; (c) if the result does not span, a polling set for the
///    affine slice through `x` along the orthogonal complement is appended.
pub fn practical_pss(x: &[f64], alpha: f64, omega: &Polyhedron) -> Result<PollingSet> {
    check_inputs(x, alpha, omega)?;
    practical(x, alpha, omega, Strategy::FullLambdaPSS)
}

fn practical(x: &[f64], alpha: f64, omega: &Polyhedron, strategy: Strategy) -> Result<PollingSet> {
    let active = omega.nearly_active(x, alpha)?;
    if active.is_empty() {
        let mut col = Collector::new(x, alpha, omega);
        push_coordinate_pairs(&mut col, x.len())?;
        return Ok(col.finish(strategy, ConstructionCase::Unconstrained, Some((x.len() as f64).sqrt())));
    }
    let a = omega.row_matrix(&active.indices);
    if is_full_column_rank(&a) {
        return fullrank_pss_for(x, alpha, omega, &active, strategy, true);
    }
    let cone = tangent_generators_dd(&a);
    let mut col = Collector::new(x, alpha, omega);
    if cone.is_trivial() {
        push_scaled_normals(&mut col, &active)?;
        return Ok(col.finish(strategy, ConstructionCase::NormalGens, None));
    }
    push_dd_tangents(&mut col, &cone)?;
    for g in &cone.generators {
        let t = omega.max_feasible_scale(x, &scaled(g, -1.0), alpha)?;
        col.push(scaled(g, -t), Provenance::NegativeTangent, t)?;
    }
    let mut spanning: Vec<Vec<f64>> = cone.generators.clone();
    spanning.extend(cone.lineality.iter().cloned());
    let span = range_basis(&DenseMatrix::from_columns(x.len(), &spanning)?);
    let complement = complete_basis(&span, x.len());
    if complement.is_empty() {
        return Ok(col.finish(strategy, ConstructionCase::DoubleDesc, None));
    }
    if complement.len() == 1 {
        let u = &complement[0];
        for sign in [1.0, -1.0] {
            let dir = scaled(u, sign);
            let t = omega.max_feasible_scale(x, &dir, alpha)?;
            col.push(scaled(&dir, t), Provenance::Normal, t)?;
        }
    } else {
        let sub = omega.slice(x, &complement)?;
        let z0 = vec![0.0; complement.len()];
        let inner = practical(&z0, alpha, &sub, strategy)?;
        for p in inner.directions {
            let mut d = vec![0.0; x.len()];
            for (zk, q) in p.d.iter().zip(&complement) {
                for (di, qi) in d.iter_mut().zip(q) {
                    *di += zk * qi;
                }
            }
            col.push(d, Provenance::Normal, p.scale_applied)?;
        }
    }
    Ok(col.finish(strategy, ConstructionCase::Recursive, None))
}

fn push_dd_tangents(col: &mut Collector<'_>, cone: &ConeGenerators) -> Result<()> {
    let alpha = col.alpha;
    for g in &cone.generators {
        let s = alpha / norm(g);
        col.push(scaled(g, s), Provenance::Tangent, s)?;
    }
    for u in &cone.lineality {
        col.push(scaled(u, alpha), Provenance::Nullspace, alpha)?;
        col.push(scaled(u, -alpha), Provenance::Nullspace, alpha)?;
    }
    Ok(())
}

/// Polling set for one of the three experimental strategies. All of them
/// start from the same tangent directions in the same order.
pub fn strategy_pss(x: &[f64], alpha: f64, omega: &Polyhedron, strategy: Strategy) -> Result<PollingSet> {
    check_inputs(x, alpha, omega)?;
    if omega.bounds().is_some() {
        let full = bound_pss_for(x, alpha, omega, strategy)?;
        return Ok(match strategy {
            Strategy::TangentOnly => tangent_only(full),
            _ => full,
        });
    }
    match strategy {
        Strategy::FullLambdaPSS => practical(x, alpha, omega, strategy),
        Strategy::TangentOnly | Strategy::TangentPlusNormal => {
            let active = omega.nearly_active(x, alpha)?;
            if active.is_empty() {
                return practical(x, alpha, omega, strategy);
            }
            let a = omega.row_matrix(&active.indices);
            let mut col = Collector::new(x, alpha, omega);
            let case = if is_full_column_rank(&a) {
                let cone = tangent_generators_fullrank(&a)?;
                push_dd_tangents(&mut col, &cone)?;
                ConstructionCase::FullRank
            } else {
                let cone = tangent_generators_dd(&a);
                push_dd_tangents(&mut col, &cone)?;
                ConstructionCase::DoubleDesc
            };
            let have_tangents = !col.out.is_empty();
            if strategy == Strategy::TangentPlusNormal || !have_tangents {
                push_scaled_normals(&mut col, &active)?;
            }
            let case = if have_tangents { case } else { ConstructionCase::NormalGens };
            Ok(col.finish(strategy, case, None))
        }
    }
}

/// Keeps the tangent directions of a bound polling set, or its normal
/// directions when there are no tangent ones.
fn tangent_only(mut set: PollingSet) -> PollingSet {
    set.certified_lambda = None;
    if set.directions.iter().any(|p| p.provenance == Provenance::Tangent) {
        set.directions.retain(|p| p.provenance == Provenance::Tangent);
    } else if !set.directions.is_empty() {
        set.construction_case = ConstructionCase::NormalGens;
    }
    set
}

/// Largest `||d|| / alpha` in the set, or 0 when it is empty.
pub fn relative_max_norm(set: &PollingSet) -> f64 {
    set.directions
        .iter()
        .map(|p| norm(&p.d) / set.alpha)
        .fold(0.0, f64::max)
}

/// `a_i^T d̂_j` for the tangent part of a full-rank set; used by diagnostics.
pub fn orthogonality_residual(active_matrix: &DenseMatrix, set: &PollingSet) -> f64 {
    let tangents: Vec<&PollDirection> = set
        .directions
        .iter()
        .filter(|p| p.provenance == Provenance::Tangent)
        .collect();
    let mut worst: f64 = 0.0;
    for (i, p) in tangents.iter().enumerate() {
        for j in 0..active_matrix.cols() {
            if i != j {
                let a = active_matrix.column(j);
                worst = worst.max(dot(&a, &p.d).abs() / (norm(&a) * norm(&p.d)));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedron::Constraint;

    fn assert_vecs(got: &[Vec<f64>], want: &[Vec<f64>], tol: f64) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(want) {
            for (a, b) in g.iter().zip(w) {
                assert!((a - b).abs() <= tol, "{got:?} vs {want:?}");
            }
        }
    }

    fn upper_1d() -> Polyhedron {
        Polyhedron::new(1, vec![Constraint::new(vec![1.0], 1.1)]).unwrap()
    }

    fn wedge() -> Polyhedron {
        Polyhedron::new(
            2,
            vec![
                Constraint::new(vec![-1.0, 0.0], 0.0),
                Constraint::new(vec![1.0, 1.0], 1.0),
            ],
        )
        .unwrap()
    }

    fn corner_region() -> Polyhedron {
        Polyhedron::new(
            2,
            vec![
                Constraint::new(vec![-1.0, 0.0], 0.0),
                Constraint::new(vec![0.0, -1.0], 0.0),
                Constraint::new(vec![4.0, 1.0], 12.0),
                Constraint::new(vec![3.0, 4.0], 12.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn bound_pss_one_dimensional() {
        let set = bound_pss(&[1.0], 2.0, &upper_1d()).unwrap();
        assert_eq!(set.vectors(), vec![vec![-2.0], vec![1.1 - 1.0]]);
        assert_eq!(set.directions[0].provenance, Provenance::Tangent);
        assert_eq!(set.directions[1].provenance, Provenance::Normal);
    }

    #[test]
    fn bound_pss_unconstrained() {
        let set = bound_pss(&[0.3, -2.0], 1.0, &Polyhedron::unconstrained(2)).unwrap();
        assert_vecs(
            &set.vectors(),
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            0.0,
        );
        assert_eq!(set.construction_case, ConstructionCase::Unconstrained);
    }

    #[test]
    fn bound_pss_unit_box() {
        let om = Polyhedron::from_bounds(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let set = bound_pss(&[0.0, 0.5], 0.25, &om).unwrap();
        assert_vecs(
            &set.vectors(),
            &[vec![0.25, 0.0], vec![0.0, 0.25], vec![0.0, -0.25]],
            0.0,
        );
        assert!((set.certified_lambda.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fullrank_wedge_matches_closed_form() {
        let (e1, e2, alpha) = (1e-3, 2e-3, 1.0);
        let om = wedge();
        let x = [e1, 1.0 - e2];
        let active = om.nearly_active(&x, alpha).unwrap();
        let set = fullrank_pss(&x, alpha, &om, &active).unwrap();
        let r = 0.5f64.sqrt();
        assert_vecs(
            &set.vectors(),
            &[
                vec![alpha * r, -alpha * r],
                vec![0.0, -alpha],
                vec![-e1, e1],
                vec![0.0, e2 - e1],
            ],
            1e-12,
        );
        let kappa = ((3.0 + 5f64.sqrt()) / (3.0 - 5f64.sqrt())).sqrt();
        assert!((set.certified_lambda.unwrap() - 2.0 * kappa).abs() < 1e-9);
        let a = om.row_matrix(&active.indices);
        assert!(orthogonality_residual(&a, &set) < 1e-10);
    }

    #[test]
    fn fullrank_without_active_constraints() {
        let om = wedge();
        let x = [0.3, 0.3];
        let active = om.nearly_active(&x, 0.01).unwrap();
        let set = fullrank_pss(&x, 0.01, &om, &active).unwrap();
        assert_eq!(set.len(), 4);
        assert!((set.certified_lambda.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn practical_cases() {
        let set = practical_pss(&[0.3, 0.3], 0.01, &wedge()).unwrap();
        assert_eq!(set.construction_case, ConstructionCase::Unconstrained);
        assert_eq!(set.len(), 4);

        let set = practical_pss(&[1e-3, 1.0 - 2e-3], 1.0, &wedge()).unwrap();
        assert_eq!(set.construction_case, ConstructionCase::FullRank);
        assert_eq!(set.len(), 4);

        let om = corner_region();
        let x = [0.23, 2.55];
        let set = practical_pss(&x, 3.4, &om).unwrap();
        assert_eq!(set.construction_case, ConstructionCase::NormalGens);
        assert!(set.directions.iter().all(|p| p.provenance == Provenance::Normal));
        // Leftward/downward normals are long, the two rightward ones very short.
        let lengths: Vec<f64> = set.directions.iter().map(|p| norm(&p.d)).collect();
        assert_eq!(lengths.len(), 4);
        assert!((lengths[0] - 0.23).abs() < 1e-12);
        assert!((lengths[1] - 2.55).abs() < 1e-12);
        assert!(lengths[2] < 0.1 * 3.4 && lengths[3] < 0.1 * 3.4, "{lengths:?}");
        for p in set.points() {
            assert!(om.is_feasible_tol(&p, 1e-10).unwrap());
        }
    }

    #[test]
    fn recursive_case_on_degenerate_edge() {
        // Pyramid apex with an extra cutting plane through the apex: the
        // active rows are dependent and the cone keeps a pointed part.
        let om = Polyhedron::new(
            3,
            vec![
                Constraint::new(vec![1.0, 0.0, 1.0], 1.0),
                Constraint::new(vec![-1.0, 0.0, 1.0], 1.0),
                Constraint::new(vec![0.0, 1.0, 1.0], 1.0),
                Constraint::new(vec![0.0, -1.0, 1.0], 1.0),
            ],
        )
        .unwrap();
        let x = [0.0, 0.0, 0.9];
        let set = practical_pss(&x, 0.5, &om).unwrap();
        assert_eq!(set.construction_case, ConstructionCase::DoubleDesc);
        assert!(!set.is_empty());
        for p in set.points() {
            assert!(om.is_feasible_tol(&p, 1e-10).unwrap());
        }

        // A thin slab x1 in [-1e-3, 1e-3] plus y <= 0 at the origin: the
        // tangent cone is the ray -e2 and x1 is handled by recursion.
        let om = Polyhedron::new(
            2,
            vec![
                Constraint::new(vec![1.0, 0.0], 1e-3),
                Constraint::new(vec![-1.0, 0.0], 1e-3),
                Constraint::new(vec![1.0, 1.0], 0.0),
                Constraint::new(vec![-1.0, 1.0], 0.0),
            ],
        )
        .unwrap();
        let set = practical_pss(&[0.0, 0.0], 0.5, &om).unwrap();
        assert_eq!(set.construction_case, ConstructionCase::Recursive, "{set:?}");
        for p in set.points() {
            assert!(om.is_feasible_tol(&p, 1e-10).unwrap());
        }
    }

    #[test]
    fn strategies_on_example_iteration() {
        let om = upper_1d();
        let t = strategy_pss(&[1.0], 2.0, &om, Strategy::TangentOnly).unwrap();
        assert_eq!(t.vectors(), vec![vec![-2.0]]);
        let f = strategy_pss(&[1.0], 2.0, &om, Strategy::FullLambdaPSS).unwrap();
        assert_eq!(f.vectors(), vec![vec![-2.0], vec![1.1 - 1.0]]);
    }

    #[test]
    fn strategies_coincide_in_the_interior() {
        let om = wedge();
        let sets: Vec<Vec<Vec<f64>>> = Strategy::ALL
            .iter()
            .map(|&s| strategy_pss(&[0.3, 0.3], 0.01, &om, s).unwrap().vectors())
            .collect();
        assert_eq!(sets[0], sets[1]);
        assert_eq!(sets[1], sets[2]);
    }

    #[test]
    fn tangent_only_falls_back_to_normals() {
        let om = corner_region();
        let set = strategy_pss(&[0.23, 2.55], 3.4, &om, Strategy::TangentOnly).unwrap();
        assert_eq!(set.construction_case, ConstructionCase::NormalGens);
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn tangent_directions_come_first() {
        let om = wedge();
        let x = [1e-3, 1.0 - 2e-3];
        for s in Strategy::ALL {
            let set = strategy_pss(&x, 1.0, &om, s).unwrap();
            let ranks: Vec<u8> = set.directions.iter().map(|p| p.provenance.rank()).collect();
            assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(set.directions[0].provenance, Provenance::Tangent);
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.short_name().parse::<Strategy>().unwrap(), s);
        }
        assert!("x".parse::<Strategy>().is_err());
    }
}

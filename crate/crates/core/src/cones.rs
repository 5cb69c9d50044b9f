//! Approximate normal and tangent cones at `(x, alpha)`.
//!
//! The tangent cone `{y : a_i^T y <= 0, i nearly active}` is generated either
//! in closed form (linearly independent active rows) or by the double
//! description method.

use crate::error::Result;
use crate::lp::min_l1_decomposition;
use crate::numerics::{
    dot, norm, null_space_basis, orthonormal_complement, pseudoinverse, range_basis, svd,
    DenseMatrix,
};
use crate::polyhedron::Polyhedron;

/// Two unit rays closer than this in cosine are merged.
const DUPLICATE_COS: f64 = 1.0 - 1e-9;
/// A unit ray is on a unit-normal hyperplane when `|h^T z|` is below this.
const TIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSource {
    FullRankFormula,
    DoubleDescription,
    /// Normals of the nearly active constraints.
    ActiveNormals,
    /// The cone is `{0}`.
    Empty,
}

/// `cone(generators) + span(lineality)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGenerators {
    pub generators: Vec<Vec<f64>>,
    /// Orthonormal vectors, each contributing both `u` and `-u`.
    pub lineality: Vec<Vec<f64>>,
    pub source: ConeSource,
}

impl ConeGenerators {
    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty() && self.lineality.is_empty()
    }

    /// Generators followed by `+u, -u` for every lineality vector.
    pub fn all_directions(&self) -> Vec<Vec<f64>> {
        let mut out = self.generators.clone();
        for u in &self.lineality {
            out.push(u.clone());
            out.push(u.iter().map(|v| -v).collect());
        }
        out
    }
}

/// Generators `a_i` of the approximate normal cone.
pub fn normal_cone_generators(x: &[f64], alpha: f64, omega: &Polyhedron) -> Result<ConeGenerators> {
    let active = omega.nearly_active(x, alpha)?;
    let generators: Vec<Vec<f64>> = active
        .indices
        .iter()
        .map(|&i| omega.constraints()[i].a.clone())
        .collect();
    let source = if generators.is_empty() {
        ConeSource::Empty
    } else {
        ConeSource::ActiveNormals
    };
    Ok(ConeGenerators {
        generators,
        lineality: Vec::new(),
        source,
    })
}

/// Closed-form tangent generators for an `n x q` active matrix of full column
/// rank: the columns of `-(A^+)^T` (unscaled) plus an orthonormal basis of
/// `col(A)^perp` as lineality.
pub fn tangent_generators_fullrank(active: &DenseMatrix) -> Result<ConeGenerators> {
    let pinv = pseudoinverse(active)?;
    let generators = (0..active.cols())
        .map(|i| pinv.row(i).iter().map(|v| -v).collect())
        .collect();
    let lineality = orthonormal_complement(active)?;
    Ok(ConeGenerators {
        generators,
        lineality,
        source: ConeSource::FullRankFormula,
    })
}

/// Generators of `{y : a_i^T y <= 0}` for the columns `a_i` of `active`,
/// whatever their rank.
///
/// The lineality space `{y : A^T y = 0}` is split off first; the pointed part
/// lives in the row space and is enumerated there by incremental double
/// description. Rays are unit length, near-duplicates are merged, and the
/// result is sorted lexicographically.
pub fn tangent_generators_dd(active: &DenseMatrix) -> ConeGenerators {
    let n = active.rows();
    let rows: Vec<Vec<f64>> = active
        .columns()
        .into_iter()
        .filter_map(|a| {
            let na = norm(&a);
            (na > 0.0).then(|| a.iter().map(|v| v / na).collect())
        })
        .collect();
    let row_mat = DenseMatrix::from_rows(&rows).unwrap_or_else(|_| DenseMatrix::zeros(0, n));
    let row_mat = if rows.is_empty() { DenseMatrix::zeros(0, n) } else { row_mat };
    let lineality = null_space_basis(&row_mat);
    let space = if rows.is_empty() {
        Vec::new()
    } else {
        range_basis(&row_mat.transpose())
    };

    let mut generators = Vec::new();
    if !space.is_empty() {
        let reduced: Vec<Vec<f64>> = rows
            .iter()
            .map(|a| {
                let h: Vec<f64> = space.iter().map(|w| dot(w, a)).collect();
                let nh = norm(&h);
                h.iter().map(|v| v / nh).collect()
            })
            .collect();
        for z in pointed_rays(&reduced, space.len()) {
            let mut y = vec![0.0; n];
            for (zk, w) in z.iter().zip(&space) {
                for (yi, wi) in y.iter_mut().zip(w) {
                    *yi += zk * wi;
                }
            }
            let ny = norm(&y);
            generators.push(y.iter().map(|v| v / ny).collect::<Vec<f64>>());
        }
    }
    generators.sort_by(|a, b| lex_cmp(a, b));
    let source = if generators.is_empty() && lineality.is_empty() {
        ConeSource::Empty
    } else {
        ConeSource::DoubleDescription
    };
    ConeGenerators {
        generators,
        lineality,
        source,
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn matrix_rank(rows: &[&Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let owned: Vec<Vec<f64>> = rows.iter().map(|r| (*r).clone()).collect();
    svd(&DenseMatrix::from_rows(&owned).expect("equal-length rows")).rank()
}

/// Extreme rays of the pointed cone `{z in R^r : h_i^T z <= 0}`, where the
/// unit rows `h_i` span `R^r`.
fn pointed_rays(rows: &[Vec<f64>], r: usize) -> Vec<Vec<f64>> {
    // Greedy choice of r independent rows for the initial simplicial cone.
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(r);
    for (i, h) in rows.iter().enumerate() {
        if chosen.len() == r {
            break;
        }
        let mut res = h.clone();
        for _ in 0..2 {
            for q in &ortho {
                let c = dot(&res, q);
                for (a, b) in res.iter_mut().zip(q) {
                    *a -= c * b;
                }
            }
        }
        let nr = norm(&res);
        if nr > 1e-8 {
            ortho.push(res.iter().map(|v| v / nr).collect());
            chosen.push(i);
        }
    }
    if chosen.len() < r {
        // Rows do not span; cannot happen for a basis of the row space.
        return Vec::new();
    }
    let b_rows: Vec<Vec<f64>> = chosen.iter().map(|&i| rows[i].clone()).collect();
    let b = DenseMatrix::from_rows(&b_rows).expect("square");
    let Some(lu) = crate::numerics::Lu::factor(&b) else {
        return Vec::new();
    };
    let mut rays: Vec<Vec<f64>> = (0..r)
        .map(|k| {
            let mut rhs = vec![0.0; r];
            rhs[k] = -1.0;
            let z = lu.solve(&rhs);
            let nz = norm(&z);
            z.iter().map(|v| v / nz).collect()
        })
        .collect();
    let mut processed: Vec<&Vec<f64>> = chosen.iter().map(|&i| &rows[i]).collect();

    for (i, h) in rows.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        if rays.is_empty() {
            break;
        }
        let vals: Vec<f64> = rays.iter().map(|z| dot(h, z)).collect();
        let mut next: Vec<Vec<f64>> = Vec::new();
        for (z, &v) in rays.iter().zip(&vals) {
            if v <= TIGHT_TOL {
                next.push(z.clone());
            }
        }
        for (pi, p) in rays.iter().enumerate() {
            if vals[pi] <= TIGHT_TOL {
                continue;
            }
            for (ni, q) in rays.iter().enumerate() {
                if vals[ni] >= -TIGHT_TOL {
                    continue;
                }
                if r < 2 {
                    continue;
                }
                let common: Vec<&Vec<f64>> = processed
                    .iter()
                    .copied()
                    .filter(|row| dot(row, p).abs() <= TIGHT_TOL && dot(row, q).abs() <= TIGHT_TOL)
                    .collect();
                if common.len() < r - 2 || matrix_rank(&common) != r - 2 {
                    continue;
                }
                let z: Vec<f64> = q
                    .iter()
                    .zip(p)
                    .map(|(qk, pk)| vals[pi] * qk - vals[ni] * pk)
                    .collect();
                let nz = norm(&z);
                if nz > 0.0 {
                    next.push(z.iter().map(|v| v / nz).collect());
                }
            }
        }
        rays = dedup(next);
        processed.push(h);
    }
    dedup(rays)
}

fn dedup(rays: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(rays.len());
    for z in rays {
        if !out.iter().any(|w| dot(w, &z) > DUPLICATE_COS) {
            out.push(z);
        }
    }
    out
}

/// Whether `y` lies in `cone(generators) + span(lineality)`, decided by a
/// phase-I linear program.
pub fn cone_member(y: &[f64], cone: &ConeGenerators) -> Result<bool> {
    let dirs = cone.all_directions();
    if dirs.is_empty() {
        return Ok(norm(y) <= 1e-12);
    }
    Ok(min_l1_decomposition(&dirs, y)?.is_optimal())
}

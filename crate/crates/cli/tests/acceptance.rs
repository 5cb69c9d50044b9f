//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dspoll_core::audit::{estimate_lambda, estimate_lambda_dirs, AuditConfig};
use dspoll_core::bench::{load_corpus, run_benchmark};
use dspoll_core::cones::{cone_member, tangent_generators_dd};
use dspoll_core::lp::{min_l1_decomposition, solve_lp, LpStatus, StandardLP};
use dspoll_core::numerics::DenseMatrix;
use dspoll_core::polling::{bound_pss, fullrank_pss, strategy_pss, Strategy};
use dspoll_core::polyhedron::{Constraint, Polyhedron};
use dspoll_core::solver::{
    criticality_pi, direct_search, empirical_complexity_check, ProblemInstance, SolverConfig, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// ---------------------------------------------------------------- oracles

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn sym_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// `sigma_max / sigma_min` of the matrix with the given columns.
fn kappa(columns: &[Vec<f64>]) -> f64 {
    let gram: Vec<Vec<f64>> = columns
        .iter()
        .map(|a| columns.iter().map(|b| dot(a, b)).collect())
        .collect();
    let ev = sym_eigenvalues(gram);
    let max = ev.iter().cloned().fold(f64::MIN, f64::max);
    let min = ev.iter().cloned().fold(f64::MAX, f64::min);
    (max / min).sqrt()
}

/// Solves a square system by Gaussian elimination; `None` if singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn subsets(p: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << p)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..p).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Minimum of `c^T x` over the vertices of `{E x = r, x >= 0}`, or `None`
/// when there are no vertices. `E` must have full row rank.
fn min_over_vertices(c: &[f64], e: &[Vec<f64>], r: &[f64]) -> Option<f64> {
    let (m, p) = (e.len(), c.len());
    let mut best: Option<f64> = None;
    for basis in subsets(p, m) {
        let sq: Vec<Vec<f64>> = e.iter().map(|row| basis.iter().map(|&j| row[j]).collect()).collect();
        if let Some(xb) = gauss_solve(sq, r.to_vec()) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let val: f64 = basis.iter().zip(&xb).map(|(&j, &v)| c[j] * v).sum();
                best = Some(best.map_or(val, |b: f64| b.min(val)));
            }
        }
    }
    best
}

/// Status and value of `min c^T x, E x = r, x >= 0` by vertex enumeration.
fn lp_oracle(c: &[f64], e: &[Vec<f64>], r: &[f64]) -> (LpStatus, f64) {
    let Some(v) = min_over_vertices(c, e, r) else {
        return (LpStatus::Infeasible, f64::NAN);
    };
    // Unbounded iff some d >= 0 with E d = 0, sum d = 1 has c^T d < 0.
    let mut er: Vec<Vec<f64>> = e.to_vec();
    er.push(vec![1.0; c.len()]);
    let mut rr = vec![0.0; e.len()];
    rr.push(1.0);
    match min_over_vertices(c, &er, &rr) {
        Some(ray) if ray < -1e-9 => (LpStatus::Unbounded, f64::NAN),
        _ => (LpStatus::Optimal, v),
    }
}

// --------------------------------------------------------------- criteria

fn c1_upper_bound() -> Outcome {
    let omega = Polyhedron::new(1, vec![Constraint::new(vec![1.0], 1.1)]).map_err(|e| e.to_string())?;
    let p = ProblemInstance::new("line_bound", omega, vec![0.0], |x| -x[0]).map_err(|e| e.to_string())?;
    let cfg = |s| SolverConfig {
        alpha0: Some(1.0),
        ..SolverConfig::with_strategy(s)
    };
    let t = direct_search(&p, &cfg(Strategy::TangentOnly)).map_err(|e| e.to_string())?;
    let xs = t.iterate_points();
    ensure!(xs[1] == vec![1.0], "TangentOnly x1 = {:?}", xs[1]);
    ensure!(xs[7] == vec![1.0 + 2f64.powi(-4)], "TangentOnly x7 = {:?}", xs[7]);
    let accepted: Vec<f64> = t
        .iterates
        .windows(2)
        .filter(|w| w[0].success)
        .map(|w| w[1].x[0])
        .collect();
    ensure!(
        accepted.len() >= 3 && accepted[..3] == [1.0, 1.0625, 1.09375],
        "TangentOnly successes {accepted:?}"
    );
    ensure!(xs.iter().all(|x| x[0] < 1.1), "TangentOnly reached 1.1");
    ensure!(t.termination == Termination::AlphaMin, "termination {:?}", t.termination);

    let f = direct_search(&p, &cfg(Strategy::FullLambdaPSS)).map_err(|e| e.to_string())?;
    let fx = f.iterate_points();
    let succ: Vec<f64> = f.iterates.windows(2).filter(|w| w[0].success).map(|w| w[1].x[0]).collect();
    ensure!(succ.len() >= 2 && succ[0] == 1.0 && succ[1] == 1.1, "FullLambdaPSS successes {succ:?}");
    ensure!(fx.iter().any(|x| x[0] == 1.1), "FullLambdaPSS never at 1.1");
    Ok(format!(
        "TangentOnly stops at {} ({} iterations), FullLambdaPSS reaches 1.1 on its second success",
        t.x_final[0],
        t.iterates.len()
    ))
}

fn c2_certified_constructions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_bound = f64::NEG_INFINITY;
    for case in 0..200 {
        let n = 2 + case % 5;
        let lower = uniform_vec(&mut rng, n, -2.0, 0.0);
        let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0.1..3.0)).collect();
        let x: Vec<f64> = (0..n)
            .map(|j| match rng.gen_range(0..5) {
                0 => lower[j],
                1 => upper[j],
                2 => lower[j] + rng.gen_range(1e-3..0.2f64).min(upper[j] - lower[j]),
                _ => rng.gen_range(lower[j]..upper[j]),
            })
            .collect();
        let alpha = 10f64.powf(rng.gen_range(-2.0..0.3));
        let omega = Polyhedron::from_bounds(&lower, &upper).map_err(|e| e.to_string())?;
        let set = bound_pss(&x, alpha, &omega).map_err(|e| e.to_string())?;
        let gaps = (0..n)
            .flat_map(|j| [x[j] - lower[j], upper[j] - x[j]])
            .filter(|&g| g != 0.0)
            .fold(alpha, f64::min);
        let nf = n as f64;
        let formula = nf.min(nf.sqrt() * alpha / gaps);
        let est = estimate_lambda(&set, &omega).map_err(|e| e.to_string())?;
        ensure!(
            est.lambda <= formula + 1e-6,
            "box case {case}: estimate {} exceeds {formula}",
            est.lambda
        );
        worst_bound = worst_bound.max(est.lambda - formula);
    }
    let mut worst_full = f64::NEG_INFINITY;
    let mut done = 0;
    while done < 200 {
        let n = 2 + done % 5;
        let q = rng.gen_range(1..=n);
        let cols: Vec<Vec<f64>> = (0..q).map(|_| uniform_vec(&mut rng, n, -1.0, 1.0)).collect();
        let k = kappa(&cols);
        if !(k < 50.0) {
            continue;
        }
        let x = uniform_vec(&mut rng, n, -1.0, 1.0);
        let alpha = rng.gen_range(0.05..1.0);
        let rows: Vec<Constraint> = cols
            .iter()
            .map(|a| Constraint::new(a.clone(), dot(a, &x) + rng.gen_range(0.0..0.9) * alpha * dot(a, a)))
            .collect();
        let omega = Polyhedron::new(n, rows.clone()).map_err(|e| e.to_string())?;
        let active = omega.nearly_active(&x, alpha).map_err(|e| e.to_string())?;
        ensure!(active.len() == q, "expected {q} nearly active rows, got {}", active.len());
        let set = fullrank_pss(&x, alpha, &omega, &active).map_err(|e| e.to_string())?;
        ensure!(set.len() == 2 * n, "full-rank set has {} directions, expected {}", set.len(), 2 * n);
        for d in &set.directions {
            let pt: Vec<f64> = x.iter().zip(&d.d).map(|(a, b)| a + b).collect();
            for r in &rows {
                ensure!(dot(&r.a, &pt) <= r.b + 1e-12 * (1.0 + r.b.abs()), "infeasible poll point {pt:?}");
            }
        }
        let formula = q as f64 * k + ((n - q) as f64).sqrt();
        let est = estimate_lambda(&set, &omega).map_err(|e| e.to_string())?;
        ensure!(
            est.lambda <= formula + 1e-6,
            "full-rank case {done}: estimate {} exceeds {formula}",
            est.lambda
        );
        worst_full = worst_full.max(est.lambda - formula);
        done += 1;
    }
    Ok(format!(
        "max(estimate - formula): box {worst_bound:.3e}, full rank {worst_full:.3e}; all 2n poll points feasible"
    ))
}

fn c3_unconstrained_lambda() -> Outcome {
    let mut parts = Vec::new();
    for n in [2usize, 3, 5] {
        let alpha = 0.5;
        let mut dirs = Vec::new();
        for j in 0..n {
            for s in [alpha, -alpha] {
                let mut e = vec![0.0; n];
                e[j] = s;
                dirs.push(e);
            }
        }
        let est = estimate_lambda_dirs(
            &dirs,
            &vec![0.0; n],
            alpha,
            &Polyhedron::unconstrained(n),
            &AuditConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        let r = (n as f64).sqrt();
        ensure!((est.lambda - r).abs() <= 0.02, "n = {n}: estimate {} vs sqrt(n) = {r}", est.lambda);
        parts.push(format!("n={n}: {:.5}", est.lambda));
    }
    Ok(parts.join(", "))
}

fn wedge_values(e1: f64, e2: f64) -> Result<(f64, f64, f64, f64), String> {
    let alpha = 0.5;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let tangent = vec![vec![0.0, -alpha], vec![alpha * s, -alpha * s]];
    let mut d = tangent.clone();
    d.push(vec![-e1, 0.0]);
    d.push(vec![(e2 - e1) / 2.0, (e2 - e1) / 2.0]);
    let mut dp = tangent;
    dp.push(vec![0.0, e2 - e1]);
    dp.push(vec![-e1, e1]);
    let v = [-e1, e2];
    let lp = |dirs: &[Vec<f64>]| -> Result<f64, String> {
        let r = min_l1_decomposition(dirs, &v).map_err(|e| e.to_string())?;
        if r.is_optimal() { Ok(r.value) } else { Err(format!("no decomposition: {:?}", r.status)) }
    };
    // The library's own sets at the same point.
    let omega = Polyhedron::new(
        2,
        vec![Constraint::new(vec![-1.0, 0.0], 0.0), Constraint::new(vec![1.0, 1.0], 1.0)],
    )
    .map_err(|e| e.to_string())?;
    let x = [e1, 1.0 - e2];
    let tn = strategy_pss(&x, alpha, &omega, Strategy::TangentPlusNormal).map_err(|e| e.to_string())?;
    let full = strategy_pss(&x, alpha, &omega, Strategy::FullLambdaPSS).map_err(|e| e.to_string())?;
    Ok((lp(&d)?, lp(&dp)?, lp(&tn.vectors())?, lp(&full.vectors())?))
}

fn c4_wedge_blowup() -> Outcome {
    let (e1, e2) = (1e-3, 2e-3);
    let (d, dp, tn, full) = wedge_values(e1, e2)?;
    let expected = (e1 + e2) / e1 + 2.0 * e2 / (e2 - e1);
    ensure!((d - 7.0).abs() <= 1e-8 && (expected - 7.0).abs() <= 1e-12, "normal-augmented value {d}");
    ensure!((dp - 2.0).abs() <= 1e-8, "negative-tangent value {dp}");
    ensure!((tn - d).abs() <= 1e-8, "TangentPlusNormal set gives {tn}, explicit set {d}");
    ensure!((full - 2.0).abs() <= 1e-8, "FullLambdaPSS set gives {full}");
    let (d2, dp2, tn2, full2) = wedge_values(e1 / 2.0, e2)?;
    ensure!(d2 > d + 0.5 && tn2 > tn + 0.5, "halving eps1 gave {d2} / {tn2}");
    ensure!((dp2 - 2.0).abs() <= 1e-8 && (full2 - 2.0).abs() <= 1e-8, "halving eps1 moved D' to {dp2} / {full2}");
    Ok(format!("normal-augmented {d:.10} -> {d2:.6} after halving eps1; D' {dp:.10} -> {dp2:.10}"))
}

fn membership_disagreements(rows: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let a = DenseMatrix::from_columns(n, rows).map_err(|e| e.to_string())?;
    let cone = tangent_generators_dd(&a);
    let in_halfspaces = |y: &[f64]| rows.iter().all(|r| dot(r, y) <= 1e-9 * norm(r).max(1.0));
    let mut bad = 0;
    for s in 0..1000 {
        let y = if s % 2 == 0 || (cone.generators.is_empty() && cone.lineality.is_empty()) {
            uniform_vec(rng, n, -1.0, 1.0)
        } else {
            let mut y = vec![0.0; n];
            for g in &cone.generators {
                let w = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) };
                y.iter_mut().zip(g).for_each(|(yi, gi)| *yi += w * gi);
            }
            for l in &cone.lineality {
                let w = rng.gen_range(-1.0..1.0);
                y.iter_mut().zip(l).for_each(|(yi, li)| *yi += w * li);
            }
            if s % 4 == 1 {
                // push slightly off the cone along a random direction
                let off = uniform_vec(rng, n, -1e-3, 1e-3);
                y.iter_mut().zip(&off).for_each(|(yi, o)| *yi += o);
            }
            y
        };
        let by_generators = cone_member(&y, &cone).map_err(|e| e.to_string())?;
        if by_generators != in_halfspaces(&y) {
            bad += 1;
        }
    }
    Ok(bad)
}

fn c5_polar_cones() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fig4 = vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![4.0, 1.0], vec![3.0, 4.0]];
    let t = tangent_generators_dd(&DenseMatrix::from_columns(2, &fig4).map_err(|e| e.to_string())?);
    ensure!(t.generators.is_empty() && t.lineality.is_empty(), "degenerate-vertex tangent cone is not {{0}}: {t:?}");
    let mut total = membership_disagreements(&fig4, 2, &mut rng)?;
    for _ in 0..49 {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=6);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        while rows.len() < m {
            let r: Vec<f64> = if rows.len() >= 2 && rng.gen_bool(0.25) {
                let (i, j) = (rng.gen_range(0..rows.len()), rng.gen_range(0..rows.len()));
                rows[i].iter().zip(&rows[j]).map(|(a, b)| a + b).collect()
            } else {
                (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect()
            };
            if norm(&r) > 0.0 {
                rows.push(r);
            }
        }
        total += membership_disagreements(&rows, n, &mut rng)?;
    }
    ensure!(total == 0, "{total} membership disagreements");
    Ok("50 active sets x 1000 samples, 0 disagreements; degenerate vertex gives T = {0}".into())
}

fn c6_complexity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ratio: f64 = 0.0;
    for case in 0..20 {
        let n = 2 + case % 4;
        // random orthonormal basis by Gram-Schmidt
        let mut basis: Vec<Vec<f64>> = Vec::new();
        while basis.len() < n {
            let mut v = uniform_vec(&mut rng, n, -1.0, 1.0);
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
            }
            let nv = norm(&v);
            if nv > 1e-3 {
                basis.push(v.iter().map(|x| x / nv).collect());
            }
        }
        let lam = uniform_vec(&mut rng, n, 0.5, 5.0);
        let mut q = vec![vec![0.0; n]; n];
        for (k, b) in basis.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    q[i][j] += lam[k] * b[i] * b[j];
                }
            }
        }
        let c = uniform_vec(&mut rng, n, -1.0, 1.0);
        let x0 = uniform_vec(&mut rng, n, -2.0, 2.0);
        let lipschitz = lam.iter().cloned().fold(0.0, f64::max);
        let f_low = -0.5 * basis.iter().zip(&lam).map(|(b, l)| dot(b, &c).powi(2) / l).sum::<f64>();
        let (qf, cf) = (q.clone(), c.clone());
        let (qg, cg) = (q, c);
        let p = ProblemInstance::new("quad", Polyhedron::unconstrained(n), x0, move |x| {
            0.5 * qf.iter().zip(x).map(|(row, xi)| xi * dot(row, x)).sum::<f64>() + dot(&cf, x)
        })
        .map_err(|e| e.to_string())?
        .gradient(move |x| qg.iter().zip(&cg).map(|(row, ci)| dot(row, x) + ci).collect());
        let cfg = SolverConfig {
            budget_multiplier: 1_000_000,
            ..SolverConfig::default()
        };
        let chk = empirical_complexity_check(&p, lipschitz, f_low, &cfg, 1e-2).map_err(|e| e.to_string())?;
        let k = chk.observed.ok_or_else(|| format!("case {case}: gradient tolerance never reached"))?;
        ensure!((k as f64) <= chk.bound, "case {case}: {k} iterations exceed bound {}", chk.bound);
        worst_ratio = worst_ratio.max(k as f64 / chk.bound);
    }
    Ok(format!("20 quadratics, max observed/bound = {worst_ratio:.3e}"))
}

fn c7_profiles() -> Outcome {
    let problems = load_corpus(root().join("corpus")).map_err(|e| e.to_string())?;
    ensure!(problems.len() >= 20, "corpus has {} problems", problems.len());
    let res = run_benchmark(&problems, &Strategy::ALL, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let input = res.profile_input();
    let mut parts = Vec::new();
    for tau in [1e-3, 1e-6] {
        let table = input.solved_table(tau);
        let count = |s: Strategy| {
            table
                .iter()
                .filter(|e| e.variant == s.as_str() && e.evals.is_some())
                .count() as i64
        };
        let (t, tn, full) = (
            count(Strategy::TangentOnly),
            count(Strategy::TangentPlusNormal),
            count(Strategy::FullLambdaPSS),
        );
        ensure!(full >= tn && tn >= t - 1, "tau {tau}: full {full}, tn {tn}, t {t}");
        if tau == 1e-6 {
            ensure!(full > t, "tau 1e-6: full {full} does not exceed t {t}");
        }
        parts.push(format!("tau {tau:e}: t {t}, tn {tn}, full {full} of {}", problems.len()));
    }
    Ok(parts.join("; "))
}

fn c8_criticality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let l: f64 = rng.gen_range(-2.0..0.0);
        let u = l + rng.gen_range(0.1..3.0);
        let x = match rng.gen_range(0..4) {
            0 => l,
            1 => u,
            _ => rng.gen_range(l..u),
        };
        let g = rng.gen_range(-3.0..3.0);
        let (dlo, dhi) = ((l - x).max(-1.0), (u - x).min(1.0));
        let oracle = [0.0, -g * dlo, -g * dhi].into_iter().fold(f64::MIN, f64::max);
        let omega = Polyhedron::from_bounds(&[l], &[u]).map_err(|e| e.to_string())?;
        let pi = criticality_pi(&[x], &[g], &omega, 1e-10).map_err(|e| e.to_string())?;
        ensure!((pi.value - oracle).abs() <= 1e-5, "1-D: pi {} vs oracle {oracle}", pi.value);
        worst = worst.max((pi.value - oracle).abs());
    }
    for n in 2..=5 {
        let omega = Polyhedron::from_bounds(&vec![-5.0; n], &vec![5.0; n]).map_err(|e| e.to_string())?;
        let x = uniform_vec(&mut rng, n, -2.0, 2.0);
        let g = uniform_vec(&mut rng, n, -3.0, 3.0);
        let pi = criticality_pi(&x, &g, &omega, 1e-10).map_err(|e| e.to_string())?;
        ensure!((pi.value - norm(&g)).abs() <= 1e-5, "interior: pi {} vs |g| {}", pi.value, norm(&g));
    }
    let problems = load_corpus(root().join("corpus")).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for p in &problems {
        let (Some(xr), Some(grad)) = (&p.x_ref, &p.gradient) else { continue };
        let pi = criticality_pi(xr, &grad(xr), &p.omega, 1e-10).map_err(|e| e.to_string())?;
        ensure!(pi.value <= 1e-5, "{}: pi at the reference point is {}", p.name, pi.value);
        checked += 1;
    }
    ensure!(checked >= 10, "only {checked} problems with reference points");
    Ok(format!("1-D max error {worst:.2e}; interior = |g|; {checked} KKT points with pi <= 1e-5"))
}

fn c9_lp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut counts = [0usize; 3];
    let mut done = 0;
    while done < 100 {
        let p = rng.gen_range(2..=6);
        let m = rng.gen_range(1..p);
        let e: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..p).map(|_| rng.gen_range(-3i32..=3) as f64).collect())
            .collect();
        // full row rank required by the oracle
        if kappa(&e).is_nan() || kappa(&e) > 1e6 {
            continue;
        }
        let r: Vec<f64> = (0..m).map(|_| rng.gen_range(-4i32..=6) as f64).collect();
        let c: Vec<f64> = (0..p).map(|_| rng.gen_range(-2i32..=5) as f64).collect();
        let flat: Vec<f64> = e.iter().flatten().cloned().collect();
        let lp = StandardLP::new(c.clone(), DenseMatrix::new(m, p, flat).map_err(|e| e.to_string())?, r.clone())
            .map_err(|e| e.to_string())?;
        let got = solve_lp(&lp).map_err(|e| e.to_string())?;
        let (status, value) = lp_oracle(&c, &e, &r);
        ensure!(got.status == status, "LP {done}: status {:?} vs oracle {status:?}", got.status);
        if status == LpStatus::Optimal {
            ensure!((got.value - value).abs() <= 1e-8 * (1.0 + value.abs()), "LP {done}: {} vs {value}", got.value);
        }
        counts[status as usize] += 1;
        done += 1;
    }
    Ok(format!(
        "100 LPs agree ({} optimal, {} infeasible, {} unbounded)",
        counts[0], counts[1], counts[2]
    ))
}

fn collect_files(dir: &Path, base: &Path, out: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(dir).expect("results directory") {
        let path = entry.expect("entry").path();
        if path.is_dir() {
            collect_files(&path, base, out);
        } else {
            out.push(path.strip_prefix(base).expect("prefix").to_path_buf());
        }
    }
}

fn c10_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_dspoll");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = root().join("corpus");
    let mut dirs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let st = Command::new(exe)
            .arg("bench")
            .arg(&corpus)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(st.status.success(), "bench failed: {}", String::from_utf8_lossy(&st.stderr));
        let st = Command::new(exe)
            .args(["profiles"])
            .arg(&out)
            .args(["--tau", "1e-3,1e-6", "--split-by-tag"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(st.status.success(), "profiles failed: {}", String::from_utf8_lossy(&st.stderr));
        dirs.push(out);
    }
    let mut files = Vec::new();
    collect_files(&dirs[0], &dirs[0], &mut files);
    files.sort();
    let mut other = Vec::new();
    collect_files(&dirs[1], &dirs[1], &mut other);
    other.sort();
    ensure!(files == other, "different file sets");
    let csvs = files.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")).count();
    for f in &files {
        let a = std::fs::read(dirs[0].join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].join(f)).map_err(|e| e.to_string())?;
        ensure!(a == b, "{} differs", f.display());
    }
    ensure!(csvs > 0, "no CSV output");
    Ok(format!("{} files ({csvs} CSV) byte-identical across two runs", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 10] = [
        ("single upper bound: t stalls, full reaches the bound", c1_upper_bound, Some(1)),
        ("certified Lambda-PSS constructions", c2_certified_constructions, Some(120)),
        ("unconstrained Lambda", c3_unconstrained_lambda, Some(30)),
        ("acute wedge blow-up vs boundedness", c4_wedge_blowup, None),
        ("polar-cone property suite", c5_polar_cones, None),
        ("complexity bound", c6_complexity, Some(60)),
        ("profile ordering on the corpus", c7_profiles, Some(300)),
        ("criticality measure", c8_criticality, None),
        ("LP oracle equivalence", c9_lp_oracle, None),
        ("determinism of bench and profiles", c10_determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(e) => Err(format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            )),
        };
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(secs)) if took > Duration::from_secs(*secs) => {
                Err(format!("took {:.2}s, limit {secs}s", took.as_secs_f64()))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {:2} PASS  {name}: {detail} [{:.2}s]", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {:2} FAIL  {name}: {why} [{:.2}s]", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Dividing-rectangles global search (maximization over a box).

use std::collections::BTreeMap;

/// Relative improvement demanded of a potentially optimal rectangle.
const EPSILON: f64 = 1e-4;

#[derive(Debug, Clone)]
struct Rect {
    center: Vec<f64>,
    levels: Vec<u32>,
    value: f64,
}

impl Rect {
    /// Half-diagonal of the normalized rectangle; depends only on the level multiset.
    fn size(&self) -> f64 {
        let mut l = self.levels.clone();
        l.sort_unstable();
        0.5 * l.iter().map(|&k| 9f64.powi(-(k as i32))).sum::<f64>().sqrt()
    }

    fn size_key(&self) -> Vec<u32> {
        let mut l = self.levels.clone();
        l.sort_unstable();
        l
    }
}

/// A sampled point and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Maximizes `f` over `[lower, upper]` for `max_iter` iterations or until
/// `max_evals` evaluations, returning every sample in evaluation order.
pub fn maximize<F>(mut f: F, lower: &[f64], upper: &[f64], max_iter: usize, max_evals: usize) -> Vec<Sample>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = lower.len();
    let to_box = |c: &[f64]| -> Vec<f64> {
        c.iter()
            .enumerate()
            .map(|(i, &t)| lower[i] + t * (upper[i] - lower[i]))
            .collect()
    };
    let mut samples = Vec::new();
    // Internally minimize -f so the usual lower-hull test applies.
    let mut eval = |c: &[f64], samples: &mut Vec<Sample>| -> f64 {
        let p = to_box(c);
        let v = f(&p);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        samples.push(Sample { point: p, value: v });
        -v
    };
    let center = vec![0.5; n];
    let value = eval(&center, &mut samples);
    let mut rects = vec![Rect {
        center,
        levels: vec![0; n],
        value,
    }];
    if n == 0 {
        return samples;
    }

    for _ in 0..max_iter {
        if samples.len() >= max_evals {
            break;
        }
        let selected = potentially_optimal(&rects);
        for idx in selected {
            if samples.len() >= max_evals {
                break;
            }
            let min_level = *rects[idx].levels.iter().min().expect("n > 0");
            let dims: Vec<usize> = (0..n).filter(|&i| rects[idx].levels[i] == min_level).collect();
            let delta = 3f64.powi(-(min_level as i32 + 1));
            let mut trial = Vec::with_capacity(dims.len());
            for &i in &dims {
                let mut cp = rects[idx].center.clone();
                cp[i] += delta;
                let fp = eval(&cp, &mut samples);
                let mut cm = rects[idx].center.clone();
                cm[i] -= delta;
                let fm = eval(&cm, &mut samples);
                trial.push((fp.min(fm), i, cp, fp, cm, fm));
            }
            trial.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (_, i, cp, fp, cm, fm) in trial {
                rects[idx].levels[i] += 1;
                let levels = rects[idx].levels.clone();
                rects.push(Rect {
                    center: cp,
                    levels: levels.clone(),
                    value: fp,
                });
                rects.push(Rect {
                    center: cm,
                    levels,
                    value: fm,
                });
            }
        }
    }
    samples
}

/// Indices of the potentially optimal rectangles (lower-right convex hull of
/// the best rectangle per size class, with the usual sufficient-improvement test).
fn potentially_optimal(rects: &[Rect]) -> Vec<usize> {
    let mut best: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for (i, r) in rects.iter().enumerate() {
        best.entry(r.size_key())
            .and_modify(|j| {
                if r.value < rects[*j].value {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let mut cands: Vec<(f64, f64, usize)> = best.values().map(|&i| (rects[i].size(), rects[i].value, i)).collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let fmin = rects.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    for (j, &(dj, fj, idx)) in cands.iter().enumerate() {
        let mut k_low = f64::NEG_INFINITY;
        let mut k_high = f64::INFINITY;
        for (i, &(di, fi, _)) in cands.iter().enumerate() {
            if i < j {
                k_low = k_low.max((fj - fi) / (dj - di));
            } else if i > j {
                k_high = k_high.min((fi - fj) / (di - dj));
            }
        }
        if k_low > k_high {
            continue;
        }
        if k_high.is_finite() && fj - k_high * dj > fmin - EPSILON * fmin.abs() {
            continue;
        }
        if fj.is_infinite() {
            continue;
        }
        out.push(idx);
    }
    if out.is_empty() {
        // Always split the largest rectangle so the search keeps exploring.
        if let Some(&(_, _, idx)) = cands.last() {
            out.push(idx);
        }
    }
    out
}

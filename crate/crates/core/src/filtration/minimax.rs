//! Weighted minimax centers: `min_y max_j |x_j - y| / w_j`.
//!
//! The optimal value is the smallest scale `t` at which the closed balls
//! `B(x_j, w_j t)` share a common point, which makes it the Čech entry
//! scale of the vertex set under linear radii.
//!
//! Two solvers are provided. [`solve_exact`] enumerates candidate supports:
//! at the optimum the center lies in the convex hull of an affinely
//! independent set of at most `d + 1` points that are all at the same
//! weighted distance, and for each such set the center is found in closed
//! form from a linear system plus one quadratic. Every candidate center is a
//! feasible point, so the minimum over candidates is the optimum.
//! [`solve_projected_gradient`] maximizes the concave dual over the simplex of
//! hull coordinates and stops on a certified duality gap.

use crate::error::{Error, Result};
use crate::geometry::distance;

/// Beyond this many candidate supports `solve` switches to the iterative method.
pub const EXACT_SUPPORT_BUDGET: usize = 250_000;

pub const MAX_ITERATIONS: usize = 10_000;

/// Relative duality gap at which the iterative solver stops.
pub const GAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution {
    pub center: Vec<f64>,
    /// `max_j |x_j - center| / w_j`
    pub value: f64,
}

/// Weighted distance of the farthest point from `y`.
pub fn objective(points: &[&[f64]], weights: &[f64], y: &[f64]) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(x, w)| distance(x, y) / w)
        .fold(0.0, f64::max)
}

/// Exact solver when the support enumeration is affordable, iterative otherwise.
pub fn solve(points: &[&[f64]], weights: &[f64]) -> Result<MinimaxSolution> {
    let d = points.first().map_or(0, |p| p.len());
    if support_count(points.len(), d + 1) <= EXACT_SUPPORT_BUDGET {
        Ok(solve_exact(points, weights))
    } else {
        solve_projected_gradient(points, weights)
    }
}

fn support_count(n: usize, max_size: usize) -> usize {
    let mut total = 0usize;
    let mut binom = 1usize;
    for k in 1..=max_size.min(n) {
        binom = binom.saturating_mul(n + 1 - k) / k;
        total = total.saturating_add(binom);
    }
    total
}

pub fn solve_exact(points: &[&[f64]], weights: &[f64]) -> MinimaxSolution {
    assert_eq!(points.len(), weights.len());
    assert!(!points.is_empty(), "minimax of an empty set");
    let d = points[0].len();
    let mut best = MinimaxSolution {
        center: points[0].to_vec(),
        value: objective(points, weights, points[0]),
    };
    let max_support = (d + 1).min(points.len());
    let mut support = Vec::with_capacity(max_support);
    for size in 1..=max_support {
        for_each_subset(points.len(), size, &mut support, &mut |subset| {
            for center in support_centers(points, weights, subset) {
                let value = objective(points, weights, &center);
                if value < best.value {
                    best = MinimaxSolution { center, value };
                }
            }
        });
    }
    best
}

fn for_each_subset(n: usize, size: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn rec(
        start: usize,
        n: usize,
        size: usize,
        buf: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if buf.len() == size {
            f(buf);
            return;
        }
        for i in start..=(n - (size - buf.len())) {
            buf.push(i);
            rec(i + 1, n, size, buf, f);
            buf.pop();
        }
    }
    buf.clear();
    rec(0, n, size, buf, f);
}

/// Points `y` in the affine hull of `subset` with `|y - x_j| / w_j` equal
/// across the subset. At most two.
fn support_centers(points: &[&[f64]], weights: &[f64], subset: &[usize]) -> Vec<Vec<f64>> {
    let x0 = points[subset[0]];
    let w0 = weights[subset[0]];
    let k = subset.len() - 1;
    if k == 0 {
        return vec![x0.to_vec()];
    }
    let edges: Vec<Vec<f64>> = subset[1..]
        .iter()
        .map(|&j| points[j].iter().zip(x0).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram: Vec<Vec<f64>> = edges
        .iter()
        .map(|a| edges.iter().map(|b| dot(a, b)).collect())
        .collect();
    // Subtracting the j-th equidistance equation from the 0-th leaves
    // G a = (|e_j|^2 - T (w_j^2 - w_0^2)) / 2, with T the squared scale.
    let rhs_const: Vec<f64> = (0..k).map(|j| gram[j][j] / 2.0).collect();
    let rhs_scale: Vec<f64> = subset[1..]
        .iter()
        .map(|&j| (weights[j] * weights[j] - w0 * w0) / 2.0)
        .collect();
    let Some(p) = solve_linear(&gram, &rhs_const) else {
        return Vec::new();
    };
    let Some(q) = solve_linear(&gram, &rhs_scale) else {
        return Vec::new();
    };
    // a(T) = p - T q must also satisfy a^T G a = T w0^2.
    let quad = |u: &[f64], v: &[f64]| {
        let gv: Vec<f64> = gram.iter().map(|row| dot(row, v)).collect();
        dot(u, &gv)
    };
    let a2 = quad(&q, &q);
    let a1 = -(2.0 * quad(&p, &q) + w0 * w0);
    let a0 = quad(&p, &p);
    let mut roots = Vec::with_capacity(2);
    let scale = a1.abs().max(a0.abs()).max(a2.abs());
    if a2.abs() <= 1e-14 * scale {
        if a1 != 0.0 {
            roots.push(-a0 / a1);
        }
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc >= 0.0 {
            // numerically stable pair
            let sq = disc.sqrt();
            let qq = -0.5 * (a1 + a1.signum() * sq);
            if qq != 0.0 {
                roots.push(qq / a2);
                roots.push(a0 / qq);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t >= 0.0)
        .map(|t| {
            let mut y = x0.to_vec();
            for (j, e) in edges.iter().enumerate() {
                let alpha = p[j] - t * q[j];
                for (yk, ek) in y.iter_mut().zip(e) {
                    *yk += alpha * ek;
                }
            }
            y
        })
        .collect()
}

/// Gaussian elimination with partial pivoting. `None` when the system is
/// numerically singular.
fn solve_linear(matrix: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    let norm = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * norm {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *x -= factor * p;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Projected gradient ascent on the dual of `min_y max_j |x_j - y|^2 / w_j^2`.
///
/// For multipliers `mu` on the simplex the inner minimizer is the weighted
/// mean `y(mu) = sum mu_j x_j / w_j^2 / sum mu_j / w_j^2`, a point of the
/// convex hull, and the dual value is a lower bound on the squared optimum.
/// Steps shrink like `c / sqrt(k)`; the run stops once the primal value at
/// `y(mu)` is within [`GAP_TOLERANCE`] of the dual bound.
pub fn solve_projected_gradient(points: &[&[f64]], weights: &[f64]) -> Result<MinimaxSolution> {
    assert_eq!(points.len(), weights.len());
    assert!(!points.is_empty(), "minimax of an empty set");
    let n = points.len();
    let d = points[0].len();
    let inv_w2: Vec<f64> = weights.iter().map(|w| 1.0 / (w * w)).collect();
    let mut mu = vec![1.0 / n as f64; n];
    let mut best_primal = f64::INFINITY;
    let mut best_center = points[0].to_vec();
    let mut best_dual = 0.0f64;

    let center_of = |mu: &[f64]| {
        let mut y = vec![0.0; d];
        let mut total = 0.0;
        for j in 0..n {
            let c = mu[j] * inv_w2[j];
            total += c;
            for k in 0..d {
                y[k] += c * points[j][k];
            }
        }
        y.iter_mut().for_each(|v| *v /= total);
        y
    };

    let sq_terms = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let dd = distance(points[j], y);
                dd * dd * inv_w2[j]
            })
            .collect()
    };

    let spread = {
        let y = center_of(&mu);
        sq_terms(&y)
            .into_iter()
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    };
    let step0 = 1.0 / spread;

    for k in 1..=MAX_ITERATIONS {
        let y = center_of(&mu);
        let terms = sq_terms(&y);
        let primal = terms.iter().copied().fold(0.0, f64::max);
        let dual: f64 = mu.iter().zip(&terms).map(|(m, t)| m * t).sum();
        if primal < best_primal {
            best_primal = primal;
            best_center = y;
        }
        best_dual = best_dual.max(dual);
        if best_primal - best_dual <= GAP_TOLERANCE * best_primal.max(f64::MIN_POSITIVE) {
            return Ok(MinimaxSolution {
                value: objective(points, weights, &best_center),
                center: best_center,
            });
        }
        let step = step0 / (k as f64).sqrt();
        let moved: Vec<f64> = mu.iter().zip(&terms).map(|(m, t)| m + step * t).collect();
        mu = project_to_simplex(&moved);
    }
    Err(Error::SolverFailure {
        iterations: MAX_ITERATIONS,
        residual: best_primal.sqrt() - best_dual.max(0.0).sqrt(),
    })
}

/// Euclidean projection onto `{mu >= 0, sum mu = 1}`.
fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

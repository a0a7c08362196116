//! Entry functions, the stability bound for weighted clouds, and the
//! bottleneck distance between persistence diagrams.

use crate::error::{Error, Result};
use crate::filtration::{build_weighted_cech, FiltrationParams};
use crate::geometry::{distance, PointCloud, RadiusFunction, Region};
use crate::persistence::{compute_diagram, DiagramPoint, PersistenceDiagram};

/// Sample count on `[0, diam K]` when a sup has no closed form.
pub const DEFAULT_INTERVAL_GRID: usize = 1024;

/// Sample count per axis of `K`.
pub const DEFAULT_REGION_GRID: usize = 64;

/// `f(y) = min_x r_x^{-1}(d(y, x))`: the scale at which `y` is first covered.
pub fn entry_function(cloud: &PointCloud, radii: &[RadiusFunction], y: &[f64]) -> f64 {
    cloud
        .points()
        .iter()
        .zip(radii)
        .map(|(x, r)| r.inverse_clamped(distance(x, y)))
        .fold(f64::INFINITY, f64::min)
}

/// A relation `η ⊆ X × Y` in which every point of either side takes part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pairs: Vec<(usize, usize)>,
}

impl Relation {
    pub fn new(pairs: Vec<(usize, usize)>, x_len: usize, y_len: usize) -> Result<Self> {
        let mut seen_x = vec![false; x_len];
        let mut seen_y = vec![false; y_len];
        for &(i, j) in &pairs {
            if i >= x_len || j >= y_len {
                return Err(Error::InvalidRelation(format!(
                    "pair ({i}, {j}) out of bounds for sizes ({x_len}, {y_len})"
                )));
            }
            seen_x[i] = true;
            seen_y[j] = true;
        }
        if let Some(i) = seen_x.iter().position(|s| !s) {
            return Err(Error::InvalidRelation(format!(
                "point {i} of X is unrelated"
            )));
        }
        if let Some(j) = seen_y.iter().position(|s| !s) {
            return Err(Error::InvalidRelation(format!(
                "point {j} of Y is unrelated"
            )));
        }
        Ok(Relation { pairs })
    }

    pub fn identity(n: usize) -> Self {
        Relation {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    /// Each point related to its nearest neighbour on the other side.
    pub fn nearest_neighbor(x: &PointCloud, y: &PointCloud) -> Result<Self> {
        let nearest = |p: &[f64], other: &PointCloud| {
            (0..other.len()).min_by(|&a, &b| {
                distance(p, other.point(a)).total_cmp(&distance(p, other.point(b)))
            })
        };
        let mut pairs = Vec::with_capacity(x.len() + y.len());
        for i in 0..x.len() {
            if let Some(j) = nearest(x.point(i), y) {
                pairs.push((i, j));
            }
        }
        for j in 0..y.len() {
            if let Some(i) = nearest(y.point(j), x) {
                pairs.push((i, j));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Self::new(pairs, x.len(), y.len())
    }

    /// Identity when the clouds have equal size, nearest neighbours otherwise.
    pub fn default_for(x: &PointCloud, y: &PointCloud) -> Result<Self> {
        if x.len() == y.len() {
            Ok(Self::identity(x.len()))
        } else {
            Self::nearest_neighbor(x, y)
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `max d(x, y)` over related pairs.
    pub fn norm(&self, x: &PointCloud, y: &PointCloud) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j)| distance(x.point(i), y.point(j)))
            .fold(0.0, f64::max)
    }
}

/// Largest `|f_{X,r}(g) - f_{Y,s}(g)|` over the grid points `g` of `K`.
///
/// A lower bound on the sup over all of `K`.
pub fn entry_sup_distance(
    x: &PointCloud,
    r: &[RadiusFunction],
    y: &PointCloud,
    s: &[RadiusFunction],
    region: &Region,
) -> Result<f64> {
    check_region(x, y, region)?;
    Ok(region
        .grid_points()
        .map(|g| (entry_function(x, r, &g) - entry_function(y, s, &g)).abs())
        .fold(0.0, f64::max))
}

fn check_region(x: &PointCloud, y: &PointCloud, region: &Region) -> Result<()> {
    for p in x.points().iter().chain(y.points()) {
        if !region.contains(p) {
            return Err(Error::InvalidRegion(format!("point {p:?} lies outside K")));
        }
    }
    Ok(())
}

/// `sup_{u in [0, upper]} |r^{-1}(u) - s^{-1}(u)|`.
///
/// Closed form for two linear functions, a uniform grid of `samples` points
/// otherwise.
pub fn inverse_sup_distance(
    r: &RadiusFunction,
    s: &RadiusFunction,
    upper: f64,
    samples: usize,
) -> f64 {
    if let (RadiusFunction::Linear { w: a }, RadiusFunction::Linear { w: b }) = (r, s) {
        return upper * (1.0 / a - 1.0 / b).abs();
    }
    inverse_sup_distance_grid(r, s, upper, samples)
}

pub fn inverse_sup_distance_grid(
    r: &RadiusFunction,
    s: &RadiusFunction,
    upper: f64,
    samples: usize,
) -> f64 {
    let samples = samples.max(2);
    (0..samples)
        .map(|k| {
            let u = upper * k as f64 / (samples - 1) as f64;
            (r.inverse_clamped(u) - s.inverse_clamped(u)).abs()
        })
        .fold(0.0, f64::max)
}

/// The terms of `D(r, s) + |η| max(S(r), S(s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBound {
    /// Largest sup-distance between related inverse radius functions on `[0, diam K]`.
    pub radius_distance: f64,
    pub s_r: f64,
    pub s_s: f64,
    pub eta_norm: f64,
    pub total: f64,
}

impl StabilityBound {
    fn new(radius_distance: f64, s_r: f64, s_s: f64, eta_norm: f64) -> Self {
        let slope = s_r.max(s_s);
        // 0 * inf is taken as 0: with no displacement the slope never matters
        let displacement = if eta_norm == 0.0 {
            0.0
        } else {
            eta_norm * slope
        };
        StabilityBound {
            radius_distance,
            s_r,
            s_s,
            eta_norm,
            total: radius_distance + displacement,
        }
    }
}

pub fn stability_bound(
    x: &PointCloud,
    r: &[RadiusFunction],
    y: &PointCloud,
    s: &[RadiusFunction],
    eta: &Relation,
    region: &Region,
) -> Result<StabilityBound> {
    stability_bound_with_grid(x, r, y, s, eta, region, DEFAULT_INTERVAL_GRID)
}

pub fn stability_bound_with_grid(
    x: &PointCloud,
    r: &[RadiusFunction],
    y: &PointCloud,
    s: &[RadiusFunction],
    eta: &Relation,
    region: &Region,
    samples: usize,
) -> Result<StabilityBound> {
    if r.len() != x.len() || s.len() != y.len() {
        return Err(Error::InvalidParameter(
            "one radius function per point is required".into(),
        ));
    }
    Relation::new(eta.pairs.clone(), x.len(), y.len())?;
    check_region(x, y, region)?;
    let diam = region.diam();
    let radius_distance = eta
        .pairs
        .iter()
        .map(|&(i, j)| inverse_sup_distance(&r[i], &s[j], diam, samples))
        .fold(0.0, f64::max);
    let slope = |radii: &[RadiusFunction]| {
        radii
            .iter()
            .map(|f| f.sup_inverse_derivative(diam))
            .fold(0.0, f64::max)
    };
    Ok(StabilityBound::new(
        radius_distance,
        slope(r),
        slope(s),
        eta.norm(x, y),
    ))
}

/// Bound for clouds whose points move under the bijection `i -> i` while each
/// point keeps its radius function: `max_i d(x_i, y_i) * sup |(r_i^{-1})'|`.
pub fn point_perturbation_bound(
    x: &PointCloud,
    y: &PointCloud,
    radii: &[RadiusFunction],
    region: &Region,
) -> Result<f64> {
    if x.len() != y.len() || radii.len() != x.len() {
        return Err(Error::InvalidParameter(
            "point perturbation needs equal sizes and one radius per point".into(),
        ));
    }
    check_region(x, y, region)?;
    let diam = region.diam();
    Ok((0..x.len())
        .map(|i| {
            let moved = distance(x.point(i), y.point(i));
            if moved == 0.0 {
                0.0
            } else {
                moved * radii[i].sup_inverse_derivative(diam)
            }
        })
        .fold(0.0, f64::max))
}

/// Bound for a fixed cloud whose radius functions change from `r` to `s`:
/// `max_i sup_{[0, diam K]} |r_i^{-1} - s_i^{-1}|`.
pub fn radius_perturbation_bound(
    x: &PointCloud,
    r: &[RadiusFunction],
    s: &[RadiusFunction],
    region: &Region,
    samples: usize,
) -> Result<f64> {
    if r.len() != x.len() || s.len() != x.len() {
        return Err(Error::InvalidParameter(
            "one radius function per point is required".into(),
        ));
    }
    check_region(x, x, region)?;
    let diam = region.diam();
    Ok(r.iter()
        .zip(s)
        .map(|(a, b)| inverse_sup_distance(a, b, diam, samples))
        .fold(0.0, f64::max))
}

/// Bottleneck distance between the dimension-`dim` parts of two diagrams.
///
/// Essential points are matched among themselves by sorted birth; unequal
/// essential counts give `+inf`. Finite points are matched exactly by a
/// binary search over candidate costs with a perfect-matching test.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> f64 {
    let split = |d: &PersistenceDiagram| {
        let (mut essential, mut finite) = (Vec::new(), Vec::new());
        for p in d.in_dim(dim) {
            if p.is_essential() {
                essential.push(p.birth);
            } else {
                finite.push(*p);
            }
        }
        essential.sort_by(f64::total_cmp);
        (essential, finite)
    };
    let (ea, fa) = split(a);
    let (eb, fb) = split(b);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let essential = ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    essential.max(finite_bottleneck(&fa, &fb))
}

fn linf(p: &DiagramPoint, q: &DiagramPoint) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

fn diagonal_cost(p: &DiagramPoint) -> f64 {
    (p.death - p.birth) / 2.0
}

fn finite_bottleneck(a: &[DiagramPoint], b: &[DiagramPoint]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates = vec![0.0];
    candidates.extend(a.iter().map(diagonal_cost));
    candidates.extend(b.iter().map(diagonal_cost));
    for p in a {
        for q in b {
            candidates.push(linf(p, q));
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // the largest candidate is always feasible: everything can go to the diagonal
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_exists(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Left side: points of `a`, then diagonal copies of `b`. Right side: points
/// of `b`, then diagonal copies of `a`.
fn perfect_matching_exists(a: &[DiagramPoint], b: &[DiagramPoint], eps: f64) -> bool {
    let (m, n) = (a.len(), b.len());
    let size = m + n;
    let adjacency: Vec<Vec<usize>> = (0..size)
        .map(|left| {
            if left < m {
                let p = &a[left];
                let mut adj: Vec<usize> = (0..n).filter(|&j| linf(p, &b[j]) <= eps).collect();
                if diagonal_cost(p) <= eps {
                    adj.push(n + left);
                }
                adj
            } else {
                let j = left - m;
                let mut adj = Vec::new();
                if diagonal_cost(&b[j]) <= eps {
                    adj.push(j);
                }
                adj.extend(n..n + m);
                adj
            }
        })
        .collect();
    maximum_matching(&adjacency, size) == size
}

/// Hopcroft-Karp on a bipartite graph given by left-side adjacency lists.
fn maximum_matching(adjacency: &[Vec<usize>], right_len: usize) -> usize {
    const NIL: usize = usize::MAX;
    let left_len = adjacency.len();
    let mut match_left = vec![NIL; left_len];
    let mut match_right = vec![NIL; right_len];
    let mut layer = vec![0usize; left_len];
    let mut matched = 0;

    loop {
        // BFS from free left vertices
        let mut queue = std::collections::VecDeque::new();
        for u in 0..left_len {
            if match_left[u] == NIL {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                let w = match_right[v];
                if w == NIL {
                    found = true;
                } else if layer[w] == usize::MAX {
                    layer[w] = layer[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matched;
        }

        fn augment(
            u: usize,
            adjacency: &[Vec<usize>],
            layer: &mut [usize],
            match_left: &mut [usize],
            match_right: &mut [usize],
        ) -> bool {
            for &v in &adjacency[u] {
                let w = match_right[v];
                if w == usize::MAX
                    || (layer[w] == layer[u] + 1
                        && augment(w, adjacency, layer, match_left, match_right))
                {
                    match_left[u] = v;
                    match_right[v] = u;
                    return true;
                }
            }
            layer[u] = usize::MAX;
            false
        }

        for u in 0..left_len {
            if match_left[u] == NIL
                && augment(u, adjacency, &mut layer, &mut match_left, &mut match_right)
            {
                matched += 1;
            }
        }
    }
}

/// Per-dimension outcome of a diagram stability check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionCheck {
    pub dim: usize,
    pub bottleneck: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramStabilityReport {
    pub bound: StabilityBound,
    pub dims: Vec<DimensionCheck>,
}

impl DiagramStabilityReport {
    pub fn holds(&self) -> bool {
        self.dims.iter().all(|c| c.holds)
    }
}

/// Slack allowed on `d_B <= bound` for rounding in the filtration scales.
pub const DIAGRAM_STABILITY_TOLERANCE: f64 = 1e-9;

/// Compares the Čech diagrams of two linearly weighted clouds, dimension by
/// dimension, against the stability bound.
pub fn verify_diagram_stability(
    x: &PointCloud,
    y: &PointCloud,
    eta: &Relation,
    region: &Region,
    max_dim: usize,
) -> Result<DiagramStabilityReport> {
    let (r, s) = (x.linear_radii(), y.linear_radii());
    let bound = stability_bound(x, &r, y, &s, eta, region)?;
    let params = FiltrationParams::new(max_dim + 1, f64::INFINITY);
    let da = compute_diagram(&build_weighted_cech(x, &params)?)?;
    let db = compute_diagram(&build_weighted_cech(y, &params)?)?;
    let dims = (0..=max_dim)
        .map(|dim| {
            let bottleneck = bottleneck_distance(&da, &db, dim);
            DimensionCheck {
                dim,
                bottleneck,
                bound: bound.total,
                holds: bottleneck <= bound.total + DIAGRAM_STABILITY_TOLERANCE,
            }
        })
        .collect();
    Ok(DiagramStabilityReport { bound, dims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dgm(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(
            points
                .iter()
                .map(|&(b, d)| DiagramPoint::new(0, b, d))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn entry_function_examples() {
        let origin = PointCloud::unweighted(vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            entry_function(&origin, &origin.linear_radii(), &[3.0, 4.0]),
            5.0
        );
        let c = PointCloud::new(vec![vec![1.0, 2.0], vec![5.0, 0.0]], vec![0.3, 2.0]).unwrap();
        assert_eq!(entry_function(&c, &c.linear_radii(), &[5.0, 0.0]), 0.0);
    }

    #[test]
    fn entry_function_is_ball_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts = (0..6).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let w = (0..6).map(|_| rng.gen_range(0.2..5.0)).collect();
        let c = PointCloud::new(pts, w).unwrap();
        let radii = c.linear_radii();
        let covered =
            |y: &[f64], t: f64| (0..c.len()).any(|i| distance(y, c.point(i)) <= c.weight(i) * t);
        for _ in 0..100 {
            let y = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)];
            let f = entry_function(&c, &radii, &y);
            assert!(covered(&y, f + 1e-9));
            assert!(!covered(&y, f - 1e-9));
        }
    }

    #[test]
    fn entry_function_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = (0..5).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let w = (0..5).map(|_| rng.gen_range(0.2..5.0)).collect();
        let c = PointCloud::new(pts, w).unwrap();
        let radii = c.linear_radii();
        let slope = radii
            .iter()
            .map(|r| r.sup_inverse_derivative(10.0))
            .fold(0.0, f64::max);
        for _ in 0..200 {
            let a = [rng.gen(), rng.gen()];
            let b = [rng.gen(), rng.gen()];
            let diff = (entry_function(&c, &radii, &a) - entry_function(&c, &radii, &b)).abs();
            assert!(diff <= distance(&a, &b) * slope + 1e-12);
        }
    }

    #[test]
    fn sup_distance_of_identical_inputs() {
        let c = PointCloud::new(vec![vec![0.2, 0.2], vec![0.8, 0.5]], vec![1.0, 2.0]).unwrap();
        let k = Region::bounding(&[&c], 0.1, 16).unwrap();
        let r = c.linear_radii();
        assert_eq!(entry_sup_distance(&c, &r, &c, &r, &k).unwrap(), 0.0);
        let b = stability_bound(&c, &r, &c, &r, &Relation::identity(2), &k).unwrap();
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn shifted_point_on_a_line() {
        let eps = 0.25;
        let x = PointCloud::unweighted(vec![vec![0.0]]).unwrap();
        let y = PointCloud::unweighted(vec![vec![eps]]).unwrap();
        let k = Region::new(vec![-1.0], vec![1.0], vec![9]).unwrap();
        let sup = entry_sup_distance(&x, &x.linear_radii(), &y, &y.linear_radii(), &k).unwrap();
        assert!((sup - eps).abs() < 1e-15);
    }

    #[test]
    fn region_must_contain_clouds() {
        let x = PointCloud::unweighted(vec![vec![5.0]]).unwrap();
        let k = Region::new(vec![-1.0], vec![1.0], vec![9]).unwrap();
        let r = x.linear_radii();
        assert!(entry_sup_distance(&x, &r, &x, &r, &k).is_err());
    }

    #[test]
    fn relation_covering() {
        assert!(Relation::new(vec![(0, 0)], 2, 1).is_err());
        assert!(Relation::new(vec![(0, 0), (1, 0)], 2, 1).is_ok());
        assert!(Relation::new(vec![(0, 3)], 1, 1).is_err());
        let x = PointCloud::unweighted(vec![vec![0.0], vec![10.0]]).unwrap();
        let y = PointCloud::unweighted(vec![vec![0.1], vec![9.0], vec![11.0]]).unwrap();
        let eta = Relation::default_for(&x, &y).unwrap();
        assert_eq!(eta.pairs(), &[(0, 0), (1, 1), (1, 2)]);
        assert_eq!(eta.norm(&x, &y), 1.0);
    }

    #[test]
    fn linear_closed_form_matches_grid() {
        let r = RadiusFunction::linear(0.7).unwrap();
        let s = RadiusFunction::linear(1.9).unwrap();
        let closed = inverse_sup_distance(&r, &s, 3.0, 1024);
        let grid = inverse_sup_distance_grid(&r, &s, 3.0, 1024);
        assert!((closed - grid).abs() < 1e-9);
    }

    #[test]
    fn power_law_slope_is_unbounded_above_one() {
        let f = RadiusFunction::power_law(1.0, 2.0).unwrap();
        assert_eq!(f.sup_inverse_derivative(2.0), f64::INFINITY);
        let g = RadiusFunction::power_law(1.0, 0.5).unwrap();
        assert!((g.sup_inverse_derivative(2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bottleneck_examples() {
        let a = dgm(&[(0.0, 2.0)]);
        assert_eq!(bottleneck_distance(&a, &a, 0), 0.0);
        assert_eq!(bottleneck_distance(&a, &dgm(&[]), 0), 1.0);
        assert_eq!(
            bottleneck_distance(&dgm(&[(0.0, 4.0)]), &dgm(&[(1.0, 5.0)]), 0),
            1.0
        );
        assert_eq!(bottleneck_distance(&dgm(&[]), &dgm(&[]), 0), 0.0);
    }

    #[test]
    fn bottleneck_essential_classes() {
        let a = dgm(&[(0.0, f64::INFINITY), (0.0, 1.0)]);
        let b = dgm(&[(0.5, f64::INFINITY), (0.0, 1.0)]);
        assert_eq!(bottleneck_distance(&a, &b, 0), 0.5);
        let c = dgm(&[(0.0, 1.0)]);
        assert_eq!(bottleneck_distance(&a, &c, 0), f64::INFINITY);
    }

    #[test]
    fn bottleneck_ignores_diagonal_points() {
        let a = dgm(&[(0.0, 3.0), (1.0, 2.0)]);
        let b = dgm(&[(0.0, 3.0), (1.0, 2.0), (1.5, 1.5)]);
        assert_eq!(bottleneck_distance(&a, &b, 0), 0.0);
    }

    #[test]
    fn bottleneck_only_reads_requested_dimension() {
        let a = PersistenceDiagram::new(vec![
            DiagramPoint::new(0, 0.0, 1.0),
            DiagramPoint::new(1, 0.0, 10.0),
        ])
        .unwrap();
        let b = dgm(&[(0.0, 1.0)]);
        assert_eq!(bottleneck_distance(&a, &b, 0), 0.0);
        assert_eq!(bottleneck_distance(&a, &b, 1), 5.0);
    }

    #[test]
    fn corollary_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let pts: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..2.0)).collect();
        let x = PointCloud::new(pts.clone(), w.clone()).unwrap();
        // points move, radii stay
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                vec![
                    p[0] + rng.gen_range(-0.05..0.05),
                    p[1] + rng.gen_range(-0.05..0.05),
                ]
            })
            .collect();
        let y = PointCloud::new(moved, w.clone()).unwrap();
        let k = Region::bounding(&[&x, &y], 0.0, 8).unwrap();
        let b = stability_bound(
            &x,
            &x.linear_radii(),
            &y,
            &y.linear_radii(),
            &Relation::identity(5),
            &k,
        )
        .unwrap();
        assert_eq!(b.radius_distance, 0.0);
        let expected = (0..5)
            .map(|i| distance(x.point(i), y.point(i)) / w[i])
            .fold(0.0, f64::max);
        // max_x d(x, m(x)) * max_x 1/w_x dominates the per-point product
        assert!(expected <= b.total + 1e-15);
        assert_eq!(b.total, b.eta_norm * b.s_r.max(b.s_s));
        let special = point_perturbation_bound(&x, &y, &x.linear_radii(), &k).unwrap();
        assert!((special - expected).abs() < 1e-15);

        // radii change, points stay
        let s: Vec<RadiusFunction> = w
            .iter()
            .map(|wi| RadiusFunction::linear(wi * 1.05).unwrap())
            .collect();
        let k = Region::bounding(&[&x], 0.0, 8).unwrap();
        let b = stability_bound(&x, &x.linear_radii(), &x, &s, &Relation::identity(5), &k).unwrap();
        assert_eq!(b.eta_norm, 0.0);
        let special = radius_perturbation_bound(&x, &x.linear_radii(), &s, &k, 1024).unwrap();
        assert_eq!(b.total, special);
        let closed = (0..5)
            .map(|i| k.diam() * (1.0 / w[i] - 1.0 / (w[i] * 1.05)).abs())
            .fold(0.0, f64::max);
        assert_eq!(special, closed);
    }

    #[test]
    fn stability_bound_dominates_grid_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen(), rng.gen()]).collect();
            let radii: Vec<RadiusFunction> = (0..n)
                .map(|_| {
                    RadiusFunction::power_law(rng.gen_range(0.5..2.0), rng.gen_range(0.4..1.0))
                        .unwrap()
                })
                .collect();
            let x = PointCloud::unweighted(pts.clone()).unwrap();
            let y = PointCloud::unweighted(
                pts.iter()
                    .map(|p| {
                        vec![
                            p[0] + rng.gen_range(-0.05..0.05),
                            p[1] + rng.gen_range(-0.05..0.05),
                        ]
                    })
                    .collect(),
            )
            .unwrap();
            let s: Vec<RadiusFunction> = radii
                .iter()
                .map(|r| match *r {
                    RadiusFunction::PowerLaw { w, p } => {
                        RadiusFunction::PowerLaw { w: w * 1.05, p }
                    }
                    other => other,
                })
                .collect();
            let k = Region::bounding(&[&x, &y], 0.0, 24).unwrap();
            let sup = entry_sup_distance(&x, &radii, &y, &s, &k).unwrap();
            let bound = stability_bound(&x, &radii, &y, &s, &Relation::identity(n), &k).unwrap();
            assert!(sup <= bound.total, "{sup} > {}", bound.total);
        }
    }
}

//! Weighted Vietoris-Rips and weighted Čech filtrations.

pub mod minimax;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance, PointCloud, RadiusFunction};

pub const DEFAULT_SIMPLEX_CAP: usize = 10_000_000;

/// Absolute tolerance on `t` for the bisection in [`edge_entry_time`].
pub const BISECTION_TOLERANCE: f64 = 1e-10;

/// A set of point indices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter(
                "a simplex needs at least one vertex".into(),
            ));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "repeated vertex in simplex {vertices:?}"
            )));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, the `i`-th omitting vertex `i`.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Rips,
    Cech,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationEntry {
    pub simplex: Simplex,
    pub scale: f64,
}

/// Filtration order: scale, then dimension, then vertex list.
fn entry_order(a: &FiltrationEntry, b: &FiltrationEntry) -> Ordering {
    a.scale
        .total_cmp(&b.scale)
        .then_with(|| a.simplex.dim().cmp(&b.simplex.dim()))
        .then_with(|| a.simplex.cmp(&b.simplex))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    entries: Vec<FiltrationEntry>,
    max_dim: usize,
    t_max: f64,
    flavor: Flavor,
}

impl Filtration {
    /// Sorts the entries and checks the filtration invariants.
    pub fn from_entries(
        mut entries: Vec<FiltrationEntry>,
        max_dim: usize,
        t_max: f64,
        flavor: Flavor,
    ) -> Result<Self> {
        entries.sort_by(entry_order);
        let filt = Filtration {
            entries,
            max_dim,
            t_max,
            flavor,
        };
        filt.check()?;
        Ok(filt)
    }

    pub fn entries(&self) -> &[FiltrationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn scale(&self, index: usize) -> f64 {
        self.entries[index].scale
    }

    pub fn simplex(&self, index: usize) -> &Simplex {
        &self.entries[index].simplex
    }

    /// Position of every simplex in filtration order.
    pub fn index(&self) -> HashMap<&Simplex, usize> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (&e.simplex, i))
            .collect()
    }

    /// Entry scale of `simplex`, if present.
    pub fn scale_of(&self, simplex: &Simplex) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| &e.simplex == simplex)
            .map(|e| e.scale)
    }

    /// Simplices present at scale `t` (inclusive).
    pub fn prefix_at(&self, t: f64) -> &[FiltrationEntry] {
        let end = self.entries.partition_point(|e| e.scale <= t);
        &self.entries[..end]
    }

    /// Verifies ordering, the face-before-coface property, and the scale cap.
    pub fn check(&self) -> Result<()> {
        let index = self.index();
        if index.len() != self.entries.len() {
            return Err(Error::InvalidParameter(
                "duplicate simplex in filtration".into(),
            ));
        }
        for (pos, e) in self.entries.iter().enumerate() {
            if !(e.scale >= 0.0) || e.scale > self.t_max {
                return Err(Error::InvalidParameter(format!(
                    "simplex {} has scale {} outside [0, {}]",
                    e.simplex, e.scale, self.t_max
                )));
            }
            if e.simplex.dim() > self.max_dim {
                return Err(Error::InvalidParameter(format!(
                    "simplex {} exceeds max_dim {}",
                    e.simplex, self.max_dim
                )));
            }
            if pos > 0 && entry_order(&self.entries[pos - 1], e) != Ordering::Less {
                return Err(Error::InvalidParameter("entries are not sorted".into()));
            }
            for face in e.simplex.facets() {
                match index.get(&face) {
                    Some(&fp) if fp < pos && self.entries[fp].scale <= e.scale => {}
                    _ => {
                        return Err(Error::MissingFace {
                            simplex: e.simplex.vertices().to_vec(),
                            face: face.vertices().to_vec(),
                        })
                    }
                }
            }
        }
        Ok(())
    }
}

/// Construction limits shared by the Rips and Čech builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationParams {
    pub max_dim: usize,
    /// Simplices entering strictly after `t_max` are dropped; equality is kept.
    pub t_max: f64,
    pub simplex_cap: usize,
}

impl Default for FiltrationParams {
    fn default() -> Self {
        FiltrationParams {
            max_dim: 2,
            t_max: f64::INFINITY,
            simplex_cap: DEFAULT_SIMPLEX_CAP,
        }
    }
}

impl FiltrationParams {
    pub fn new(max_dim: usize, t_max: f64) -> Self {
        FiltrationParams {
            max_dim,
            t_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be non-negative, got {}",
                self.t_max
            )));
        }
        if self.simplex_cap == 0 {
            return Err(Error::InvalidParameter(
                "simplex cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Smallest `t` with `d(x_i, x_j) <= r_i(t) + r_j(t)`.
pub fn edge_entry_time(cloud: &PointCloud, radii: &[RadiusFunction], i: usize, j: usize) -> f64 {
    let d = distance(cloud.point(i), cloud.point(j));
    pair_entry_time(d, &radii[i], &radii[j])
}

pub(crate) fn pair_entry_time(d: f64, ri: &RadiusFunction, rj: &RadiusFunction) -> f64 {
    if let (RadiusFunction::Linear { w: wi }, RadiusFunction::Linear { w: wj }) = (ri, rj) {
        return d / (wi + wj);
    }
    let reach = |t: f64| ri.eval(t) + rj.eval(t);
    if reach(0.0) >= d {
        return 0.0;
    }
    let mut hi = 1.0;
    while reach(hi) < d {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    // `hi` always satisfies the inequality, so the returned edge is present
    for _ in 0..2000 {
        if hi - lo <= BISECTION_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reach(mid) >= d {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn check_radii(cloud: &PointCloud, radii: &[RadiusFunction]) -> Result<()> {
    if radii.len() != cloud.len() {
        return Err(Error::InvalidParameter(format!(
            "{} radius functions for {} points",
            radii.len(),
            cloud.len()
        )));
    }
    for r in radii {
        r.validated()?;
    }
    Ok(())
}

/// Symmetric matrix of pairwise edge entry times.
fn edge_times(cloud: &PointCloud, radii: &[RadiusFunction]) -> Vec<Vec<f64>> {
    let n = cloud.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        edge_entry_time(cloud, radii, i, j)
                    }
                })
                .collect()
        })
        .collect()
}

/// Enumerates the cliques of the graph `{ij : times[i][j] <= t_max}` up to
/// `max_dim`, each with its flag scale (largest edge time).
fn enumerate_cliques(
    times: &[Vec<f64>],
    params: &FiltrationParams,
) -> Result<Vec<FiltrationEntry>> {
    let n = times.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| times[i][j] <= params.t_max)
                .collect()
        })
        .collect();
    let count = AtomicUsize::new(0);
    let cap = params.simplex_cap;

    struct Walk<'a> {
        times: &'a [Vec<f64>],
        neighbors: &'a [Vec<usize>],
        max_dim: usize,
        count: &'a AtomicUsize,
        cap: usize,
    }

    impl Walk<'_> {
        fn visit(
            &self,
            simplex: &mut Vec<usize>,
            scale: f64,
            candidates: &[usize],
            out: &mut Vec<FiltrationEntry>,
        ) -> Result<()> {
            let seen = self.count.fetch_add(1, AtomicOrdering::Relaxed) + 1;
            if seen > self.cap {
                return Err(Error::SimplexCap {
                    count: seen,
                    cap: self.cap,
                });
            }
            out.push(FiltrationEntry {
                simplex: Simplex::from_sorted(simplex.clone()),
                scale,
            });
            if simplex.len() > self.max_dim {
                return Ok(());
            }
            for (k, &v) in candidates.iter().enumerate() {
                let next_scale = simplex
                    .iter()
                    .map(|&u| self.times[u][v])
                    .fold(scale, f64::max);
                let next: Vec<usize> = candidates[k + 1..]
                    .iter()
                    .copied()
                    .filter(|w| self.neighbors[v].binary_search(w).is_ok())
                    .collect();
                simplex.push(v);
                self.visit(simplex, next_scale, &next, out)?;
                simplex.pop();
            }
            Ok(())
        }
    }

    let walk = Walk {
        times,
        neighbors: &neighbors,
        max_dim: params.max_dim,
        count: &count,
        cap,
    };
    let per_vertex: Vec<Vec<FiltrationEntry>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut out = Vec::new();
            walk.visit(&mut vec![v], 0.0, &neighbors[v], &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut entries: Vec<FiltrationEntry> = per_vertex.into_iter().flatten().collect();
    entries.sort_by(entry_order);
    Ok(entries)
}

/// Weighted Vietoris-Rips filtration: a simplex enters at the largest entry
/// time among its edges.
pub fn build_weighted_rips(
    cloud: &PointCloud,
    radii: &[RadiusFunction],
    params: &FiltrationParams,
) -> Result<Filtration> {
    params.validate()?;
    check_radii(cloud, radii)?;
    let times = edge_times(cloud, radii);
    let entries = enumerate_cliques(&times, params)?;
    Ok(Filtration {
        entries,
        max_dim: params.max_dim,
        t_max: params.t_max,
        flavor: Flavor::Rips,
    })
}

/// Linear-radius shorthand for [`build_weighted_rips`].
pub fn build_linear_rips(cloud: &PointCloud, params: &FiltrationParams) -> Result<Filtration> {
    build_weighted_rips(cloud, &cloud.linear_radii(), params)
}

/// Smallest `t` at which the balls `B(x_j, w_j t)` over `subset` intersect.
pub fn cech_membership_value(cloud: &PointCloud, subset: &Simplex) -> Result<f64> {
    if subset.dim() == 0 {
        return Ok(0.0);
    }
    let points: Vec<&[f64]> = subset.vertices().iter().map(|&v| cloud.point(v)).collect();
    let weights: Vec<f64> = subset.vertices().iter().map(|&v| cloud.weight(v)).collect();
    Ok(minimax::solve(&points, &weights)?.value)
}

/// Weighted Čech filtration for linear radii `r_i(t) = w_i t`.
///
/// Candidates come from the Rips graph at `t_max`, which contains every Čech
/// simplex entering by then.
pub fn build_weighted_cech(cloud: &PointCloud, params: &FiltrationParams) -> Result<Filtration> {
    params.validate()?;
    let radii = cloud.linear_radii();
    let times = edge_times(cloud, &radii);
    let candidates = enumerate_cliques(&times, params)?;
    let mut values: Vec<(Simplex, f64)> = candidates
        .into_par_iter()
        .map(|e| {
            let value = match e.simplex.dim() {
                0 | 1 => e.scale,
                _ => cech_membership_value(cloud, &e.simplex)?,
            };
            Ok((e.simplex, value))
        })
        .collect::<Result<_>>()?;

    // Raise each value to its faces' so rounding never breaks monotonicity.
    values.sort_by(|a, b| a.0.dim().cmp(&b.0.dim()).then_with(|| a.0.cmp(&b.0)));
    let mut scales: HashMap<Simplex, f64> = HashMap::with_capacity(values.len());
    let mut entries = Vec::with_capacity(values.len());
    for (simplex, value) in values {
        if value > params.t_max {
            continue;
        }
        let mut scale = value;
        let mut complete = true;
        for face in simplex.facets() {
            match scales.get(&face) {
                Some(&s) => scale = scale.max(s),
                None => complete = false,
            }
        }
        if !complete || scale > params.t_max {
            continue;
        }
        scales.insert(simplex.clone(), scale);
        entries.push(FiltrationEntry { simplex, scale });
    }
    entries.sort_by(entry_order);
    Ok(Filtration {
        entries,
        max_dim: params.max_dim,
        t_max: params.t_max,
        flavor: Flavor::Cech,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    /// `VR(t' r) ⊆ Čech(t r)`
    RipsInCech,
    /// `Čech(t r) ⊆ VR(t r)`
    CechInRips,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VrWitness {
    pub simplex: Simplex,
    pub rips_scale: f64,
    pub cech_scale: f64,
    pub containment: Containment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VrLemmaReport {
    pub holds: bool,
    pub ambient_dim: usize,
    pub t: f64,
    pub t_prime: f64,
    pub simplices_checked: usize,
    pub violations: Vec<VrWitness>,
    /// Simplices whose scale is within the tolerance of `t` or `t'`.
    pub near_boundary: Vec<VrWitness>,
}

/// Tolerance on Čech membership when checking the sandwich.
pub const VR_LEMMA_TOLERANCE: f64 = 1e-7;

/// `t' = t * sqrt((d + 1) / (2 d))`.
pub fn vr_lemma_scale(t: f64, ambient_dim: usize) -> f64 {
    let d = ambient_dim as f64;
    t * ((d + 1.0) / (2.0 * d)).sqrt()
}

/// Checks `VR(t' r) ⊆ Čech(t r) ⊆ VR(t r)` over every vertex subset of
/// dimension at most `max_dim`.
pub fn verify_vr_lemma(cloud: &PointCloud, t: f64, max_dim: usize) -> Result<VrLemmaReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t must be positive, got {t}"
        )));
    }
    let d = cloud.dim().max(1);
    let t_prime = vr_lemma_scale(t, d);
    let radii = cloud.linear_radii();
    let n = cloud.len();
    let mut report = VrLemmaReport {
        holds: true,
        ambient_dim: d,
        t,
        t_prime,
        simplices_checked: 0,
        violations: Vec::new(),
        near_boundary: Vec::new(),
    };
    let tol = VR_LEMMA_TOLERANCE;
    let mut subset = Vec::new();
    for size in 1..=(max_dim + 1).min(n) {
        let mut pending = Vec::new();
        each_combination(n, size, &mut subset, &mut |s| pending.push(s.to_vec()));
        for vertices in pending {
            let simplex = Simplex::from_sorted(vertices);
            let vs = simplex.vertices();
            let mut rips = 0.0f64;
            for (a, &u) in vs.iter().enumerate() {
                for &v in &vs[a + 1..] {
                    rips = rips.max(edge_entry_time(cloud, &radii, u, v));
                }
            }
            let cech = cech_membership_value(cloud, &simplex)?;
            report.simplices_checked += 1;
            let witness = |containment| VrWitness {
                simplex: simplex.clone(),
                rips_scale: rips,
                cech_scale: cech,
                containment,
            };
            if rips <= t_prime && cech > t + tol {
                report.violations.push(witness(Containment::RipsInCech));
            } else if rips <= t_prime && (cech - t).abs() <= tol {
                report.near_boundary.push(witness(Containment::RipsInCech));
            }
            if cech <= t && rips > t + tol {
                report.violations.push(witness(Containment::CechInRips));
            } else if (cech - t).abs() <= tol && (rips - t).abs() <= tol {
                report.near_boundary.push(witness(Containment::CechInRips));
            }
        }
    }
    report.holds = report.violations.is_empty();
    Ok(report)
}

fn each_combination(n: usize, size: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
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
    if size <= n {
        rec(0, n, size, buf, f);
    }
}

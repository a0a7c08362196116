//! Point clouds with per-point weights, radius-function families, and the
//! distance matrices that drive the Rips construction.

use crate::error::{Error, Result};

/// A finite set of points in `R^d`, each carrying a positive weight.
///
/// The weight `w` of a point is the growth rate of its ball under the linear
/// radius function `r(t) = w * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidCloud(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points.first().map_or(0, Vec::len);
        if !points.is_empty() && dim == 0 {
            return Err(Error::InvalidCloud(
                "points must have dimension >= 1".into(),
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has dimension {} but point 0 has dimension {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidCloud(format!(
                    "weight of point {i} must be positive and finite, got {w}"
                )));
            }
        }
        Ok(PointCloud {
            dim,
            points,
            weights,
            labels: None,
        })
    }

    /// Every point gets weight 1.
    pub fn unweighted(points: Vec<Vec<f64>>) -> Result<Self> {
        let weights = vec![1.0; points.len()];
        Self::new(points, weights)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::InvalidCloud(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Same points, new weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        let mut cloud = Self::new(self.points.clone(), weights)?;
        cloud.labels = self.labels.clone();
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension. Zero for an empty cloud.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Linear radius functions `r_i(t) = w_i * t`, one per point.
    pub fn linear_radii(&self) -> Vec<RadiusFunction> {
        self.weights
            .iter()
            .map(|&w| RadiusFunction::Linear { w })
            .collect()
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        DistanceMatrix { n, entries }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    DistanceMatrix::from_fn(cloud.len(), |i, j| distance(cloud.point(i), cloud.point(j)))
}

/// `M[i][j] = d(x_i, x_j) / (w_i + w_j)`.
///
/// Running an ordinary unit-scale Rips construction on this matrix yields the
/// weighted Rips filtration for linear radii `r_i(t) = w_i * t`.
pub fn weighted_distance_matrix(cloud: &PointCloud) -> Result<DistanceMatrix> {
    // PointCloud already rejects these; kept for matrices of hand-built clouds.
    if let Some(w) = cloud.weights().iter().find(|w| !(**w > 0.0)) {
        return Err(Error::InvalidCloud(format!("non-positive weight {w}")));
    }
    Ok(DistanceMatrix::from_fn(cloud.len(), |i, j| {
        distance(cloud.point(i), cloud.point(j)) / (cloud.weight(i) + cloud.weight(j))
    }))
}

/// A strictly increasing radius function `t -> r(t)` from a closed family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusFunction {
    /// `r(t) = w t`
    Linear { w: f64 },
    /// `r(t) = a + w t`; balls start with radius `a`.
    Affine { a: f64, w: f64 },
    /// `r(t) = w t^p`
    PowerLaw { w: f64, p: f64 },
}

impl RadiusFunction {
    pub fn linear(w: f64) -> Result<Self> {
        Self::Linear { w }.validated()
    }

    pub fn affine(a: f64, w: f64) -> Result<Self> {
        Self::Affine { a, w }.validated()
    }

    pub fn power_law(w: f64, p: f64) -> Result<Self> {
        Self::PowerLaw { w, p }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let ok = match self {
            Self::Linear { w } => positive(w),
            Self::Affine { a, w } => positive(w) && a.is_finite() && a >= 0.0,
            Self::PowerLaw { w, p } => positive(w) && positive(p),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidRadius(format!("{self:?}")))
        }
    }

    /// Smallest value of the function, attained at `t = 0`.
    pub fn range_lower(&self) -> f64 {
        match *self {
            Self::Affine { a, .. } => a,
            _ => 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Linear { w } => w * t,
            Self::Affine { a, w } => a + w * t,
            Self::PowerLaw { w, p } => w * t.powf(p),
        }
    }

    pub fn inverse(&self, s: f64) -> Result<f64> {
        self.check_range(s)?;
        Ok(self.inverse_clamped(s))
    }

    /// Inverse extended by 0 below the range: the scale at which a ball first
    /// reaches radius `s`. Only differs from [`inverse`](Self::inverse) for
    /// `Affine` with `s < a`.
    pub fn inverse_clamped(&self, s: f64) -> f64 {
        match *self {
            Self::Linear { w } => (s / w).max(0.0),
            Self::Affine { a, w } => ((s - a) / w).max(0.0),
            Self::PowerLaw { w, p } => {
                if s <= 0.0 {
                    0.0
                } else {
                    (s / w).powf(1.0 / p)
                }
            }
        }
    }

    pub fn inverse_derivative(&self, s: f64) -> Result<f64> {
        self.check_range(s)?;
        Ok(match *self {
            Self::Linear { w } | Self::Affine { w, .. } => 1.0 / w,
            Self::PowerLaw { w, p } => (s / w).powf(1.0 / p - 1.0) / (p * w),
        })
    }

    /// `sup` of the inverse derivative over `[0, upper]`. Infinite for power
    /// laws with `p > 1`, whose inverse has a vertical tangent at 0.
    pub fn sup_inverse_derivative(&self, upper: f64) -> f64 {
        match *self {
            Self::Linear { w } | Self::Affine { w, .. } => 1.0 / w,
            Self::PowerLaw { w, p } => {
                if p > 1.0 {
                    f64::INFINITY
                } else if p == 1.0 {
                    1.0 / w
                } else {
                    (upper / w).powf(1.0 / p - 1.0) / (p * w)
                }
            }
        }
    }

    fn check_range(&self, s: f64) -> Result<()> {
        let lower = self.range_lower();
        if s < lower || s.is_nan() {
            Err(Error::OutOfRange { value: s, lower })
        } else {
            Ok(())
        }
    }
}

/// An axis-aligned box `K` with a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != resolution.len() {
            return Err(Error::InvalidRegion(format!(
                "corner and resolution lengths disagree ({}, {}, {})",
                lower.len(),
                upper.len(),
                resolution.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidRegion(
                "lower corner must be strictly below the upper corner".into(),
            ));
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::InvalidRegion(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(Region {
            lower,
            upper,
            resolution,
        })
    }

    /// Bounding box of the given clouds grown by `margin` on every side.
    pub fn bounding(clouds: &[&PointCloud], margin: f64, per_axis: usize) -> Result<Self> {
        let dim = clouds
            .iter()
            .find(|c| !c.is_empty())
            .map(|c| c.dim())
            .ok_or_else(|| Error::InvalidRegion("no points to bound".into()))?;
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for p in clouds.iter().flat_map(|c| c.points()) {
            if p.len() != dim {
                return Err(Error::InvalidRegion(
                    "clouds of different dimensions".into(),
                ));
            }
            for k in 0..dim {
                lower[k] = lower[k].min(p[k]);
                upper[k] = upper[k].max(p[k]);
            }
        }
        for k in 0..dim {
            lower[k] -= margin;
            upper[k] += margin;
            if lower[k] == upper[k] {
                lower[k] -= 0.5;
                upper[k] += 0.5;
            }
        }
        Self::new(lower, upper, vec![per_axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn diam(&self) -> f64 {
        distance(&self.lower, &self.upper)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| l <= x && x <= u)
    }

    pub fn grid_len(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Grid points in row-major order, endpoints included on every axis.
    pub fn grid_points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.grid_len()).map(move |mut flat| {
            let mut p = vec![0.0; self.dim()];
            for k in (0..self.dim()).rev() {
                let res = self.resolution[k];
                let idx = flat % res;
                flat /= res;
                let frac = idx as f64 / (res - 1) as f64;
                p[k] = self.lower[k] + frac * (self.upper[k] - self.lower[k]);
            }
            p
        })
    }
}

//! Persistent homology over the two-element field.
//!
//! Columns are sorted row-index lists; adding two columns is a sorted
//! symmetric difference. Reduction runs from the top dimension down and
//! clears the column of every pivot row it discovers, since such a column
//! is known to reduce to zero.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::filtration::Filtration;

/// Largest filtration [`betti_at`] will handle.
pub const BETTI_ORACLE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

pub fn boundary_matrix(filt: &Filtration) -> Result<BoundaryMatrix> {
    let index = filt.index();
    let mut columns = Vec::with_capacity(filt.len());
    let mut dims = Vec::with_capacity(filt.len());
    for (j, entry) in filt.entries().iter().enumerate() {
        let mut col = Vec::with_capacity(entry.simplex.dim() + 1);
        for face in entry.simplex.facets() {
            match index.get(&face) {
                Some(&i) if i < j => col.push(i),
                _ => {
                    return Err(Error::MissingFace {
                        simplex: entry.simplex.vertices().to_vec(),
                        face: face.vertices().to_vec(),
                    })
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
        dims.push(entry.simplex.dim());
    }
    Ok(BoundaryMatrix { columns, dims })
}

/// Birth/death index pairs from a reduced boundary matrix.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pairing {
    /// `(birth, death)` sorted by birth index.
    pub pairs: Vec<(usize, usize)>,
    /// Columns that are neither born-and-killed nor killers: essential classes.
    pub unpaired: Vec<usize>,
}

/// `a += b` over Z/2 for sorted index lists.
fn add_column(a: &mut Vec<usize>, b: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(a, scratch);
}

/// Standard column reduction with clearing.
pub fn reduce(matrix: &BoundaryMatrix) -> Pairing {
    let n = matrix.len();
    let top = matrix.dims.iter().copied().max().unwrap_or(0);
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (j, &d) in matrix.dims.iter().enumerate() {
        by_dim[d].push(j);
    }

    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();

    for dim in (1..=top).rev() {
        for &j in &by_dim[dim] {
            if cleared[j] {
                continue;
            }
            let mut col = matrix.columns[j].clone();
            while let Some(&low) = col.last() {
                match pivot_owner[low] {
                    Some(k) => add_column(&mut col, &reduced[k], &mut scratch),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = Some(j);
                cleared[low] = true;
                pairs.push((low, j));
                reduced[j] = col;
            }
        }
    }

    let mut paired = vec![false; n];
    for &(b, d) in &pairs {
        paired[b] = true;
        paired[d] = true;
    }
    pairs.sort_unstable();
    let unpaired = (0..n).filter(|&j| !paired[j]).collect();
    Pairing { pairs, unpaired }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
}

impl DiagramPoint {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        DiagramPoint { dim, birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    fn order(&self, other: &Self) -> std::cmp::Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.birth.total_cmp(&other.birth))
            .then_with(|| self.death.total_cmp(&other.death))
    }
}

/// Multiset of `(dim, birth, death)` points, kept sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn new(mut points: Vec<DiagramPoint>) -> Result<Self> {
        if let Some(p) = points
            .iter()
            .find(|p| p.birth.is_nan() || p.death.is_nan() || p.birth > p.death)
        {
            return Err(Error::InvalidParameter(format!(
                "diagram point ({}, {}, {}) has birth after death",
                p.dim, p.birth, p.death
            )));
        }
        points.sort_by(DiagramPoint::order);
        Ok(PersistenceDiagram { points })
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &DiagramPoint> + '_ {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.points.iter().map(|p| p.dim).max()
    }

    /// Number of classes of dimension `dim` alive at `t`: `birth <= t < death`.
    pub fn alive_at(&self, t: f64, dim: usize) -> usize {
        self.in_dim(dim)
            .filter(|p| p.birth <= t && t < p.death)
            .count()
    }

    pub fn barcode(&self) -> Barcode {
        let top = self.max_dim().map_or(0, |d| d + 1);
        let mut bars = vec![Vec::new(); top];
        for p in &self.points {
            if p.death > p.birth {
                bars[p.dim].push((p.birth, p.death));
            }
        }
        Barcode { bars }
    }
}

/// Positive-length intervals grouped by dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    bars: Vec<Vec<(f64, f64)>>,
}

impl Barcode {
    pub fn from_bars(bars: Vec<Vec<(f64, f64)>>) -> Self {
        Barcode { bars }
    }

    pub fn dims(&self) -> usize {
        self.bars.len()
    }

    pub fn in_dim(&self, dim: usize) -> &[(f64, f64)] {
        self.bars.get(dim).map_or(&[], Vec::as_slice)
    }

    /// Bar lengths in dimension `dim`, longest first.
    pub fn lengths(&self, dim: usize) -> Vec<f64> {
        let mut lengths: Vec<f64> = self.in_dim(dim).iter().map(|(b, d)| d - b).collect();
        lengths.sort_by(|a, b| b.total_cmp(a));
        lengths
    }
}

/// Pairs born and killed at the same scale lie on the diagonal and are
/// left out.
pub fn diagram(filt: &Filtration, pairing: &Pairing) -> PersistenceDiagram {
    let mut points = Vec::with_capacity(pairing.pairs.len() + pairing.unpaired.len());
    for &(b, d) in &pairing.pairs {
        if filt.scale(b) == filt.scale(d) {
            continue;
        }
        points.push(DiagramPoint::new(
            filt.simplex(b).dim(),
            filt.scale(b),
            filt.scale(d),
        ));
    }
    for &i in &pairing.unpaired {
        points.push(DiagramPoint::new(
            filt.simplex(i).dim(),
            filt.scale(i),
            f64::INFINITY,
        ));
    }
    points.sort_by(DiagramPoint::order);
    PersistenceDiagram { points }
}

/// Boundary matrix, reduction and diagram in one call.
pub fn compute_diagram(filt: &Filtration) -> Result<PersistenceDiagram> {
    let matrix = boundary_matrix(filt)?;
    let pairing = reduce(&matrix);
    Ok(diagram(filt, &pairing))
}

/// Betti number of `{σ : scale(σ) <= t}` in dimension `dim`, by dense rank
/// computation over Z/2.
///
/// Independent of [`reduce`]; used as a test oracle.
pub fn betti_at(filt: &Filtration, t: f64, dim: usize) -> Result<usize> {
    if filt.len() > BETTI_ORACLE_LIMIT {
        return Err(Error::TooLarge(filt.len()));
    }
    if dim > filt.max_dim() {
        return Ok(0);
    }
    let complex = filt.prefix_at(t);
    let mut by_dim: Vec<Vec<&[usize]>> = vec![Vec::new(); filt.max_dim() + 2];
    for e in complex {
        by_dim[e.simplex.dim()].push(e.simplex.vertices());
    }
    let count = by_dim[dim].len();
    let rank_down = if dim == 0 {
        0
    } else {
        boundary_rank(&by_dim[dim - 1], &by_dim[dim])
    };
    let rank_up = boundary_rank(&by_dim[dim], &by_dim[dim + 1]);
    Ok(count - rank_down - rank_up)
}

fn boundary_rank(rows: &[&[usize]], cols: &[&[usize]]) -> usize {
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let row_index: HashMap<&[usize], usize> =
        rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let words = rows.len().div_ceil(64);
    let mut matrix: Vec<Vec<u64>> = cols
        .iter()
        .map(|c| {
            let mut bits = vec![0u64; words];
            for skip in 0..c.len() {
                let face: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let r = row_index[face.as_slice()];
                bits[r / 64] ^= 1 << (r % 64);
            }
            bits
        })
        .collect();
    gf2_rank(&mut matrix, rows.len())
}

/// Rank of a set of Z/2 bit vectors by Gaussian elimination.
fn gf2_rank(vectors: &mut [Vec<u64>], bits: usize) -> usize {
    let mut rank = 0;
    for bit in 0..bits {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..vectors.len()).find(|&i| vectors[i][w] & mask != 0) else {
            continue;
        };
        vectors.swap(rank, p);
        let pivot = vectors[rank].clone();
        for (i, v) in vectors.iter_mut().enumerate() {
            if i != rank && v[w] & mask != 0 {
                v.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

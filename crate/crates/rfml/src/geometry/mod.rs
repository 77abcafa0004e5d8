//! Point-cloud container, exact k-nearest-neighbor graphs, local PCA frames,
//! and intrinsic dimension estimation.
//!
//! Everything here is deterministic: distance ties break by ascending point
//! index, eigenvector signs follow a fixed convention, and accumulations run
//! in a fixed order, so repeated calls are bit-identical.

mod dimension;
mod frame;
mod knn;

pub use dimension::{estimate_dimension, DimensionReport};
pub use frame::{local_frame, LocalFrame};
pub use knn::knn_search;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// N points in ambient dimension D, rows are points, with optional integer
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: DMatrix<f64>,
    labels: Option<Vec<i64>>,
}

impl PointCloud {
    /// Validates shape, finiteness, and label length.
    pub fn new(data: DMatrix<f64>, labels: Option<Vec<i64>>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidData(format!(
                "point cloud must be non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            let (r, c) = (bad % data.nrows(), bad / data.nrows());
            return Err(Error::InvalidData(format!(
                "non-finite coordinate at point {r}, column {c}"
            )));
        }
        if let Some(ref l) = labels {
            if l.len() != data.nrows() {
                return Err(Error::InvalidData(format!(
                    "labels length {} does not match point count {}",
                    l.len(),
                    data.nrows()
                )));
            }
        }
        Ok(Self { data, labels })
    }

    /// Builds a cloud from row slices.
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidData("no rows".into()));
        }
        let d = rows[0].len();
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::InvalidData(format!(
                "ragged rows: row {bad} has {} columns, expected {d}",
                rows[bad].len()
            )));
        }
        let data = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(data, labels)
    }

    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Ambient coordinates of point `i` as a column vector.
    pub fn point(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    /// Squared Euclidean distance between points `i` and `j`.
    pub(crate) fn dist_sq(&self, i: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.data.ncols() {
            let d = self.data[(i, c)] - self.data[(j, c)];
            acc += d * d;
        }
        acc
    }

    /// Replaces the labels, keeping the coordinates.
    pub fn with_labels(mut self, labels: Option<Vec<i64>>) -> Result<Self> {
        if let Some(ref l) = labels {
            if l.len() != self.n_points() {
                return Err(Error::InvalidData(format!(
                    "labels length {} does not match point count {}",
                    l.len(),
                    self.n_points()
                )));
            }
        }
        self.labels = labels;
        Ok(self)
    }
}

/// K nearest neighbors of every point, self excluded, sorted by ascending
/// distance with index tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    k: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborhoodGraph {
    pub(crate) fn from_flat(k: usize, indices: Vec<usize>, distances: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), distances.len());
        debug_assert_eq!(indices.len() % k, 0);
        Self {
            k,
            indices,
            distances,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.indices.len() / self.k
    }

    /// Neighbor indices of point `i`, ascending by distance.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    /// Euclidean distances matching [`Self::neighbors`].
    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    /// Patch membership of point `i`: the point itself followed by its
    /// neighbors (K+1 entries).
    pub fn patch(&self, i: usize) -> Vec<usize> {
        let mut p = Vec::with_capacity(self.k + 1);
        p.push(i);
        p.extend_from_slice(self.neighbors(i));
        p
    }

    /// Mean neighbor distance over the whole graph.
    pub fn mean_distance(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }
}

/// Covariance eigenstructure of one patch, accumulated in a fixed order.
///
/// Returns (mean, eigenvalues descending, eigenvectors as columns matching
/// the eigenvalue order, sign-fixed).
pub(crate) fn patch_covariance_eigen(
    cloud: &PointCloud,
    members: &[usize],
) -> (DVector<f64>, DVector<f64>, DMatrix<f64>) {
    let d = cloud.dim();
    let mut mean = DVector::zeros(d);
    for &m in members {
        mean += cloud.point(m);
    }
    mean /= members.len() as f64;

    let mut cov = DMatrix::zeros(d, d);
    for &m in members {
        let diff = cloud.point(m) - &mean;
        cov.syger(1.0, &diff, &diff, 1.0);
    }
    // syger fills only the lower triangle; mirror it.
    for r in 0..d {
        for c in (r + 1)..d {
            cov[(r, c)] = cov[(c, r)];
        }
    }

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut values = DVector::zeros(d);
    let mut vectors = DMatrix::zeros(d, d);
    for (pos, &src) in order.iter().enumerate() {
        values[pos] = eig.eigenvalues[src].max(0.0);
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        vectors.set_column(pos, &col);
    }
    (mean, values, vectors)
}

/// Deterministic sign convention: the entry of largest magnitude (lowest
/// index on ties) is made positive.
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

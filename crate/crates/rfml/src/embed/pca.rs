//! Principal component projection.

use nalgebra::{DMatrix, DVector};

use super::EmbeddingResult;
use crate::error::{Error, Result};
use crate::geometry::fix_sign;
use crate::PointCloud;

/// Centered covariance spectrum: eigenvalues descending with sign-fixed
/// eigenvectors as columns.
pub(crate) fn covariance_spectrum(cloud: &PointCloud) -> (DVector<f64>, DMatrix<f64>) {
    let n = cloud.n_points();
    let dim = cloud.dim();
    let mut mean = DVector::zeros(dim);
    for i in 0..n {
        mean += cloud.point(i);
    }
    mean /= n as f64;

    let mut cov = DMatrix::zeros(dim, dim);
    for i in 0..n {
        let diff = cloud.point(i) - &mean;
        cov.syger(1.0, &diff, &diff, 1.0);
    }
    for r in 0..dim {
        for c in (r + 1)..dim {
            cov[(r, c)] = cov[(c, r)];
        }
    }
    cov /= n as f64;

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut values = DVector::zeros(dim);
    let mut vectors = DMatrix::zeros(dim, dim);
    for (pos, &src) in order.iter().enumerate() {
        values[pos] = eig.eigenvalues[src].max(0.0);
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        vectors.set_column(pos, &col);
    }
    (values, vectors)
}

/// Projects the centered data onto its top-`d` principal components.
pub fn pca_embed(cloud: &PointCloud, d: usize) -> Result<EmbeddingResult> {
    if d == 0 || d > cloud.dim() {
        return Err(Error::InvalidParameter(format!(
            "pca target dimension {d} out of range for ambient dimension {}",
            cloud.dim()
        )));
    }
    let (values, vectors) = covariance_spectrum(cloud);
    let total: f64 = values.iter().sum();
    let explained: f64 = values.iter().take(d).sum();

    let n = cloud.n_points();
    let mut mean = DVector::zeros(cloud.dim());
    for i in 0..n {
        mean += cloud.point(i);
    }
    mean /= n as f64;

    let basis = vectors.columns(0, d).clone_owned();
    let mut coords = DMatrix::zeros(n, d);
    for i in 0..n {
        let proj = basis.transpose() * (cloud.point(i) - &mean);
        coords.row_mut(i).copy_from(&proj.transpose());
    }

    Ok(EmbeddingResult::new(coords, "pca")
        .with_param("d", d)
        .with_param(
            "explained_variance_ratio",
            if total > 0.0 { explained / total } else { 0.0 },
        ))
}

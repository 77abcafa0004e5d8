//! Local orthonormal coordinate frames from patch covariance.

use nalgebra::{DMatrix, DVector};

use super::{patch_covariance_eigen, NeighborhoodGraph, PointCloud};
use crate::error::{Error, Result};

/// Orthonormal frame at one point: the patch mean, `d` tangent directions,
/// `D - d` normal directions, and the full covariance spectrum (descending).
#[derive(Debug, Clone)]
pub struct LocalFrame {
    /// Ambient coordinates of the frame origin (the point itself).
    pub center: DVector<f64>,
    /// Patch mean used for the covariance.
    pub mean: DVector<f64>,
    /// D x d, orthonormal columns spanning the tangent estimate.
    pub tangent_basis: DMatrix<f64>,
    /// D x (D - d), orthonormal columns spanning the normal estimate.
    pub normal_basis: DMatrix<f64>,
    /// Covariance eigenvalues, descending.
    pub spectrum: DVector<f64>,
    /// Set when the covariance rank is below `d`; zero-eigenvalue directions
    /// are still returned, in eigen order.
    pub degenerate: bool,
}

impl LocalFrame {
    pub fn d(&self) -> usize {
        self.tangent_basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.tangent_basis.nrows()
    }

    /// Concatenated [tangent | normal] basis, a D x D orthogonal matrix.
    pub fn full_basis(&self) -> DMatrix<f64> {
        let d = self.ambient_dim();
        let mut b = DMatrix::zeros(d, d);
        b.view_mut((0, 0), (d, self.d()))
            .copy_from(&self.tangent_basis);
        b.view_mut((0, self.d()), (d, d - self.d()))
            .copy_from(&self.normal_basis);
        b
    }

    /// Express ambient points in this frame: row j of the result is
    /// `[tangent | normal]^T (p_j - center)`, tangent coordinates first.
    /// The center itself maps to the zero vector.
    pub fn local_coordinates(&self, points: &DMatrix<f64>) -> DMatrix<f64> {
        let basis = self.full_basis();
        let mut out = DMatrix::zeros(points.nrows(), self.ambient_dim());
        for j in 0..points.nrows() {
            let diff = points.row(j).transpose() - &self.center;
            let coords = basis.transpose() * diff;
            out.row_mut(j).copy_from(&coords.transpose());
        }
        out
    }

    /// Inverse of [`Self::local_coordinates`]: `center + basis * coords`.
    pub fn ambient_points(&self, coords: &DMatrix<f64>) -> DMatrix<f64> {
        let basis = self.full_basis();
        let mut out = DMatrix::zeros(coords.nrows(), self.ambient_dim());
        for j in 0..coords.nrows() {
            let p = &self.center + &basis * coords.row(j).transpose();
            out.row_mut(j).copy_from(&p.transpose());
        }
        out
    }
}

/// Builds the PCA frame at point `i` from its patch (the point plus its K
/// neighbors). The top `d` eigenvectors become the tangent basis, the rest
/// the normal basis; eigenvector signs are fixed so outputs are
/// deterministic across backends.
pub fn local_frame(
    cloud: &PointCloud,
    graph: &NeighborhoodGraph,
    i: usize,
    d: usize,
) -> Result<LocalFrame> {
    let ambient = cloud.dim();
    if d > ambient {
        return Err(Error::InvalidParameter(format!(
            "tangent dimension {d} exceeds ambient dimension {ambient}"
        )));
    }
    if i >= cloud.n_points() {
        return Err(Error::InvalidParameter(format!(
            "point index {i} out of range ({} points)",
            cloud.n_points()
        )));
    }

    let members = graph.patch(i);
    let (mean, spectrum, vectors) = patch_covariance_eigen(cloud, &members);

    let scale = spectrum[0].max(f64::MIN_POSITIVE);
    let rank = spectrum.iter().filter(|&&v| v > scale * 1e-12).count();

    Ok(LocalFrame {
        center: cloud.point(i),
        mean,
        tangent_basis: vectors.columns(0, d).clone_owned(),
        normal_basis: vectors.columns(d, ambient - d).clone_owned(),
        spectrum,
        degenerate: rank < d,
    })
}

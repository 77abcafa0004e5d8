//! Local tangent space alignment.

use nalgebra::DMatrix;

use super::{center_columns, DistanceBackend, EmbeddingResult};
use crate::alignment::{build_alignment_matrix, solve_global_coordinates, AlignmentProblem};
use crate::error::{Error, Result};
use crate::geometry::{knn_search, local_frame};
use crate::PointCloud;

/// Per-patch tangent coordinates from local PCA, aligned globally through
/// the shared alignment eigenproblem; coordinates are the ascending
/// eigenvectors 2..d+1.
pub fn ltsa_embed(
    cloud: &PointCloud,
    d: usize,
    k: usize,
    backend: DistanceBackend,
) -> Result<EmbeddingResult> {
    let n = cloud.n_points();
    if k < d {
        return Err(Error::InvalidParameter(format!(
            "ltsa needs K >= d, got K = {k}, d = {d}"
        )));
    }
    if d + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {d} coordinates from {n} points"
        )));
    }
    backend.validate_cloud(cloud)?;
    let graph = knn_search(cloud, k)?;

    let mut membership = Vec::with_capacity(n);
    let mut patch_coords = Vec::with_capacity(n);
    for i in 0..n {
        let frame = local_frame(cloud, &graph, i, d)?;
        let members = graph.patch(i);
        let mut tangent = DMatrix::zeros(members.len(), d);
        for (row, &g) in members.iter().enumerate() {
            let diff = cloud.point(g) - &frame.center;
            let coords = frame.tangent_basis.transpose() * diff;
            tangent.row_mut(row).copy_from(&coords.transpose());
        }
        membership.push(members);
        patch_coords.push(tangent);
    }

    let problem = AlignmentProblem {
        patch_coords,
        membership,
        n_points: n,
    };
    let b = build_alignment_matrix(&problem)?;
    let global = solve_global_coordinates(&b, d)?;
    let mut coords = global.coords;
    center_columns(&mut coords);

    Ok(EmbeddingResult::new(coords, "ltsa")
        .with_param("d", d)
        .with_param("k", k)
        .with_param("backend", backend.name()))
}

//! Locally linear embedding.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{center_columns, DistanceBackend, EmbeddingResult};
use crate::error::{Error, Result};
use crate::geometry::{fix_sign, knn_search};
use crate::PointCloud;

/// Reconstruction weights per point (rows sum to one, Gram matrices ridge
/// regularized by `1e-3 * trace`), then the ascending eigenvectors
/// 2..d+1 of `(I - W)^T (I - W)`.
pub fn lle_embed(
    cloud: &PointCloud,
    d: usize,
    k: usize,
    backend: DistanceBackend,
) -> Result<EmbeddingResult> {
    let n = cloud.n_points();
    if k < d {
        return Err(Error::InvalidParameter(format!(
            "lle needs K >= d, got K = {k}, d = {d}"
        )));
    }
    if d + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {d} coordinates from {n} points"
        )));
    }
    backend.validate_cloud(cloud)?;
    let graph = knn_search(cloud, k)?;

    // Gram of the centered neighborhood through backend distances:
    // G_jl = (d(i,j)^2 + d(i,l)^2 - d(j,l)^2) / 2. For the Euclidean
    // backend this is exactly <x_i - x_j, x_i - x_l>.
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let nbrs = graph.neighbors(i);
        let di: Vec<f64> = nbrs
            .iter()
            .map(|&j| backend.distance(cloud, i, j))
            .collect();
        let mut gram = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let dab = backend.distance(cloud, nbrs[a], nbrs[b]);
                let v = 0.5 * (di[a] * di[a] + di[b] * di[b] - dab * dab);
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
        }
        // Geodesic-backend Grams are not guaranteed PSD; escalate the ridge
        // until the factorization goes through.
        let base = gram.trace().abs().max(gram.amax()).max(f64::MIN_POSITIVE);
        let mut chol = None;
        for ridge_scale in [1e-3, 1e-1, 1.0, 10.0] {
            let mut g = gram.clone();
            let ridge = ridge_scale * base;
            for a in 0..k {
                g[(a, a)] += ridge;
            }
            if let Some(c) = Cholesky::new(g) {
                chol = Some(c);
                break;
            }
        }
        let chol = chol
            .ok_or_else(|| Error::Numerical(format!("singular LLE Gram at point {i}")))?;
        let mut w = chol.solve(&DVector::from_element(k, 1.0));
        let sum: f64 = w.iter().sum();
        if sum.abs() < 1e-300 {
            return Err(Error::Numerical(format!(
                "degenerate LLE weights at point {i}"
            )));
        }
        w /= sum;
        weights.push(w.iter().copied().collect());
    }

    // M = (I - W)^T (I - W), assembled densely.
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        let nbrs = graph.neighbors(i);
        for (a, &j) in nbrs.iter().enumerate() {
            m[(i, j)] -= weights[i][a];
        }
    }
    let mt_m = m.transpose() * &m;

    let eig = mt_m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[x]
            .partial_cmp(&eig.eigenvalues[y])
            .unwrap()
            .then(x.cmp(&y))
    });

    let mut coords = DMatrix::zeros(n, d);
    for (pos, &src) in order[1..1 + d].iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        coords.set_column(pos, &col);
    }
    center_columns(&mut coords);

    Ok(EmbeddingResult::new(coords, "lle")
        .with_param("d", d)
        .with_param("k", k)
        .with_param("backend", backend.name()))
}

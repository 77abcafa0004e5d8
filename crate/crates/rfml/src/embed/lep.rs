//! Laplacian eigenmaps.

use nalgebra::DMatrix;

use super::{center_columns, DistanceBackend, EmbeddingResult, WeightedGraph};
use crate::error::{Error, Result};
use crate::geometry::{fix_sign, knn_search};
use crate::PointCloud;

/// Heat-kernel weights `exp(-dist^2 / 2 sigma^2)` on the symmetrized kNN
/// graph; coordinates are the generalized eigenvectors 2..d+1 of
/// `L v = lambda D v`, solved through the normalized Laplacian. `heat_sigma`
/// defaults to the mean neighbor distance.
pub fn lep_embed(
    cloud: &PointCloud,
    d: usize,
    k: usize,
    backend: DistanceBackend,
    heat_sigma: Option<f64>,
) -> Result<EmbeddingResult> {
    let n = cloud.n_points();
    if d + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {d} coordinates from {n} points"
        )));
    }
    let graph = knn_search(cloud, k)?;
    let wg = WeightedGraph::build(cloud, &graph, backend)?;
    let components = wg.component_count();
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }

    let sigma = match heat_sigma {
        Some(s) if s > 0.0 => s,
        Some(s) => {
            return Err(Error::InvalidParameter(format!(
                "heat sigma must be positive, got {s}"
            )))
        }
        None => {
            let mut total = 0.0;
            let mut count = 0usize;
            for i in 0..n {
                for &j in graph.neighbors(i) {
                    total += backend.distance(cloud, i, j);
                    count += 1;
                }
            }
            total / count as f64
        }
    };

    // Dense symmetric weight matrix over the union graph.
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in graph.neighbors(i) {
            let dist = backend.distance(cloud, i, j);
            let weight = (-dist * dist / (2.0 * sigma * sigma)).exp();
            w[(i, j)] = weight;
            w[(j, i)] = weight;
        }
    }
    let degrees: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    if degrees.iter().any(|&deg| deg <= 0.0) {
        return Err(Error::Numerical("isolated vertex in heat kernel graph".into()));
    }

    // Normalized form: M = I - D^{-1/2} W D^{-1/2}; generalized eigenvectors
    // are v = D^{-1/2} u.
    let inv_sqrt: Vec<f64> = degrees.iter().map(|&deg| 1.0 / deg.sqrt()).collect();
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] != 0.0 {
                m[(i, j)] -= inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
            }
        }
    }

    let eig = m.symmetric_eigen();
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
        for (i, item) in col.iter_mut().enumerate() {
            *item *= inv_sqrt[i];
        }
        fix_sign(&mut col);
        coords.set_column(pos, &col);
    }
    center_columns(&mut coords);

    Ok(EmbeddingResult::new(coords, "lep")
        .with_param("d", d)
        .with_param("k", k)
        .with_param("backend", backend.name())
        .with_param("heat_sigma", sigma))
}

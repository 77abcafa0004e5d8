//! Isomap: geodesic distances on the neighbor graph, then classical MDS.

use super::{classical_mds, DistanceBackend, EmbeddingResult, WeightedGraph};
use crate::error::Result;
use crate::geometry::knn_search;
use crate::PointCloud;

/// Shortest-path distances over the symmetrized kNN graph (edge weights from
/// the backend), double-centered and spectrally embedded into `d` dimensions.
pub fn isomap_embed(
    cloud: &PointCloud,
    d: usize,
    k: usize,
    backend: DistanceBackend,
) -> Result<EmbeddingResult> {
    let graph = knn_search(cloud, k)?;
    let wg = WeightedGraph::build(cloud, &graph, backend)?;
    let dist = wg.all_pairs_shortest()?;
    let coords = classical_mds(&dist, d)?;
    Ok(EmbeddingResult::new(coords, "isomap")
        .with_param("d", d)
        .with_param("k", k)
        .with_param("backend", backend.name()))
}

//! Intrinsic dimension estimation from per-patch PCA spectra.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{patch_covariance_eigen, NeighborhoodGraph, PointCloud};
use crate::error::{Error, Result};

/// Per-point local dimensions and the dataset-wide choice `d = max d_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    /// Local dimension of each patch.
    pub per_point_dims: Vec<usize>,
    /// `max` over the per-point dimensions.
    pub chosen_d: usize,
    /// Count of points per local dimension.
    pub histogram: BTreeMap<usize, usize>,
    /// Variance ratio used for the cut.
    pub ratio: f64,
    /// True when `chosen_d` equals the ambient dimension, i.e. there is
    /// nothing to reduce.
    pub not_reducible: bool,
    /// Points whose patch covariance was identically zero (duplicates);
    /// their local dimension is recorded as 0.
    pub zero_spectrum_points: Vec<usize>,
}

/// Smallest `m` such that the top-`m` eigenvalues capture at least `ratio`
/// of the total variance of each patch; the dataset dimension is the max.
pub fn estimate_dimension(
    cloud: &PointCloud,
    graph: &NeighborhoodGraph,
    ratio: f64,
) -> Result<DimensionReport> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance ratio must be in (0, 1], got {ratio}"
        )));
    }
    let n = cloud.n_points();
    let per_point_dims: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| {
            let members = graph.patch(i);
            let (_, spectrum, _) = patch_covariance_eigen(cloud, &members);
            let total: f64 = spectrum.iter().sum();
            if total <= 0.0 {
                return 0;
            }
            let mut acc = 0.0;
            for (m, &v) in spectrum.iter().enumerate() {
                acc += v;
                if acc / total >= ratio {
                    return m + 1;
                }
            }
            spectrum.len()
        })
        .collect();

    let zero_spectrum_points: Vec<usize> = per_point_dims
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| i)
        .collect();
    let chosen_d = per_point_dims.iter().copied().max().unwrap_or(0);
    let mut histogram = BTreeMap::new();
    for &d in &per_point_dims {
        *histogram.entry(d).or_insert(0usize) += 1;
    }

    Ok(DimensionReport {
        chosen_d,
        not_reducible: chosen_d == cloud.dim(),
        per_point_dims,
        histogram,
        ratio,
        zero_spectrum_points,
    })
}

//! Embedding quality metrics: neighborhood preservation, nearest-neighbor
//! classification, and curvature distribution reports.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::embed::{EmbeddingResult, MethodSpec};
use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::geometry::{estimate_dimension, knn_search};
use crate::patch::{curvature, fit_quadratic_auto, enforce_elliptic};
use crate::geometry::local_frame;
use crate::rng::SplitMix64;
use crate::PointCloud;

/// Neighborhood preserving ratio: mean fraction of K-nearest neighbors
/// shared between the input space and the embedding.
#[derive(Debug, Clone)]
pub struct NprResult {
    pub value: f64,
    pub k: usize,
    pub per_point: Vec<f64>,
}

/// `NB = (1/KN) sum_i |N(x_i) ∩ N(z_i)|`, with both neighbor sets computed
/// by Euclidean kNN (self excluded, ties by index).
pub fn npr(x: &PointCloud, z: &EmbeddingResult, k: usize) -> Result<NprResult> {
    npr_coords(x.data(), &z.coords, k)
}

/// [`npr`] on raw coordinate matrices.
pub fn npr_coords(x: &DMatrix<f64>, z: &DMatrix<f64>, k: usize) -> Result<NprResult> {
    if x.nrows() != z.nrows() {
        return Err(Error::InvalidData(format!(
            "point counts differ: {} in input space, {} in embedding",
            x.nrows(),
            z.nrows()
        )));
    }
    let x_cloud = PointCloud::new(x.clone(), None)?;
    let z_cloud = PointCloud::new(z.clone(), None)?;
    let gx = knn_search(&x_cloud, k)?;
    let gz = knn_search(&z_cloud, k)?;
    let n = x.nrows();
    let per_point: Vec<f64> = (0..n)
        .map(|i| {
            let a = gx.neighbors(i);
            let b = gz.neighbors(i);
            let mut shared = 0usize;
            for j in a {
                if b.contains(j) {
                    shared += 1;
                }
            }
            shared as f64 / k as f64
        })
        .collect();
    let value = per_point.iter().sum::<f64>() / n as f64;
    Ok(NprResult {
        value,
        k,
        per_point,
    })
}

/// Half/half stratified 1-NN classification outcome.
#[derive(Debug, Clone)]
pub struct ClassificationResult {
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub per_class: BTreeMap<i64, f64>,
}

/// Per-class stratified half/half split (odd classes put the extra point in
/// training), then 1-NN with the Euclidean metric in the embedding space.
/// Deterministic under `split_seed`.
pub fn nn_classify(
    z: &DMatrix<f64>,
    labels: &[i64],
    split_seed: u64,
) -> Result<ClassificationResult> {
    if labels.len() != z.nrows() {
        return Err(Error::InvalidData(format!(
            "{} labels for {} embedded points",
            labels.len(),
            z.nrows()
        )));
    }
    let mut classes: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    for (&label, members) in &classes {
        if members.len() < 2 {
            return Err(Error::InvalidData(format!(
                "class {label} has a single member; cannot split"
            )));
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (&label, members) in &classes {
        let mut order = members.clone();
        let mut rng = SplitMix64::substream(split_seed, &format!("split-{label}"));
        rng.shuffle(&mut order);
        let n_train = members.len().div_ceil(2);
        train.extend_from_slice(&order[..n_train]);
        test.extend_from_slice(&order[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();

    let mut correct_per_class: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    let mut correct = 0usize;
    for &t in &test {
        let mut best: Option<(f64, usize)> = None;
        for &tr in &train {
            let mut dist_sq = 0.0;
            for c in 0..z.ncols() {
                let d = z[(t, c)] - z[(tr, c)];
                dist_sq += d * d;
            }
            let better = match best {
                None => true,
                Some((bd, bi)) => dist_sq < bd || (dist_sq == bd && tr < bi),
            };
            if better {
                best = Some((dist_sq, tr));
            }
        }
        let predicted = labels[best.expect("non-empty training set").1];
        let actual = labels[t];
        let entry = correct_per_class.entry(actual).or_insert((0, 0));
        entry.1 += 1;
        if predicted == actual {
            entry.0 += 1;
            correct += 1;
        }
    }

    let per_class = correct_per_class
        .into_iter()
        .map(|(label, (ok, total))| (label, ok as f64 / total as f64))
        .collect();

    Ok(ClassificationResult {
        accuracy: correct as f64 / test.len() as f64,
        n_train: train.len(),
        n_test: test.len(),
        seed: split_seed,
        per_class,
    })
}

/// Distribution of pointwise scalar curvature.
#[derive(Debug, Clone)]
pub struct CurvatureHistogram {
    /// `bins + 1` ascending edges over `[min, max]`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub per_point_scalars: Vec<f64>,
}

/// Pointwise scalar curvature (after the elliptic clamp unless `pre_clamp`)
/// binned into `bins` equal-width bins over the observed range.
pub fn curvature_histogram(
    cloud: &PointCloud,
    k: usize,
    bins: usize,
    pre_clamp: bool,
) -> Result<CurvatureHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let graph = knn_search(cloud, k)?;
    let report = estimate_dimension(cloud, &graph, 0.95)?;
    let d = report.chosen_d.min(cloud.dim() - 1).max(1);

    let scalars: Vec<f64> = (0..cloud.n_points())
        .into_par_iter()
        .map(|i| {
            let frame = local_frame(cloud, &graph, i, d)?;
            let members = graph.patch(i);
            let mut pts = DMatrix::zeros(members.len(), cloud.dim());
            for (row, &g) in members.iter().enumerate() {
                pts.row_mut(row).copy_from(&cloud.data().row(g));
            }
            let coords = frame.local_coordinates(&pts);
            let mut patch = fit_quadratic_auto(&coords, d, i)?;
            if !pre_clamp {
                patch = enforce_elliptic(&patch);
            }
            Ok(curvature(&patch, &DVector::zeros(d))?.scalar)
        })
        .collect::<Result<_>>()?;

    Ok(histogram_from_scalars(scalars, bins))
}

pub(crate) fn histogram_from_scalars(scalars: Vec<f64>, bins: usize) -> CurvatureHistogram {
    let lo = scalars.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_raw = scalars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hi = if hi_raw - lo > 0.0 { hi_raw } else { lo + 1.0 };
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0usize; bins];
    for &s in &scalars {
        let idx = (((s - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    CurvatureHistogram {
        bin_edges,
        counts,
        per_point_scalars: scalars,
    }
}

/// One row of a method-by-K sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub method: String,
    pub k: usize,
    pub npr: f64,
}

/// Embeds the cloud with every (method, K) pair and scores neighborhood
/// preservation; emits a long-format table in method-major order.
pub fn npr_vs_k_sweep(
    cloud: &PointCloud,
    methods: &[MethodSpec],
    k_values: &[usize],
    d: usize,
    flow: &FlowConfig,
) -> Result<Vec<SweepRow>> {
    for &k in k_values {
        if k >= cloud.n_points() {
            return Err(Error::InvalidParameter(format!(
                "sweep K = {k} must be below the point count {}",
                cloud.n_points()
            )));
        }
    }
    let mut rows = Vec::with_capacity(methods.len() * k_values.len());
    for spec in methods {
        for &k in k_values {
            let embedding = crate::embed::run_method(cloud, spec, k, Some(d), flow, None)?;
            let score = npr(cloud, &embedding, k)?;
            rows.push(SweepRow {
                method: spec.name(),
                k,
                npr: score.value,
            });
        }
    }
    Ok(rows)
}

//! The full curvature-aware pipeline.
//!
//! kNN graph -> local frames -> intrinsic dimension -> elliptic quadratic
//! charts -> target constant C -> per-patch Ricci flow -> global alignment
//! -> final reducer.
//!
//! The alignment stage adapts to how much of the target sphere the data
//! actually covers, measured by the wrap ratio `L sqrt(C)` (geodesic
//! diameter over sphere radius):
//!
//! - flat (`C` at the floor): the flow has nothing to equalize; the final
//!   reducer runs directly on the input with the Euclidean metric, keeping
//!   locally-flat datasets bit-compatible with their classical embedding.
//! - cap (`L sqrt(C)` below [`WRAP_RATIO_THRESHOLD`]): the flowed patches
//!   stitch to an open chart covering only a shallow cap of the sphere.
//!   The alignment eigenvectors are kept as coordinates after restoring
//!   their physical scale from per-patch gradients (eigenvectors are
//!   orthonormal, which erases per-axis scale), and the final reducer runs
//!   on them with the Euclidean metric; forcing a shallow cap through the
//!   origin-centered sphere constraint would fold the chart onto itself.
//! - closed (otherwise): the data wraps the sphere; the full spherical
//!   alignment applies and the final reducer uses the great-circle metric.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use super::{baseline_embed, DistanceBackend, EmbeddingResult, Method, WeightedGraph};
use crate::alignment::{align, build_alignment_matrix, solve_global_coordinates, AlignmentProblem};
use crate::error::{Error, Result};
use crate::flow::{choose_target_c, run_flow, FlowConfig, FlowResult};
use crate::geometry::{estimate_dimension, knn_search, local_frame, NeighborhoodGraph};
use crate::patch::{curvature, enforce_elliptic, fit_quadratic_auto, QuadraticPatch};
use crate::PointCloud;

/// Mean clamped scalar curvature below this treats the dataset as flat:
/// the flow has nothing to equalize and the sphere construction would only
/// inject distortion, so the final reducer runs directly on the input.
pub const FLAT_CURVATURE_THRESHOLD: f64 = 5e-3;

/// Geodesic diameter over sphere radius below which the data is treated as
/// an open cap rather than a closed surface. A closed surface of curvature
/// `C` has diameter `pi / sqrt(C)`, so the ratio sits near pi when the data
/// genuinely wraps the target sphere.
pub const WRAP_RATIO_THRESHOLD: f64 = 2.5;

/// Pipeline knobs.
#[derive(Debug, Clone)]
pub struct RfmlOptions {
    /// Neighborhood size.
    pub k: usize,
    /// Target dimension; estimated from the data when absent.
    pub d: Option<usize>,
    /// Variance ratio for the dimension estimate.
    pub ratio: f64,
    /// Ricci flow settings.
    pub flow: FlowConfig,
    /// Reducer applied to the aligned sphere.
    pub final_method: Method,
    /// Heat-kernel width for a LEP final stage.
    pub heat_sigma: Option<f64>,
}

impl Default for RfmlOptions {
    fn default() -> Self {
        Self {
            k: 10,
            d: None,
            ratio: 0.95,
            flow: FlowConfig::default(),
            final_method: Method::Isomap,
            heat_sigma: None,
        }
    }
}

/// What the pipeline did, attached to its [`EmbeddingResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineDiagnostics {
    /// Target curvature constant.
    pub target_c: f64,
    /// Mean clamped scalar curvature over patch centers before the flow.
    pub mean_initial_scalar: f64,
    /// `sum |r_i - C|^2` at flow termination.
    pub total_energy: f64,
    /// Fraction of patches that reached tolerance.
    pub converged_fraction: f64,
    /// Largest accepted-step count over patches.
    pub max_iterations: usize,
    /// True when the flat short-circuit skipped alignment.
    pub flow_skipped: bool,
    /// Dimension chosen by estimation (absent when the caller fixed `d`).
    pub estimated_d: Option<usize>,
    /// Patches that violated the spherical non-negativity check before
    /// clamping.
    pub clamped_patches: usize,
    /// Alignment regime taken: "flat", "cap", or "closed".
    pub regime: &'static str,
    /// Geodesic diameter times sqrt(C).
    pub wrap_ratio: f64,
}

/// Double-sweep estimate of the geodesic diameter over the kNN graph:
/// shortest paths from an arbitrary vertex pick the farthest vertex, and the
/// sweep from there gives the estimate. Disconnected graphs use the largest
/// finite distance seen.
fn geodesic_diameter_estimate(cloud: &PointCloud, graph: &NeighborhoodGraph) -> f64 {
    let wg = match WeightedGraph::build(cloud, graph, DistanceBackend::Euclidean) {
        Ok(g) => g,
        Err(_) => return f64::INFINITY,
    };
    let max_finite = |d: &[f64]| {
        d.iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0f64, f64::max)
    };
    let first = wg.dijkstra(0);
    let mut far = 0;
    let mut best = 0.0;
    for (i, &v) in first.iter().enumerate() {
        if v.is_finite() && v > best {
            best = v;
            far = i;
        }
    }
    let second = wg.dijkstra(far);
    max_finite(&second).max(best)
}

/// Mean over patches of `G_i^T G_i`, where `G_i` is the least-squares
/// gradient of the global coordinates with respect to the patch-local
/// coordinates. Eigenvector coordinates are orthonormal by construction;
/// this Gram recovers how fast each of them moves per unit of chart length,
/// which is exactly the per-axis scale the eigensolve erased.
fn gradient_gram(
    coords: &DMatrix<f64>,
    patch_coords: &[DMatrix<f64>],
    membership: &[Vec<usize>],
) -> Result<DMatrix<f64>> {
    let d_out = coords.ncols();
    let mut gram_sum = DMatrix::zeros(d_out, d_out);
    for (local, members) in patch_coords.iter().zip(membership.iter()) {
        let m = members.len();
        let d_loc = local.ncols();
        let mut design = DMatrix::zeros(m, d_loc + 1);
        for r in 0..m {
            design[(r, 0)] = 1.0;
            for c in 0..d_loc {
                design[(r, 1 + c)] = local[(r, c)];
            }
        }
        let mut normal_eq = design.transpose() * &design;
        let chol = match Cholesky::new(normal_eq.clone()) {
            Some(c) => c,
            None => {
                let bump = 1e-10 * (normal_eq.trace() / (d_loc + 1) as f64).max(1.0);
                for i in 0..d_loc + 1 {
                    normal_eq[(i, i)] += bump;
                }
                Cholesky::new(normal_eq).ok_or_else(|| {
                    Error::Numerical("gradient gauge fit is singular".into())
                })?
            }
        };
        let mut grad = DMatrix::zeros(d_loc, d_out);
        for k in 0..d_out {
            let target = DVector::from_fn(m, |r, _| coords[(members[r], k)]);
            let theta = chol.solve(&(design.transpose() * target));
            for c in 0..d_loc {
                grad[(c, k)] = theta[1 + c];
            }
        }
        gram_sum += grad.transpose() * grad;
    }
    Ok(gram_sum / patch_coords.len() as f64)
}

/// Inverse matrix square root with eigenvalues floored at `floor_rel` times
/// the largest, so directions without gradient signal stay bounded.
fn inv_sqrt_floored(s: &DMatrix<f64>, floor_rel: f64) -> DMatrix<f64> {
    let eig = s.clone().symmetric_eigen();
    let max = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
    let mut out = DMatrix::zeros(s.nrows(), s.ncols());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i).clone_owned();
        out.syger(1.0 / l.max(floor_rel * max).sqrt(), &v, &v, 1.0);
    }
    for r in 0..s.nrows() {
        for c in (r + 1)..s.ncols() {
            out[(r, c)] = out[(c, r)];
        }
    }
    out
}

/// Builds the elliptic quadratic charts for every patch.
pub(crate) fn build_patches(
    cloud: &PointCloud,
    graph: &NeighborhoodGraph,
    d: usize,
) -> Result<Vec<QuadraticPatch>> {
    (0..cloud.n_points())
        .into_par_iter()
        .map(|i| {
            let frame = local_frame(cloud, graph, i, d)?;
            let members = graph.patch(i);
            let mut pts = DMatrix::zeros(members.len(), cloud.dim());
            for (row, &g) in members.iter().enumerate() {
                pts.row_mut(row).copy_from(&cloud.data().row(g));
            }
            let coords = frame.local_coordinates(&pts);
            let patch = fit_quadratic_auto(&coords, d, i)?;
            Ok(enforce_elliptic(&patch))
        })
        .collect()
}

/// Full pipeline. Neighbors, frames, dimension, elliptic charts, target
/// constant, per-patch flow, spherical alignment, spherical-metric
/// reduction.
pub fn rfml_embed(cloud: &PointCloud, opts: &RfmlOptions) -> Result<EmbeddingResult> {
    rfml_embed_full(cloud, opts).map(|(embedding, _)| embedding)
}

/// [`rfml_embed`] that also hands back the flow outcome (per-patch energy
/// and residual traces) for diagnostics and trace logging.
pub fn rfml_embed_full(
    cloud: &PointCloud,
    opts: &RfmlOptions,
) -> Result<(EmbeddingResult, FlowResult)> {
    opts.flow.validate()?;
    let ambient = cloud.dim();
    let graph = knn_search(cloud, opts.k)?;

    let (d, estimated_d) = match opts.d {
        Some(d) => {
            if d == 0 {
                return Err(Error::InvalidParameter("d must be at least 1".into()));
            }
            if d >= ambient {
                return Err(Error::NotReducible { d });
            }
            (d, None)
        }
        None => {
            let report = estimate_dimension(cloud, &graph, opts.ratio)?;
            if report.not_reducible {
                return Err(Error::NotReducible { d: report.chosen_d });
            }
            if report.chosen_d == 0 {
                return Err(Error::InvalidData(
                    "dimension estimate is zero everywhere (duplicate points?)".into(),
                ));
            }
            (report.chosen_d, Some(report.chosen_d))
        }
    };

    let patches = build_patches(cloud, &graph, d)?;
    let clamped_patches = patches.iter().filter(|p| p.elliptic_clamped).count();

    let reports: Vec<_> = patches
        .par_iter()
        .map(|p| curvature(p, &DVector::zeros(p.d)))
        .collect::<Result<_>>()?;
    let mean_initial_scalar =
        reports.iter().map(|r| r.scalar).sum::<f64>() / reports.len() as f64;
    let c = opts.flow.target_c.unwrap_or_else(|| choose_target_c(&reports));

    let mut flow_config = opts.flow.clone();
    flow_config.target_c = Some(c);
    let flow_result = run_flow(&patches, &flow_config)?;

    let wrap_ratio = geodesic_diameter_estimate(cloud, &graph) * c.sqrt();
    let regime = if c <= FLAT_CURVATURE_THRESHOLD {
        "flat"
    } else if wrap_ratio < WRAP_RATIO_THRESHOLD {
        "cap"
    } else {
        "closed"
    };

    let (mut result, backend_used) = match regime {
        "flat" => {
            let backend = DistanceBackend::Euclidean;
            (
                baseline_embed(cloud, opts.final_method, d, opts.k, backend, opts.heat_sigma)?,
                backend,
            )
        }
        "cap" => {
            let membership: Vec<Vec<usize>> = (0..cloud.n_points()).map(|i| graph.patch(i)).collect();
            let problem = AlignmentProblem {
                patch_coords: flow_result.flowed_patches.clone(),
                membership: membership.clone(),
                n_points: cloud.n_points(),
            };
            let b = build_alignment_matrix(&problem)?;
            let global = solve_global_coordinates(&b, ambient)?;
            let gram = gradient_gram(&global.coords, &flow_result.flowed_patches, &membership)?;
            let chart = &global.coords * inv_sqrt_floored(&gram, 1e-9);
            let chart_cloud = PointCloud::new(chart, None)?;
            let backend = DistanceBackend::Euclidean;
            (
                baseline_embed(
                    &chart_cloud,
                    opts.final_method,
                    d,
                    opts.k,
                    backend,
                    opts.heat_sigma,
                )?,
                backend,
            )
        }
        _ => {
            let sphere = align(&flow_result, &graph, c)?;
            let sphere_cloud = PointCloud::new(sphere.points, None)?;
            let backend = DistanceBackend::Spherical {
                radius: sphere.radius,
            };
            (
                baseline_embed(
                    &sphere_cloud,
                    opts.final_method,
                    d,
                    opts.k,
                    backend,
                    opts.heat_sigma,
                )?,
                backend,
            )
        }
    };

    let diagnostics = PipelineDiagnostics {
        target_c: c,
        mean_initial_scalar,
        total_energy: flow_result.total_energy,
        converged_fraction: flow_result.converged_fraction(),
        max_iterations: flow_result
            .states
            .iter()
            .map(|s| s.iteration)
            .max()
            .unwrap_or(0),
        flow_skipped: regime == "flat",
        estimated_d,
        clamped_patches,
        regime,
        wrap_ratio,
    };

    result.method = format!("rfml+{}", opts.final_method.name());
    result = result
        .with_param("k", opts.k)
        .with_param("d", d)
        .with_param("final", opts.final_method.name())
        .with_param("backend", backend_used.name())
        .with_param("target_c", c);
    result.diagnostics = Some(diagnostics);
    Ok((result, flow_result))
}


/// Builds the elliptic quadratic charts for every patch, exactly as the
/// pipeline does: local frame, local coordinates, least-squares fit,
/// ellipticity projection.
pub fn build_elliptic_patches(
    cloud: &PointCloud,
    graph: &NeighborhoodGraph,
    d: usize,
) -> Result<Vec<QuadraticPatch>> {
    build_patches(cloud, graph, d)
}

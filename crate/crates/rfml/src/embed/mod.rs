//! Dimensionality reduction: classical baselines, the spherical-metric
//! final stage, and the full curvature-aware pipeline.

mod graph;
mod lep;
mod lle;
mod ltsa;
mod mds;
mod pca;
mod pipeline;

pub use graph::WeightedGraph;
pub use lep::lep_embed;
pub use lle::lle_embed;
pub use ltsa::ltsa_embed;
pub use mds::classical_mds;
pub use pca::pca_embed;
pub use pipeline::{
    build_elliptic_patches, rfml_embed, rfml_embed_full, PipelineDiagnostics, RfmlOptions,
    FLAT_CURVATURE_THRESHOLD, WRAP_RATIO_THRESHOLD,
};

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Distance used between embedded-space points: plain Euclidean, or the
/// great-circle metric of a sphere with the given radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceBackend {
    Euclidean,
    Spherical { radius: f64 },
}

impl DistanceBackend {
    pub fn name(&self) -> &'static str {
        match self {
            DistanceBackend::Euclidean => "euclidean",
            DistanceBackend::Spherical { .. } => "spherical",
        }
    }

    /// Checks that every point lies on the sphere (1e-6 relative) when the
    /// backend is spherical.
    pub fn validate_cloud(&self, cloud: &PointCloud) -> Result<()> {
        if let DistanceBackend::Spherical { radius } = self {
            if !(*radius > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "spherical backend needs a positive radius, got {radius}"
                )));
            }
            for i in 0..cloud.n_points() {
                let norm = cloud.data().row(i).norm();
                if (norm - radius).abs() > 1e-6 * radius {
                    return Err(Error::InvalidData(format!(
                        "point {i} is off the sphere: |p| = {norm}, radius = {radius}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance between rows `i` and `j` of the cloud.
    pub fn distance(&self, cloud: &PointCloud, i: usize, j: usize) -> f64 {
        match self {
            DistanceBackend::Euclidean => cloud.dist_sq(i, j).sqrt(),
            DistanceBackend::Spherical { radius } => {
                let dot = cloud.data().row(i).dot(&cloud.data().row(j));
                let cos = (dot / (radius * radius)).clamp(-1.0, 1.0);
                radius * cos.acos()
            }
        }
    }
}

/// Great-circle distance between two points on a sphere of radius `r`:
/// `r * arccos(<p, q> / r^2)`, with the cosine clamped to [-1, 1].
pub fn spherical_distance(p: &[f64], q: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sphere radius must be positive, got {r}"
        )));
    }
    if p.len() != q.len() {
        return Err(Error::InvalidData(format!(
            "dimension mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for (label, v) in [("p", p), ("q", q)] {
        let n = norm(v);
        if (n - r).abs() > 1e-6 * r {
            return Err(Error::InvalidData(format!(
                "{label} is off the sphere: |{label}| = {n}, radius = {r}"
            )));
        }
    }
    let dot: f64 = p.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    Ok(r * (dot / (r * r)).clamp(-1.0, 1.0).acos())
}

/// Which reducer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pca,
    Isomap,
    Lle,
    Lep,
    Ltsa,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Isomap => "isomap",
            Method::Lle => "lle",
            Method::Lep => "lep",
            Method::Ltsa => "ltsa",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(Method::Pca),
            "isomap" => Ok(Method::Isomap),
            "lle" => Ok(Method::Lle),
            "lep" => Ok(Method::Lep),
            "ltsa" => Ok(Method::Ltsa),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected pca|isomap|lle|lep|ltsa)"
            ))),
        }
    }
}

/// A method selection: a classical reducer on its own, or the full
/// curvature-aware pipeline with a final reducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Baseline(Method),
    Rfml { final_method: Method },
}

impl MethodSpec {
    /// Canonical name: baselines by their own name, the pipeline as `rfml`.
    pub fn name(&self) -> String {
        match self {
            MethodSpec::Baseline(m) => m.name().to_string(),
            MethodSpec::Rfml { .. } => "rfml".to_string(),
        }
    }

    /// Accepts `pca|isomap|lle|lep|ltsa|rfml|rfml+<final>`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "rfml" {
            return Ok(MethodSpec::Rfml {
                final_method: Method::Isomap,
            });
        }
        if let Some(final_name) = s.strip_prefix("rfml+") {
            return Ok(MethodSpec::Rfml {
                final_method: Method::parse(final_name)?,
            });
        }
        Ok(MethodSpec::Baseline(Method::parse(s)?))
    }
}

/// Uniform entry point used by sweeps, comparisons, and the CLI: baselines
/// run with the Euclidean metric on the input; the pipeline runs end to end.
pub fn run_method(
    cloud: &PointCloud,
    spec: &MethodSpec,
    k: usize,
    d: Option<usize>,
    flow: &crate::flow::FlowConfig,
    heat_sigma: Option<f64>,
) -> Result<EmbeddingResult> {
    match spec {
        MethodSpec::Baseline(method) => {
            let d = d.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "method {} requires an explicit target dimension",
                    method.name()
                ))
            })?;
            baseline_embed(cloud, *method, d, k, DistanceBackend::Euclidean, heat_sigma)
        }
        MethodSpec::Rfml { final_method } => {
            let opts = RfmlOptions {
                k,
                d,
                flow: flow.clone(),
                final_method: *final_method,
                heat_sigma,
                ..RfmlOptions::default()
            };
            rfml_embed(cloud, &opts)
        }
    }
}

/// Embedded coordinates plus provenance.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// N x d coordinates, index-aligned with the input cloud.
    pub coords: DMatrix<f64>,
    pub method: String,
    /// Resolved knobs for provenance (stringified, canonical formatting).
    pub params: BTreeMap<String, String>,
    /// Present only for the full pipeline.
    pub diagnostics: Option<PipelineDiagnostics>,
}

impl EmbeddingResult {
    pub(crate) fn new(coords: DMatrix<f64>, method: impl Into<String>) -> Self {
        Self {
            coords,
            method: method.into(),
            params: BTreeMap::new(),
            diagnostics: None,
        }
    }

    pub(crate) fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn n_points(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }
}

/// Runs one of the classical reducers with an explicit distance backend.
pub fn baseline_embed(
    cloud: &PointCloud,
    method: Method,
    d: usize,
    k: usize,
    backend: DistanceBackend,
    heat_sigma: Option<f64>,
) -> Result<EmbeddingResult> {
    match method {
        Method::Pca => pca_embed(cloud, d),
        Method::Isomap => isomap_embed(cloud, d, k, backend),
        Method::Lle => lle_embed(cloud, d, k, backend),
        Method::Lep => lep_embed(cloud, d, k, backend, heat_sigma),
        Method::Ltsa => ltsa_embed(cloud, d, k, backend),
    }
}

pub use isomap::isomap_embed;
mod isomap;

/// Subtracts the column means in place; spectral embeddings are defined up
/// to translation and are reported centered.
pub(crate) fn center_columns(m: &mut DMatrix<f64>) {
    for c in 0..m.ncols() {
        let mean = m.column(c).mean();
        for r in 0..m.nrows() {
            m[(r, c)] -= mean;
        }
    }
}

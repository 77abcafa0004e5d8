//! Curvature-aware manifold learning.
//!
//! The pipeline decomposes a high-dimensional point cloud into overlapping
//! K-nearest-neighbor patches, fits a second-order elliptic chart to each
//! patch, evolves every patch under a discrete per-patch Ricci flow until its
//! scalar curvature reaches a shared constant `C`, aligns the deformed
//! patches onto a sphere of curvature `C`, and finally reduces dimension with
//! a spectral embedder driven by the sphere's geodesic metric. Classical
//! baselines (PCA, Isomap, LLE, Laplacian eigenmaps, LTSA) and a
//! neighborhood-preservation evaluation harness are included for comparison.
//!
//! Every operation is deterministic: fixed seeds, fixed tie-breaks, fixed
//! reduction orders. Repeated runs produce byte-identical artifacts.
//!
//! See the `examples/` directory for one runnable program per capability:
//!
//! ```text
//! cargo run --release -p rfml --example generate_datasets
//! cargo run --release -p rfml --example estimate_dimension
//! cargo run --release -p rfml --example curvature_report
//! cargo run --release -p rfml --example flow_single_patch
//! cargo run --release -p rfml --example sphere_round_trip
//! cargo run --release -p rfml --example embed_baselines
//! cargo run --release -p rfml --example full_pipeline
//! cargo run --release -p rfml --example npr_vs_k
//! cargo run --release -p rfml --example classify_synthetic
//! ```
//!
//! A thin `rfml` binary wraps the same functionality as subcommands
//! (`generate`, `embed`, `compare`, `diagnose`).

pub mod alignment;
pub mod embed;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod flow;
pub mod patch;
pub mod geometry;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::{NeighborhoodGraph, PointCloud};

//! The full curvature-aware pipeline on the ellipsoid, against every
//! classical baseline.
//!
//! ```text
//! cargo run --release -p rfml --example full_pipeline
//! ```

use rfml::data::{generate, DatasetKind, DatasetSpec};
use rfml::embed::{baseline_embed, rfml_embed, DistanceBackend, Method, RfmlOptions};
use rfml::evaluation::npr;
use rfml::flow::FlowConfig;

fn main() -> rfml::Result<()> {
    let cloud = generate(&DatasetSpec {
        kind: DatasetKind::Ellipsoid {
            a: 1.0,
            b: 1.0,
            c: 0.5,
        },
        n: 1000,
        seed: 7,
    })?;
    println!("ellipsoid (1, 1, 0.5), N = 1000, K = 10, d = 2");

    let mut best_baseline = 0.0f64;
    for method in [
        Method::Pca,
        Method::Isomap,
        Method::Lle,
        Method::Lep,
        Method::Ltsa,
    ] {
        let embedding = baseline_embed(&cloud, method, 2, 10, DistanceBackend::Euclidean, None)?;
        let score = npr(&cloud, &embedding, 10)?;
        best_baseline = best_baseline.max(score.value);
        println!("  {:<9} npr = {:.4}", embedding.method, score.value);
    }

    let opts = RfmlOptions {
        k: 10,
        d: Some(2),
        flow: FlowConfig {
            dt: 0.5,
            max_iters: 100,
            ..FlowConfig::default()
        },
        final_method: Method::Lep,
        ..RfmlOptions::default()
    };
    let embedding = rfml_embed(&cloud, &opts)?;
    let score = npr(&cloud, &embedding, 10)?;
    let diag = embedding.diagnostics.as_ref().unwrap();
    println!(
        "  {:<9} npr = {:.4}  (C = {:.3}, regime = {}, converged {:.0}%)",
        embedding.method,
        score.value,
        diag.target_c,
        diag.regime,
        100.0 * diag.converged_fraction
    );
    println!(
        "pipeline vs best baseline: {:+.4}",
        score.value - best_baseline
    );
    Ok(())
}

//! Runs the five classical reducers on the swiss roll and scores
//! neighborhood preservation.
//!
//! ```text
//! cargo run --release -p rfml --example embed_baselines
//! ```

use rfml::data::{generate, DatasetKind, DatasetSpec};
use rfml::embed::{baseline_embed, DistanceBackend, Method};
use rfml::evaluation::npr;

fn main() -> rfml::Result<()> {
    let cloud = generate(&DatasetSpec {
        kind: DatasetKind::SwissRoll,
        n: 1000,
        seed: 7,
    })?;
    println!("swiss roll, N = 1000, K = 10, d = 2");
    for method in [
        Method::Pca,
        Method::Isomap,
        Method::Lle,
        Method::Lep,
        Method::Ltsa,
    ] {
        let embedding = baseline_embed(&cloud, method, 2, 10, DistanceBackend::Euclidean, None)?;
        let score = npr(&cloud, &embedding, 10)?;
        println!("  {:<7} npr = {:.4}", embedding.method, score.value);
    }
    Ok(())
}

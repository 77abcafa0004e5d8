//! Half/half stratified 1-NN classification in an embedding space.
//!
//! ```text
//! cargo run --release -p rfml --example classify_synthetic
//! ```

use rfml::embed::pca_embed;
use rfml::evaluation::nn_classify;
use rfml::rng::SplitMix64;
use rfml::PointCloud;

fn main() -> rfml::Result<()> {
    // Five noisy clusters in 8 dimensions.
    let mut rng = SplitMix64::new(42);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for cls in 0..5i64 {
        let center: Vec<f64> = (0..8).map(|_| rng.uniform(-4.0, 4.0)).collect();
        for _ in 0..60 {
            rows.push(center.iter().map(|c| c + 0.5 * rng.normal()).collect());
            labels.push(cls);
        }
    }
    let cloud = PointCloud::from_rows(&rows, Some(labels.clone()))?;

    let embedding = pca_embed(&cloud, 3)?;
    let result = nn_classify(&embedding.coords, &labels, 7)?;
    println!(
        "5 clusters, N = {}, pca d=3: accuracy {:.3} ({} train / {} test)",
        cloud.n_points(),
        result.accuracy,
        result.n_train,
        result.n_test
    );
    for (label, acc) in &result.per_class {
        println!("  class {label}: {acc:.3}");
    }
    Ok(())
}

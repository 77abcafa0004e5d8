//! Per-point intrinsic dimension from local PCA variance ratios.
//!
//! ```text
//! cargo run --release -p rfml --example estimate_dimension
//! ```

use rfml::data::{generate, DatasetKind, DatasetSpec};
use rfml::geometry::{estimate_dimension, knn_search};

fn main() -> rfml::Result<()> {
    for kind in [
        DatasetKind::SwissRoll,
        DatasetKind::Sphere { radius: 1.0 },
        DatasetKind::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        },
    ] {
        let cloud = generate(&DatasetSpec {
            kind,
            n: 1000,
            seed: 7,
        })?;
        let graph = knn_search(&cloud, 10)?;
        let report = estimate_dimension(&cloud, &graph, 0.95)?;
        let name = match report.histogram.len() {
            0 => unreachable!(),
            _ => report
                .histogram
                .iter()
                .map(|(d, n)| format!("{d}:{n}"))
                .collect::<Vec<_>>()
                .join(" "),
        };
        println!(
            "K=10 ratio=0.95  histogram {{{name}}}  chosen d = {}{}",
            report.chosen_d,
            if report.not_reducible {
                " (not reducible)"
            } else {
                ""
            }
        );
    }
    Ok(())
}

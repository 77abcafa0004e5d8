//! Generates the four synthetic benchmark surfaces and prints a summary.
//!
//! ```text
//! cargo run --release -p rfml --example generate_datasets
//! ```

use rfml::data::{generate, save_csv, DatasetKind, DatasetSpec};

fn main() -> rfml::Result<()> {
    let out_dir = std::env::temp_dir().join("rfml-datasets");
    std::fs::create_dir_all(&out_dir)?;

    let kinds = [
        DatasetKind::SwissRoll,
        DatasetKind::Sphere { radius: 1.0 },
        DatasetKind::Ellipsoid {
            a: 1.0,
            b: 1.0,
            c: 0.5,
        },
        DatasetKind::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        },
    ];

    for kind in kinds {
        let spec = DatasetSpec {
            kind,
            n: 1000,
            seed: 7,
        };
        let cloud = generate(&spec)?;
        let path = out_dir.join(format!("{}.csv", spec.kind.name()));
        save_csv(&cloud, &path)?;

        let data = cloud.data();
        let mut lo = vec![f64::INFINITY; cloud.dim()];
        let mut hi = vec![f64::NEG_INFINITY; cloud.dim()];
        for i in 0..cloud.n_points() {
            for c in 0..cloud.dim() {
                lo[c] = lo[c].min(data[(i, c)]);
                hi[c] = hi[c].max(data[(i, c)]);
            }
        }
        println!(
            "{:<11} {} points, bounds {:?} .. {:?} -> {}",
            spec.kind.name(),
            cloud.n_points(),
            lo.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(),
            hi.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(),
            path.display()
        );
    }
    Ok(())
}

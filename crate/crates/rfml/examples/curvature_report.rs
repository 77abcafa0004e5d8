//! Pointwise scalar curvature distributions of the benchmark surfaces.
//!
//! ```text
//! cargo run --release -p rfml --example curvature_report
//! ```

use rfml::data::{generate, DatasetKind, DatasetSpec};
use rfml::evaluation::curvature_histogram;

fn main() -> rfml::Result<()> {
    for kind in [
        DatasetKind::SwissRoll,
        DatasetKind::Sphere { radius: 1.0 },
        DatasetKind::Ellipsoid {
            a: 1.0,
            b: 1.0,
            c: 0.5,
        },
    ] {
        let name = kind.name();
        let cloud = generate(&DatasetSpec {
            kind,
            n: 1000,
            seed: 7,
        })?;
        let hist = curvature_histogram(&cloud, 10, 12, false)?;
        let scalars = &hist.per_point_scalars;
        let mean = scalars.iter().sum::<f64>() / scalars.len() as f64;
        println!("{name}: mean scalar curvature {mean:+.4}");
        let peak = hist.counts.iter().copied().max().unwrap_or(1).max(1);
        for (i, &count) in hist.counts.iter().enumerate() {
            let bar = "#".repeat(count * 50 / peak);
            println!(
                "  [{:+.3}, {:+.3})  {count:>4} {bar}",
                hist.bin_edges[i],
                hist.bin_edges[i + 1]
            );
        }
    }
    Ok(())
}

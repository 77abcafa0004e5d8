//! Pushes exact unit-sphere samples through flow + alignment and measures
//! how well the sphere is reproduced (Procrustes residual).
//!
//! ```text
//! cargo run --release -p rfml --example sphere_round_trip
//! ```

use nalgebra::DMatrix;
use rfml::alignment::align;
use rfml::data::{generate, DatasetKind, DatasetSpec};
use rfml::embed::build_elliptic_patches;
use rfml::flow::{run_flow, FlowConfig};
use rfml::geometry::knn_search;

/// Residual after optimal translation + scaling + rotation.
fn procrustes_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let center = |m: &DMatrix<f64>| {
        let mut x = m.clone();
        for c in 0..x.ncols() {
            let mean = x.column(c).mean();
            for r in 0..x.nrows() {
                x[(r, c)] -= mean;
            }
        }
        x
    };
    let a = center(a);
    let b = center(b);
    let svd = (b.transpose() * &a).svd(true, true);
    let rot = svd.v_t.unwrap().transpose() * svd.u.unwrap().transpose();
    let rotated = a * rot;
    let scale = (rotated.transpose() * &b).trace() / rotated.norm_squared();
    ((rotated * scale) - &b).norm() / b.norm()
}

fn main() -> rfml::Result<()> {
    let cloud = generate(&DatasetSpec {
        kind: DatasetKind::Sphere { radius: 1.0 },
        n: 1000,
        seed: 7,
    })?;
    let graph = knn_search(&cloud, 10)?;
    let patches = build_elliptic_patches(&cloud, &graph, 2)?;

    // Sphere patches already sit at constant curvature; a generous tolerance
    // lets every patch converge without taking a step.
    let config = FlowConfig {
        tol: 0.5,
        ..FlowConfig::default()
    };
    let flow = run_flow(&patches, &config)?;
    println!(
        "C = {:.4}, converged {:.1}% at iteration 0",
        flow.c_used,
        100.0 * flow.converged_fraction()
    );

    let sphere = align(&flow, &graph, flow.c_used)?;
    println!(
        "aligned onto sphere of radius {:.4} ({} points)",
        sphere.radius,
        sphere.points.nrows()
    );
    let residual = procrustes_residual(&sphere.points, cloud.data());
    println!("procrustes residual vs input sphere: {residual:.3e}");
    Ok(())
}

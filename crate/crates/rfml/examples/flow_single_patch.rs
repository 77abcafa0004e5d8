//! Evolves one anisotropically curved patch under the discrete Ricci flow
//! and prints the energy trace.
//!
//! ```text
//! cargo run --release -p rfml --example flow_single_patch
//! ```

use nalgebra::{DMatrix, DVector};
use rfml::flow::{run_flow, FlowConfig};
use rfml::patch::{curvature, enforce_elliptic, fit_quadratic};

fn main() -> rfml::Result<()> {
    // Chart of an ellipsoid-like bump: different principal curvatures.
    let mut tangent = vec![vec![0.0, 0.0]];
    for i in 0..5 {
        for j in 0..5 {
            let x = -0.3 + 0.6 * i as f64 / 4.0;
            let y = -0.3 + 0.6 * j as f64 / 4.0;
            tangent.push(vec![x, y]);
        }
    }
    let coords = DMatrix::from_fn(tangent.len(), 3, |r, c| {
        let t = &tangent[r];
        if c < 2 {
            t[c]
        } else {
            t[0] * t[0] + 0.4 * t[1] * t[1]
        }
    });
    let patch = enforce_elliptic(&fit_quadratic(&coords, 2, 0.0)?);
    let report = curvature(&patch, &DVector::zeros(2))?;
    println!(
        "initial scalar curvature {:.4}, sectional range [{:.4}, {:.4}]",
        report.scalar, report.sectional_min, report.sectional_max
    );

    let target = 1.0;
    let config = FlowConfig {
        dt: 0.1,
        target_c: Some(target),
        max_iters: 60,
        ..FlowConfig::default()
    };
    let result = run_flow(std::slice::from_ref(&patch), &config)?;
    let state = &result.states[0];
    println!(
        "target C = {target}; converged = {} after {} accepted steps",
        result.converged[0], state.iteration
    );
    for (i, (e, r)) in state
        .energy_trace
        .iter()
        .zip(state.residual_trace.iter())
        .enumerate()
        .take(12)
    {
        println!("  step {i:>2}: energy {e:.3e}  max |r - C| {r:.3e}");
    }
    println!(
        "final center scalar {:.6} (flow time {:.3})",
        state.center_scalar(),
        state.time
    );
    Ok(())
}

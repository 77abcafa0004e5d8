//! Neighborhood preservation as a function of the neighborhood size K.
//!
//! ```text
//! cargo run --release -p rfml --example npr_vs_k
//! ```

use rfml::data::{generate, DatasetKind, DatasetSpec};
use rfml::embed::{Method, MethodSpec};
use rfml::evaluation::npr_vs_k_sweep;
use rfml::flow::FlowConfig;

fn main() -> rfml::Result<()> {
    let cloud = generate(&DatasetSpec {
        kind: DatasetKind::Ellipsoid {
            a: 1.0,
            b: 1.0,
            c: 0.5,
        },
        n: 600,
        seed: 7,
    })?;
    let methods = [
        MethodSpec::Baseline(Method::Lle),
        MethodSpec::Baseline(Method::Isomap),
        MethodSpec::Rfml {
            final_method: Method::Isomap,
        },
    ];
    let flow = FlowConfig {
        dt: 0.5,
        max_iters: 100,
        ..FlowConfig::default()
    };
    let rows = npr_vs_k_sweep(&cloud, &methods, &[8, 10, 12, 14, 16], 2, &flow)?;
    println!("{:<8} {:>4} {:>8}", "method", "K", "npr");
    for row in rows {
        println!("{:<8} {:>4} {:>8.4}", row.method, row.k, row.npr);
    }
    Ok(())
}

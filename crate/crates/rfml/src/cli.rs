//! Command-line interface.
//!
//! Four subcommands wrap the library: `generate` writes synthetic datasets,
//! `embed` reduces one dataset with one method, `compare` scores several
//! methods on one dataset, and `diagnose` reports dimension and curvature
//! distributions. Exit codes: 0 success, 2 usage error, 3 dimension not
//! reducible, 4 flow divergence, 1 anything else. Every command honors
//! `--seed` end to end; fixed seeds give byte-identical artifacts.
//! Set `RFML_LOG=off` to silence progress messages on stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::data::{
    format_float17, generate, load_csv, save_csv, save_embedding_csv, save_report, DatasetKind,
    DatasetSpec, DimensionSummary, ExperimentReport, FlowSummary, HistogramSummary,
    MethodMetrics,
};
use crate::embed::{rfml_embed_full, run_method, EmbeddingResult, Method, MethodSpec, RfmlOptions};
use crate::error::{Error, Result};
use crate::evaluation::{curvature_histogram, nn_classify, npr, npr_vs_k_sweep};
use crate::flow::{FlowConfig, FlowResult};
use crate::geometry::{estimate_dimension, knn_search};
use crate::PointCloud;

#[derive(Parser)]
#[command(
    name = "rfml",
    version,
    about = "Curvature-aware manifold learning: per-patch Ricci flow, spherical alignment, spectral reduction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic benchmark dataset as CSV.
    Generate(GenerateArgs),
    /// Reduce a dataset with one method and write the embedding.
    Embed(EmbedArgs),
    /// Run several methods on one dataset and write a metric report.
    Compare(CompareArgs),
    /// Report dimension and curvature distributions of a dataset.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Synthetic dataset kind (swiss_roll | sphere | ellipsoid | gaussian).
    #[arg(long, conflicts_with = "input")]
    kind: Option<String>,
    /// Number of points for synthetic data.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Load the dataset from a CSV file instead of generating it.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Column to treat as integer labels (header name, or 0-based index for
    /// headerless files).
    #[arg(long)]
    label_column: Option<String>,
    /// Sphere radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ellipsoid semi-axes as `a,b,c`.
    #[arg(long, default_value = "1,1,0.5")]
    axes: String,
    /// Gaussian bump amplitude.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Gaussian bump width.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
}

#[derive(Args)]
struct FlowArgs {
    /// Flow step size.
    #[arg(long, default_value_t = 1e-3)]
    flow_dt: f64,
    /// Convergence tolerance on |r - C|, relative to max(1, |C|).
    #[arg(long, default_value_t = 1e-4)]
    flow_tol: f64,
    /// Maximum accepted flow steps per patch.
    #[arg(long, default_value_t = 5000)]
    flow_max_iters: usize,
    /// Fixed target curvature constant (chosen automatically when absent).
    #[arg(long)]
    target_c: Option<f64>,
    /// Disable adaptive step-size control.
    #[arg(long)]
    no_adaptive: bool,
    /// Target-coupling weight (1 = normalized flow toward C, 0 = raw flow).
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

impl FlowArgs {
    fn to_config(&self) -> FlowConfig {
        FlowConfig {
            dt: self.flow_dt,
            tol: self.flow_tol,
            max_iters: self.flow_max_iters,
            target_c: self.target_c,
            adaptive: !self.no_adaptive,
            lambda: self.lambda,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Method: pca | isomap | lle | lep | ltsa | rfml | rfml+<final>.
    #[arg(long, default_value = "rfml")]
    method: String,
    /// Final reducer for the rfml pipeline.
    #[arg(long, name = "final")]
    final_method: Option<String>,
    /// Neighborhood size.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Target dimension (estimated from the data when omitted; baselines
    /// require it).
    #[arg(long)]
    d: Option<usize>,
    /// Variance ratio for dimension estimation.
    #[arg(long, default_value_t = 0.95)]
    ratio: f64,
    /// Heat-kernel width for LEP.
    #[arg(long)]
    heat_sigma: Option<f64>,
    #[command(flatten)]
    flow: FlowArgs,
    /// RNG seed (echoed into the report).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append per-iteration flow records to `<out>.trace.jsonl`.
    #[arg(long)]
    trace: bool,
    /// Record wall-clock timings in the report (breaks byte reproducibility).
    #[arg(long)]
    timings: bool,
    /// Output embedding CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Comma-separated method list.
    #[arg(long, default_value = "pca,isomap,lle,lep,ltsa,rfml")]
    methods: String,
    /// Neighborhood size.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Target dimension.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Sweep these K values instead of a single-K comparison.
    #[arg(long)]
    k_sweep: Option<String>,
    /// Heat-kernel width for LEP.
    #[arg(long)]
    heat_sigma: Option<f64>,
    #[command(flatten)]
    flow: FlowArgs,
    /// RNG seed (dataset generation and classification splits).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock timings in the report (breaks byte reproducibility).
    #[arg(long)]
    timings: bool,
    /// Output report path.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Neighborhood size.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Variance ratio for dimension estimation.
    #[arg(long, default_value_t = 0.95)]
    ratio: f64,
    /// Curvature histogram bins.
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Histogram the raw (pre-clamp) scalar curvature.
    #[arg(long)]
    pre_clamp: bool,
    /// RNG seed for dataset generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output report path.
    #[arg(long, default_value = "diagnose.json")]
    out: PathBuf,
}

/// Parses argv, runs the command, and maps errors onto the exit-code
/// contract.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Diagnose(args) => cmd_diagnose(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) => 2,
        Error::NotReducible { .. } => 3,
        Error::FlowDivergence { .. } => 4,
        _ => 1,
    }
}

fn log_enabled() -> bool {
    !matches!(
        std::env::var("RFML_LOG").as_deref(),
        Ok("off") | Ok("quiet") | Ok("0")
    )
}

fn log(msg: &str) {
    if log_enabled() {
        eprintln!("rfml: {msg}");
    }
}

fn parse_axes(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "--axes expects a,b,c, got '{s}'"
        )));
    }
    let mut v = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("axis '{p}' is not a number")))?;
    }
    Ok((v[0], v[1], v[2]))
}

fn resolve_kind(args: &DatasetArgs) -> Result<DatasetKind> {
    let name = args
        .kind
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("either --kind or --in is required".into()))?;
    let kind = match DatasetKind::parse(name)? {
        DatasetKind::Sphere { .. } => DatasetKind::Sphere {
            radius: args.radius,
        },
        DatasetKind::Ellipsoid { .. } => {
            let (a, b, c) = parse_axes(&args.axes)?;
            DatasetKind::Ellipsoid { a, b, c }
        }
        DatasetKind::Gaussian { .. } => DatasetKind::Gaussian {
            amplitude: args.amplitude,
            width: args.width,
        },
        k => k,
    };
    Ok(kind)
}

/// Loads or generates the dataset and produces a config echo.
fn resolve_dataset(
    args: &DatasetArgs,
    seed: u64,
) -> Result<(PointCloud, BTreeMap<String, String>)> {
    let mut config = BTreeMap::new();
    config.insert("seed".into(), seed.to_string());
    match &args.input {
        Some(path) => {
            let cloud = load_csv(path, args.label_column.as_deref())?;
            config.insert("dataset".into(), path.display().to_string());
            if let Some(lc) = &args.label_column {
                config.insert("label_column".into(), lc.clone());
            }
            Ok((cloud, config))
        }
        None => {
            let kind = resolve_kind(args)?;
            config.insert("dataset".into(), kind.name().to_string());
            config.insert("n".into(), args.n.to_string());
            match &kind {
                DatasetKind::Sphere { radius } => {
                    config.insert("radius".into(), radius.to_string());
                }
                DatasetKind::Ellipsoid { a, b, c } => {
                    config.insert("axes".into(), format!("{a},{b},{c}"));
                }
                DatasetKind::Gaussian { amplitude, width } => {
                    config.insert("amplitude".into(), amplitude.to_string());
                    config.insert("width".into(), width.to_string());
                }
                DatasetKind::SwissRoll => {}
            }
            let cloud = generate(&DatasetSpec {
                kind,
                n: args.n,
                seed,
            })?;
            Ok((cloud, config))
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    if args.dataset.input.is_some() {
        return Err(Error::InvalidParameter(
            "generate takes --kind, not --in".into(),
        ));
    }
    let (cloud, _) = resolve_dataset(&args.dataset, args.seed)?;
    save_csv(&cloud, &args.out)?;
    log(&format!(
        "wrote {} points of dimension {} to {}",
        cloud.n_points(),
        cloud.dim(),
        args.out.display()
    ));
    Ok(())
}

fn parse_method(method: &str, final_method: Option<&str>) -> Result<MethodSpec> {
    let spec = MethodSpec::parse(method)?;
    match (spec, final_method) {
        (MethodSpec::Rfml { .. }, Some(f)) => Ok(MethodSpec::Rfml {
            final_method: Method::parse(f)?,
        }),
        (MethodSpec::Baseline(_), Some(_)) => Err(Error::InvalidParameter(
            "--final only applies to --method rfml".into(),
        )),
        (spec, None) => Ok(spec),
    }
}

fn write_trace(path: &Path, flow: &FlowResult) -> Result<()> {
    let mut out = String::new();
    for (patch, state) in flow.states.iter().enumerate() {
        for it in 1..state.energy_trace.len() {
            out.push_str(&format!(
                "{{\"patch\": {patch}, \"iteration\": {it}, \"energy\": {}, \"max_residual\": {}}}\n",
                format_float17(state.energy_trace[it]),
                format_float17(state.residual_trace[it]),
            ));
        }
    }
    crate::data::save_trace(path, &out)
}

fn trace_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|f| f.to_string_lossy().to_string())
        .unwrap_or_else(|| "embedding".into());
    name.push_str(".trace.jsonl");
    out.with_file_name(name)
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    if args.dataset.input.is_none() && args.dataset.kind.is_none() {
        return Err(Error::InvalidParameter(
            "embed needs a dataset: --in <csv> or --kind <name>".into(),
        ));
    }
    let started = Instant::now();
    let (cloud, mut config) = resolve_dataset(&args.dataset, args.seed)?;
    let spec = parse_method(&args.method, args.final_method.as_deref())?;
    let flow_config = args.flow.to_config();

    config.insert("method".into(), spec.name());
    config.insert("k".into(), args.k.to_string());
    if let Some(d) = args.d {
        config.insert("d".into(), d.to_string());
    }
    config.insert("flow_dt".into(), args.flow.flow_dt.to_string());
    config.insert("flow_tol".into(), args.flow.flow_tol.to_string());
    config.insert("flow_max_iters".into(), args.flow.flow_max_iters.to_string());

    log(&format!("embedding with {}", spec.name()));
    let (embedding, flow_result): (EmbeddingResult, Option<FlowResult>) = match spec {
        MethodSpec::Rfml { final_method } => {
            let opts = RfmlOptions {
                k: args.k,
                d: args.d,
                ratio: args.ratio,
                flow: flow_config,
                final_method,
                heat_sigma: args.heat_sigma,
            };
            let (e, f) = rfml_embed_full(&cloud, &opts)?;
            (e, Some(f))
        }
        baseline => (
            run_method(&cloud, &baseline, args.k, args.d, &flow_config, args.heat_sigma)?,
            None,
        ),
    };

    save_embedding_csv(&embedding.coords, &args.out)?;

    if args.trace {
        match &flow_result {
            Some(f) => write_trace(&trace_path(&args.out), f)?,
            None => log("--trace has no effect for baseline methods"),
        }
    }

    let score = npr(&cloud, &embedding, args.k)?;
    let mut report = ExperimentReport {
        config,
        metrics: vec![MethodMetrics {
            method: embedding.method.clone(),
            k: args.k,
            d: embedding.dim(),
            npr: Some(score.value),
            accuracy: None,
        }],
        flow: embedding.diagnostics.as_ref().map(|diag| FlowSummary {
            target_c: diag.target_c,
            total_energy: diag.total_energy,
            converged_fraction: diag.converged_fraction,
            max_iterations: diag.max_iterations,
            flow_skipped: diag.flow_skipped,
        }),
        ..ExperimentReport::default()
    };
    if args.timings {
        report
            .timings
            .insert("total_seconds".into(), started.elapsed().as_secs_f64());
    }
    save_report(&report, &args.out.with_extension("report.json"))?;
    log(&format!(
        "wrote {} x {} embedding to {} (npr {:.4})",
        embedding.n_points(),
        embedding.dim(),
        args.out.display(),
        score.value
    ));
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    if args.dataset.input.is_none() && args.dataset.kind.is_none() {
        return Err(Error::InvalidParameter(
            "compare needs a dataset: --in <csv> or --kind <name>".into(),
        ));
    }
    let started = Instant::now();
    let (cloud, mut config) = resolve_dataset(&args.dataset, args.seed)?;
    let flow_config = args.flow.to_config();
    let specs: Vec<MethodSpec> = args
        .methods
        .split(',')
        .map(|m| MethodSpec::parse(m.trim()))
        .collect::<Result<_>>()?;
    config.insert("methods".into(), args.methods.clone());
    config.insert("k".into(), args.k.to_string());
    config.insert("d".into(), args.d.to_string());

    let mut report = ExperimentReport {
        config,
        ..ExperimentReport::default()
    };

    match &args.k_sweep {
        Some(sweep) => {
            let k_values: Vec<usize> = sweep
                .split(',')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| {
                        Error::InvalidParameter(format!("bad K value '{s}' in --k-sweep"))
                    })
                })
                .collect::<Result<_>>()?;
            report
                .config
                .insert("k_sweep".into(), sweep.clone());
            log(&format!(
                "sweeping {} methods over K = {k_values:?}",
                specs.len()
            ));
            let rows = npr_vs_k_sweep(&cloud, &specs, &k_values, args.d, &flow_config)?;
            for row in rows {
                println!("{:<10} K={:<3} npr={:.4}", row.method, row.k, row.npr);
                report.metrics.push(MethodMetrics {
                    method: row.method,
                    k: row.k,
                    d: args.d,
                    npr: Some(row.npr),
                    accuracy: None,
                });
            }
        }
        None => {
            for spec in &specs {
                log(&format!("running {}", spec.name()));
                let embedding =
                    run_method(&cloud, spec, args.k, Some(args.d), &flow_config, args.heat_sigma)?;
                let score = npr(&cloud, &embedding, args.k)?;
                let accuracy = match cloud.labels() {
                    Some(labels) => {
                        Some(nn_classify(&embedding.coords, labels, args.seed)?.accuracy)
                    }
                    None => None,
                };
                match (accuracy, log_enabled()) {
                    (Some(acc), _) => println!(
                        "{:<10} npr={:.4} accuracy={:.4}",
                        embedding.method, score.value, acc
                    ),
                    _ => println!("{:<10} npr={:.4}", embedding.method, score.value),
                }
                if let Some(diag) = &embedding.diagnostics {
                    report.flow = Some(FlowSummary {
                        target_c: diag.target_c,
                        total_energy: diag.total_energy,
                        converged_fraction: diag.converged_fraction,
                        max_iterations: diag.max_iterations,
                        flow_skipped: diag.flow_skipped,
                    });
                }
                report.metrics.push(MethodMetrics {
                    method: spec.name(),
                    k: args.k,
                    d: args.d,
                    npr: Some(score.value),
                    accuracy,
                });
            }
        }
    }

    if args.timings {
        report
            .timings
            .insert("total_seconds".into(), started.elapsed().as_secs_f64());
    }
    save_report(&report, &args.out)?;
    log(&format!("wrote report to {}", args.out.display()));
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    if args.dataset.input.is_none() && args.dataset.kind.is_none() {
        return Err(Error::InvalidParameter(
            "diagnose needs a dataset: --in <csv> or --kind <name>".into(),
        ));
    }
    let (cloud, mut config) = resolve_dataset(&args.dataset, args.seed)?;
    config.insert("k".into(), args.k.to_string());
    config.insert("ratio".into(), args.ratio.to_string());
    config.insert("bins".into(), args.bins.to_string());

    let graph = knn_search(&cloud, args.k)?;
    let dims = estimate_dimension(&cloud, &graph, args.ratio)?;
    println!("dimension histogram (d -> count):");
    for (d, count) in &dims.histogram {
        println!("  {d}: {count}");
    }
    println!(
        "chosen d = {}{}",
        dims.chosen_d,
        if dims.not_reducible {
            " (not reducible)"
        } else {
            ""
        }
    );

    let hist = curvature_histogram(&cloud, args.k, args.bins, args.pre_clamp)?;
    println!("curvature histogram:");
    for (i, count) in hist.counts.iter().enumerate() {
        println!(
            "  [{:+.4}, {:+.4}): {count}",
            hist.bin_edges[i],
            hist.bin_edges[i + 1]
        );
    }

    let report = ExperimentReport {
        config,
        dimension: Some(DimensionSummary {
            chosen_d: dims.chosen_d,
            ratio: dims.ratio,
            not_reducible: dims.not_reducible,
            histogram: dims.histogram.clone(),
        }),
        curvature: Some(HistogramSummary {
            bin_edges: hist.bin_edges.clone(),
            counts: hist.counts.clone(),
        }),
        ..ExperimentReport::default()
    };
    save_report(&report, &args.out)?;
    log(&format!("wrote report to {}", args.out.display()));
    Ok(())
}

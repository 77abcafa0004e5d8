//! Discrete per-patch Ricci flow.
//!
//! The flow's state variable is the V-field: at every patch point, the
//! normal components of the chart's tangent vectors (one `codim`-vector per
//! tangent direction). Each step contracts the discrete gradient of the
//! V-field into a Ricci estimate, nudges the V-field toward the Einstein
//! condition `Ric = C g`, rebuilds the metric as `g = I + V^T V`, and
//! re-estimates the gradient by patch-wide least squares. Patches evolve
//! independently of one another; the only shared datum is the target
//! curvature constant `C`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::patch::{
    curvature, metric_from_derivatives, tangent_derivatives, CurvatureReport, QuadraticPatch,
};

/// Step-size, tolerance, and termination settings for the flow.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Initial (and maximal) step size.
    pub dt: f64,
    /// Convergence tolerance on `|r - C|`, relative to `max(1, |C|)`.
    pub tol: f64,
    /// Maximum accepted steps per patch.
    pub max_iters: usize,
    /// Target curvature constant; chosen automatically when absent.
    pub target_c: Option<f64>,
    /// Halve the step on energy increase, double back after ten clean steps.
    pub adaptive: bool,
    /// Weight of the target-curvature coupling: 1 drives `Ric -> C g`,
    /// 0 reproduces the raw uncoupled flow.
    pub lambda: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            tol: 1e-4,
            max_iters: 5000,
            target_c: None,
            adaptive: true,
            lambda: 1.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "flow dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "flow tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "flow max_iters must be at least 1".into(),
            ));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("flow lambda must be finite".into()));
        }
        Ok(())
    }
}

/// Evolving state of one patch.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub patch_index: usize,
    pub d: usize,
    pub codim: usize,
    /// (K+1) x d tangent coordinates, fixed for the whole flow (center row 0).
    pub tangent_coords: DMatrix<f64>,
    /// Per patch point: codim x d matrix whose column `j` is `V_j`.
    pub v_field: Vec<DMatrix<f64>>,
    /// Per tangent index `j`: codim x d matrix whose column `k` is the
    /// symmetrized discrete `grad_k V_j` at the center.
    pub grad_v: Vec<DMatrix<f64>>,
    /// Per patch point: induced metric `I + V^T V`.
    pub metrics: Vec<DMatrix<f64>>,
    /// Per patch point: scalar curvature `trace(g^{-1} ric) / d`.
    pub ricci_scalars: Vec<f64>,
    /// Accepted steps so far.
    pub iteration: usize,
    /// Flow time: sum of accepted step sizes.
    pub time: f64,
    /// Center energy `|r - C|^2` after every accepted step (index 0 = initial).
    pub energy_trace: Vec<f64>,
    /// Max over patch points of `|r(p) - C|`, parallel to `energy_trace`.
    pub residual_trace: Vec<f64>,
    /// Times the discrete gradient fit needed a ridge fallback.
    pub ridge_fallbacks: u32,
    /// Accepted steps on which the metric-equivalence bound was violated.
    pub metric_violations: u32,
}

impl FlowState {
    pub fn n_points(&self) -> usize {
        self.v_field.len()
    }

    /// Scalar curvature at the patch center.
    pub fn center_scalar(&self) -> f64 {
        self.ricci_scalars[0]
    }
}

/// Outcome of flowing all patches.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub states: Vec<FlowState>,
    pub converged: Vec<bool>,
    /// Target constant actually used.
    pub c_used: f64,
    /// `sum_i |r_i(center) - C|^2` at termination.
    pub total_energy: f64,
    /// Deformed local coordinates per patch: (K+1) x D, tangent block
    /// unchanged, normal block rebuilt from the flowed V-field.
    pub flowed_patches: Vec<DMatrix<f64>>,
}

impl FlowResult {
    pub fn converged_fraction(&self) -> f64 {
        if self.converged.is_empty() {
            return 1.0;
        }
        self.converged.iter().filter(|&&c| c).count() as f64 / self.converged.len() as f64
    }
}

/// Target constant: the mean pointwise scalar curvature over patch centers,
/// floored at `1e-8` so the target stays non-negative.
pub fn choose_target_c(reports: &[CurvatureReport]) -> f64 {
    if reports.is_empty() {
        return 1e-8;
    }
    let mean = reports.iter().map(|r| r.scalar).sum::<f64>() / reports.len() as f64;
    mean.max(1e-8)
}

/// Ricci contraction of the symmetrized V-field gradient:
/// `ric_jk = sum_l (<grad_l V_l, grad_k V_j> - <grad_l V_j, grad_l V_k>)`.
pub fn ricci_from_gradient(grad_v: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = grad_v.len();
    let mut ric = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let mut acc = 0.0;
            for l in 0..d {
                acc += grad_v[l].column(l).dot(&grad_v[j].column(k));
                acc -= grad_v[j].column(l).dot(&grad_v[k].column(l));
            }
            ric[(j, k)] = acc;
        }
    }
    ric
}

/// Least-squares linear fit of the V-field over the patch; the constant term
/// is discarded and the slopes are symmetrized over `(j, k)`.
///
/// Returns the gradient tensor and whether a ridge fallback was needed.
pub fn discrete_gradient(
    v_field: &[DMatrix<f64>],
    coords: &DMatrix<f64>,
) -> Result<(Vec<DMatrix<f64>>, bool)> {
    let m = coords.nrows();
    let d = coords.ncols();
    if v_field.len() != m {
        return Err(Error::InvalidData(format!(
            "v-field has {} entries for {m} patch points",
            v_field.len()
        )));
    }
    if m < d + 1 {
        return Err(Error::InvalidData(format!(
            "patch of {m} points cannot support a linear fit in {d} variables"
        )));
    }
    let codim = v_field[0].nrows();

    // Shared design [1 | t] for all (j, alpha) targets.
    let mut design = DMatrix::zeros(m, d + 1);
    for p in 0..m {
        design[(p, 0)] = 1.0;
        for a in 0..d {
            design[(p, 1 + a)] = coords[(p, a)];
        }
    }
    let gram = design.transpose() * &design;
    let (chol, ridged) = match Cholesky::new(gram.clone()) {
        Some(c) => (c, false),
        None => {
            let mut g = gram;
            let bump = 1e-8 * (g.trace() / (d + 1) as f64).max(1.0);
            for i in 0..d + 1 {
                g[(i, i)] += bump;
            }
            let c = Cholesky::new(g).ok_or_else(|| {
                Error::Numerical("gradient fit singular even with ridge".into())
            })?;
            (c, true)
        }
    };

    let mut raw: Vec<DMatrix<f64>> = vec![DMatrix::zeros(codim, d); d];
    for j in 0..d {
        for a in 0..codim {
            let target = DVector::from_fn(m, |p, _| v_field[p][(a, j)]);
            let rhs = design.transpose() * target;
            let theta = chol.solve(&rhs);
            for k in 0..d {
                raw[j][(a, k)] = theta[1 + k];
            }
        }
    }

    let mut sym: Vec<DMatrix<f64>> = vec![DMatrix::zeros(codim, d); d];
    for j in 0..d {
        for k in 0..d {
            for a in 0..codim {
                sym[j][(a, k)] = 0.5 * (raw[j][(a, k)] + raw[k][(a, j)]);
            }
        }
    }
    Ok((sym, ridged))
}

fn scalars_from(v_field: &[DMatrix<f64>], grad_v: &[DMatrix<f64>], d: usize) -> Vec<f64> {
    let ric = ricci_from_gradient(grad_v);
    v_field
        .iter()
        .map(|v| {
            let g = metric_from_derivatives(v).g;
            match Cholesky::new(g) {
                Some(ch) => (ch.inverse() * &ric).trace() / d as f64,
                None => f64::NAN,
            }
        })
        .collect()
}

/// Initial flow state: V-field from analytic chart derivatives, gradient
/// from the Hessian slices (exact for a quadratic chart), metric and scalar
/// curvature derived from them.
pub fn init_flow_state(patch: &QuadraticPatch) -> FlowState {
    let m = patch.neighbor_coords.nrows();
    let d = patch.d;
    let codim = patch.codim();

    let v_field: Vec<DMatrix<f64>> = (0..m)
        .map(|p| {
            let t = DVector::from_fn(d, |i, _| patch.neighbor_coords[(p, i)]);
            tangent_derivatives(patch, &t)
        })
        .collect();

    // grad_k V_j^alpha = h^alpha_{jk} exactly for a quadratic chart.
    let hessians: Vec<DMatrix<f64>> = (0..codim).map(|a| patch.hessian(a)).collect();
    let grad_v: Vec<DMatrix<f64>> = (0..d)
        .map(|j| DMatrix::from_fn(codim, d, |a, k| hessians[a][(j, k)]))
        .collect();

    let metrics: Vec<DMatrix<f64>> = v_field
        .iter()
        .map(|v| metric_from_derivatives(v).g)
        .collect();
    let ricci_scalars = scalars_from(&v_field, &grad_v, d);

    FlowState {
        patch_index: patch.center_index,
        d,
        codim,
        tangent_coords: patch.neighbor_coords.clone(),
        v_field,
        grad_v,
        metrics,
        ricci_scalars,
        iteration: 0,
        time: 0.0,
        energy_trace: Vec::new(),
        residual_trace: Vec::new(),
        ridge_fallbacks: 0,
        metric_violations: 0,
    }
}

/// One explicit Euler step of the flow.
///
/// At every patch point, each tangent slot moves by `dt * F_j` with
/// `F_j = -(ric_jj - lambda C g_jj) V_j / (1 + |V_j|^2)`, where `ric` and
/// `g` are the center quantities (the chart's equations are all evaluated
/// at the patch center) and the pseudo-inverse denominator uses the local
/// `V_j`. The coupling therefore vanishes exactly on `ric = C g(center)`,
/// so the center scalar converges to `C` rather than to a patch-averaged
/// compromise. The metric, the discrete gradient, and the scalar curvature
/// are recomputed from the updated field.
pub fn flow_step(state: &FlowState, dt: f64, c: f64, lambda: f64) -> Result<FlowState> {
    let d = state.d;
    let ric = ricci_from_gradient(&state.grad_v);
    let g_center = &state.metrics[0];

    let mut v_next = state.v_field.clone();
    for v in v_next.iter_mut() {
        for j in 0..d {
            let norm_sq = v.column(j).norm_squared();
            let drive = -(ric[(j, j)] - lambda * c * g_center[(j, j)]);
            let scale = 1.0 + dt * drive / (1.0 + norm_sq);
            for a in 0..state.codim {
                v[(a, j)] *= scale;
            }
        }
    }
    if v_next
        .iter()
        .any(|v| v.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::FlowDivergence {
            patch: state.patch_index,
            iteration: state.iteration + 1,
        });
    }

    let (grad_v, ridged) = discrete_gradient(&v_next, &state.tangent_coords)?;
    let metrics: Vec<DMatrix<f64>> = v_next
        .iter()
        .map(|v| metric_from_derivatives(v).g)
        .collect();
    let ricci_scalars = scalars_from(&v_next, &grad_v, d);
    if ricci_scalars.iter().any(|r| !r.is_finite()) {
        return Err(Error::FlowDivergence {
            patch: state.patch_index,
            iteration: state.iteration + 1,
        });
    }

    Ok(FlowState {
        patch_index: state.patch_index,
        d,
        codim: state.codim,
        tangent_coords: state.tangent_coords.clone(),
        v_field: v_next,
        grad_v,
        metrics,
        ricci_scalars,
        iteration: state.iteration + 1,
        time: state.time + dt,
        energy_trace: state.energy_trace.clone(),
        residual_trace: state.residual_trace.clone(),
        ridge_fallbacks: state.ridge_fallbacks + u32::from(ridged),
        metric_violations: state.metric_violations,
    })
}

/// Metric-equivalence check: the whitened metric's eigenvalues must lie in
/// `[exp(-2 c t), exp(2 c t)]` with 5% multiplicative slack.
pub fn metric_equivalence_monitor(
    g_now: &DMatrix<f64>,
    g0: &DMatrix<f64>,
    elapsed_t: f64,
    c_bound: f64,
) -> bool {
    let eig0 = g0.clone().symmetric_eigen();
    let mut inv_sqrt = DMatrix::zeros(g0.nrows(), g0.ncols());
    for (i, &l) in eig0.eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            return false;
        }
        let v = eig0.eigenvectors.column(i).clone_owned();
        inv_sqrt.syger(1.0 / l.sqrt(), &v, &v, 1.0);
    }
    for r in 0..g0.nrows() {
        for c in (r + 1)..g0.ncols() {
            inv_sqrt[(r, c)] = inv_sqrt[(c, r)];
        }
    }
    let w = &inv_sqrt * g_now * &inv_sqrt;
    let bound = (2.0 * c_bound * elapsed_t).exp();
    let lo = (1.0 / bound) / 1.05;
    let hi = bound * 1.05;
    w.symmetric_eigen()
        .eigenvalues
        .iter()
        .all(|&l| l >= lo && l <= hi)
}

fn center_energy(state: &FlowState, c: f64) -> f64 {
    let r = state.center_scalar() - c;
    r * r
}

fn max_residual(state: &FlowState, c: f64) -> f64 {
    state
        .ricci_scalars
        .iter()
        .map(|r| (r - c).abs())
        .fold(0.0, f64::max)
}

/// Max absolute generalized Ricci eigenvalue at the center, used as the
/// running curvature bound for the equivalence monitor.
fn center_ricci_bound(state: &FlowState) -> f64 {
    let ric = ricci_from_gradient(&state.grad_v);
    let g = &state.metrics[0];
    match Cholesky::new(g.clone()) {
        Some(ch) => (ch.inverse() * ric)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs())),
        None => f64::INFINITY,
    }
}

/// Accepted steps with relative improvement below this for 8 steps in a row
/// stop the patch early; rank-deficient fields make the energy exactly
/// stationary while the V-field keeps growing.
const STAGNATION_WINDOW: u32 = 8;
const STAGNATION_EPS: f64 = 1e-14;

fn flow_one_patch(
    patch: &QuadraticPatch,
    c: f64,
    config: &FlowConfig,
) -> Result<(FlowState, bool)> {
    let mut state = init_flow_state(patch);
    let tol_abs = config.tol * c.abs().max(1.0);
    let mut energy = center_energy(&state, c);
    state.energy_trace.push(energy);
    state.residual_trace.push(max_residual(&state, c));

    let g0 = state.metrics[0].clone();
    let mut c_bound = center_ricci_bound(&state);

    let mut dt = config.dt;
    let dt_floor = config.dt * 1e-12;
    let mut streak: u32 = 0;
    let mut stagnant: u32 = 0;
    let mut converged = (state.center_scalar() - c).abs() <= tol_abs;
    let attempt_cap = 2 * config.max_iters + 128;
    let mut attempts = 0usize;

    while !converged && state.iteration < config.max_iters && attempts < attempt_cap {
        attempts += 1;
        let next = match flow_step(&state, dt, c, config.lambda) {
            Ok(n) => n,
            Err(Error::FlowDivergence { .. }) if config.adaptive && dt > dt_floor => {
                dt /= 2.0;
                streak = 0;
                continue;
            }
            Err(e) => return Err(e),
        };
        let e_next = center_energy(&next, c);
        if config.adaptive && e_next > energy {
            dt /= 2.0;
            streak = 0;
            if dt < dt_floor {
                break;
            }
            continue;
        }

        let improvement = energy - e_next;
        state = next;
        energy = e_next;
        state.energy_trace.push(energy);
        state.residual_trace.push(max_residual(&state, c));

        c_bound = c_bound.max(center_ricci_bound(&state));
        if !metric_equivalence_monitor(&state.metrics[0], &g0, state.time, c_bound) {
            state.metric_violations += 1;
        }

        streak += 1;
        if config.adaptive && streak >= 10 {
            dt = (dt * 2.0).min(config.dt);
            streak = 0;
        }

        converged = (state.center_scalar() - c).abs() <= tol_abs;

        if improvement <= STAGNATION_EPS * energy.max(1e-300) {
            stagnant += 1;
            if stagnant >= STAGNATION_WINDOW {
                break;
            }
        } else {
            stagnant = 0;
        }
    }

    Ok((state, converged))
}

/// Rebuilds the patch's local coordinates from a flowed V-field: a quadratic
/// chart whose gradient field best matches the final V-field in least
/// squares, evaluated at the unchanged tangent coordinates. The chart's
/// constant term is carried over from the original fit.
fn reconstruct_coords(patch: &QuadraticPatch, state: &FlowState) -> Result<DMatrix<f64>> {
    let m = state.tangent_coords.nrows();
    let d = state.d;
    let codim = state.codim;
    let n_lin = d;
    let n_quad = d * (d + 1) / 2;
    let unknowns = n_lin + n_quad;

    // Rows: one equation per (point, tangent slot).
    let mut design = DMatrix::zeros(m * d, unknowns);
    for p in 0..m {
        for j in 0..d {
            let row = p * d + j;
            design[(row, j)] = 1.0;
            let mut q = 0;
            for a in 0..d {
                for b in a..d {
                    let col = n_lin + q;
                    let mut v = 0.0;
                    if a == b {
                        if j == a {
                            v = state.tangent_coords[(p, a)];
                        }
                    } else {
                        if j == a {
                            v += state.tangent_coords[(p, b)];
                        }
                        if j == b {
                            v += state.tangent_coords[(p, a)];
                        }
                    }
                    design[(row, col)] = v;
                    q += 1;
                }
            }
        }
    }
    let mut gram = design.transpose() * &design;
    let chol = match Cholesky::new(gram.clone()) {
        Some(c) => c,
        None => {
            let bump = 1e-10 * (gram.trace() / unknowns as f64).max(1.0);
            for i in 0..unknowns {
                gram[(i, i)] += bump;
            }
            Cholesky::new(gram).ok_or_else(|| {
                Error::Numerical(format!(
                    "chart reconstruction singular on patch {}",
                    state.patch_index
                ))
            })?
        }
    };

    let mut coords = DMatrix::zeros(m, patch.ambient_dim);
    coords
        .view_mut((0, 0), (m, d))
        .copy_from(&state.tangent_coords);

    for a in 0..codim {
        let target = DVector::from_fn(m * d, |row, _| {
            let p = row / d;
            let j = row % d;
            state.v_field[p][(a, j)]
        });
        let rhs = design.transpose() * target;
        let theta = chol.solve(&rhs);

        let lin = theta.rows(0, n_lin).clone_owned();
        let mut hess = DMatrix::zeros(d, d);
        let mut q = 0;
        for i in 0..d {
            for j in i..d {
                hess[(i, j)] = theta[n_lin + q];
                hess[(j, i)] = theta[n_lin + q];
                q += 1;
            }
        }
        let constant = patch.coeffs[(a, 0)];
        for p in 0..m {
            let t = DVector::from_fn(d, |i, _| state.tangent_coords[(p, i)]);
            let value = constant + lin.dot(&t) + 0.5 * (&hess * &t).dot(&t);
            coords[(p, d + a)] = value;
        }
    }
    Ok(coords)
}

/// Flows every patch independently until its center scalar curvature is
/// within tolerance of `C` (or the step budget runs out), then rebuilds the
/// deformed local coordinates.
///
/// Non-converged patches are flagged but still returned; true divergence
/// (non-finite values at the smallest step size) is an error naming the
/// patch.
pub fn run_flow(patches: &[QuadraticPatch], config: &FlowConfig) -> Result<FlowResult> {
    config.validate()?;
    if patches.is_empty() {
        return Err(Error::InvalidData("no patches to flow".into()));
    }

    let c = match config.target_c {
        Some(c) => c,
        None => {
            let reports: Vec<CurvatureReport> = patches
                .iter()
                .map(|p| curvature(p, &DVector::zeros(p.d)))
                .collect::<Result<_>>()?;
            choose_target_c(&reports)
        }
    };

    let outcomes: Vec<Result<(FlowState, bool, DMatrix<f64>)>> = patches
        .par_iter()
        .map(|patch| {
            let (state, converged) = flow_one_patch(patch, c, config)?;
            let coords = reconstruct_coords(patch, &state)?;
            Ok((state, converged, coords))
        })
        .collect();

    let mut states = Vec::with_capacity(patches.len());
    let mut converged = Vec::with_capacity(patches.len());
    let mut flowed_patches = Vec::with_capacity(patches.len());
    for outcome in outcomes {
        let (state, ok, coords) = outcome?;
        states.push(state);
        converged.push(ok);
        flowed_patches.push(coords);
    }

    let total_energy = states.iter().map(|s| center_energy(s, c)).sum();

    Ok(FlowResult {
        states,
        converged,
        c_used: c,
        total_energy,
        flowed_patches,
    })
}

//! Second-order local charts and extrinsic curvature.
//!
//! Each patch is modeled as a graph over its tangent coordinates,
//! `n^a = f^a(t)` with `f^a` a full quadratic polynomial per normal
//! direction. The chart's first derivatives give the induced metric
//! `g = I + V^T V`, its second derivatives give the second fundamental form,
//! and the Gauss equation turns those into the intrinsic Riemann and Ricci
//! curvature (the ambient space is Euclidean, so its curvature contributes
//! nothing).

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Number of monomials in the symmetric quadratic basis:
/// `1 + d + d(d+1)/2` (constant, linear, pairs with i <= j).
pub fn basis_size(d: usize) -> usize {
    1 + d + d * (d + 1) / 2
}

/// Column of the `x^i x^j` monomial (`i <= j`) in the basis.
pub(crate) fn quad_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < d);
    1 + d + i * (2 * d - i + 1) / 2 + (j - i)
}

/// Evaluates the monomial basis at a tangent point.
pub(crate) fn phi_row(t: &DVector<f64>) -> DVector<f64> {
    let d = t.len();
    let mut row = DVector::zeros(basis_size(d));
    row[0] = 1.0;
    for i in 0..d {
        row[1 + i] = t[i];
    }
    for i in 0..d {
        for j in i..d {
            row[quad_index(d, i, j)] = t[i] * t[j];
        }
    }
    row
}

/// Gradient of the monomial basis: row `a` is `dPhi/dx^a` at `t`.
pub(crate) fn phi_grad(t: &DVector<f64>) -> DMatrix<f64> {
    let d = t.len();
    let mut grad = DMatrix::zeros(d, basis_size(d));
    for a in 0..d {
        grad[(a, 1 + a)] = 1.0;
        for i in 0..d {
            for j in i..d {
                let col = quad_index(d, i, j);
                let mut v = 0.0;
                if a == i {
                    v += t[j];
                }
                if a == j {
                    v += t[i];
                }
                grad[(a, col)] = v;
            }
        }
    }
    grad
}

/// A fitted quadratic chart at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPatch {
    /// Global index of the patch center.
    pub center_index: usize,
    /// Tangent dimension.
    pub d: usize,
    /// Ambient dimension.
    pub ambient_dim: usize,
    /// (D - d) x B coefficient matrix; row `a` holds the polynomial for
    /// normal direction `a`.
    pub coeffs: DMatrix<f64>,
    /// (K + 1) x d tangent coordinates of the patch members (center first).
    pub neighbor_coords: DMatrix<f64>,
    /// Set when [`enforce_elliptic`] had to clip a Hessian eigenvalue.
    pub elliptic_clamped: bool,
}

impl QuadraticPatch {
    pub fn codim(&self) -> usize {
        self.ambient_dim - self.d
    }

    /// Evaluates the chart: normal coordinates at tangent point `t`.
    pub fn evaluate(&self, t: &DVector<f64>) -> DVector<f64> {
        &self.coeffs * phi_row(t)
    }

    /// Hessian slice of normal direction `a` (d x d, symmetric).
    pub fn hessian(&self, a: usize) -> DMatrix<f64> {
        let d = self.d;
        let mut h = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let c = self.coeffs[(a, quad_index(d, i, j))];
                if i == j {
                    h[(i, i)] = 2.0 * c;
                } else {
                    h[(i, j)] = c;
                    h[(j, i)] = c;
                }
            }
        }
        h
    }

    /// Writes a symmetric Hessian back into the quadratic coefficients of
    /// normal direction `a`.
    pub(crate) fn set_hessian(&mut self, a: usize, h: &DMatrix<f64>) {
        let d = self.d;
        for i in 0..d {
            for j in i..d {
                let col = quad_index(d, i, j);
                self.coeffs[(a, col)] = if i == j { h[(i, i)] / 2.0 } else { h[(i, j)] };
            }
        }
    }
}

/// Induced Riemannian metric at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub g: DMatrix<f64>,
}

impl MetricTensor {
    pub fn det(&self) -> f64 {
        self.g.determinant()
    }
}

/// Second fundamental form: one symmetric d x d slice per normal direction.
/// Constant over the patch for a quadratic chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    pub slices: Vec<DMatrix<f64>>,
}

/// (0,4) Riemann tensor stored flat, plus its contractions.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub d: usize,
    /// `rm[((j d + k) d + l) d + m]` = Rm(e_j, e_k, e_l, e_m).
    pub rm: Vec<f64>,
    pub ricci: DMatrix<f64>,
    /// Pointwise scalar `trace(g^{-1} ricci) / d`.
    pub scalar: f64,
    pub sectional_min: f64,
    pub sectional_max: f64,
}

impl CurvatureReport {
    pub fn rm_at(&self, j: usize, k: usize, l: usize, m: usize) -> f64 {
        self.rm[((j * self.d + k) * self.d + l) * self.d + m]
    }
}

/// Result of the spherical-condition test on a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCondition {
    /// Sectional curvature bounded below by `-1e-9` at the center.
    pub nonneg: bool,
    /// `max K / min K` over coordinate 2-planes, defined only when the
    /// minimum is strictly positive.
    pub pinch_ratio: Option<f64>,
}

/// Least-squares fit of the quadratic chart.
///
/// `coords` are full local coordinates (rows = patch members, first `d`
/// columns tangent, rest normal). Each normal direction is fit
/// independently, minimizing the squared residual plus `ridge` times the
/// squared coefficient norm. With `ridge = 0` a singular system is an error;
/// callers should retry with a positive ridge.
pub fn fit_quadratic(coords: &DMatrix<f64>, d: usize, ridge: f64) -> Result<QuadraticPatch> {
    fit_quadratic_at(coords, d, ridge, 0)
}

/// [`fit_quadratic`] with an explicit center index recorded on the patch.
pub fn fit_quadratic_at(
    coords: &DMatrix<f64>,
    d: usize,
    ridge: f64,
    center_index: usize,
) -> Result<QuadraticPatch> {
    let ambient = coords.ncols();
    if d >= ambient {
        return Err(Error::InvalidParameter(format!(
            "tangent dimension {d} must be below ambient dimension {ambient}"
        )));
    }
    let m = coords.nrows();
    if m == 0 {
        return Err(Error::InvalidData("empty patch".into()));
    }
    if ridge < 0.0 {
        return Err(Error::InvalidParameter(format!("negative ridge {ridge}")));
    }
    let b = basis_size(d);
    let codim = ambient - d;

    let mut design = DMatrix::zeros(m, b);
    for r in 0..m {
        let t = DVector::from_fn(d, |i, _| coords[(r, i)]);
        design.row_mut(r).copy_from(&phi_row(&t).transpose());
    }

    let mut normal_eq = design.transpose() * &design;
    for i in 0..b {
        normal_eq[(i, i)] += ridge;
    }
    let chol = Cholesky::new(normal_eq).ok_or_else(|| {
        Error::Numerical(format!(
            "singular normal equations for quadratic fit (m = {m}, basis = {b}, ridge = {ridge})"
        ))
    })?;

    let mut coeffs = DMatrix::zeros(codim, b);
    for a in 0..codim {
        let target = coords.column(d + a).clone_owned();
        let rhs = design.transpose() * target;
        let w = chol.solve(&rhs);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite quadratic fit for normal direction {a}"
            )));
        }
        coeffs.row_mut(a).copy_from(&w.transpose());
    }

    Ok(QuadraticPatch {
        center_index,
        d,
        ambient_dim: ambient,
        coeffs,
        neighbor_coords: coords.view((0, 0), (m, d)).clone_owned(),
        elliptic_clamped: false,
    })
}

/// Default ridge used when the plain fit is singular or underdetermined:
/// `1e-8 * trace(A^T A) / B`.
pub fn default_ridge(coords: &DMatrix<f64>, d: usize) -> f64 {
    let m = coords.nrows();
    let b = basis_size(d);
    let mut trace = 0.0;
    for r in 0..m {
        let t = DVector::from_fn(d, |i, _| coords[(r, i)]);
        trace += phi_row(&t).norm_squared();
    }
    1e-8 * trace / b as f64
}

/// Fits with `ridge = 0`, falling back to [`default_ridge`] when the patch
/// is underdetermined or the plain normal equations are singular.
pub fn fit_quadratic_auto(
    coords: &DMatrix<f64>,
    d: usize,
    center_index: usize,
) -> Result<QuadraticPatch> {
    if coords.nrows() >= basis_size(d) {
        match fit_quadratic_at(coords, d, 0.0, center_index) {
            Ok(p) => return Ok(p),
            Err(Error::Numerical(_)) => {}
            Err(e) => return Err(e),
        }
    }
    fit_quadratic_at(coords, d, default_ridge(coords, d), center_index)
}

/// Normal components of the chart's tangent vectors at `t`: column `j` holds
/// `(df^{d+1}/dx^j, ..., df^D/dx^j)`, differentiated analytically.
pub fn tangent_derivatives(patch: &QuadraticPatch, t: &DVector<f64>) -> DMatrix<f64> {
    let grad = phi_grad(t);
    // coeffs: (codim x B), grad: (d x B) -> (codim x d)
    &patch.coeffs * grad.transpose()
}

/// Induced metric `g = I + V^T V` at `t`.
pub fn metric_tensor(patch: &QuadraticPatch, t: &DVector<f64>) -> MetricTensor {
    let v = tangent_derivatives(patch, t);
    metric_from_derivatives(&v)
}

/// Metric from an explicit derivative matrix (codim x d).
pub fn metric_from_derivatives(v: &DMatrix<f64>) -> MetricTensor {
    let d = v.ncols();
    let mut g = v.transpose() * v;
    for i in 0..d {
        g[(i, i)] += 1.0;
    }
    MetricTensor { g }
}

/// Second partials of the chart, constant over the patch.
pub fn second_fundamental_form(patch: &QuadraticPatch) -> SecondFundamentalForm {
    let slices = (0..patch.codim()).map(|a| patch.hessian(a)).collect();
    SecondFundamentalForm { slices }
}

/// Gauss-equation curvature of the chart at `t`.
///
/// `rm_{jklm} = sum_a (h_jm h_kl - h_jl h_km)`, `ricci_{jk} = g^{lm} rm_{ljkm}`,
/// scalar `= trace(g^{-1} ricci) / d`, and sectional extremes over coordinate
/// 2-planes `K(j,k) = rm_{jkkj} / (g_jj g_kk - g_jk^2)`.
pub fn curvature(patch: &QuadraticPatch, t: &DVector<f64>) -> Result<CurvatureReport> {
    let sff = second_fundamental_form(patch);
    let g = metric_tensor(patch, t);
    curvature_from_parts(&sff, &g, patch.d)
}

/// Curvature from precomputed second fundamental form and metric.
pub fn curvature_from_parts(
    sff: &SecondFundamentalForm,
    metric: &MetricTensor,
    d: usize,
) -> Result<CurvatureReport> {
    let mut rm = vec![0.0; d * d * d * d];
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                for m in 0..d {
                    let mut acc = 0.0;
                    for h in &sff.slices {
                        acc += h[(j, m)] * h[(k, l)] - h[(j, l)] * h[(k, m)];
                    }
                    rm[((j * d + k) * d + l) * d + m] = acc;
                }
            }
        }
    }

    let g_inv = Cholesky::new(metric.g.clone())
        .ok_or_else(|| Error::Numerical("induced metric is not positive definite".into()))?
        .inverse();

    let mut ricci = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let mut acc = 0.0;
            for l in 0..d {
                for m in 0..d {
                    acc += g_inv[(l, m)] * rm[((l * d + j) * d + k) * d + m];
                }
            }
            ricci[(j, k)] = acc;
        }
    }

    let scalar = (&g_inv * &ricci).trace() / d as f64;

    let mut sectional_min = 0.0;
    let mut sectional_max = 0.0;
    let mut first = true;
    for j in 0..d {
        for k in (j + 1)..d {
            let denom =
                metric.g[(j, j)] * metric.g[(k, k)] - metric.g[(j, k)] * metric.g[(j, k)];
            let sec = rm[((j * d + k) * d + k) * d + j] / denom;
            if first {
                sectional_min = sec;
                sectional_max = sec;
                first = false;
            } else {
                sectional_min = sectional_min.min(sec);
                sectional_max = sectional_max.max(sec);
            }
        }
    }

    Ok(CurvatureReport {
        d,
        rm,
        ricci,
        scalar,
        sectional_min,
        sectional_max,
    })
}

/// Checks the spherical conditions at the patch center: non-negative
/// sectional curvature, and the pinching ratio when curvature is strictly
/// positive. Violations are reported, never fatal.
pub fn spherical_condition_check(patch: &QuadraticPatch) -> Result<SphericalCondition> {
    let report = curvature(patch, &DVector::zeros(patch.d))?;
    let nonneg = report.sectional_min >= -1e-9;
    let pinch_ratio = if report.sectional_min > 0.0 {
        Some(report.sectional_max / report.sectional_min)
    } else {
        None
    };
    Ok(SphericalCondition {
        nonneg,
        pinch_ratio,
    })
}

/// Projects every Hessian slice onto the positive-semidefinite cone
/// (eigenvalues clipped at zero) and rewrites the quadratic coefficients.
/// A patch whose slices are already PSD is returned unchanged with the flag
/// false, so the operation is idempotent.
///
/// Slices are first sign-canonicalized: a slice with negative trace is
/// negated together with its whole coefficient row, which is the gauge
/// choice of flipping that normal direction. Curvature is quadratic in each
/// slice, so the flip changes no geometric quantity, and it keeps
/// negative-definite (equally elliptic) slices from being zeroed out.
pub fn enforce_elliptic(patch: &QuadraticPatch) -> QuadraticPatch {
    let mut out = patch.clone();
    let mut clamped = false;
    for a in 0..patch.codim() {
        let mut h = patch.hessian(a);
        if h.trace() < -1e-12 * h.amax().max(f64::MIN_POSITIVE) {
            h.neg_mut();
            for c in 0..out.coeffs.ncols() {
                out.coeffs[(a, c)] = -out.coeffs[(a, c)];
            }
        }
        let eig = h.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&v| v < 0.0) {
            clamped = true;
            let mut rebuilt = DMatrix::zeros(patch.d, patch.d);
            for (idx, &val) in eig.eigenvalues.iter().enumerate() {
                if val > 0.0 {
                    let v = eig.eigenvectors.column(idx);
                    rebuilt.syger(val, &v.clone_owned(), &v.clone_owned(), 1.0);
                }
            }
            for r in 0..patch.d {
                for c in (r + 1)..patch.d {
                    rebuilt[(r, c)] = rebuilt[(c, r)];
                }
            }
            out.set_hessian(a, &rebuilt);
        }
    }
    if clamped {
        out.elliptic_clamped = true;
    }
    out
}

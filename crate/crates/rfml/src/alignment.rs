//! Global alignment of deformed patches onto a sphere.
//!
//! Each patch contributes a block `W W^T` to an N x N positive-semidefinite
//! matrix `B`, where `W` centers the patch and annihilates affine functions
//! of its local coordinates. The low eigenvectors of `B` (skipping the
//! constant kernel vector) are globally consistent coordinates; scaling every
//! row to the radius `1/sqrt(C)` puts the point set on the target sphere.

use nalgebra::{DMatrix, SVD};
#[cfg(test)]
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::flow::FlowResult;
use crate::geometry::{fix_sign, NeighborhoodGraph};

/// Patch-local coordinates plus the global index of every patch member.
#[derive(Debug, Clone)]
pub struct AlignmentProblem {
    /// Per patch: m x w local coordinates (rows = members).
    pub patch_coords: Vec<DMatrix<f64>>,
    /// Per patch: global indices matching the coordinate rows.
    pub membership: Vec<Vec<usize>>,
    /// Total number of points.
    pub n_points: usize,
}

impl AlignmentProblem {
    pub fn validate(&self) -> Result<()> {
        if self.patch_coords.len() != self.membership.len() {
            return Err(Error::InvalidData(format!(
                "{} coordinate blocks vs {} membership lists",
                self.patch_coords.len(),
                self.membership.len()
            )));
        }
        let mut covered = vec![false; self.n_points];
        for (i, (coords, members)) in self
            .patch_coords
            .iter()
            .zip(self.membership.iter())
            .enumerate()
        {
            if members.is_empty() {
                return Err(Error::InvalidData(format!("patch {i} is empty")));
            }
            if coords.nrows() != members.len() {
                return Err(Error::InvalidData(format!(
                    "patch {i}: {} coordinate rows vs {} members",
                    coords.nrows(),
                    members.len()
                )));
            }
            for &g in members {
                if g >= self.n_points {
                    return Err(Error::InvalidData(format!(
                        "patch {i} references point {g} outside [0, {})",
                        self.n_points
                    )));
                }
                covered[g] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|&c| !c) {
            return Err(Error::InvalidData(format!(
                "point {missing} appears in no patch"
            )));
        }
        Ok(())
    }
}

/// Points on a sphere of curvature `C` (radius `1/sqrt(C)`).
#[derive(Debug, Clone)]
pub struct SphericalEmbedding {
    /// N x D coordinates, every row of norm `1/sqrt(C)`.
    pub points: DMatrix<f64>,
    pub curvature: f64,
    pub radius: f64,
}

/// Output of the alignment eigensolve.
#[derive(Debug, Clone)]
pub struct GlobalCoordinates {
    /// N x n_coords, orthonormal sign-fixed eigenvector columns.
    pub coords: DMatrix<f64>,
    /// Eigenvalues of the selected columns, ascending.
    pub eigenvalues: Vec<f64>,
    /// Set when an eigenvalue multiplicity straddles the selection cutoff;
    /// the deterministic index order still applies.
    pub degeneracy_warning: bool,
}

/// Assembles `B = sum_i S_i W_i W_i^T S_i^T` with
/// `W_i = (I - ee^T/m)(I - Y_i^+ Y_i)`; the pseudo-inverse treats singular
/// values below `sigma_max * 1e-12` as zero.
pub fn build_alignment_matrix(problem: &AlignmentProblem) -> Result<DMatrix<f64>> {
    problem.validate()?;
    let n = problem.n_points;
    let mut b = DMatrix::zeros(n, n);

    for (coords, members) in problem.patch_coords.iter().zip(problem.membership.iter()) {
        let m = members.len();

        // Projector onto the span of the affine functions of the patch:
        // the coordinate columns of Y plus the constant column. The local
        // coordinates are taken about the patch center rather than the patch
        // mean, so the constant function is not already inside span(Y).
        let mut affine = DMatrix::zeros(m, coords.ncols() + 1);
        affine
            .view_mut((0, 0), (m, coords.ncols()))
            .copy_from(coords);
        for r in 0..m {
            affine[(r, coords.ncols())] = 1.0;
        }
        let svd = SVD::new(affine, true, false);
        let u = svd.u.as_ref().expect("SVD with u requested");
        let cutoff = svd.singular_values.max() * 1e-12;
        let mut annihilator = DMatrix::identity(m, m);
        for (k, &sigma) in svd.singular_values.iter().enumerate() {
            if sigma > cutoff {
                let col = u.column(k).clone_owned();
                annihilator.syger(-1.0, &col, &col, 1.0);
            }
        }
        for r in 0..m {
            for c in (r + 1)..m {
                annihilator[(r, c)] = annihilator[(c, r)];
            }
        }

        // Center, then annihilate: W = (I - ee^T/m) A.
        let col_means = annihilator.row_mean();
        let mut w = annihilator;
        for r in 0..m {
            for c in 0..m {
                w[(r, c)] -= col_means[c];
            }
        }

        let local = &w * w.transpose();
        for (a, &ga) in members.iter().enumerate() {
            for (bi, &gb) in members.iter().enumerate() {
                b[(ga, gb)] += local[(a, bi)];
            }
        }
    }
    Ok(b)
}

/// Eigenvectors of `B` for eigenvalues ranked 2 to `n_coords + 1` ascending
/// (the constant kernel vector is skipped), unit-norm, sign-fixed, ordered by
/// ascending eigenvalue with index tie-break.
///
/// Matrices assembled by [`build_alignment_matrix`] carry the all-ones
/// vector in their kernel exactly; when that holds, the constant direction
/// is deflated (shifted above the spectrum) before the solve, so that exact
/// kernel degeneracy cannot leak a constant component into the selected
/// coordinates. Matrices without `e` in the kernel fall back to the literal
/// skip-the-smallest rule.
pub fn solve_global_coordinates(b: &DMatrix<f64>, n_coords: usize) -> Result<GlobalCoordinates> {
    let n = b.nrows();
    if n_coords + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {n_coords} coordinates from a {n}-point alignment matrix"
        )));
    }

    let ones = DMatrix::from_element(n, 1, 1.0 / (n as f64).sqrt());
    let be_norm = (b * &ones).norm();
    let constant_in_kernel = be_norm <= 1e-8 * b.norm().max(f64::MIN_POSITIVE);

    let (eig, skip_first) = if constant_in_kernel {
        let shift = (b.trace() / n as f64).max(f64::MIN_POSITIVE) * 16.0 + 1.0;
        let deflated = b + &ones * ones.transpose() * shift;
        (deflated.symmetric_eigen(), false)
    } else {
        (b.clone().symmetric_eigen(), true)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[x]
            .partial_cmp(&eig.eigenvalues[y])
            .unwrap()
            .then(x.cmp(&y))
    });
    let offset = usize::from(skip_first);

    let mut coords = DMatrix::zeros(n, n_coords);
    let mut eigenvalues = Vec::with_capacity(n_coords);
    for (pos, &src) in order[offset..offset + n_coords].iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        coords.set_column(pos, &col);
        eigenvalues.push(eig.eigenvalues[src]);
    }

    let scale = eig.eigenvalues[order[n - 1]].abs().max(1.0);
    let last_in = eig.eigenvalues[order[offset + n_coords - 1]];
    let first_out = eig.eigenvalues[order[offset + n_coords]];
    let degeneracy_warning = (first_out - last_in).abs() <= 1e-10 * scale;

    Ok(GlobalCoordinates {
        coords,
        eigenvalues,
        degeneracy_warning,
    })
}

/// Rescales every row to the sphere of curvature `C`: `p = row / (|row| sqrt(C))`.
pub fn project_to_sphere(coords: &DMatrix<f64>, c: f64) -> Result<SphericalEmbedding> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sphere curvature must be positive, got {c}"
        )));
    }
    let radius = 1.0 / c.sqrt();
    let mut points = coords.clone();
    for i in 0..points.nrows() {
        let norm = points.row(i).norm();
        if norm < 1e-300 {
            return Err(Error::Numerical(format!(
                "point {i} collapsed to the origin during alignment"
            )));
        }
        let s = radius / norm;
        for j in 0..points.ncols() {
            points[(i, j)] *= s;
        }
    }
    Ok(SphericalEmbedding {
        points,
        curvature: c,
        radius,
    })
}

/// Full alignment: assemble the problem from the flowed patches and the
/// neighborhood graph, solve for global coordinates, and project onto the
/// sphere of curvature `C`.
pub fn align(
    flow: &FlowResult,
    graph: &NeighborhoodGraph,
    c: f64,
) -> Result<SphericalEmbedding> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alignment requires positive curvature, got {c}"
        )));
    }
    let n = graph.n_points();
    if flow.flowed_patches.len() != n {
        return Err(Error::InvalidData(format!(
            "{} flowed patches for {n} points",
            flow.flowed_patches.len()
        )));
    }
    let ambient = flow.flowed_patches[0].ncols();
    let problem = AlignmentProblem {
        patch_coords: flow.flowed_patches.clone(),
        membership: (0..n).map(|i| graph.patch(i)).collect(),
        n_points: n,
    };
    let b = build_alignment_matrix(&problem)?;
    let global = solve_global_coordinates(&b, ambient)?;
    project_to_sphere(&global.coords, c)
}

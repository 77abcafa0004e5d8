//! Shared oracles and fixtures for the integration suites.
//!
//! Everything here is independent of the library's computation paths: the
//! eigensolver oracle is a hand-rolled Jacobi sweep, the least-squares
//! oracle eliminates with compensated accumulation, and the Riemann oracle
//! evaluates the Gauss-equation products with naive loops.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rfml::patch::{basis_size, QuadraticPatch};
use rfml::rng::SplitMix64;
use rfml::PointCloud;

/// Exact kNN by sorting all pairwise distances, ties by index.
pub fn brute_force_knn(cloud: &PointCloud, k: usize) -> Vec<Vec<usize>> {
    let n = cloud.n_points();
    (0..n)
        .map(|i| {
            let mut all: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let mut acc = 0.0;
                    for c in 0..cloud.dim() {
                        let d = cloud.data()[(i, c)] - cloud.data()[(j, c)];
                        acc += d * d;
                    }
                    (acc, j)
                })
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            all.iter().take(k).map(|e| e.1).collect()
        })
        .collect()
}

/// Cyclic Jacobi eigensolver for symmetric matrices; returns eigenvalues
/// descending with matching eigenvector columns.
pub fn jacobi_eigen(matrix: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off < 1e-28 * a.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - s * aqj;
                    a[(q, j)] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].partial_cmp(&a[(x, x)]).unwrap().then(x.cmp(&y)));
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (pos, &src) in order.iter().enumerate() {
        values[pos] = a[(src, src)];
        vectors.set_column(pos, &v.column(src));
    }
    (values, vectors)
}

/// Kahan-compensated dot product.
fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let term = x * y - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    sum
}

/// Least-squares oracle: normal equations accumulated with compensated
/// sums, solved by Gaussian elimination with partial pivoting.
pub fn least_squares_oracle(design: &DMatrix<f64>, target: &DVector<f64>) -> DVector<f64> {
    let cols = design.ncols();
    let col_slices: Vec<Vec<f64>> = (0..cols)
        .map(|c| design.column(c).iter().copied().collect())
        .collect();
    let target_slice: Vec<f64> = target.iter().copied().collect();

    let mut system = vec![vec![0.0; cols + 1]; cols];
    for i in 0..cols {
        for j in 0..cols {
            system[i][j] = dot_compensated(&col_slices[i], &col_slices[j]);
        }
        system[i][cols] = dot_compensated(&col_slices[i], &target_slice);
    }

    for pivot in 0..cols {
        let mut best = pivot;
        for r in (pivot + 1)..cols {
            if system[r][pivot].abs() > system[best][pivot].abs() {
                best = r;
            }
        }
        system.swap(pivot, best);
        let diag = system[pivot][pivot];
        assert!(diag.abs() > 1e-300, "singular oracle system");
        for r in 0..cols {
            if r == pivot {
                continue;
            }
            let factor = system[r][pivot] / diag;
            for c in pivot..=cols {
                system[r][c] -= factor * system[pivot][c];
            }
        }
    }
    DVector::from_fn(cols, |i, _| system[i][cols] / system[i][i])
}

/// Brute-force Gauss-equation Riemann tensor with compensated accumulation:
/// `rm_{jklm} = sum_a (h_jm h_kl - h_jl h_km)`.
pub fn riemann_oracle(hessians: &[DMatrix<f64>], d: usize) -> Vec<f64> {
    let mut rm = vec![0.0; d * d * d * d];
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                for m in 0..d {
                    let mut sum = 0.0;
                    let mut comp = 0.0;
                    for h in hessians {
                        let term = h[(j, m)] * h[(k, l)] - h[(j, l)] * h[(k, m)] - comp;
                        let next = sum + term;
                        comp = (next - sum) - term;
                        sum = next;
                    }
                    rm[((j * d + k) * d + l) * d + m] = sum;
                }
            }
        }
    }
    rm
}

/// Residual after optimal translation, uniform scaling, and rotation,
/// relative to the norm of the centered reference.
pub fn procrustes_residual(points: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
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
    let a = center(points);
    let b = center(reference);
    let svd = (b.transpose() * &a).svd(true, true);
    let rot = svd.v_t.unwrap().transpose() * svd.u.unwrap().transpose();
    let rotated = a * rot;
    let scale = (rotated.transpose() * &b).trace() / rotated.norm_squared();
    ((rotated * scale) - &b).norm() / b.norm()
}

/// Random elliptic quadratic patch: PSD Hessians, zero constant and linear
/// terms, a center row at the origin plus scattered tangent points.
pub fn random_elliptic_patch(rng: &mut SplitMix64, d: usize, ambient: usize) -> QuadraticPatch {
    let codim = ambient - d;
    let b = basis_size(d);
    let mut coeffs = DMatrix::zeros(codim, b);
    for a in 0..codim {
        // Random PSD Hessian: M^T M with modest scale.
        let m = DMatrix::from_fn(d, d, |_, _| rng.uniform(-0.8, 0.8));
        let h = m.transpose() * &m;
        let mut patch_row = vec![0.0; b];
        let mut q = 1 + d;
        for i in 0..d {
            for j in i..d {
                patch_row[q] = if i == j { h[(i, i)] / 2.0 } else { h[(i, j)] };
                q += 1;
            }
        }
        for (c, &val) in patch_row.iter().enumerate() {
            coeffs[(a, c)] = val;
        }
    }
    let m_pts = (b + 4).max(12);
    let mut tangent = DMatrix::zeros(m_pts, d);
    for r in 1..m_pts {
        for c in 0..d {
            tangent[(r, c)] = rng.uniform(-0.5, 0.5);
        }
    }
    QuadraticPatch {
        center_index: 0,
        d,
        ambient_dim: ambient,
        coeffs,
        neighbor_coords: tangent,
        elliptic_clamped: false,
    }
}

/// Exact unit-sphere samples whose second moments are exactly isotropic:
/// the orbit of random unit vectors under coordinate permutations and sign
/// flips (48 images per seed point).
pub fn symmetrized_sphere_samples(n_orbits: usize, seed: u64) -> PointCloud {
    let mut rng = SplitMix64::new(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_orbits * 48);
    for _ in 0..n_orbits {
        let v = loop {
            let v = [rng.normal(), rng.normal(), rng.normal()];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1e-6 {
                break [v[0] / norm, v[1] / norm, v[2] / norm];
            }
        };
        for perm in [
            [0usize, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ] {
            for signs in 0..8u32 {
                let mut p = [0.0; 3];
                for (slot, &src) in perm.iter().enumerate() {
                    let sign = if signs >> slot & 1 == 1 { -1.0 } else { 1.0 };
                    p[slot] = sign * v[src];
                }
                rows.push(p.to_vec());
            }
        }
    }
    PointCloud::from_rows(&rows, None).expect("valid sphere samples")
}

/// Uniform unit-sphere samples.
pub fn sphere_samples(n: usize, seed: u64) -> PointCloud {
    let mut rng = SplitMix64::new(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| loop {
            let v = [rng.normal(), rng.normal(), rng.normal()];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1e-6 {
                break vec![v[0] / norm, v[1] / norm, v[2] / norm];
            }
        })
        .collect();
    PointCloud::from_rows(&rows, None).expect("valid sphere samples")
}

//! Classical multidimensional scaling.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::fix_sign;

/// Classical MDS: double-center the squared distance matrix,
/// `B = -1/2 J D^2 J`, and return the top-`d` spectral coordinates
/// (eigenvector times sqrt of the eigenvalue, non-positive eigenvalues
/// clamped to zero).
pub fn classical_mds(dist: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(Error::InvalidData(format!(
            "distance matrix must be square, got {n}x{}",
            dist.ncols()
        )));
    }
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!(
            "cannot extract {d} MDS coordinates from {n} points"
        )));
    }

    let mut sq = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sq[(i, j)] = dist[(i, j)] * dist[(i, j)];
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .partial_cmp(&eig.eigenvalues[x])
            .unwrap()
            .then(x.cmp(&y))
    });

    let mut coords = DMatrix::zeros(n, d);
    for (pos, &src) in order[..d].iter().enumerate() {
        let scale = eig.eigenvalues[src].max(0.0).sqrt();
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        coords.set_column(pos, &(col * scale));
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairwise(points: &[(f64, f64)]) -> DMatrix<f64> {
        let n = points.len();
        DMatrix::from_fn(n, n, |i, j| {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            (dx * dx + dy * dy).sqrt()
        })
    }

    #[test]
    fn recovers_square_up_to_rigid_motion() {
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let dist = pairwise(&square);
        let coords = classical_mds(&dist, 2).unwrap();
        // Pairwise distances of the output must match the input distances.
        let out = pairwise(&[
            (coords[(0, 0)], coords[(0, 1)]),
            (coords[(1, 0)], coords[(1, 1)]),
            (coords[(2, 0)], coords[(2, 1)]),
            (coords[(3, 0)], coords[(3, 1)]),
        ]);
        assert!((out - dist).amax() < 1e-10);
    }

    #[test]
    fn line_embeds_in_one_dimension() {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| (i as f64 * 0.5, 0.0)).collect();
        let dist = pairwise(&pts);
        let coords = classical_mds(&dist, 1).unwrap();
        for i in 0..7 {
            let gap = (coords[(i + 1, 0)] - coords[(i, 0)]).abs();
            assert!((gap - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn deterministic() {
        let square = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)];
        let dist = pairwise(&square);
        let a = classical_mds(&dist, 2).unwrap();
        let b = classical_mds(&dist, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_shapes() {
        let m = DMatrix::zeros(3, 4);
        assert!(classical_mds(&m, 2).is_err());
        let sq = DMatrix::zeros(3, 3);
        assert!(classical_mds(&sq, 0).is_err());
        assert!(classical_mds(&sq, 4).is_err());
    }
}

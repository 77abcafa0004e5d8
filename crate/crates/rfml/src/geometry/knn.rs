//! Exact k-nearest-neighbor search.
//!
//! Low-dimensional queries go through a kd-tree; high-dimensional data falls
//! back to a scan, where tree pruning cannot win. Both paths produce the same
//! answer: the K points minimizing (squared distance, index) lexicographically.

use rayon::prelude::*;

use super::{NeighborhoodGraph, PointCloud};
use crate::error::{Error, Result};

/// Above this ambient dimension the kd-tree degenerates to a full scan
/// anyway, so use the scan directly.
const KDTREE_MAX_DIM: usize = 16;

/// Exact K nearest neighbors of every point under the Euclidean metric,
/// excluding the point itself. Ties break by ascending index.
pub fn knn_search(cloud: &PointCloud, k: usize) -> Result<NeighborhoodGraph> {
    let n = cloud.n_points();
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "K = {k} must be smaller than the number of points {n}"
        )));
    }
    if let Some(bad) = cloud.data().iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidData(format!(
            "non-finite coordinate at flat index {bad}"
        )));
    }

    let tree = if cloud.dim() <= KDTREE_MAX_DIM {
        Some(KdTree::build(cloud))
    } else {
        None
    };

    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = BoundedBest::new(k);
            match &tree {
                Some(t) => t.query(cloud, i, &mut best),
                None => {
                    for j in 0..n {
                        if j != i {
                            best.offer(cloud.dist_sq(i, j), j);
                        }
                    }
                }
            }
            best.into_sorted()
        })
        .collect();

    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for (idx, dist) in rows {
        indices.extend(idx);
        distances.extend(dist.into_iter().map(f64::sqrt));
    }
    Ok(NeighborhoodGraph::from_flat(k, indices, distances))
}

/// Fixed-capacity candidate set ordered by (squared distance, index).
struct BoundedBest {
    k: usize,
    // Kept sorted ascending; at most k entries. K is small here (tens), so
    // insertion into a sorted vec beats a heap in practice.
    entries: Vec<(f64, usize)>,
}

impl BoundedBest {
    fn new(k: usize) -> Self {
        Self {
            k,
            entries: Vec::with_capacity(k + 1),
        }
    }

    fn worst(&self) -> Option<f64> {
        if self.entries.len() == self.k {
            self.entries.last().map(|e| e.0)
        } else {
            None
        }
    }

    fn offer(&mut self, dist_sq: f64, index: usize) {
        let cand = (dist_sq, index);
        if self.entries.len() == self.k {
            let worst = *self.entries.last().unwrap();
            if !lex_less(cand, worst) {
                return;
            }
            self.entries.pop();
        }
        let pos = self.entries.partition_point(|&e| lex_less(e, cand));
        self.entries.insert(pos, cand);
    }

    fn into_sorted(self) -> (Vec<usize>, Vec<f64>) {
        let idx = self.entries.iter().map(|e| e.1).collect();
        let dist = self.entries.iter().map(|e| e.0).collect();
        (idx, dist)
    }
}

fn lex_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Static kd-tree over point indices, median split on the widest dimension.
struct KdTree {
    nodes: Vec<Node>,
    root: usize,
}

enum Node {
    Leaf {
        points: Vec<usize>,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

const LEAF_SIZE: usize = 16;

impl KdTree {
    fn build(cloud: &PointCloud) -> Self {
        let mut nodes = Vec::new();
        let mut ids: Vec<usize> = (0..cloud.n_points()).collect();
        let root = Self::build_rec(cloud, &mut ids, &mut nodes);
        Self { nodes, root }
    }

    fn build_rec(cloud: &PointCloud, ids: &mut [usize], nodes: &mut Vec<Node>) -> usize {
        if ids.len() <= LEAF_SIZE {
            nodes.push(Node::Leaf {
                points: ids.to_vec(),
            });
            return nodes.len() - 1;
        }
        // Widest spread picks the axis; ties go to the lower axis.
        let d = cloud.dim();
        let mut axis = 0;
        let mut widest = f64::NEG_INFINITY;
        for a in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &p in ids.iter() {
                let v = cloud.data()[(p, a)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        if widest == 0.0 {
            // All duplicates; no split possible.
            nodes.push(Node::Leaf {
                points: ids.to_vec(),
            });
            return nodes.len() - 1;
        }
        ids.sort_by(|&a, &b| {
            cloud.data()[(a, axis)]
                .partial_cmp(&cloud.data()[(b, axis)])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mid = ids.len() / 2;
        let value = cloud.data()[(ids[mid], axis)];
        let (l, r) = ids.split_at_mut(mid);
        let left = Self::build_rec(cloud, l, nodes);
        let right = Self::build_rec(cloud, r, nodes);
        nodes.push(Node::Split {
            axis,
            value,
            left,
            right,
        });
        nodes.len() - 1
    }

    fn query(&self, cloud: &PointCloud, q: usize, best: &mut BoundedBest) {
        self.query_rec(self.root, cloud, q, best);
    }

    fn query_rec(&self, node: usize, cloud: &PointCloud, q: usize, best: &mut BoundedBest) {
        match &self.nodes[node] {
            Node::Leaf { points } => {
                for &p in points {
                    if p != q {
                        best.offer(cloud.dist_sq(q, p), p);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let qa = cloud.data()[(q, *axis)];
                let (near, far) = if qa < *value {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.query_rec(near, cloud, q, best);
                let plane = qa - *value;
                // Prune only on a strict bound so boundary ties still get
                // visited and index tie-breaks stay exact.
                match best.worst() {
                    Some(w) if plane * plane > w => {}
                    _ => self.query_rec(far, cloud, q, best),
                }
            }
        }
    }
}

//! Symmetrized weighted neighbor graph and shortest paths.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::DistanceBackend;
use crate::error::{Error, Result};
use crate::geometry::{NeighborhoodGraph, PointCloud};

/// Undirected weighted graph: the union of the directed kNN edges, with
/// weights from the chosen distance backend.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn build(
        cloud: &PointCloud,
        graph: &NeighborhoodGraph,
        backend: DistanceBackend,
    ) -> Result<Self> {
        backend.validate_cloud(cloud)?;
        let n = cloud.n_points();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for &j in graph.neighbors(i) {
                let w = backend.distance(cloud, i, j);
                adj[i].push((j, w));
                adj[j].push((i, w));
            }
        }
        for row in adj.iter_mut() {
            row.sort_by(|a, b| a.0.cmp(&b.0));
            row.dedup_by(|a, b| a.0 == b.0);
        }
        Ok(Self { adj })
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn component_count(&self) -> usize {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        components
    }

    /// Single-source shortest path lengths (Dijkstra, binary heap).
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        let mut heap: BinaryHeap<Reverse<(HeapKey, usize)>> = BinaryHeap::new();
        heap.push(Reverse((HeapKey(0.0), source)));
        while let Some(Reverse((HeapKey(d), v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &self.adj[v] {
                let cand = d + w;
                if cand < dist[u] {
                    dist[u] = cand;
                    heap.push(Reverse((HeapKey(cand), u)));
                }
            }
        }
        dist
    }

    /// All-pairs shortest paths; errors with the component count when the
    /// graph is disconnected.
    pub fn all_pairs_shortest(&self) -> Result<DMatrix<f64>> {
        let components = self.component_count();
        if components > 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        let n = self.adj.len();
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| self.dijkstra(s)).collect();
        let mut out = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

/// Finite f64 ordering key for the heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapKey(f64);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.partial_cmp(&other.0).expect("finite distances")
    }
}

//! Isomap: exact k-nearest-neighbor graph, shortest-path geodesics, and
//! classical multidimensional scaling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-row metadata carried alongside a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowLabel {
    pub f1: f64,
    pub alpha: f64,
    pub r: f64,
}

/// Dense row-major `rows × cols` matrix of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Vec<RowLabel>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("all feature rows must have the same length");
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "feature matrix at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(FeatureMatrix {
            rows: n,
            cols,
            values,
            labels: Vec::new(),
        })
    }

    pub fn with_labels(mut self, labels: Vec<RowLabel>) -> Result<Self> {
        if labels.len() != self.rows {
            return invalid("one label per row is required");
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    /// Column-wise z-scoring; constant columns become zero.
    pub fn standardized(&self) -> FeatureMatrix {
        let mut out = self.clone();
        for c in 0..self.cols {
            let col = (0..self.rows).map(|r| self.values[r * self.cols + c]);
            let mean = col.clone().sum::<f64>() / self.rows as f64;
            let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.rows as f64;
            let sd = var.sqrt();
            for r in 0..self.rows {
                let v = &mut out.values[r * self.cols + c];
                *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
            }
        }
        out
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Weighted undirected graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl DistanceGraph {
    /// Builds a symmetric graph from undirected edges; duplicate edges keep the smaller weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) outside graph of {n} nodes"));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return invalid(format!("edge ({a}, {b}) has invalid weight {w}"));
            }
            if a == b {
                continue;
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            list.dedup_by_key(|e| e.0);
        }
        Ok(DistanceGraph { adjacency })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search_by_key(&b, |e| e.0).is_ok()
    }

    /// Connected components, each sorted, ordered by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Largest component; ties go to the one containing the lowest index.
    pub fn largest_component(&self) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        for comp in self.components() {
            if comp.len() > best.len() {
                best = comp;
            }
        }
        best
    }
}

/// Exact kNN graph, symmetrized by union. Ties are broken by lower row index.
pub fn knn_graph(x: &FeatureMatrix, k: usize) -> Result<DistanceGraph> {
    let n = x.rows();
    if k == 0 || k >= n {
        return invalid(format!("K must satisfy 1 <= K < n = {n}, got {k}"));
    }
    let directed: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, euclidean(x.row(i), x.row(j))))
                .collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            d.truncate(k);
            d
        })
        .collect();
    let edges: Vec<(usize, usize, f64)> = directed
        .iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().map(move |&(j, w)| (i, j, w)))
        .collect();
    DistanceGraph::from_edges(n, &edges)
}

#[derive(Copy, Clone, PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths (Dijkstra).
pub fn shortest_paths_from(g: &DistanceGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        node: source,
    });
    while let Some(Frontier { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier { dist: nd, node: v });
            }
        }
    }
    dist
}

/// Dense symmetric all-pairs shortest-path matrix (row-major, `n × n`).
/// Unreachable pairs are `+∞`. Entry `(i, j)` is computed from source `min(i, j)`.
pub fn geodesic_distances(g: &DistanceGraph) -> Vec<f64> {
    let n = g.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| shortest_paths_from(g, s))
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            d[i * n + j] = rows[i][j];
            d[j * n + i] = rows[i][j];
        }
    }
    d
}

/// Low-dimensional coordinates and the spectrum of the MDS operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub n: usize,
    pub dim: usize,
    /// Row-major `n × dim`.
    pub coords: Vec<f64>,
    /// All eigenvalues of `B = −½·J·D²·J`, descending.
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn axis(&self, a: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.coords[i * self.dim + a]).collect()
    }

    /// Pairwise Euclidean distances of the embedded points (row-major).
    pub fn distance_matrix(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                d[i * self.n + j] = euclidean(self.point(i), self.point(j));
            }
        }
        d
    }
}

/// Classical MDS of a dense `n × n` distance matrix.
pub fn classical_mds(d: &[f64], n: usize, dim: usize) -> Result<Embedding> {
    if d.len() != n * n {
        return invalid(format!("distance matrix must have {n}×{n} entries, got {}", d.len()));
    }
    if let Some(v) = d.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("distance matrix ({v})")));
    }
    if dim == 0 || dim > n {
        return invalid(format!("embedding dimension must lie in 1..={n}"));
    }
    let sq = DMatrix::from_fn(n, n, |i, j| {
        let v = 0.5 * (d[i * n + j] + d[j * n + i]);
        v * v
    });
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut coords = vec![0.0; n * dim];
    for (a, &col) in order.iter().take(dim).enumerate() {
        let scale = eig.eigenvalues[col].max(0.0).sqrt();
        let v = eig.eigenvectors.column(col);
        // fix the sign so the largest-magnitude component is positive
        let pivot = (0..n).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i * dim + a] = sign * scale * v[i];
        }
    }
    for a in 0..dim {
        let mean = (0..n).map(|i| coords[i * dim + a]).sum::<f64>() / n as f64;
        for i in 0..n {
            coords[i * dim + a] -= mean;
        }
    }
    Ok(Embedding {
        n,
        dim,
        coords,
        eigenvalues,
    })
}

/// Isomap embedding of the largest kNN component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsomapResult {
    pub embedding: Embedding,
    /// Input rows that were embedded, ascending; embedding row `i` is input row `kept[i]`.
    pub kept: Vec<usize>,
    /// Rows outside the largest component.
    pub dropped: Vec<usize>,
}

pub fn isomap(x: &FeatureMatrix, k: usize, dim: usize) -> Result<IsomapResult> {
    let graph = knn_graph(x, k)?;
    let kept = graph.largest_component();
    if kept.len() < dim + 1 {
        return invalid(format!(
            "largest kNN component has {} points, need at least {}",
            kept.len(),
            dim + 1
        ));
    }
    let dropped: Vec<usize> = (0..x.rows()).filter(|i| kept.binary_search(i).is_err()).collect();
    let full = geodesic_distances(&graph);
    let n = x.rows();
    let m = kept.len();
    let mut sub = vec![0.0; m * m];
    for (a, &i) in kept.iter().enumerate() {
        for (b, &j) in kept.iter().enumerate() {
            sub[a * m + b] = full[i * n + j];
        }
    }
    let embedding = classical_mds(&sub, m, dim)?;
    Ok(IsomapResult {
        embedding,
        kept,
        dropped,
    })
}

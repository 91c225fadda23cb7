//! Geodesic distance estimation on weighted graphs.
//!
//! Point clouds become symmetrized k-nearest-neighbor graphs with Euclidean
//! edge weights; shortest-path lengths then approximate manifold geodesics.
//! Arbitrary weighted graphs can be loaded from edge lists and go through
//! the same shortest-path machinery.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, EvaluationSet, Metric};

/// Undirected graph with nonnegative edge weights, stored in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph from undirected edges. Each unordered pair may appear
    /// at most once (in either orientation) unless repeated with the same weight.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut unique: HashMap<(usize, usize), f64> = HashMap::with_capacity(edges.len());
        for &(i, j, w) in edges {
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: n_nodes,
                });
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) has invalid weight {w}"
                )));
            }
            let key = (i.min(j), i.max(j));
            match unique.insert(key, w) {
                Some(prev) if prev != w => {
                    return Err(Error::InvalidParameter(format!(
                        "edge ({}, {}) listed with weights {prev} and {w}",
                        key.0, key.1
                    )))
                }
                _ => {}
            }
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_nodes];
        for (&(i, j), &w) in &unique {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        let mut offsets = Vec::with_capacity(n_nodes + 1);
        let mut targets = Vec::with_capacity(2 * unique.len());
        let mut weights = Vec::with_capacity(2 * unique.len());
        offsets.push(0);
        for adj in &mut adjacency {
            adj.sort_unstable_by_key(|&(j, _)| j);
            for &(j, w) in adj.iter() {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(WeightedGraph {
            offsets,
            targets,
            weights,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|pos| self.weights[range.start + pos])
    }

    /// Single-source shortest-path lengths (binary-heap Dijkstra).
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Entry {
            // reversed for a min-heap
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
            }
        }

        let n = self.n_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source));
        while let Some(Entry(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for e in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[e];
                let nd = d + self.weights[e];
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry(nd, v));
                }
            }
        }
        dist
    }

    fn checked_dijkstra(&self, source: usize) -> Result<Vec<f64>> {
        let row = self.dijkstra(source);
        match row.iter().position(|d| d.is_infinite()) {
            Some(to) => Err(Error::Disconnected { from: source, to }),
            None => Ok(row),
        }
    }
}

/// Symmetrized k-nearest-neighbor graph; ties broken by lower index.
pub fn build_knn_graph<M: Metric + ?Sized>(d: &M, k: usize) -> Result<WeightedGraph> {
    let n = d.len();
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count k = {k} must satisfy 1 <= k <= N - 1 = {}",
            n.saturating_sub(1)
        )));
    }
    let per_node: Vec<Vec<(usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = d.row(i);
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let by_distance =
                |a: &usize, b: &usize| row[*a].total_cmp(&row[*b]).then_with(|| a.cmp(b));
            if k < others.len() {
                others.select_nth_unstable_by(k - 1, by_distance);
                others.truncate(k);
            }
            others
                .into_iter()
                .map(|j| (i.min(j), i.max(j), row[j]))
                .collect()
        })
        .collect();
    let mut edges: Vec<(usize, usize, f64)> = per_node.into_iter().flatten().collect();
    // a mutual pair appears twice with the same weight; keep one copy
    edges.sort_unstable_by_key(|e| (e.0, e.1));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    WeightedGraph::from_edges(n, &edges)
}

/// All-pairs shortest-path distances. Fails when the graph is disconnected.
pub fn shortest_path_distances(g: &WeightedGraph) -> Result<DistanceMatrix> {
    let n = g.n_nodes();
    if n == 0 {
        return Err(Error::InvalidParameter("graph has no nodes".into()));
    }
    g.checked_dijkstra(0)?;
    let rows: Vec<Vec<f64>> = (1..n)
        .into_par_iter()
        .map(|i| {
            let mut row = g.checked_dijkstra(i)?;
            row.truncate(i);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    DistanceMatrix::from_lower_triangle(n, rows.concat())
}

/// Shortest-path rows from a subset of sources.
pub fn shortest_path_rows(g: &WeightedGraph, sources: &EvaluationSet) -> Result<SourceRows> {
    let rows: Vec<Vec<f64>> = sources
        .indices()
        .par_iter()
        .map(|&s| g.checked_dijkstra(s))
        .collect::<Result<_>>()?;
    SourceRows::new(g.n_nodes(), sources.indices().to_vec(), rows.concat())
}

/// Distances from a set of source points to every point.
///
/// Implements [`Metric`] for pairs with at least one source endpoint;
/// querying two non-source points panics.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRows {
    n_points: usize,
    sources: Vec<usize>,
    lookup: Vec<usize>,
    rows: Vec<f64>,
}

const NOT_A_SOURCE: usize = usize::MAX;
const DROW_MAGIC: &[u8; 4] = b"DROW";

impl SourceRows {
    pub fn new(n_points: usize, sources: Vec<usize>, rows: Vec<f64>) -> Result<Self> {
        if rows.len() != sources.len() * n_points {
            return Err(Error::InvalidMatrix(format!(
                "expected {} row entries, got {}",
                sources.len() * n_points,
                rows.len()
            )));
        }
        let mut lookup = vec![NOT_A_SOURCE; n_points];
        for (pos, &s) in sources.iter().enumerate() {
            if s >= n_points {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    len: n_points,
                });
            }
            lookup[s] = pos;
        }
        Ok(SourceRows {
            n_points,
            sources,
            lookup,
            rows,
        })
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn source_row(&self, i: usize) -> Option<&[f64]> {
        match self.lookup.get(i) {
            Some(&pos) if pos != NOT_A_SOURCE => {
                Some(&self.rows[pos * self.n_points..(pos + 1) * self.n_points])
            }
            _ => None,
        }
    }

    /// Binary layout: `"DROW"`, version byte `0x01`, u64 LE point count,
    /// u64 LE source count, the source indices as u64 LE, then one row of
    /// f64 LE distances per source.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(DROW_MAGIC)?;
        w.write_all(&[1])?;
        w.write_all(&(self.n_points as u64).to_le_bytes())?;
        w.write_all(&(self.sources.len() as u64).to_le_bytes())?;
        for &s in &self.sources {
            w.write_all(&(s as u64).to_le_bytes())?;
        }
        for v in &self.rows {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::Format(e.to_string()))?;
        if bytes.len() < 21 || &bytes[..4] != DROW_MAGIC || bytes[4] != 1 {
            return Err(Error::Format("not a version-1 DROW file".into()));
        }
        let word = |at: usize| -> Result<u64> {
            bytes
                .get(at..at + 8)
                .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
                .ok_or_else(|| Error::Format("truncated DROW file".into()))
        };
        let n = word(5)? as usize;
        let s = word(13)? as usize;
        let sources = (0..s)
            .map(|k| word(21 + 8 * k).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let start = 21 + 8 * s;
        let payload = &bytes[start.min(bytes.len())..];
        if payload.len() != 8 * n * s {
            return Err(Error::Format("DROW payload size mismatch".into()));
        }
        let rows = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::new(n, sources, rows)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_binary(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

impl Metric for SourceRows {
    fn len(&self) -> usize {
        self.n_points
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        if let Some(row) = self.source_row(i) {
            row[j]
        } else if let Some(row) = self.source_row(j) {
            row[i]
        } else {
            panic!("neither {i} nor {j} is a source row");
        }
    }

    fn row(&self, i: usize) -> Vec<f64> {
        match self.source_row(i) {
            Some(row) => row.to_vec(),
            None => (0..self.n_points).map(|j| self.distance(i, j)).collect(),
        }
    }
}

/// Parses an edge list of `i j w` lines (0-based, `#` comments allowed).
/// The node count is one past the largest index.
pub fn parse_edge_list<R: BufRead>(r: R) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut max_index = None;
    for (lineno, line) in r.lines().enumerate() {
        let bad = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected `i j w`, found {line:?}")));
        }
        let i: usize = fields[0].parse().map_err(|e| bad(format!("{}: {e}", fields[0])))?;
        let j: usize = fields[1].parse().map_err(|e| bad(format!("{}: {e}", fields[1])))?;
        let w: f64 = fields[2].parse().map_err(|e| bad(format!("{}: {e}", fields[2])))?;
        if !(w >= 0.0) {
            return Err(bad(format!("negative weight {w}")));
        }
        if i == j {
            return Err(bad(format!("self-loop at node {i}")));
        }
        max_index = Some(max_index.unwrap_or(0).max(i).max(j));
        edges.push((i, j, w));
    }
    let n = max_index.map_or(0, |m| m + 1);
    WeightedGraph::from_edges(n, &edges)
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file))
}

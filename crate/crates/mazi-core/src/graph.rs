//! Undirected weighted graph in compressed adjacency form, plus edgelist and
//! label file I/O and largest-connected-component extraction.
//!
//! Self-loops are legal and kept out of the adjacency lists; their weight
//! counts twice in the node degree so that coarsening conserves total degree.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable undirected weighted graph. One undirected edge is stored in both
/// endpoint adjacency lists; `total_weight` counts it once.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
    total_weight: f64,
}

impl Graph {
    /// Build a graph from an edge list. Duplicate edges (in either direction)
    /// have their weights summed; `(u, u, w)` accumulates into the node's
    /// self-loop weight. Zero-weight edges are dropped.
    pub fn from_edges(num_nodes: usize, edges: &[(u32, u32, f64)]) -> Result<Self> {
        let mut self_loops = vec![0.0; num_nodes];
        let mut directed: Vec<(u32, u32, f64)> = Vec::with_capacity(edges.len() * 2);
        for &(u, v, w) in edges {
            for id in [u, v] {
                if id as usize >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        id: id as usize,
                        num_nodes,
                    });
                }
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight {
                    u: u as usize,
                    v: v as usize,
                    weight: w,
                });
            }
            if w == 0.0 {
                continue;
            }
            if u == v {
                self_loops[u as usize] += w;
            } else {
                directed.push((u, v, w));
                directed.push((v, u, w));
            }
        }
        directed.sort_unstable_by_key(|e| (e.0, e.1));

        let mut offsets = vec![0usize; num_nodes + 1];
        let mut neighbors = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for &(u, v, w) in &directed {
            if neighbors.len() > offsets[u as usize]
                && *neighbors.last().unwrap() == v
                && offsets[u as usize + 1] == neighbors.len()
            {
                // Merge consecutive duplicates of the same (u, v).
                *weights.last_mut().unwrap() += w;
            } else {
                neighbors.push(v);
                weights.push(w);
            }
            offsets[u as usize + 1] = neighbors.len();
        }
        // Turn per-node end positions into cumulative offsets.
        for i in 0..num_nodes {
            if offsets[i + 1] < offsets[i] {
                offsets[i + 1] = offsets[i];
            }
        }

        let mut degrees = vec![0.0; num_nodes];
        let mut total_weight: f64 = self_loops.iter().sum();
        for v in 0..num_nodes {
            let row: f64 = weights[offsets[v]..offsets[v + 1]].iter().sum();
            degrees[v] = row + 2.0 * self_loops[v];
            total_weight += row / 2.0;
        }

        Ok(Graph {
            num_nodes,
            offsets,
            neighbors,
            weights,
            self_loops,
            degrees,
            total_weight,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of stored undirected non-loop edges plus self-loops.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2 + self.self_loops.iter().filter(|&&w| w > 0.0).count()
    }

    /// Sum of all edge weights, each undirected edge counted once (symbol m).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn self_loop(&self, v: usize) -> f64 {
        self.self_loops[v]
    }

    /// Weighted degree; self-loop weight counts twice.
    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    /// Non-loop neighbors of `v` with strictly increasing ids.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn neighbor_count(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let row = &self.neighbors[self.offsets[u]..self.offsets[u + 1]];
        row.binary_search(&(v as u32)).is_ok()
    }

    /// Undirected non-loop edges, each once with u < v, plus self-loops.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let cross = (0..self.num_nodes).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| (u as u32) < v)
                .map(move |(v, w)| (u as u32, v, w))
        });
        let loops = self
            .self_loops
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(u, &w)| (u as u32, u as u32, w));
        cross.chain(loops)
    }

    /// Largest connected component as its own graph, together with the list
    /// of original node ids kept (index = new id). Ties between equal-size
    /// components go to the one containing the smallest original id.
    pub fn largest_connected_component(&self) -> (Graph, Vec<u32>) {
        let mut component = vec![u32::MAX; self.num_nodes];
        let mut sizes = Vec::new();
        for start in 0..self.num_nodes {
            if component[start] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            let mut size = 0usize;
            let mut queue = VecDeque::from([start]);
            component[start] = id;
            while let Some(u) = queue.pop_front() {
                size += 1;
                for (v, _) in self.neighbors(u) {
                    if component[v as usize] == u32::MAX {
                        component[v as usize] = id;
                        queue.push_back(v as usize);
                    }
                }
            }
            sizes.push(size);
        }
        // Scanning in ascending start order means the first maximal component
        // already contains the smallest node id among ties.
        let best = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i as u32)
            .unwrap_or(0);

        let kept: Vec<u32> = (0..self.num_nodes as u32)
            .filter(|&v| component[v as usize] == best)
            .collect();
        let mut new_id = vec![u32::MAX; self.num_nodes];
        for (new, &old) in kept.iter().enumerate() {
            new_id[old as usize] = new as u32;
        }
        let edges: Vec<(u32, u32, f64)> = self
            .edges()
            .filter(|&(u, _, _)| component[u as usize] == best)
            .map(|(u, v, w)| (new_id[u as usize], new_id[v as usize], w))
            .collect();
        let graph = Graph::from_edges(kept.len(), &edges).expect("induced subgraph is valid");
        (graph, kept)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn is_comment(line: &str) -> bool {
    line.is_empty() || line.starts_with('#') || line.starts_with('%')
}

/// Read a whitespace-separated edgelist ("u v" or "u v w"). Node ids are
/// compacted to a dense range; the returned vector maps new id -> original id.
pub fn load_edgelist(path: &Path, weighted: bool) -> Result<(Graph, Vec<u64>)> {
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();
    for (lineno, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse_id = |tok: Option<&str>| -> Result<u64> {
            tok.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(path, lineno + 1, format!("expected node id: {line}")))
        };
        let u = parse_id(it.next())?;
        let v = parse_id(it.next())?;
        let w = match it.next() {
            Some(tok) if weighted => tok
                .parse::<f64>()
                .map_err(|_| Error::parse(path, lineno + 1, format!("bad weight: {tok}")))?,
            Some(_) => 1.0,
            None => 1.0,
        };
        if it.next().is_some() {
            return Err(Error::parse(path, lineno + 1, "too many fields"));
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight {
                u: u as usize,
                v: v as usize,
                weight: w,
            });
        }
        raw.push((u, v, w));
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput(path.display().to_string()));
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let lookup = |orig: u64| ids.binary_search(&orig).unwrap() as u32;
    let edges: Vec<(u32, u32, f64)> = raw
        .iter()
        .map(|&(u, v, w)| (lookup(u), lookup(v), w))
        .collect();
    Ok((Graph::from_edges(ids.len(), &edges)?, ids))
}

pub fn save_edgelist(g: &Graph, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    for (u, v, w) in g.edges() {
        writeln!(out, "{u} {v} {w}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Write an "original_id new_id" map, one pair per line.
pub fn save_id_map(map: &[u64], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    for (new, orig) in map.iter().enumerate() {
        writeln!(out, "{orig} {new}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Per-node label sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabels {
    pub labels: Vec<Vec<u32>>,
    pub num_labels: usize,
}

impl NodeLabels {
    pub fn new(labels: Vec<Vec<u32>>) -> Self {
        let num_labels = labels
            .iter()
            .flat_map(|l| l.iter())
            .max()
            .map_or(0, |&m| m as usize + 1);
        NodeLabels { labels, num_labels }
    }
}

/// Label file: one line per node, "node_id label[,label...]".
pub fn load_labels(path: &Path, num_nodes: usize) -> Result<NodeLabels> {
    let mut labels = vec![Vec::new(); num_nodes];
    for (lineno, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        let (node, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::parse(path, lineno + 1, "expected 'node labels'"))?;
        let node: usize = node
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, "bad node id"))?;
        if node >= num_nodes {
            return Err(Error::NodeOutOfRange {
                id: node,
                num_nodes,
            });
        }
        for tok in rest.trim().split(',') {
            let label: u32 = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, format!("bad label: {tok}")))?;
            labels[node].push(label);
        }
        labels[node].sort_unstable();
        labels[node].dedup();
    }
    Ok(NodeLabels::new(labels))
}

pub fn save_labels(labels: &NodeLabels, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    for (node, ls) in labels.labels.iter().enumerate() {
        if ls.is_empty() {
            continue;
        }
        let joined: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
        writeln!(out, "{node} {}", joined.join(",")).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::Graph;

    /// Two unit-weight triangles {0,1,2} and {3,4,5} joined by bridge (2,3).
    pub fn two_triangles_with_bridge() -> Graph {
        Graph::from_edges(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (2, 3, 1.0),
            ],
        )
        .unwrap()
    }

    pub fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    pub fn random_graph(n: usize, edge_prob: f64, rng: &mut impl rand::Rng) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((u, v, 1.0 + rng.gen::<f64>()));
                }
            }
            // Occasional self-loop to exercise the degree-doubling rule.
            if rng.gen::<f64>() < 0.1 {
                edges.push((u, u, rng.gen::<f64>()));
            }
        }
        if edges.is_empty() {
            edges.push((0, (n as u32 - 1).max(1) % n as u32, 1.0));
        }
        Graph::from_edges(n, &edges).unwrap()
    }
}

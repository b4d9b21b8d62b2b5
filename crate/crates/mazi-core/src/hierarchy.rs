//! The multi-level structure: coarsening a graph through a community
//! assignment, lifting embeddings upward by averaging, and the per-level
//! state the training driver iterates over.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::embedding::{save_embedding, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modularity::{initial_partition, CommunityAssignment};

/// Collapse each community of `h` into one coarse node. Cross-community
/// weights sum onto coarse edges, intra-community weights (including fine
/// self-loops) onto coarse self-loops; total weight is conserved.
pub fn coarsen(g: &Graph, h: &CommunityAssignment) -> Result<Graph> {
    if h.len() != g.num_nodes() {
        return Err(Error::LengthMismatch {
            what: "membership".into(),
            expected: g.num_nodes(),
            got: h.len(),
        });
    }
    let k = h.num_communities();
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    for (u, v, w) in g.edges() {
        let a = h.get(u as usize);
        let b = h.get(v as usize);
        edges.push((a.min(b), a.max(b), w));
    }
    Graph::from_edges(k, &edges)
}

/// Row c of the result is the mean of the fine rows assigned to community c.
pub fn average_up(x_fine: &EmbeddingMatrix, h: &CommunityAssignment) -> Result<EmbeddingMatrix> {
    if h.len() != x_fine.rows() {
        return Err(Error::LengthMismatch {
            what: "membership".into(),
            expected: x_fine.rows(),
            got: h.len(),
        });
    }
    let k = h.num_communities();
    let dim = x_fine.dim();
    let mut x = EmbeddingMatrix::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (v, &c) in h.membership().iter().enumerate() {
        counts[c as usize] += 1;
        let row = x.row_mut(c as usize);
        for (r, f) in row.iter_mut().zip(x_fine.row(v)) {
            *r += f;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        let inv = 1.0 / n as f64;
        for r in x.row_mut(c) {
            *r *= inv;
        }
    }
    Ok(x)
}

/// Community counts for levels 2..L: repeated floor(sqrt(n)), stopping with a
/// single all-encompassing node once a computed count would drop below 10.
pub fn sqrt_schedule(n: usize) -> Vec<usize> {
    let mut counts = Vec::new();
    let mut m = n;
    loop {
        let k = (m as f64).sqrt().floor() as usize;
        if k < 10 {
            counts.push(1);
            return counts;
        }
        counts.push(k);
        m = k;
    }
}

/// Hyperparameters of one full training run. The per-level vectors are
/// indexed by level - 1 and must cover the optimized levels 1..L-1.
#[derive(Debug, Clone)]
pub struct MaziConfig {
    pub dim: usize,
    /// Coarse node counts for levels 2..L; strictly decreasing, ends at 1.
    pub community_counts: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub epochs: Vec<usize>,
    pub window: usize,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub iterations: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub negatives: usize,
    pub max_sweeps: usize,
    /// Rebuild coarse graphs after community moves; off reproduces the
    /// coarsen-once-at-init behavior.
    pub rebuild: bool,
    pub parallel: bool,
    pub seed: u64,
}

impl MaziConfig {
    /// Scalar hyperparameters broadcast across all levels, with the default
    /// sqrt community-count schedule for a graph of `n` nodes.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n: usize,
        dim: usize,
        learning_rate: f64,
        epochs: usize,
        window: usize,
        walk_length: usize,
        walks_per_node: usize,
        iterations: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
        negatives: usize,
        seed: u64,
    ) -> Self {
        let counts = sqrt_schedule(n);
        let levels = counts.len() + 1;
        MaziConfig {
            dim,
            community_counts: counts,
            learning_rate: vec![learning_rate; levels],
            epochs: vec![epochs; levels],
            window,
            walk_length,
            walks_per_node,
            iterations,
            alpha: vec![alpha; levels],
            beta: vec![beta; levels],
            gamma: vec![gamma; levels],
            negatives,
            max_sweeps: 10,
            rebuild: true,
            parallel: false,
            seed,
        }
    }

    /// Total level count L (the finest graph plus one per coarse count).
    pub fn levels(&self) -> usize {
        self.community_counts.len() + 1
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::Config("dim must be >= 1".into()));
        }
        if self.walk_length < 2 {
            return Err(Error::Config("walk_length must be >= 2".into()));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if self.community_counts.is_empty() {
            return Err(Error::Config("need at least one coarse level".into()));
        }
        let mut prev = n;
        for &k in &self.community_counts {
            if k >= prev || k < 1 {
                return Err(Error::Infeasible(format!(
                    "community counts must decrease strictly: {k} after {prev}"
                )));
            }
            prev = k;
        }
        let need = self.levels() - 1;
        for (name, len) in [
            ("learning_rate", self.learning_rate.len()),
            ("epochs", self.epochs.len()),
            ("alpha", self.alpha.len()),
            ("beta", self.beta.len()),
            ("gamma", self.gamma.len()),
        ] {
            if len < need {
                return Err(Error::Config(format!(
                    "{name} must cover {need} levels, got {len}"
                )));
            }
        }
        if self
            .alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.gamma)
            .any(|&v| v < 0.0)
        {
            return Err(Error::Config("alpha/beta/gamma must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One level: its graph G^l, membership H^l into the next coarser level
/// (absent at the top), and embeddings X^l.
#[derive(Debug, Clone)]
pub struct LevelState {
    pub graph: Graph,
    pub assignment: Option<CommunityAssignment>,
    pub embeddings: EmbeddingMatrix,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<LevelState>,
    pub config: MaziConfig,
}

impl Hierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Structured text dump plus one embedding file per level.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let index = dir.join("hierarchy.txt");
        let file = File::create(&index).map_err(|e| Error::io(&index, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "levels {}", self.num_levels()).map_err(|e| Error::io(&index, e))?;
        for (l, level) in self.levels.iter().enumerate() {
            let emb_name = format!("x{}.txt", l + 1);
            writeln!(
                out,
                "level {} nodes {} embeddings {emb_name}",
                l + 1,
                level.graph.num_nodes()
            )
            .map_err(|e| Error::io(&index, e))?;
            if let Some(h) = &level.assignment {
                let parts: Vec<String> = h.membership().iter().map(|c| c.to_string()).collect();
                writeln!(out, "membership {}", parts.join(" ")).map_err(|e| Error::io(&index, e))?;
            }
            save_embedding(&level.embeddings, &dir.join(emb_name))?;
        }
        Ok(())
    }
}

/// Build the full hierarchy from the finest graph and its initial
/// embeddings: partition each level, coarsen to the next, and lift the
/// embeddings by community averaging. A caller-supplied level-1 partition
/// replaces the greedy one when given.
pub fn init_gxh(
    g1: Graph,
    x1: EmbeddingMatrix,
    config: MaziConfig,
    prior_h1: Option<CommunityAssignment>,
) -> Result<Hierarchy> {
    config.validate(g1.num_nodes())?;
    if x1.rows() != g1.num_nodes() {
        return Err(Error::LengthMismatch {
            what: "embedding rows".into(),
            expected: g1.num_nodes(),
            got: x1.rows(),
        });
    }
    let mut levels = Vec::with_capacity(config.levels());
    let mut graph = g1;
    let mut x = x1;
    for (l, &k) in config.community_counts.iter().enumerate() {
        let h = match (l, &prior_h1) {
            (0, Some(prior)) => {
                if prior.len() != graph.num_nodes() || prior.num_communities() != k {
                    return Err(Error::InvalidCommunityCount {
                        k: prior.num_communities(),
                        num_nodes: graph.num_nodes(),
                    });
                }
                prior.clone()
            }
            _ => initial_partition(&graph, k, config.seed)?,
        };
        let coarse = coarsen(&graph, &h)?;
        let coarse_x = average_up(&x, &h)?;
        levels.push(LevelState {
            graph,
            assignment: Some(h),
            embeddings: x,
        });
        graph = coarse;
        x = coarse_x;
    }
    levels.push(LevelState {
        graph,
        assignment: None,
        embeddings: x,
    });
    Ok(Hierarchy { levels, config })
}

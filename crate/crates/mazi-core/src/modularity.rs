//! Modularity computation, incremental move-based community refinement, and
//! the greedy agglomerative k-way initial partitioner.
//!
//! `deg_int` of a community is the sum over member nodes of their
//! intra-community degree, so every internal edge counts twice and a
//! self-loop counts twice for its node. Under this reading the all-one
//! partition scores exactly 0 and a single cross edge between two singleton
//! communities scores -0.5.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Per-node community membership (symbol H). Community ids are dense in
/// `[0, num_communities)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    membership: Vec<u32>,
    num_communities: usize,
}

impl CommunityAssignment {
    /// Build from raw membership ids, compacting used ids in ascending order.
    pub fn from_membership(raw: &[u32]) -> Self {
        let mut used: Vec<u32> = raw.to_vec();
        used.sort_unstable();
        used.dedup();
        let membership = raw
            .iter()
            .map(|c| used.binary_search(c).unwrap() as u32)
            .collect();
        CommunityAssignment {
            membership,
            num_communities: used.len(),
        }
    }

    /// Already-dense membership with an explicit community count. Used where
    /// transiently empty communities must keep their ids (e.g. move replay).
    pub fn with_num_communities(membership: Vec<u32>, num_communities: usize) -> Result<Self> {
        if let Some(&c) = membership.iter().find(|&&c| c as usize >= num_communities) {
            return Err(Error::InvalidCommunityCount {
                k: c as usize + 1,
                num_nodes: num_communities,
            });
        }
        Ok(CommunityAssignment {
            membership,
            num_communities,
        })
    }

    pub fn singletons(n: usize) -> Self {
        CommunityAssignment {
            membership: (0..n as u32).collect(),
            num_communities: n,
        }
    }

    pub fn all_one(n: usize) -> Self {
        CommunityAssignment {
            membership: vec![0; n],
            num_communities: 1,
        }
    }

    pub fn get(&self, v: usize) -> u32 {
        self.membership[v]
    }

    pub fn set(&mut self, v: usize, c: u32) {
        debug_assert!((c as usize) < self.num_communities);
        self.membership[v] = c;
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    /// Member node lists, indexed by community id.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (v, &c) in self.membership.iter().enumerate() {
            out[c as usize].push(v as u32);
        }
        out
    }
}

/// Per-community internal/external degree accumulators (symbols ID, ED).
#[derive(Debug, Clone, PartialEq)]
pub struct ModularityState {
    pub internal_degree: Vec<f64>,
    pub external_degree: Vec<f64>,
    pub community_sizes: Vec<usize>,
    pub total_weight: f64,
}

/// One pass over the edges; satisfies ID[c] + ED[c] = sum of member degrees.
pub fn build_state(g: &Graph, h: &CommunityAssignment) -> Result<ModularityState> {
    if h.len() != g.num_nodes() {
        return Err(Error::LengthMismatch {
            what: "community membership".into(),
            expected: g.num_nodes(),
            got: h.len(),
        });
    }
    let k = h.num_communities();
    let mut internal = vec![0.0; k];
    let mut external = vec![0.0; k];
    let mut sizes = vec![0usize; k];
    for v in 0..g.num_nodes() {
        let c = h.get(v) as usize;
        sizes[c] += 1;
        internal[c] += 2.0 * g.self_loop(v);
        for (u, w) in g.neighbors(v) {
            if h.get(u as usize) as usize == c {
                internal[c] += w;
            } else {
                external[c] += w;
            }
        }
    }
    Ok(ModularityState {
        internal_degree: internal,
        external_degree: external,
        community_sizes: sizes,
        total_weight: g.total_weight(),
    })
}

/// Eq-style modularity from the accumulators:
/// Q = (1/2m) * sum_c (ID[c] - (ID[c] + ED[c])^2 / 2m).
pub fn modularity(state: &ModularityState) -> Result<f64> {
    if state.total_weight <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let two_m = 2.0 * state.total_weight;
    let mut q = 0.0;
    for c in 0..state.internal_degree.len() {
        let deg = state.internal_degree[c] + state.external_degree[c];
        q += state.internal_degree[c] - deg * deg / two_m;
    }
    Ok(q / two_m)
}

/// Degree of one node split by adjacent community, computed in O(deg(v)).
/// `by_community` is sorted by community id and excludes the self-loop.
#[derive(Debug, Clone)]
pub struct CommunityDegrees {
    pub node: usize,
    pub degree: f64,
    pub self_loop: f64,
    pub by_community: Vec<(u32, f64)>,
}

impl CommunityDegrees {
    pub fn to_community(&self, c: u32) -> f64 {
        self.by_community
            .binary_search_by_key(&c, |&(id, _)| id)
            .map(|i| self.by_community[i].1)
            .unwrap_or(0.0)
    }
}

pub fn community_degrees(g: &Graph, h: &CommunityAssignment, v: usize) -> CommunityDegrees {
    let mut by: Vec<(u32, f64)> = Vec::with_capacity(g.neighbor_count(v));
    for (u, w) in g.neighbors(v) {
        by.push((h.get(u as usize), w));
    }
    by.sort_unstable_by_key(|&(c, _)| c);
    let mut merged: Vec<(u32, f64)> = Vec::with_capacity(by.len());
    for (c, w) in by {
        match merged.last_mut() {
            Some((last, acc)) if *last == c => *acc += w,
            _ => merged.push((c, w)),
        }
    }
    CommunityDegrees {
        node: v,
        degree: g.degree(v),
        self_loop: g.self_loop(v),
        by_community: merged,
    }
}

/// Change in Q if `deg.node` moved from community `from` to `to`. O(1).
pub fn delta_q(state: &ModularityState, deg: &CommunityDegrees, from: u32, to: u32) -> f64 {
    if from == to {
        return 0.0;
    }
    let two_m = 2.0 * state.total_weight;
    let d_from = deg.to_community(from);
    let d_to = deg.to_community(to);
    let (f, t) = (from as usize, to as usize);
    let deg_f = state.internal_degree[f] + state.external_degree[f];
    let deg_t = state.internal_degree[t] + state.external_degree[t];
    let id_delta = -2.0 * (d_from + deg.self_loop) + 2.0 * (d_to + deg.self_loop);
    let deg_f_new = deg_f - deg.degree;
    let deg_t_new = deg_t + deg.degree;
    let null_delta =
        (deg_f_new * deg_f_new - deg_f * deg_f + deg_t_new * deg_t_new - deg_t * deg_t) / two_m;
    (id_delta - null_delta) / two_m
}

/// Apply a node move to the accumulators in O(1). The caller updates the
/// assignment itself.
pub fn apply_move(state: &mut ModularityState, deg: &CommunityDegrees, from: u32, to: u32) {
    if from == to {
        return;
    }
    let d_from = deg.to_community(from);
    let d_to = deg.to_community(to);
    let s2 = 2.0 * deg.self_loop;
    let (f, t) = (from as usize, to as usize);
    state.internal_degree[f] -= 2.0 * d_from + s2;
    state.external_degree[f] += 2.0 * d_from + s2 - deg.degree;
    state.internal_degree[t] += 2.0 * d_to + s2;
    state.external_degree[t] += deg.degree - 2.0 * d_to - s2;
    state.community_sizes[f] -= 1;
    state.community_sizes[t] += 1;
}

fn log_sigmoid(z: f64) -> f64 {
    // Stable log(sigma(z)).
    if z >= 0.0 {
        -(1.0 + (-z).exp()).ln()
    } else {
        z - (1.0 + z.exp()).ln()
    }
}

fn proximity_term(
    x_level: Option<&EmbeddingMatrix>,
    x_parent: Option<&EmbeddingMatrix>,
    v: usize,
    target: u32,
) -> f64 {
    match (x_level, x_parent) {
        (Some(xl), Some(xp)) => log_sigmoid(dot(xl.row(v), xp.row(target as usize))),
        _ => 0.0,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Score of hypothetically moving `v` into `target`:
/// gamma * Q(after move) + beta * log sigma(x_level[v] . x_parent[target]).
/// Pure evaluation; the state is not mutated.
#[allow(clippy::too_many_arguments)]
pub fn move_score(
    state: &ModularityState,
    g: &Graph,
    h: &CommunityAssignment,
    x_level: Option<&EmbeddingMatrix>,
    x_parent: Option<&EmbeddingMatrix>,
    v: usize,
    target: u32,
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    let deg = community_degrees(g, h, v);
    let q = modularity(state)? + delta_q(state, &deg, h.get(v), target);
    let mut score = gamma * q;
    if beta != 0.0 {
        score += beta * proximity_term(x_level, x_parent, v, target);
    }
    Ok(score)
}

/// One or more sweeps of best-move refinement. Nodes are visited in ascending
/// id order; candidate targets are the communities adjacent to the node plus
/// its current one; ties go to the smallest community id and a node only
/// moves on a strict score improvement. Moves that would empty a community
/// are skipped. Returns the number of applied moves.
#[allow(clippy::too_many_arguments)]
pub fn update_h(
    g: &Graph,
    h: &mut CommunityAssignment,
    state: &mut ModularityState,
    x_level: Option<&EmbeddingMatrix>,
    x_parent: Option<&EmbeddingMatrix>,
    beta: f64,
    gamma: f64,
    max_sweeps: usize,
) -> Result<usize> {
    let mut total_moves = 0;
    for _ in 0..max_sweeps {
        let mut q = modularity(state)?;
        let mut moves = 0;
        for v in 0..g.num_nodes() {
            let from = h.get(v);
            if state.community_sizes[from as usize] <= 1 {
                continue;
            }
            let deg = community_degrees(g, h, v);
            let current_score =
                gamma * q + beta * proximity_term(x_level, x_parent, v, from);
            let mut best_score = current_score;
            let mut best_target = from;
            let mut best_dq = 0.0;
            for &(c, _) in &deg.by_community {
                if c == from {
                    continue;
                }
                let dq = delta_q(state, &deg, from, c);
                let mut score = gamma * (q + dq);
                if beta != 0.0 {
                    score += beta * proximity_term(x_level, x_parent, v, c);
                }
                // by_community is ascending, so strict > keeps the smallest id
                // among equal scores.
                if score > best_score {
                    best_score = score;
                    best_target = c;
                    best_dq = dq;
                }
            }
            if best_target != from {
                apply_move(state, &deg, from, best_target);
                h.set(v, best_target);
                q += best_dq;
                moves += 1;
            }
        }
        total_moves += moves;
        if moves == 0 {
            break;
        }
    }
    Ok(total_moves)
}

#[derive(Debug)]
struct MergeCandidate {
    gain: f64,
    a: u32,
    b: u32,
    version_a: u64,
    version_b: u64,
}

impl PartialEq for MergeCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for MergeCandidate {}
impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for MergeCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: largest gain first, ties to the smallest (a, b) pair.
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

/// Greedy modularity agglomeration to exactly `k` communities: start from
/// singletons and repeatedly merge the connected community pair with the
/// largest modularity gain, then run one refinement sweep (beta = 0).
/// Deterministic; the `_seed` parameter is accepted for interface uniformity.
pub fn initial_partition(g: &Graph, k: usize, _seed: u64) -> Result<CommunityAssignment> {
    let n = g.num_nodes();
    if k < 1 || k > n {
        return Err(Error::InvalidCommunityCount { k, num_nodes: n });
    }
    let m = g.total_weight();
    if m <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }

    let mut alive = vec![true; n];
    let mut version = vec![0u64; n];
    let mut deg_c: Vec<f64> = (0..n).map(|v| g.degree(v)).collect();
    let mut cross: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
    let mut members: Vec<Vec<u32>> = (0..n as u32).map(|v| vec![v]).collect();
    for (u, v, w) in g.edges() {
        if u != v {
            *cross[u as usize].entry(v).or_insert(0.0) += w;
            *cross[v as usize].entry(u).or_insert(0.0) += w;
        }
    }

    let gain = |e_ab: f64, da: f64, db: f64| (e_ab - da * db / (2.0 * m)) / m;

    let mut heap = BinaryHeap::new();
    for u in 0..n as u32 {
        for (&v, &w) in &cross[u as usize] {
            if u < v {
                heap.push(MergeCandidate {
                    gain: gain(w, deg_c[u as usize], deg_c[v as usize]),
                    a: u,
                    b: v,
                    version_a: 0,
                    version_b: 0,
                });
            }
        }
    }

    let mut remaining = n;
    while remaining > k {
        let (a, b) = match heap.pop() {
            Some(c) => {
                let (a, b) = (c.a as usize, c.b as usize);
                if !alive[a]
                    || !alive[b]
                    || version[a] != c.version_a
                    || version[b] != c.version_b
                {
                    continue;
                }
                (a, b)
            }
            None => {
                // Disconnected remainder: merge the two smallest alive ids.
                let mut it = (0..n).filter(|&c| alive[c]);
                (it.next().unwrap(), it.next().unwrap())
            }
        };
        // Merge b into a; a < b so the surviving label is the smaller id.
        alive[b] = false;
        version[a] += 1;
        version[b] += 1;
        deg_c[a] += deg_c[b];
        if members[b].len() > members[a].len() {
            let (ma, mb) = (std::mem::take(&mut members[a]), std::mem::take(&mut members[b]));
            members[a] = mb;
            members[a].extend(ma);
        } else {
            let mb = std::mem::take(&mut members[b]);
            members[a].extend(mb);
        }
        let b_edges = std::mem::take(&mut cross[b]);
        for (c, w) in b_edges {
            let c = c as usize;
            cross[c].remove(&(b as u32));
            if c == a {
                continue;
            }
            *cross[a].entry(c as u32).or_insert(0.0) += w;
            *cross[c].entry(a as u32).or_insert(0.0) += w;
        }
        for (&c, &w) in &cross[a] {
            let c = c as usize;
            if !alive[c] {
                continue;
            }
            let (lo, hi) = if a < c { (a, c) } else { (c, a) };
            heap.push(MergeCandidate {
                gain: gain(w, deg_c[a], deg_c[c]),
                a: lo as u32,
                b: hi as u32,
                version_a: version[lo],
                version_b: version[hi],
            });
        }
        remaining -= 1;
    }

    let mut membership = vec![0u32; n];
    let mut next = 0u32;
    for c in 0..n {
        if alive[c] {
            for &v in &members[c] {
                membership[v as usize] = next;
            }
            next += 1;
        }
    }
    let mut h = CommunityAssignment::with_num_communities(membership, k)?;
    let mut state = build_state(g, &h)?;
    update_h(g, &mut h, &mut state, None, None, 0.0, 1.0, 1)?;
    Ok(h)
}

/// Partition file: one community id per line, line i = node i.
pub fn load_partition(path: &Path, num_nodes: usize) -> Result<CommunityAssignment> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let c: u32 = line
            .parse()
            .map_err(|_| Error::parse(path, lineno + 1, format!("bad community id: {line}")))?;
        raw.push(c);
    }
    if raw.len() != num_nodes {
        return Err(Error::LengthMismatch {
            what: format!("partition file {}", path.display()),
            expected: num_nodes,
            got: raw.len(),
        });
    }
    Ok(CommunityAssignment::from_membership(&raw))
}

pub fn save_partition(h: &CommunityAssignment, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for &c in h.membership() {
        writeln!(out, "{c}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

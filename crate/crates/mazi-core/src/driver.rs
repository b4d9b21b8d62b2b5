//! Training driver: alternating forward (fine-to-coarse) and backward
//! (coarse-to-fine) optimization over the hierarchy, with a per-step report
//! of losses, modularity, and moves.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::embedding::{
    train_flat_baseline, update_x, BaselineParams, EmbeddingMatrix, LevelNeighborhood,
    UpdateXParams,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hierarchy::{average_up, coarsen, init_gxh, Hierarchy, LevelState, MaziConfig};
use crate::modularity::{build_state, modularity, update_h, CommunityAssignment};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Forward => write!(f, "forward"),
            Direction::Backward => write!(f, "backward"),
        }
    }
}

/// One UpdateXH step at one level.
#[derive(Debug, Clone)]
pub struct TrainRecord {
    pub iteration: usize,
    pub direction: Direction,
    /// 1-based level index.
    pub level: usize,
    pub sg_loss: f64,
    pub comm_loss: f64,
    pub q: f64,
    pub moves: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub records: Vec<TrainRecord>,
}

impl TrainReport {
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "iter,direction,level,sg_loss,comm_loss,q,moves,seconds")
            .map_err(|e| Error::io(path, e))?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.iteration, r.direction, r.level, r.sg_loss, r.comm_loss, r.q, r.moves, r.seconds
            )
            .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

fn update_xh(
    levels: &mut [LevelState],
    l: usize,
    config: &MaziConfig,
    iteration: usize,
    direction: Direction,
    round: u64,
) -> Result<TrainRecord> {
    let start = Instant::now();
    let (fine, rest) = levels.split_at_mut(l);
    let (cur, coarse) = rest.split_at_mut(1);
    let cur = &mut cur[0];
    let parent = &mut coarse[0];
    let child = fine.last();

    let params = UpdateXParams {
        epochs: config.epochs[l],
        learning_rate: config.learning_rate[l],
        window: config.window,
        walk_length: config.walk_length,
        walks_per_node: config.walks_per_node,
        alpha: config.alpha[l],
        beta: config.beta[l],
        negatives: config.negatives,
        seed: config.seed,
        round,
        parallel: config.parallel,
    };
    let h_owned;
    let nbhd = LevelNeighborhood {
        parent_assignment: cur.assignment.as_ref(),
        x_parent: Some(&parent.embeddings),
        x_children: child.map(|c| &c.embeddings),
        child_assignment: match child {
            Some(c) => {
                h_owned = c.assignment.clone();
                h_owned.as_ref()
            }
            None => None,
        },
    };
    let (sg_loss, comm_loss) = update_x(&mut cur.embeddings, &cur.graph, &nbhd, &params)?;

    let h = cur
        .assignment
        .as_mut()
        .expect("optimized levels carry an assignment");
    let mut state = build_state(&cur.graph, h)?;
    let mut moves = 0;
    if config.gamma[l] > 0.0 {
        moves = update_h(
            &cur.graph,
            h,
            &mut state,
            Some(&cur.embeddings),
            Some(&parent.embeddings),
            config.beta[l],
            config.gamma[l],
            config.max_sweeps,
        )?;
        if moves > 0 && config.rebuild {
            parent.graph = coarsen(&cur.graph, h)?;
        }
    }
    let q = modularity(&state)?;
    Ok(TrainRecord {
        iteration,
        direction,
        level: l + 1,
        sg_loss,
        comm_loss,
        q,
        moves,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn refresh_top_level(levels: &mut [LevelState]) -> Result<()> {
    let (rest, top) = levels.split_at_mut(levels.len() - 1);
    let below = rest.last().expect("at least two levels");
    top[0].embeddings = average_up(
        &below.embeddings,
        below
            .assignment
            .as_ref()
            .expect("level below the top carries an assignment"),
    )?;
    Ok(())
}

/// Full training run: initialize the hierarchy, then alternate forward
/// (l = 1..L-1) and backward (l = L-1..1) passes for `config.iterations`
/// rounds, each level step being update_x followed by update_h. When no
/// initial embedding is given, level 1 starts from flat skip-gram training
/// on the input graph.
pub fn run_mazi(
    g1: Graph,
    config: MaziConfig,
    init_x: Option<EmbeddingMatrix>,
    init_h: Option<CommunityAssignment>,
) -> Result<(Hierarchy, TrainReport)> {
    config.validate(g1.num_nodes())?;
    let x1 = match init_x {
        Some(x) => x,
        None => train_flat_baseline(
            &g1,
            &BaselineParams {
                dim: config.dim,
                epochs: config.epochs[0].max(1),
                learning_rate: config.learning_rate[0],
                window: config.window,
                walk_length: config.walk_length,
                walks_per_node: config.walks_per_node,
                alpha: config.alpha[0],
                negatives: config.negatives,
                p: 1.0,
                q: 1.0,
                seed: config.seed,
                parallel: config.parallel,
            },
        )?,
    };
    let mut hier = init_gxh(g1, x1, config, init_h)?;
    let levels = hier.num_levels();
    let mut report = TrainReport::default();
    let mut round = 0u64;
    for w in 0..hier.config.iterations {
        for l in 0..levels - 1 {
            let rec = update_xh(&mut hier.levels, l, &hier.config, w, Direction::Forward, round)?;
            report.records.push(rec);
            round += 1;
        }
        for l in (0..levels - 1).rev() {
            let rec = update_xh(&mut hier.levels, l, &hier.config, w, Direction::Backward, round)?;
            report.records.push(rec);
            round += 1;
        }
        refresh_top_level(&mut hier.levels)?;
    }
    Ok((hier, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    Full,
    NoBeta,
    NoGamma,
}

/// Re-run training with the community-proximity weight (β) or the modularity
/// weight (γ) zeroed out, for side-by-side comparisons against the full
/// model.
pub fn ablation_run(
    g1: Graph,
    mut config: MaziConfig,
    mode: AblationMode,
) -> Result<(Hierarchy, TrainReport)> {
    match mode {
        AblationMode::Full => {}
        AblationMode::NoBeta => config.beta.iter_mut().for_each(|b| *b = 0.0),
        AblationMode::NoGamma => config.gamma.iter_mut().for_each(|g| *g = 0.0),
    }
    run_mazi(g1, config, None, None)
}

/// Uniformly initialized level-1 embeddings drawn from the run's seed.
pub fn default_init(n: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = stream_rng(seed, Stream::EmbeddingInit, 0);
    EmbeddingMatrix::uniform_init(n, dim, &mut rng)
}

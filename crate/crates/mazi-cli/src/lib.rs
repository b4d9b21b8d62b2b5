//! Configuration plumbing and the command implementations behind the `mazi`
//! binary: generate, partition, train, eval-lp, eval-nc, ablate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mazi_core::driver::{run_mazi, AblationMode};
use mazi_core::embedding::{
    load_embedding, save_embedding, train_flat_baseline, BaselineParams, EmbeddingMatrix,
};
use mazi_core::error::{Error, Result};
use mazi_core::eval::{
    fit_classifier, fit_decoder, make_link_split, map_score, save_metrics, ClassifierFitParams,
    DecoderFitParams, DecoderKind, DecoderModel, MetricRow,
};
use mazi_core::graph::{
    load_edgelist, load_labels, save_edgelist, save_id_map, save_labels, NodeLabels,
};
use mazi_core::hierarchy::{sqrt_schedule, MaziConfig};
use mazi_core::modularity::{build_state, initial_partition, load_partition, modularity,
    save_partition};
use mazi_core::synthgen::{
    generate_graph, generate_labels, generate_labels_multi, target_degrees, TreeSpec,
};
use mazi_core::Graph;

/// (key, default, documentation) for every recognized configuration key.
const KEY_TABLE: &[(&str, &str, &str)] = &[
    // General
    ("seed", "1", "master seed expanded into per-purpose streams"),
    ("mode", "mazi", "embedding method: mazi | baseline"),
    ("ablation", "full", "training variant: full | no_beta | no_gamma"),
    ("parallel", "false", "hogwild-style parallel embedding updates (non-deterministic)"),
    // Input/output paths
    ("graph", "", "edge-list input path (u v [w] per line)"),
    ("weighted", "false", "read a third edge-weight column"),
    ("labels", "", "label file path (node label[,label...] per line)"),
    ("embeddings", "", "precomputed embedding file; eval commands train their own when empty"),
    ("prior_partition", "", "level-1 partition file used instead of the greedy initializer"),
    // Mazi hyperparameters (scalars broadcast across levels)
    ("dim", "128", "embedding dimension"),
    ("community_counts", "auto", "coarse level sizes, comma-separated; auto = repeated sqrt"),
    ("learning_rate", "0.025", "SGD step size"),
    ("epochs", "1", "walk-corpus passes per update_x call"),
    ("window", "10", "skip-gram context window"),
    ("walk_length", "40", "random-walk length"),
    ("walks_per_node", "10", "walks started per node"),
    ("iterations", "1", "alternating forward+backward rounds (W)"),
    ("alpha", "1.0", "negative-sample loss weight"),
    ("beta", "0.5", "community-proximity loss weight"),
    ("gamma", "1.0", "modularity weight in community moves"),
    ("negatives", "5", "negative samples per context"),
    ("max_sweeps", "10", "update_h sweep cap"),
    ("rebuild", "true", "rebuild coarse graphs after community moves"),
    ("p", "1.0", "node2vec return parameter for the flat baseline"),
    ("q", "1.0", "node2vec in-out parameter for the flat baseline"),
    // Generator
    ("preset", "", "tree preset: benchmark | demo | empty to use branching"),
    ("branching", "", "children per tree level, root first, comma-separated"),
    ("common_ratio", "1.2", "geometric decay of the meeting-level distribution"),
    ("power_law_exponent", "4.5", "target-degree power-law exponent"),
    ("min_degree", "24", "degree support minimum; the tuning constant fixing mean degree"),
    ("max_degree", "187", "degree support maximum (directed cap)"),
    ("multi_labels", "0", "label draws per node; 0 = single label"),
    // Partition
    ("k", "0", "community count for the partition command; 0 = floor(sqrt(n))"),
    // Evaluation
    ("val_frac", "0.05", "link-prediction validation edge fraction"),
    ("test_frac", "0.10", "link-prediction test edge fraction"),
    ("eval_negatives", "99", "ranking negatives per held-out positive"),
    ("decoder", "none", "edge scorer: none | distmult | mlp2"),
    ("decoder_negatives", "20", "training negatives per positive for learned decoders"),
    ("decoder_iterations", "300", "decoder gradient-descent steps"),
    ("decoder_lr", "0.5", "decoder learning rate"),
    ("per_class", "20", "train nodes sampled per class (s)"),
    ("c_grid", "0.1,1,10", "inverse regularization strengths searched on validation"),
    ("multi_label", "false", "predict label sets at threshold 0.5 instead of top-1"),
    ("normalize", "true", "L2-normalize embedding rows before classification"),
    ("imbalance_min_rule", "false", "cap the per-class draw at 75% of the class size"),
    ("seeds", "1", "evaluation repetitions; run i uses seed + i"),
];

/// Flat key=value configuration with defaults for every key.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    overrides: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, lineno + 1, format!("expected key=value: {line}")))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Set one key, rejecting keys outside the documented table.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEY_TABLE.iter().any(|(k, _, _)| *k == key) {
            return Err(Error::Config(format!("unknown configuration key: {key}")));
        }
        self.overrides.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn apply_set_flags(&mut self, sets: &[String]) -> Result<()> {
        for s in sets {
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got: {s}")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.overrides.get(key).map(String::as_str).unwrap_or_else(|| {
            KEY_TABLE
                .iter()
                .find(|(k, _, _)| *k == key)
                .map(|(_, d, _)| *d)
                .unwrap_or_else(|| panic!("undeclared key {key}"))
        })
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)
            .parse()
            .map_err(|_| Error::Config(format!("bad value for {key}: {}", self.get(key))))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.get(key)
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad value for {key}: {t}")))
            })
            .collect()
    }

    fn path(&self, key: &str) -> Result<PathBuf> {
        let v = self.get(key);
        if v.is_empty() {
            return Err(Error::Config(format!("required path key is empty: {key}")));
        }
        Ok(PathBuf::from(v))
    }

    pub fn seed(&self) -> Result<u64> {
        self.parsed("seed")
    }

    /// Full key set with defaults applied, one documented entry per line.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        for (key, _, doc) in KEY_TABLE {
            out.push_str(&format!("# {doc}\n{key} = {}\n", self.get(key)));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Generate,
    Partition,
    Train,
    EvalLp,
    EvalNc,
    Ablate,
}

/// Execute one subcommand: echo the resolved configuration into `out`, then
/// run it and write its artifacts there.
pub fn run(cmd: Command, config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_text(&out.join("resolved_config.txt"), &config.resolved_text())?;
    match cmd {
        Command::Generate => cmd_generate(config, out, quiet),
        Command::Partition => cmd_partition(config, out, quiet),
        Command::Train => cmd_train(config, out, quiet),
        Command::EvalLp => cmd_eval_lp(config, out, quiet),
        Command::EvalNc => cmd_eval_nc(config, out, quiet),
        Command::Ablate => cmd_ablate(config, out, quiet),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn tree_spec(config: &RunConfig) -> Result<TreeSpec> {
    let seed = config.seed()?;
    match config.get("preset") {
        "benchmark" => Ok(TreeSpec::benchmark(config.parsed("common_ratio")?, seed)),
        "demo" => Ok(TreeSpec::demo(seed)),
        "" => {
            if config.get("branching").is_empty() {
                return Err(Error::Config(
                    "generator needs either preset or branching".into(),
                ));
            }
            Ok(TreeSpec {
                branching: config.list("branching")?,
                common_ratio: config.parsed("common_ratio")?,
                power_law_exponent: config.parsed("power_law_exponent")?,
                min_degree: config.parsed("min_degree")?,
                max_degree: config.parsed("max_degree")?,
                seed,
            })
        }
        other => Err(Error::Config(format!("unknown preset: {other}"))),
    }
}

fn ablation_mode(config: &RunConfig) -> Result<AblationMode> {
    match config.get("ablation") {
        "full" => Ok(AblationMode::Full),
        "no_beta" => Ok(AblationMode::NoBeta),
        "no_gamma" => Ok(AblationMode::NoGamma),
        other => Err(Error::Config(format!("unknown ablation mode: {other}"))),
    }
}

fn mazi_config(config: &RunConfig, n: usize, seed: u64) -> Result<MaziConfig> {
    let counts = match config.get("community_counts") {
        "auto" => sqrt_schedule(n),
        _ => config.list("community_counts")?,
    };
    let levels = counts.len() + 1;
    Ok(MaziConfig {
        dim: config.parsed("dim")?,
        community_counts: counts,
        learning_rate: vec![config.parsed("learning_rate")?; levels],
        epochs: vec![config.parsed("epochs")?; levels],
        window: config.parsed("window")?,
        walk_length: config.parsed("walk_length")?,
        walks_per_node: config.parsed("walks_per_node")?,
        iterations: config.parsed("iterations")?,
        alpha: vec![config.parsed("alpha")?; levels],
        beta: vec![config.parsed("beta")?; levels],
        gamma: vec![config.parsed("gamma")?; levels],
        negatives: config.parsed("negatives")?,
        max_sweeps: config.parsed("max_sweeps")?,
        rebuild: config.parsed("rebuild")?,
        parallel: config.parsed("parallel")?,
        seed,
    })
}

fn baseline_params(config: &RunConfig, seed: u64) -> Result<BaselineParams> {
    Ok(BaselineParams {
        dim: config.parsed("dim")?,
        epochs: config.parsed("epochs")?,
        learning_rate: config.parsed("learning_rate")?,
        window: config.parsed("window")?,
        walk_length: config.parsed("walk_length")?,
        walks_per_node: config.parsed("walks_per_node")?,
        alpha: config.parsed("alpha")?,
        negatives: config.parsed("negatives")?,
        p: config.parsed("p")?,
        q: config.parsed("q")?,
        seed,
        parallel: config.parsed("parallel")?,
    })
}

/// Load the input edge list, restrict to the largest connected component,
/// and return the graph plus the composed new-id → original-id map.
fn load_input(config: &RunConfig, quiet: bool) -> Result<(Graph, Vec<u64>)> {
    let path = config.path("graph")?;
    let weighted: bool = config.parsed("weighted")?;
    let (g, ids) = load_edgelist(&path, weighted)?;
    let loaded = g.num_nodes();
    let (lcc, keep) = g.largest_connected_component();
    if lcc.num_nodes() < loaded {
        say(
            quiet,
            format!(
                "largest connected component: kept {} of {loaded} nodes",
                lcc.num_nodes()
            ),
        );
    }
    let map: Vec<u64> = keep.iter().map(|&v| ids[v as usize]).collect();
    Ok((lcc, map))
}

/// Labels for the loaded graph, remapped through the id map.
fn load_input_labels(config: &RunConfig, map: &[u64]) -> Result<NodeLabels> {
    let path = config.path("labels")?;
    let max_orig = *map.iter().max().expect("nonempty graph") as usize;
    let raw = load_labels(&path, max_orig + 1)?;
    let labels: Vec<Vec<u32>> = map.iter().map(|&orig| raw.labels[orig as usize].clone()).collect();
    Ok(NodeLabels::new(labels))
}

/// Embeddings for evaluation: a precomputed file when `embeddings` is set,
/// otherwise trained on `g` by the configured method.
fn obtain_embeddings(
    config: &RunConfig,
    g: &Graph,
    seed: u64,
    quiet: bool,
) -> Result<EmbeddingMatrix> {
    if !config.get("embeddings").is_empty() {
        let x = load_embedding(&config.path("embeddings")?)?;
        if x.rows() != g.num_nodes() {
            return Err(Error::LengthMismatch {
                what: "embedding rows vs graph nodes".into(),
                expected: g.num_nodes(),
                got: x.rows(),
            });
        }
        return Ok(x);
    }
    train_embeddings(config, g, seed, quiet)
}

fn train_embeddings(
    config: &RunConfig,
    g: &Graph,
    seed: u64,
    quiet: bool,
) -> Result<EmbeddingMatrix> {
    match config.get("mode") {
        "baseline" => {
            say(quiet, format!("training flat baseline (seed {seed})"));
            train_flat_baseline(g, &baseline_params(config, seed)?)
        }
        "mazi" => {
            say(quiet, format!("training mazi (seed {seed})"));
            let (hier, _) = run_variant(config, g.clone(), seed, None)?;
            Ok(hier.levels[0].embeddings.clone())
        }
        other => Err(Error::Config(format!("unknown mode: {other}"))),
    }
}

/// run_mazi with the configured ablation applied and an optional prior
/// level-1 partition.
fn run_variant(
    config: &RunConfig,
    g: Graph,
    seed: u64,
    prior: Option<mazi_core::CommunityAssignment>,
) -> Result<(mazi_core::hierarchy::Hierarchy, mazi_core::driver::TrainReport)> {
    let mut cfg = mazi_config(config, g.num_nodes(), seed)?;
    match ablation_mode(config)? {
        AblationMode::Full => {}
        AblationMode::NoBeta => cfg.beta.iter_mut().for_each(|b| *b = 0.0),
        AblationMode::NoGamma => cfg.gamma.iter_mut().for_each(|v| *v = 0.0),
    }
    run_mazi(g, cfg, None, prior)
}

fn cmd_generate(config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let spec = tree_spec(config)?;
    spec.validate()?;
    let (g, gt) = generate_graph(&spec)?;
    let multi: usize = config.parsed("multi_labels")?;
    let labels = if multi == 0 {
        generate_labels(&g, &gt, spec.seed)
    } else {
        generate_labels_multi(&g, &gt, multi, spec.seed)
    };
    save_edgelist(&g, &out.join("graph.txt"))?;
    save_labels(&labels, &out.join("labels.txt"))?;
    gt.save(&out.join("ground_truth.txt"))?;

    let targets = target_degrees(&spec);
    let mean_target = targets.iter().sum::<usize>() as f64 / targets.len() as f64;
    let mean_undirected = 2.0 * g.total_weight() / g.num_nodes() as f64;
    let state = build_state(&g, &gt.finest_assignment())?;
    let q = modularity(&state)?;
    let report = format!(
        "nodes {}\nedges {}\nmean_target_degree {mean_target}\n\
         mean_undirected_degree {mean_undirected}\nprior_partition_q {q}\n",
        g.num_nodes(),
        g.num_edges(),
    );
    write_text(&out.join("generation_report.txt"), &report)?;
    say(quiet, report.trim_end());
    Ok(())
}

fn cmd_partition(config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let (g, map) = load_input(config, quiet)?;
    let k: usize = config.parsed("k")?;
    let k = if k == 0 {
        (g.num_nodes() as f64).sqrt().floor() as usize
    } else {
        k
    };
    let h = initial_partition(&g, k, config.seed()?)?;
    let q = modularity(&build_state(&g, &h)?)?;
    save_partition(&h, &out.join("partition.txt"))?;
    save_id_map(&map, &out.join("id_map.txt"))?;
    write_text(
        &out.join("partition_report.txt"),
        &format!("communities {k}\nmodularity {q}\n"),
    )?;
    say(quiet, format!("partitioned into {k} communities, Q = {q}"));
    Ok(())
}

fn cmd_train(config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let (g, map) = load_input(config, quiet)?;
    let seed = config.seed()?;
    save_id_map(&map, &out.join("id_map.txt"))?;
    if config.get("mode") == "baseline" {
        let x = train_flat_baseline(&g, &baseline_params(config, seed)?)?;
        save_embedding(&x, &out.join("x1.txt"))?;
        say(quiet, "baseline embeddings written to x1.txt");
        return Ok(());
    }
    let prior = match config.get("prior_partition") {
        "" => None,
        _ => Some(load_partition(
            &config.path("prior_partition")?,
            g.num_nodes(),
        )?),
    };
    let (hier, report) = run_variant(config, g, seed, prior)?;
    hier.save(out)?;
    for (l, level) in hier.levels.iter().enumerate() {
        if let Some(h) = &level.assignment {
            save_partition(h, &out.join(format!("partition{}.txt", l + 1)))?;
        }
    }
    report.save_csv(&out.join("train_report.csv"))?;
    say(
        quiet,
        format!(
            "trained {} levels over {} update steps",
            hier.num_levels(),
            report.records.len()
        ),
    );
    Ok(())
}

fn aggregate(rows: &mut Vec<MetricRow>, method: &str, dataset: &str, metric: &str) {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.metric == metric)
        .map(|r| r.value)
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    for (suffix, value) in [("mean", mean), ("std", std)] {
        rows.push(MetricRow {
            method: method.to_string(),
            dataset: dataset.to_string(),
            seed: 0,
            metric: format!("{metric}_{suffix}"),
            value,
        });
    }
}

fn dataset_name(config: &RunConfig) -> String {
    Path::new(config.get("graph"))
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

fn cmd_eval_lp(config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let (g, _) = load_input(config, quiet)?;
    let base_seed = config.seed()?;
    let runs: u64 = config.parsed("seeds")?;
    let method = config.get("mode").to_string();
    let dataset = dataset_name(config);
    let mut rows = Vec::new();
    for i in 0..runs {
        let seed = base_seed + i;
        let split = make_link_split(
            &g,
            config.parsed("val_frac")?,
            config.parsed("test_frac")?,
            config.parsed("eval_negatives")?,
            seed,
        )?;
        let x = obtain_embeddings(config, &split.train_graph, seed, quiet)?;
        let decoder = match config.get("decoder") {
            "none" => DecoderModel::SigmoidDot,
            kind => {
                let kind = match kind {
                    "distmult" => DecoderKind::DistMult,
                    "mlp2" => DecoderKind::Mlp2,
                    other => return Err(Error::Config(format!("unknown decoder: {other}"))),
                };
                let params = DecoderFitParams {
                    negatives_per_positive: config.parsed("decoder_negatives")?,
                    hidden: x.dim(),
                    learning_rate: config.parsed("decoder_lr")?,
                    iterations: config.parsed("decoder_iterations")?,
                    seed,
                    ..DecoderFitParams::default()
                };
                let (model, test_ap) = fit_decoder(&x, &split.train_graph, kind, &params)?;
                rows.push(MetricRow {
                    method: method.clone(),
                    dataset: dataset.clone(),
                    seed,
                    metric: "decoder_ap".into(),
                    value: test_ap,
                });
                model
            }
        };
        let map = map_score(&x, &split, &decoder);
        say(quiet, format!("seed {seed}: MAP = {map}"));
        rows.push(MetricRow {
            method: method.clone(),
            dataset: dataset.clone(),
            seed,
            metric: "map".into(),
            value: map,
        });
    }
    aggregate(&mut rows, &method, &dataset, "map");
    save_metrics(&rows, &out.join("metrics_lp.csv"))?;
    Ok(())
}

fn classifier_params(config: &RunConfig, seed: u64) -> Result<ClassifierFitParams> {
    Ok(ClassifierFitParams {
        per_class: config.parsed("per_class")?,
        c_grid: config.list("c_grid")?,
        imbalance_min_rule: config.parsed("imbalance_min_rule")?,
        multi_label: config.parsed("multi_label")?,
        normalize: config.parsed("normalize")?,
        seed,
        ..ClassifierFitParams::default()
    })
}

fn cmd_eval_nc(config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let (g, map) = load_input(config, quiet)?;
    let labels = load_input_labels(config, &map)?;
    let base_seed = config.seed()?;
    let runs: u64 = config.parsed("seeds")?;
    let method = config.get("mode").to_string();
    let dataset = dataset_name(config);
    let mut rows = Vec::new();
    for i in 0..runs {
        let seed = base_seed + i;
        let x = obtain_embeddings(config, &g, seed, quiet)?;
        if x.dim() == 0 {
            return Err(Error::Config("zero-dimensional embeddings".into()));
        }
        let (model, micro, macro_f1) = fit_classifier(&x, &labels, &classifier_params(config, seed)?)?;
        say(
            quiet,
            format!("seed {seed}: micro F1 = {micro}, macro F1 = {macro_f1} (C = {})", model.c),
        );
        for (metric, value) in [("micro_f1", micro), ("macro_f1", macro_f1), ("chosen_c", model.c)]
        {
            rows.push(MetricRow {
                method: method.clone(),
                dataset: dataset.clone(),
                seed,
                metric: metric.into(),
                value,
            });
        }
    }
    aggregate(&mut rows, &method, &dataset, "micro_f1");
    aggregate(&mut rows, &method, &dataset, "macro_f1");
    save_metrics(&rows, &out.join("metrics_nc.csv"))?;
    Ok(())
}

fn cmd_ablate(config: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let (g, map) = load_input(config, quiet)?;
    let labels = load_input_labels(config, &map)?;
    let base_seed = config.seed()?;
    let runs: u64 = config.parsed("seeds")?;
    let dataset = dataset_name(config);
    let mut rows = Vec::new();
    for (name, mode) in [
        ("full", AblationMode::Full),
        ("no_beta", AblationMode::NoBeta),
        ("no_gamma", AblationMode::NoGamma),
    ] {
        for i in 0..runs {
            let seed = base_seed + i;
            let mut cfg = mazi_config(config, g.num_nodes(), seed)?;
            match mode {
                AblationMode::Full => {}
                AblationMode::NoBeta => cfg.beta.iter_mut().for_each(|b| *b = 0.0),
                AblationMode::NoGamma => cfg.gamma.iter_mut().for_each(|v| *v = 0.0),
            }
            let (hier, _) = run_mazi(g.clone(), cfg, None, None)?;
            let x = &hier.levels[0].embeddings;
            let (_, micro, macro_f1) = fit_classifier(x, &labels, &classifier_params(config, seed)?)?;
            say(
                quiet,
                format!("{name} seed {seed}: micro F1 = {micro}, macro F1 = {macro_f1}"),
            );
            for (metric, value) in [("micro_f1", micro), ("macro_f1", macro_f1)] {
                rows.push(MetricRow {
                    method: name.to_string(),
                    dataset: dataset.clone(),
                    seed,
                    metric: metric.into(),
                    value,
                });
            }
        }
        aggregate(&mut rows, name, &dataset, "macro_f1");
    }
    save_metrics(&rows, &out.join("metrics_ablate.csv"))?;
    Ok(())
}

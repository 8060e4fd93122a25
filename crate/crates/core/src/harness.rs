//! File-level pipeline: graph generation, cached solving, rounding runs,
//! training runs, ablation sweeps, and result aggregation.
//!
//! Every artifact this module writes embeds a [`RunManifest`] so a run can be
//! replayed bit-exactly from its own output. Graphs are identified by the
//! SHA-256 of their canonical text; embeddings carry that hash in a JSON
//! sidecar and any hash mismatch is fatal before compute starts.

use crate::error::{Error, Result};
use crate::graph::{generate_er, Graph};
use crate::policy::{init_params, AgentParams};
use crate::ppo::{train_with, StepMetrics, TrainConfig};
use crate::rng::derive_seed;
use crate::rounding::{expected_cut_analytic, pgw, PgwResult};
use crate::sdp::{default_rank, solve_sdp, Embedding, SdpReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Stream id for network initialization under the training seed. Training
/// itself consumes streams `0..=chains`, so harness streams start far above.
pub const INIT_STREAM: u64 = 1 << 32;
/// Stream id for the post-training rounding baseline.
pub const PGW_COMPARE_STREAM: u64 = (1 << 32) + 1;

/// Where a graph came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    /// Loaded from a file; `hash` is the canonical-text SHA-256.
    File { path: String, hash: String },
    /// Generated in-process from an Erdos-Renyi specification.
    ErSpec { n: usize, p: f64, seed: u64 },
}

/// Solver settings recorded with every embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpSettings {
    /// Embedding rank; `None` means `default_rank(n)`.
    pub d: Option<usize>,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings { d: None, tol: 1e-5, max_sweeps: 10_000, seed: 0 }
    }
}

/// Rounding settings recorded with every rounding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoundingSettings {
    pub b_samples: usize,
    pub seed: u64,
}

impl Default for RoundingSettings {
    fn default() -> Self {
        RoundingSettings { b_samples: 256, seed: 0 }
    }
}

/// Training settings: [`TrainConfig`] plus the network width and the
/// checkpoint cadence (0 writes a checkpoint only at the end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub hidden: usize,
    pub chains: usize,
    pub total_steps: usize,
    pub t_step: usize,
    pub n_epochs: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub clip_epsilon: f64,
    pub gamma: f64,
    pub seed: u64,
    pub use_adam: bool,
    pub reward_baseline: bool,
    pub deterministic: bool,
    pub checkpoint_every: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let c = TrainConfig::default();
        TrainSettings {
            hidden: 256,
            chains: c.chains,
            total_steps: c.total_steps,
            t_step: c.t_step,
            n_epochs: c.n_epochs,
            minibatch: c.minibatch,
            learning_rate: c.learning_rate,
            clip_epsilon: c.clip_epsilon,
            gamma: c.gamma,
            seed: c.seed,
            use_adam: c.use_adam,
            reward_baseline: c.reward_baseline,
            deterministic: c.deterministic,
            checkpoint_every: 0,
        }
    }
}

impl TrainSettings {
    pub fn to_config(&self) -> TrainConfig {
        TrainConfig {
            chains: self.chains,
            total_steps: self.total_steps,
            t_step: self.t_step,
            n_epochs: self.n_epochs,
            minibatch: self.minibatch,
            learning_rate: self.learning_rate,
            clip_epsilon: self.clip_epsilon,
            gamma: self.gamma,
            seed: self.seed,
            use_adam: self.use_adam,
            reward_baseline: self.reward_baseline,
            deterministic: self.deterministic,
        }
    }
}

/// Complete record of one invocation, embedded in every output artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp: Option<SdpSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<RoundingSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// One head-to-head line: rounding baseline versus trained agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub pgw_avg: f64,
    pub pgw_max: i64,
    pub agent_avg: f64,
    pub agent_max: i64,
    pub pct_increase_avg: f64,
    pub pct_increase_max: f64,
}

/// `100 * (agent - pgw) / pgw`; 0 when the baseline is 0 (empty graphs).
fn pct_increase(agent: f64, pgw: f64) -> f64 {
    if pgw == 0.0 {
        0.0
    } else {
        100.0 * (agent - pgw) / pgw
    }
}

impl ComparisonRow {
    pub fn new(instance: String, pgw: &PgwResult, agent_avg: f64, agent_max: i64) -> Self {
        ComparisonRow {
            instance,
            pgw_avg: pgw.avg_cut,
            pgw_max: pgw.max_cut,
            agent_avg,
            agent_max,
            pct_increase_avg: pct_increase(agent_avg, pgw.avg_cut),
            pct_increase_max: pct_increase(agent_max as f64, pgw.max_cut as f64),
        }
    }
}

/// SHA-256 of the canonical graph text, lowercase hex.
pub fn graph_hash(g: &Graph) -> String {
    hex::encode(Sha256::digest(g.canonical_text().as_bytes()))
}

/// Loads a graph file, sniffing JSON (leading `{`) versus Gset text.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadFormat(format!("cannot read {}: {}", path.display(), e)))?;
    if text.trim_start().starts_with('{') {
        Graph::from_json_str(&text)
    } else {
        Graph::parse_gset(&text)
    }
}

/// Writes bytes via a temp file in the same directory plus an atomic rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn source_for_file(path: &Path, g: &Graph) -> GraphSource {
    GraphSource::File { path: path.display().to_string(), hash: graph_hash(g) }
}

/// Instance label: the file stem of the graph path.
fn instance_id(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string()
}

/// Generates an Erdos-Renyi graph and writes it as JSON with an embedded
/// manifest. Pure function of its arguments: reruns are byte-identical.
pub fn cmd_gen_er(n: usize, p: f64, seed: u64, out_path: &Path) -> Result<Graph> {
    let g = generate_er(n, p, seed)?;
    let manifest = RunManifest {
        command: "gen-er".into(),
        graph: Some(GraphSource::ErSpec { n, p, seed }),
        sdp: None,
        rounding: None,
        train: None,
        output: Some(out_path.display().to_string()),
    };
    let mut value = g.to_json_value();
    value
        .as_object_mut()
        .expect("graph JSON is an object")
        .insert("manifest".into(), serde_json::to_value(&manifest)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_atomic(out_path, text.as_bytes())?;
    Ok(g)
}

/// Everything recorded next to an embedding. The same structure, minus the
/// manifest, is stored in the solver cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSidecar {
    pub graph_hash: String,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub objective: f64,
    pub iterations: usize,
    pub final_delta: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
}

fn sidecar_path(emb_path: &Path) -> PathBuf {
    let mut s = emb_path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// Cache key over everything that determines the solver output.
fn cache_key(hash: &str, d: usize, tol: f64, max_sweeps: usize, seed: u64) -> String {
    let text = format!("{}|{}|{:016x}|{}|{}", hash, d, tol.to_bits(), max_sweeps, seed);
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Outcome of [`cmd_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub report: SdpReport,
    pub cache_hit: bool,
    pub embedding_path: PathBuf,
}

fn try_cache_load(
    emb_file: &Path,
    meta_file: &Path,
    expected: &EmbeddingSidecar,
) -> Result<(Vec<u8>, EmbeddingSidecar)> {
    let meta: EmbeddingSidecar = serde_json::from_slice(&fs::read(meta_file)?)?;
    if meta.graph_hash != expected.graph_hash
        || meta.d != expected.d
        || meta.seed != expected.seed
        || meta.tol != expected.tol
        || meta.max_sweeps != expected.max_sweeps
    {
        return Err(Error::BadFormat("cache entry metadata mismatch".into()));
    }
    // Validate, then hand back the raw bytes: a hit must reproduce the
    // original file verbatim, and re-encoding would renormalize.
    let raw = fs::read(emb_file)?;
    let e = Embedding::from_bytes(&raw)?;
    if e.n() != expected.n || e.dim() != expected.d {
        return Err(Error::BadFormat("cache entry shape mismatch".into()));
    }
    Ok((raw, meta))
}

/// Solves the relaxation for a graph file, writing the embedding binary and a
/// JSON sidecar. With a cache directory, a prior solve with the same
/// `(graph hash, d, tol, max_sweeps, seed)` is reused byte-for-byte; a
/// corrupt cache entry is re-solved with a warning.
pub fn cmd_solve(
    graph_path: &Path,
    settings: &SdpSettings,
    out_path: &Path,
    cache_dir: Option<&Path>,
) -> Result<SolveOutcome> {
    let g = load_graph(graph_path)?;
    let d = settings.d.unwrap_or_else(|| default_rank(g.n()));
    let hash = graph_hash(&g);
    let manifest = RunManifest {
        command: "solve".into(),
        graph: Some(source_for_file(graph_path, &g)),
        sdp: Some(SdpSettings { d: Some(d), ..settings.clone() }),
        rounding: None,
        train: None,
        output: Some(out_path.display().to_string()),
    };
    let probe = EmbeddingSidecar {
        graph_hash: hash.clone(),
        n: g.n(),
        d,
        seed: settings.seed,
        tol: settings.tol,
        max_sweeps: settings.max_sweeps,
        objective: 0.0,
        iterations: 0,
        final_delta: 0.0,
        converged: false,
        manifest: None,
    };

    let key = cache_key(&hash, d, settings.tol, settings.max_sweeps, settings.seed);
    let cache_files = cache_dir.map(|dir| (dir.join(format!("{}.emb", key)), dir.join(format!("{}.json", key))));

    if let Some((emb_file, meta_file)) = &cache_files {
        if emb_file.exists() && meta_file.exists() {
            match try_cache_load(emb_file, meta_file, &probe) {
                Ok((raw, meta)) => {
                    write_atomic(out_path, &raw)?;
                    let sidecar = EmbeddingSidecar { manifest: Some(manifest), ..meta };
                    let mut text = serde_json::to_string_pretty(&sidecar)?;
                    text.push('\n');
                    write_atomic(&sidecar_path(out_path), text.as_bytes())?;
                    return Ok(SolveOutcome {
                        report: SdpReport {
                            objective: sidecar.objective,
                            iterations: sidecar.iterations,
                            final_delta: sidecar.final_delta,
                            converged: sidecar.converged,
                        },
                        cache_hit: true,
                        embedding_path: out_path.to_path_buf(),
                    });
                }
                Err(err) => {
                    eprintln!("warning: solver cache entry {} is unusable ({}); re-solving", key, err);
                }
            }
        }
    }

    let (e, report) = solve_sdp(&g, d, settings.tol, settings.max_sweeps, settings.seed)?;
    let entry = EmbeddingSidecar {
        objective: report.objective,
        iterations: report.iterations,
        final_delta: report.final_delta,
        converged: report.converged,
        manifest: None,
        ..probe
    };
    if let Some((emb_file, meta_file)) = &cache_files {
        write_atomic(emb_file, &e.to_bytes())?;
        let mut text = serde_json::to_string_pretty(&entry)?;
        text.push('\n');
        write_atomic(meta_file, text.as_bytes())?;
    }
    write_atomic(out_path, &e.to_bytes())?;
    let sidecar = EmbeddingSidecar { manifest: Some(manifest), ..entry };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    write_atomic(&sidecar_path(out_path), text.as_bytes())?;
    Ok(SolveOutcome { report, cache_hit: false, embedding_path: out_path.to_path_buf() })
}

/// Loads an embedding binary plus its mandatory sidecar.
pub fn load_embedding(emb_path: &Path) -> Result<(Embedding, EmbeddingSidecar)> {
    let side = sidecar_path(emb_path);
    if !side.exists() {
        return Err(Error::BadFormat(format!(
            "embedding sidecar not found: {}",
            side.display()
        )));
    }
    let sidecar: EmbeddingSidecar = serde_json::from_slice(&fs::read(&side)?)?;
    let e = Embedding::from_bytes(&fs::read(emb_path)?)?;
    if e.n() != sidecar.n || e.dim() != sidecar.d {
        return Err(Error::BadFormat(format!(
            "embedding {} does not match its sidecar (n {} vs {}, d {} vs {})",
            emb_path.display(),
            e.n(),
            sidecar.n,
            e.dim(),
            sidecar.d
        )));
    }
    Ok((e, sidecar))
}

/// Loads a graph and an embedding together, failing before any compute if
/// the embedding was solved for a different graph.
fn load_pair(graph_path: &Path, emb_path: &Path) -> Result<(Graph, Embedding, EmbeddingSidecar)> {
    let g = load_graph(graph_path)?;
    let (e, sidecar) = load_embedding(emb_path)?;
    let hash = graph_hash(&g);
    if sidecar.graph_hash != hash {
        return Err(Error::BadFormat(format!(
            "embedding {} was solved for graph {}, but {} hashes to {}",
            emb_path.display(),
            sidecar.graph_hash,
            graph_path.display(),
            hash
        )));
    }
    if !g.is_unit_weight() {
        eprintln!(
            "warning: {} has non-unit weights; approximation-ratio guarantees assume non-negative weights",
            graph_path.display()
        );
    }
    Ok((g, e, sidecar))
}

/// Rounding run over a solved embedding; returns the result and the JSON
/// document (manifest, statistics, analytic expectation).
pub fn cmd_pgw(
    graph_path: &Path,
    emb_path: &Path,
    settings: &RoundingSettings,
    out_path: Option<&Path>,
) -> Result<(PgwResult, serde_json::Value)> {
    let (g, e, _) = load_pair(graph_path, emb_path)?;
    let result = pgw(&g, &e, settings.b_samples, settings.seed)?;
    let manifest = RunManifest {
        command: "pgw".into(),
        graph: Some(source_for_file(graph_path, &g)),
        sdp: None,
        rounding: Some(settings.clone()),
        train: None,
        output: out_path.map(|p| p.display().to_string()),
    };
    let doc = serde_json::json!({
        "manifest": manifest,
        "avg_cut": result.avg_cut,
        "max_cut": result.max_cut,
        "samples": result.samples,
        "expected_cut_analytic": expected_cut_analytic(&g, &e)?,
    });
    if let Some(path) = out_path {
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    Ok((result, doc))
}

/// Outcome of [`cmd_train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub comparison: ComparisonRow,
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub comparison_path: PathBuf,
}

pub const METRICS_HEADER: &str = "t,avg_cut,max_cut,mean_reward,loss_ppo,loss_vf,wall_ms";
pub const ABLATION_HEADER: &str =
    "l,pgw_avg,pgw_max,agent_avg,agent_max,pct_increase_avg,pct_increase_max,status";

/// Trains the agent on a solved embedding. Writes `metrics.csv` (streamed,
/// flushed per row so aborts keep a usable prefix), `checkpoint.bin`, and
/// `comparison.json` holding the head-to-head against a fresh rounding run
/// with a disjoint seed stream on the same embedding.
pub fn cmd_train(
    graph_path: &Path,
    emb_path: &Path,
    settings: &TrainSettings,
    out_dir: &Path,
) -> Result<TrainOutcome> {
    if settings.total_steps == 0 {
        return Err(Error::arg("training needs at least one step"));
    }
    let (g, e, _) = load_pair(graph_path, emb_path)?;
    let config = settings.to_config();
    config.validate()?;
    fs::create_dir_all(out_dir)?;

    let manifest = RunManifest {
        command: "train".into(),
        graph: Some(source_for_file(graph_path, &g)),
        sdp: None,
        rounding: None,
        train: Some(settings.clone()),
        output: Some(out_dir.display().to_string()),
    };
    let metrics_path = out_dir.join("metrics.csv");
    let checkpoint_path = out_dir.join("checkpoint.bin");
    let comparison_path = out_dir.join("comparison.json");

    let initial = init_params(e.dim(), settings.hidden, derive_seed(settings.seed, INIT_STREAM))?;

    let mut file = fs::File::create(&metrics_path)?;
    writeln!(file, "# hypercut metrics v1 manifest={}", serde_json::to_string(&manifest)?)?;
    writeln!(file, "{}", METRICS_HEADER)?;
    file.flush()?;

    let mut last_row: Option<StepMetrics> = None;
    let write_row = |file: &mut fs::File, row: &StepMetrics| -> Result<()> {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            row.t, row.avg_cut, row.max_cut, row.mean_reward, row.loss_ppo, row.loss_vf, row.wall_ms
        )?;
        file.flush()?;
        Ok(())
    };

    let params = train_with(&g, &e, &config, &initial, |row, current: &AgentParams| {
        write_row(&mut file, row)?;
        last_row = Some(row.clone());
        if settings.checkpoint_every > 0 && (row.t + 1) % settings.checkpoint_every == 0 {
            write_atomic(&checkpoint_path, &current.to_bytes())?;
        }
        Ok(())
    })?;
    drop(file);
    write_atomic(&checkpoint_path, &params.to_bytes())?;

    let final_row = last_row.expect("at least one training step ran");
    let baseline = pgw(
        &g,
        &e,
        settings.chains,
        derive_seed(settings.seed, PGW_COMPARE_STREAM),
    )?;
    let comparison = ComparisonRow::new(
        instance_id(graph_path),
        &baseline,
        final_row.avg_cut,
        final_row.max_cut,
    );
    let doc = serde_json::json!({ "manifest": manifest, "comparison": comparison });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_atomic(&comparison_path, text.as_bytes())?;

    Ok(TrainOutcome { comparison, metrics_path, checkpoint_path, comparison_path })
}

/// Trains once per hidden width in `l_list`, writing each run under
/// `l_<width>/` and an `ablation.csv` summary. A failed width is recorded in
/// the status column and the sweep continues.
pub fn cmd_ablate(
    graph_path: &Path,
    emb_path: &Path,
    l_list: &[usize],
    base: &TrainSettings,
    out_dir: &Path,
) -> Result<PathBuf> {
    if l_list.is_empty() {
        return Err(Error::arg("ablation needs at least one hidden width"));
    }
    fs::create_dir_all(out_dir)?;
    let g = load_graph(graph_path)?;
    let manifest = RunManifest {
        command: "ablate".into(),
        graph: Some(source_for_file(graph_path, &g)),
        sdp: None,
        rounding: None,
        train: Some(base.clone()),
        output: Some(out_dir.display().to_string()),
    };
    let mut lines = Vec::with_capacity(l_list.len() + 2);
    lines.push(format!("# hypercut ablation v1 manifest={}", serde_json::to_string(&manifest)?));
    lines.push(ABLATION_HEADER.to_string());
    for &l in l_list {
        let settings = TrainSettings { hidden: l, ..base.clone() };
        let run_dir = out_dir.join(format!("l_{}", l));
        match cmd_train(graph_path, emb_path, &settings, &run_dir) {
            Ok(outcome) => {
                let c = outcome.comparison;
                lines.push(format!(
                    "{},{},{},{},{},{},{},ok",
                    l,
                    c.pgw_avg,
                    c.pgw_max,
                    c.agent_avg,
                    c.agent_max,
                    c.pct_increase_avg,
                    c.pct_increase_max
                ));
            }
            Err(err) => {
                eprintln!("warning: ablation width {} failed: {}", l, err);
                let status = err.to_string().replace([',', '\n'], ";");
                lines.push(format!("{},,,,,,,failed: {}", l, status));
            }
        }
    }
    let table_path = out_dir.join("ablation.csv");
    write_atomic(&table_path, (lines.join("\n") + "\n").as_bytes())?;
    Ok(table_path)
}

/// Collects every `comparison.json` under a directory into one CSV string,
/// sorted by instance then path for stable output.
pub fn cmd_report(dir: &Path) -> Result<String> {
    fn walk(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, found)?;
            } else if path.file_name().and_then(|n| n.to_str()) == Some("comparison.json") {
                found.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    let mut rows = Vec::new();
    for path in &files {
        let doc: serde_json::Value = serde_json::from_slice(&fs::read(path)?)?;
        let row: ComparisonRow = serde_json::from_value(
            doc.get("comparison")
                .cloned()
                .ok_or_else(|| Error::BadFormat(format!("{} has no comparison", path.display())))?,
        )?;
        rows.push((row, path.display().to_string()));
    }
    rows.sort_by(|a, b| (&a.0.instance, &a.1).cmp(&(&b.0.instance, &b.1)));
    let mut out = String::from(
        "instance,pgw_avg,pgw_max,agent_avg,agent_max,pct_increase_avg,pct_increase_max,source\n",
    );
    for (r, src) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance,
            r.pgw_avg,
            r.pgw_max,
            r.agent_avg,
            r.agent_max,
            r.pct_increase_avg,
            r.pct_increase_max,
            src
        ));
    }
    Ok(out)
}

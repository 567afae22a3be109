//! The `trajmatch` command line.
//!
//! Every subcommand writes one JSON document (to `--out` or stdout) carrying a
//! `config` block with the effective parameters; human-readable summaries go
//! to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::inference::{exact_log_similarity, match_graphs, posterior_optimality, Method};
use crate::io::{read_manifest, read_scene_csv, write_manifest, write_scene_csv, ManifestEntry};
use crate::model::{EventGraph, PotentialTable};
use crate::pipeline::{scene_graph, segment, PipelineConfig};
use crate::retrieval::{check_labels, cross_similarity, leave_one_out_from_matrix, rank, row_sigmas};
use crate::synth::{corner_trial, drop_entities, standard_benchmark, BENCHMARK_NOISE};
use crate::traj::Scene;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "trajmatch", version, about = "Trajectory activity segmentation and query-by-example matching")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with pipeline parameters; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Suppress the stderr summary.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Args, Default)]
pub struct PipelineArgs {
    /// Number of motion clusters.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Embedding dimension.
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jointly segment a scene into atomic motions.
    Segment {
        input: PathBuf,
        /// Number of motion clusters.
        #[arg(long)]
        k: Option<usize>,
        /// Embedding dimension.
        #[arg(long)]
        d: Option<usize>,
        /// Also emit the event graph built from the motions.
        #[arg(long)]
        graph: bool,
    },
    /// Similarity of a query scene (observation) to a model scene.
    Match {
        query: PathBuf,
        model: PathBuf,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Leave-one-out k-NN classification of a labeled manifest.
    Classify {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Neighbors voting per item.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Remove this many random entities from each query scene.
        #[arg(long, default_value_t = 0)]
        drop_entities: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Rank the items of a manifest by similarity to one query scene.
    Query {
        query: PathBuf,
        manifest: PathBuf,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Number of ranked items to report.
        #[arg(long, default_value_t = 5)]
        top: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write synthetic scenes and a manifest to a directory.
    Synth {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Preset::Benchmark)]
        preset: Preset,
        /// Number of scenes for the corners preset.
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Exact similarity with posterior marginals; for small fixtures.
    Oracle {
        query: PathBuf,
        model: PathBuf,
        /// Largest number of mappings to enumerate.
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Three play classes, eight views each.
    Benchmark,
    /// Two entities with synchronized corners.
    Corners,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_budget() {
        EXIT_BUDGET
    } else {
        EXIT_INPUT
    }
}

fn load_config(global: &GlobalArgs) -> Result<PipelineConfig> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            toml::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e
                    .span()
                    .map(|s| text[..s.start].lines().count().max(1) as u64)
                    .unwrap_or(0),
                message: e.message().to_string(),
            })?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_pipeline_args(cfg: &mut PipelineConfig, args: &PipelineArgs, method: Option<Method>) {
    if let Some(k) = args.clusters {
        cfg.segmentation.k = Some(k);
    }
    if let Some(d) = args.d {
        cfg.embedding.dim = d;
    }
    if let Some(m) = method {
        cfg.matching.method = m;
    }
}

/// Outcome of a subcommand: the JSON document and a stderr summary.
pub struct Output {
    pub json: Value,
    pub summary: String,
}

fn graph_of(path: &Path, cfg: &PipelineConfig) -> Result<EventGraph> {
    scene_graph(&read_scene_csv(path)?, cfg)
}

fn manifest_graphs(entries: &[ManifestEntry], cfg: &PipelineConfig) -> Result<Vec<EventGraph>> {
    entries.par_iter().map(|e| graph_of(&e.path, cfg)).collect()
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<Output> {
    let mut cfg = load_config(&cli.global)?;
    match &cli.command {
        Command::Segment { input, k, d, graph } => {
            if k.is_some() {
                cfg.segmentation.k = *k;
            }
            if let Some(d) = d {
                cfg.embedding.dim = *d;
            }
            cfg.validate()?;
            let scene = read_scene_csv(input)?;
            let seg = segment(&scene, &cfg)?;
            let summary = format!(
                "{}: {} trajectories, {} clusters, {} atomic motions",
                input.display(),
                scene.trajectory_count(),
                seg.clusters.len(),
                seg.motions.len()
            );
            let mut json = json!({
                "config": cfg,
                "clusters": seg.clusters,
                "motions": seg.motions,
            });
            if *graph {
                json["graph"] = serde_json::to_value(EventGraph::build(seg.motions)?.dump(None))?;
            }
            Ok(Output { json, summary })
        }
        Command::Match { query, model, method, pipeline } => {
            apply_pipeline_args(&mut cfg, pipeline, *method);
            cfg.validate()?;
            let z = graph_of(query, &cfg)?;
            let y = graph_of(model, &cfg)?;
            let report = match_graphs(&z, &y, &cfg.matching)?;
            let summary = format!(
                "{} nodes vs {} nodes, {}: log similarity {:.6}",
                z.len(),
                y.len(),
                report.method,
                report.log_similarity
            );
            Ok(Output {
                json: json!({ "config": cfg, "query_nodes": z.len(), "model_nodes": y.len(), "report": report }),
                summary,
            })
        }
        Command::Classify { manifest, method, k, drop_entities: drop, pipeline } => {
            apply_pipeline_args(&mut cfg, pipeline, *method);
            cfg.validate()?;
            let entries = read_manifest(manifest)?;
            if entries.len() < 2 {
                return Err(Error::InvalidParameter("classify needs at least 2 items".into()));
            }
            let labels: Vec<Option<&str>> = entries.iter().map(|e| e.label.as_deref()).collect();
            check_labels(&labels, *k)?;
            let scenes: Vec<Scene> = entries
                .par_iter()
                .map(|e| read_scene_csv(&e.path))
                .collect::<Result<_>>()?;
            let models: Vec<EventGraph> = scenes.par_iter().map(|s| scene_graph(s, &cfg)).collect::<Result<_>>()?;
            let queries: Vec<EventGraph> = if *drop > 0 {
                scenes
                    .par_iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                        rng.set_stream(i as u64);
                        scene_graph(&drop_entities(s, *drop, &mut rng)?, &cfg)
                    })
                    .collect::<Result<_>>()?
            } else {
                models.clone()
            };
            let q: Vec<&EventGraph> = queries.iter().collect();
            let m: Vec<&EventGraph> = models.iter().collect();
            let matrix = cross_similarity(&q, &m, &cfg.matching, true);
            let missing = matrix
                .iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().filter(|&(j, v)| i != j && v.is_none()).count())
                .sum::<usize>();
            let loo = leave_one_out_from_matrix(&matrix, &labels, *k)?;
            let mut summary = format!(
                "{} items, {}-NN {}: accuracy {:.4}",
                entries.len(),
                k,
                cfg.matching.method,
                loo.accuracy
            );
            if missing > 0 {
                summary.push_str(&format!(" ({missing} cells failed)"));
            }
            let ids: Vec<&str> = entries.iter().map(|e| e.id.as_str()).collect();
            Ok(Output {
                json: json!({
                    "config": {
                        "pipeline": cfg,
                        "neighbors": k,
                        "drop_entities": drop,
                        "manifest": manifest,
                    },
                    "items": ids,
                    "labels": labels,
                    "matrix": matrix,
                    "predictions": loo.predictions,
                    "confusion": loo.confusion,
                    "accuracy": loo.accuracy,
                }),
                summary,
            })
        }
        Command::Query { query, manifest, method, top, pipeline } => {
            apply_pipeline_args(&mut cfg, pipeline, *method);
            cfg.validate()?;
            let entries = read_manifest(manifest)?;
            let z = graph_of(query, &cfg)?;
            let models = manifest_graphs(&entries, &cfg)?;
            let m: Vec<&EventGraph> = models.iter().collect();
            let row = cross_similarity(&[&z], &m, &cfg.matching, false).remove(0);
            let sigmas = row_sigmas(&z, &m, &cfg.matching)?;
            let ranked: Vec<Value> = rank(&row, None)
                .into_iter()
                .take(*top)
                .map(|j| {
                    json!({
                        "id": entries[j].id,
                        "label": entries[j].label,
                        "log_similarity": row[j],
                    })
                })
                .collect();
            let summary = match ranked.first() {
                Some(best) => format!("best match {} of {} items", best["id"], entries.len()),
                None => "no item could be matched".to_string(),
            };
            Ok(Output {
                json: json!({
                    "config": { "pipeline": cfg, "top": top, "manifest": manifest },
                    "query": query,
                    "sigmas": sigmas,
                    "ranking": ranked,
                }),
                summary,
            })
        }
        Command::Synth { dir, preset, count } => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
            let items: Vec<(Option<String>, String, Scene, Value)> = match preset {
                Preset::Benchmark => standard_benchmark(cfg.seed)?
                    .into_iter()
                    .map(|it| (Some(it.label), it.id, it.scene, Value::Null))
                    .collect(),
                Preset::Corners => (0..*count)
                    .map(|t| {
                        let (scene, corner) = corner_trial(cfg.seed, t, 100, BENCHMARK_NOISE)?;
                        Ok((None, format!("corners_{t}"), scene, json!({ "corner": corner })))
                    })
                    .collect::<Result<_>>()?,
            };
            let mut manifest = Vec::new();
            let mut listing = Vec::new();
            for (label, id, scene, extra) in &items {
                let file = format!("{id}.csv");
                write_scene_csv(scene, &dir.join(&file))?;
                manifest.push((label.clone(), file.clone()));
                let mut entry = json!({ "id": id, "label": label, "path": file });
                if let Value::Object(extra) = extra {
                    entry.as_object_mut().unwrap().extend(extra.clone());
                }
                listing.push(entry);
            }
            let refs: Vec<(Option<&str>, &str)> = manifest.iter().map(|(l, f)| (l.as_deref(), f.as_str())).collect();
            write_manifest(&dir.join("manifest.tsv"), &refs)?;
            Ok(Output {
                json: json!({
                    "config": { "preset": preset, "seed": cfg.seed, "count": items.len() },
                    "manifest": "manifest.tsv",
                    "items": listing,
                }),
                summary: format!("wrote {} scenes and manifest.tsv to {}", items.len(), dir.display()),
            })
        }
        Command::Oracle { query, model, budget, pipeline } => {
            apply_pipeline_args(&mut cfg, pipeline, Some(Method::Exact));
            if let Some(b) = budget {
                cfg.matching.exact_budget = *b;
            }
            cfg.validate()?;
            let z = graph_of(query, &cfg)?;
            let y = graph_of(model, &cfg)?;
            let sigmas = cfg.matching.resolve_sigmas(&z, &y)?;
            let table = PotentialTable::from_graphs(&z, &y, &sigmas)?;
            let mut report = exact_log_similarity(&table, cfg.matching.exact_budget)?;
            report.sigmas = Some(sigmas);
            let map_posterior = posterior_optimality(&table, &report.mapping, cfg.matching.exact_budget)?;
            let summary = format!(
                "exact over {}^{} mappings: log similarity {:.6}",
                y.len(),
                z.len(),
                report.log_similarity
            );
            Ok(Output {
                json: json!({
                    "config": cfg,
                    "report": report,
                    "map_posterior": map_posterior,
                }),
                summary,
            })
        }
    }
}

fn write_json(value: &Value, out: Option<&Path>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

/// Parse, run and report; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let jobs = cli.global.jobs.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_OTHER;
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(out) => {
            if let Err(e) = write_json(&out.json, cli.global.out.as_deref()) {
                eprintln!("error: writing output: {e}");
                return EXIT_OTHER;
            }
            if !cli.global.quiet {
                eprintln!("{}", out.summary);
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

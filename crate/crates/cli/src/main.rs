//! `workgraph`: command-line entry point wiring the engine's modules
//! into runnable workflows. Exit codes: 0 success, 1 data errors, 2
//! usage errors.

mod http_model;
mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use workgraph_core::aggregate::{
    coverage, export_tally_csv, parse_tally_csv, slice_by_year, tally, Assignment, Tallies,
};
use workgraph_core::agreement::{
    bootstrap_ci, mean_weighted_kappa, mean_wup, weighted_kappa, AnnotationSet, MeanWupMode,
};
use workgraph_core::classify::{
    batch_classify, ModelClient, ScriptedModel, Strategy,
};
use workgraph_core::currency::Currency;
use workgraph_core::ingest::{
    decompose_task, load_apps, load_robots, load_segments, load_snapshot,
    load_snapshot_unvalidated,
};
use workgraph_core::market::{
    app_market_shares, combine, export_segment_csv, robot_revenue_pipeline, scale_shares,
    MarketConfig,
};
use workgraph_core::ontology::{ActivitySnapshot, NodeId};
use workgraph_core::search::{
    hybrid_search, keyword_search, semantic_search, HashEmbedder, SearchIndex,
};
use workgraph_core::viz::{build_sunburst, emit_doc, emit_svg, AngularWeighting};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "workgraph", version, about = "Work-activity hierarchy engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a snapshot against every structural invariant.
    Validate { snapshot: PathBuf },
    /// Node counts, path-length distribution, and multiple-inheritance
    /// statistics.
    Stats { snapshot: PathBuf },
    /// Query nodes by keyword, embedding similarity, or both interleaved.
    Search {
        snapshot: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 10)]
        limit: usize,
        #[arg(long, value_enum, default_value_t = SearchMode::Hybrid)]
        mode: SearchMode,
    },
    /// Classify application records into the hierarchy.
    Classify {
        snapshot: PathBuf,
        apps: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Spfo)]
        strategy: StrategyArg,
        /// Retrieval depth for sppo/mppo (20, 50, or 100).
        #[arg(long)]
        k: Option<usize>,
        /// Model backend: stub:<script.tsv> or http:<endpoint>.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inter-annotator agreement over annotation files (item,node CSV;
    /// one file per annotator).
    Iaa {
        snapshot: PathBuf,
        #[arg(num_args = 2.., required = true)]
        annotations: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = IaaMetric::Wup)]
        metric: IaaMetric,
        /// Bootstrap resamples for a 95% confidence interval.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = IaaMode::Pairwise)]
        mode: IaaMode,
    },
    /// Roll assignments up the hierarchy into per-node tallies.
    Tally {
        snapshot: PathBuf,
        assignments: PathBuf,
        #[arg(long, value_enum, default_value_t = TallyMode::Count)]
        mode: TallyMode,
        /// Write one tally per launch year instead of a single table.
        #[arg(long)]
        by_year: bool,
        /// Make the per-year slices cumulative.
        #[arg(long)]
        cumulative: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Market-value estimation.
    Market {
        #[command(subcommand)]
        command: MarketCommand,
    },
    /// Render a tally as a sunburst.
    Sunburst {
        snapshot: PathBuf,
        tally: PathBuf,
        #[arg(long, default_value_t = 5)]
        depth: u32,
        /// Percent ceiling that maps to full color intensity.
        #[arg(long, default_value_t = 1.0)]
        scale_max: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = WeightingArg::Descendants)]
        weighting: WeightingArg,
    },
    /// Split compound task text into verb-object pairs. The argument is
    /// literal text, or a file path to process line by line.
    Decompose { input: String },
}

#[derive(Subcommand)]
enum MarketCommand {
    /// Application market shares and values.
    Apps {
        apps: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Robot segment pricing and per-node revenue.
    Robots {
        segments: PathBuf,
        robots: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combined per-node software + robot view.
    Combined {
        snapshot: PathBuf,
        apps: PathBuf,
        assignments: PathBuf,
        segments: PathBuf,
        robots: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Keyword,
    Semantic,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Sppo,
    Mppo,
    Spfo,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Strategy {
        match value {
            StrategyArg::Sppo => Strategy::Sppo,
            StrategyArg::Mppo => Strategy::Mppo,
            StrategyArg::Spfo => Strategy::Spfo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IaaMetric {
    Wup,
    Kappa,
}

#[derive(Clone, Copy, ValueEnum)]
enum IaaMode {
    Pairwise,
    VersusReference,
}

#[derive(Clone, Copy, ValueEnum)]
enum TallyMode {
    Count,
    Value,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Descendants,
    Leaves,
}

impl From<WeightingArg> for AngularWeighting {
    fn from(value: WeightingArg) -> AngularWeighting {
        match value {
            WeightingArg::Descendants => AngularWeighting::DescendantActivities,
            WeightingArg::Leaves => AngularWeighting::LeafActivities,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn argv() -> Vec<String> {
    std::env::args().collect()
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn snapshot_from(path: &Path) -> Result<ActivitySnapshot> {
    load_snapshot(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { snapshot } => {
            let parsed = load_snapshot_unvalidated(&read(&snapshot)?)
                .map_err(|e| anyhow!("{}: {e}", snapshot.display()))?;
            let report = parsed.validate();
            println!("{report}");
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::Stats { snapshot } => {
            let parsed = snapshot_from(&snapshot)?;
            let stats = parsed.stats();
            println!("version:               {}", parsed.version());
            println!("generic activities:    {}", stats.generic_count);
            println!("atomic activities:     {}", stats.atomic_count);
            println!("source tasks:          {}", stats.source_task_count);
            println!("multiple inheritance:  {}", stats.multiple_inheritance_count);
            println!("maximal paths:         {}", stats.path_count);
            println!("path length min:       {}", stats.min_path_len);
            println!("path length median:    {}", stats.median_path_len);
            println!("path length max:       {}", stats.max_path_len);
            Ok(0)
        }
        Command::Search { snapshot, query, limit, mode } => {
            let parsed = snapshot_from(&snapshot)?;
            let embedder = HashEmbedder::default();
            let hits = match mode {
                SearchMode::Keyword => keyword_search(&parsed, &query, limit)?,
                SearchMode::Semantic => {
                    let index = SearchIndex::build(&parsed, &embedder);
                    semantic_search(&index, &query, &embedder, limit)?
                }
                SearchMode::Hybrid => {
                    let index = SearchIndex::build(&parsed, &embedder);
                    hybrid_search(&parsed, &index, &query, &embedder, limit)?
                }
            };
            for (rank, hit) in hits.iter().enumerate() {
                println!(
                    "{:>2}. {}  (score {:.4}, {:?}, id {})",
                    rank + 1,
                    hit.title,
                    hit.score,
                    hit.channel,
                    hit.node
                );
            }
            if hits.is_empty() {
                println!("no matches");
            }
            Ok(0)
        }
        Command::Classify { snapshot, apps, strategy, k, model, parallel, out } => {
            classify_command(&snapshot, &apps, strategy, k, &model, parallel, &out)
        }
        Command::Iaa { snapshot, annotations, metric, bootstrap, seed, mode } => {
            iaa_command(&snapshot, &annotations, metric, bootstrap, seed, mode)
        }
        Command::Tally { snapshot, assignments, mode, by_year, cumulative, out } => {
            tally_command(&snapshot, &assignments, mode, by_year, cumulative, &out)
        }
        Command::Market { command } => market_command(command),
        Command::Sunburst { snapshot, tally, depth, scale_max, svg, json, weighting } => {
            sunburst_command(&snapshot, &tally, depth, scale_max, svg, json, weighting)
        }
        Command::Decompose { input } => {
            let path = Path::new(&input);
            let lines: Vec<String> = if path.exists() {
                String::from_utf8(read(path)?)?
                    .lines()
                    .map(str::to_string)
                    .filter(|l| !l.trim().is_empty())
                    .collect()
            } else {
                vec![input.clone()]
            };
            for line in lines {
                for pair in decompose_task(&line) {
                    println!("{}\t{}", pair.verb, pair.object);
                }
            }
            Ok(0)
        }
    }
}

fn classify_command(
    snapshot_path: &Path,
    apps_path: &Path,
    strategy: StrategyArg,
    k: Option<usize>,
    model_arg: &str,
    parallel: usize,
    out: &Path,
) -> Result<u8> {
    let snapshot_bytes = read(snapshot_path)?;
    let snapshot = load_snapshot(&snapshot_bytes)
        .map_err(|e| anyhow!("{}: {e}", snapshot_path.display()))?;
    let apps_bytes = read(apps_path)?;
    let apps = load_apps(&apps_bytes)?
        .into_result()
        .map_err(|e| anyhow!("{}: {e}", apps_path.display()))?;

    let strategy: Strategy = strategy.into();
    let mut stub_bytes: Option<Vec<u8>> = None;
    let model: Box<dyn ModelClient> = if let Some(script) = model_arg.strip_prefix("stub:") {
        let bytes = read(Path::new(script))?;
        let model = ScriptedModel::from_tsv(&bytes).map_err(|e| anyhow!("{script}: {e}"))?;
        stub_bytes = Some(bytes);
        Box::new(model)
    } else if model_arg.starts_with("http://") || model_arg.starts_with("https://") {
        Box::new(http_model::HttpModel::new(model_arg))
    } else if let Some(endpoint) = model_arg.strip_prefix("http:") {
        Box::new(http_model::HttpModel::new(endpoint))
    } else {
        bail!("--model must be stub:<script.tsv> or http:<endpoint>, got {model_arg:?}")
    };

    let embedder = HashEmbedder::default();
    let outcome = batch_classify(&snapshot, &apps, strategy, model.as_ref(), &embedder, k, parallel)?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "name",
        "strategy",
        "k",
        "main_activity",
        "node_title",
        "node_id",
        "hallucinated",
        "specificity",
        "main_activity_rationale",
        "node_rationale",
    ])?;
    for r in &outcome.results {
        wtr.write_record([
            r.record.as_str(),
            r.strategy.as_str(),
            &r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.main_activity.as_str(),
            r.node_title.as_str(),
            r.node_id.as_ref().map(|n| n.as_str()).unwrap_or(""),
            if r.hallucinated { "true" } else { "false" },
            r.specificity.map(|s| s.as_str()).unwrap_or(""),
            r.main_activity_rationale.as_str(),
            r.node_rationale.as_str(),
        ])?;
    }
    std::fs::write(out, wtr.into_inner()?)
        .with_context(|| format!("writing {}", out.display()))?;

    if !outcome.failures.is_empty() {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["index", "record", "error"])?;
        for f in &outcome.failures {
            wtr.write_record([&f.index.to_string(), f.record.as_str(), &f.error.to_string()])?;
        }
        let mut errors_path = out.as_os_str().to_owned();
        errors_path.push(".errors.csv");
        std::fs::write(PathBuf::from(&errors_path), wtr.into_inner()?)?;
        for f in &outcome.failures {
            eprintln!("record {:?} failed: {}", f.record, f.error);
        }
    }

    let mut manifest = RunManifest::new(&argv());
    manifest.input(snapshot_path, &snapshot_bytes);
    manifest.input(apps_path, &apps_bytes);
    if let Some(bytes) = &stub_bytes {
        manifest.input(Path::new(model_arg.strip_prefix("stub:").unwrap_or(model_arg)), bytes);
    }
    manifest.snapshot_version(snapshot.version());
    manifest.config("strategy", strategy.as_str());
    manifest.config("k", k);
    manifest.config("model", model_arg);
    manifest.config("parallel", parallel);
    manifest.config("prompt_version", workgraph_core::classify::prompts::PROMPT_VERSION);
    manifest.write(out)?;

    println!(
        "classified {} records ({} failures) with {}; wrote {}",
        outcome.results.len(),
        outcome.failures.len(),
        strategy.as_str(),
        out.display()
    );
    Ok(0)
}

fn read_annotations(snapshot: &ActivitySnapshot, path: &Path) -> Result<AnnotationSet> {
    let annotator = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string());
    let bytes = read(path)?;
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let headers = rdr.headers()?.clone();
    let item_col = headers
        .iter()
        .position(|h| h.trim() == "item")
        .ok_or_else(|| anyhow!("{}: missing column \"item\"", path.display()))?;
    let node_col = headers
        .iter()
        .position(|h| h.trim() == "node")
        .ok_or_else(|| anyhow!("{}: missing column \"node\"", path.display()))?;
    let mut set = AnnotationSet::new(annotator);
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let item = row.get(item_col).unwrap_or("").trim().to_string();
        let label = row.get(node_col).unwrap_or("").trim();
        let node = resolve_node(snapshot, label).ok_or_else(|| {
            anyhow!("{} row {}: unknown node {label:?}", path.display(), i + 1)
        })?;
        set.items.insert(item, node);
    }
    Ok(set)
}

/// Accept either a node title or a node id.
fn resolve_node(snapshot: &ActivitySnapshot, label: &str) -> Option<NodeId> {
    if let Some(node) = snapshot.by_title(label) {
        return Some(node.id.clone());
    }
    let id = NodeId::new(label);
    snapshot.get(&id).map(|n| n.id.clone())
}

fn iaa_command(
    snapshot_path: &Path,
    annotation_paths: &[PathBuf],
    metric: IaaMetric,
    bootstrap: Option<usize>,
    seed: u64,
    mode: IaaMode,
) -> Result<u8> {
    let snapshot = snapshot_from(snapshot_path)?;
    let sets: Vec<AnnotationSet> = annotation_paths
        .iter()
        .map(|p| read_annotations(&snapshot, p))
        .collect::<Result<_>>()?;
    let wup_mode = match mode {
        IaaMode::Pairwise => MeanWupMode::PairwiseAll,
        IaaMode::VersusReference => MeanWupMode::VersusReference,
    };

    match metric {
        IaaMetric::Wup => {
            let result = mean_wup(&snapshot, &sets, wup_mode)?;
            println!(
                "mean Wu-Palmer similarity: {:.4}  ({} scored pairs, {} skipped for missing items)",
                result.mean, result.pairs_counted, result.missing_skipped
            );
            if let Some(resamples) = bootstrap {
                let ci = bootstrap_ci(
                    |sets| mean_wup(&snapshot, sets, wup_mode).map(|m| m.mean),
                    &sets,
                    resamples,
                    0.95,
                    seed,
                )?;
                println!(
                    "95% bootstrap CI: [{:.4}, {:.4}]  ({} resamples, seed {}, {} skipped)",
                    ci.low, ci.high, ci.resamples_used, seed, ci.resamples_skipped
                );
            }
        }
        IaaMetric::Kappa => {
            let kappa = if sets.len() == 2 {
                weighted_kappa(&snapshot, &sets[0], &sets[1])?
            } else {
                mean_weighted_kappa(&snapshot, &sets)?
            };
            println!("weighted Cohen's kappa: {kappa:.4}  ({} annotators)", sets.len());
            if let Some(resamples) = bootstrap {
                let ci = bootstrap_ci(
                    |sets| {
                        if sets.len() == 2 {
                            weighted_kappa(&snapshot, &sets[0], &sets[1])
                        } else {
                            mean_weighted_kappa(&snapshot, sets)
                        }
                    },
                    &sets,
                    resamples,
                    0.95,
                    seed,
                )?;
                println!(
                    "95% bootstrap CI: [{:.4}, {:.4}]  ({} resamples, seed {}, {} skipped)",
                    ci.low, ci.high, ci.resamples_used, seed, ci.resamples_skipped
                );
            }
        }
    }
    Ok(0)
}

/// Read an assignments table. Accepts the plain schema
/// (`item,node[,weight][,year]`) or a classification output, whose
/// hallucinated rows are skipped.
fn read_assignments(
    snapshot: &ActivitySnapshot,
    bytes: &[u8],
    path: &Path,
    value_mode: bool,
) -> Result<Vec<Assignment>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let is_classification = col("hallucinated").is_some();
    let (item_col, node_col) = if is_classification {
        (
            col("name").ok_or_else(|| anyhow!("classification table lacks \"name\""))?,
            col("node_title").ok_or_else(|| anyhow!("classification table lacks \"node_title\""))?,
        )
    } else {
        (
            col("item").ok_or_else(|| anyhow!("{}: missing column \"item\"", path.display()))?,
            col("node").ok_or_else(|| anyhow!("{}: missing column \"node\"", path.display()))?,
        )
    };
    let weight_col = col("weight");
    let year_col = if is_classification { None } else { col("year") };
    let hallucinated_col = col("hallucinated");
    if value_mode && weight_col.is_none() {
        bail!("{}: value mode needs a \"weight\" column", path.display());
    }

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let get = |c: Option<usize>| c.and_then(|c| row.get(c)).unwrap_or("").trim();
        if get(hallucinated_col) == "true" {
            continue;
        }
        let item = get(Some(item_col)).to_string();
        let label = get(Some(node_col));
        let node = resolve_node(snapshot, label).ok_or_else(|| {
            anyhow!("{} row {}: unknown node {label:?}", path.display(), i + 1)
        })?;
        let weight = if value_mode {
            get(weight_col)
                .parse::<f64>()
                .map_err(|_| anyhow!("{} row {}: bad weight", path.display(), i + 1))?
        } else {
            1.0
        };
        let year = match get(year_col) {
            "" => None,
            y => Some(
                y.parse::<i32>()
                    .map_err(|_| anyhow!("{} row {}: bad year", path.display(), i + 1))?,
            ),
        };
        let mut assignment = Assignment::weighted(item, node, weight);
        assignment.year = year;
        out.push(assignment);
    }
    Ok(out)
}

fn tally_command(
    snapshot_path: &Path,
    assignments_path: &Path,
    mode: TallyMode,
    by_year: bool,
    cumulative: bool,
    out: &Path,
) -> Result<u8> {
    let snapshot_bytes = read(snapshot_path)?;
    let snapshot = load_snapshot(&snapshot_bytes)
        .map_err(|e| anyhow!("{}: {e}", snapshot_path.display()))?;
    let assignment_bytes = read(assignments_path)?;
    let value_mode = matches!(mode, TallyMode::Value);
    let assignments = read_assignments(&snapshot, &assignment_bytes, assignments_path, value_mode)?;

    let write_one = |assignments: &[Assignment], path: &Path| -> Result<()> {
        let tallies = tally(&snapshot, assignments)?;
        let total: f64 = assignments.iter().map(|a| a.weight).sum();
        let bytes = export_tally_csv(&snapshot, &tallies, total.max(f64::MIN_POSITIVE))?;
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    };

    if by_year {
        let buckets = slice_by_year(&assignments, cumulative)?;
        for (year, batch) in &buckets {
            let mut path = out.as_os_str().to_owned();
            path.push(format!(".{year}.csv"));
            let path = PathBuf::from(path);
            write_one(batch, &path)?;
            println!(
                "{year}: {} assignments, coverage {:.2}%, wrote {}",
                batch.len(),
                coverage(&snapshot, batch) * 100.0,
                path.display()
            );
        }
    } else {
        write_one(&assignments, out)?;
        println!(
            "{} assignments, coverage {:.2}%, wrote {}",
            assignments.len(),
            coverage(&snapshot, &assignments) * 100.0,
            out.display()
        );
    }

    let mut manifest = RunManifest::new(&argv());
    manifest.input(snapshot_path, &snapshot_bytes);
    manifest.input(assignments_path, &assignment_bytes);
    manifest.snapshot_version(snapshot.version());
    manifest.config("mode", if value_mode { "value" } else { "count" });
    manifest.config("by_year", by_year);
    manifest.config("cumulative", cumulative);
    manifest.write(out)?;
    Ok(0)
}

fn load_config(path: &Option<PathBuf>) -> Result<(MarketConfig, Option<Vec<u8>>)> {
    match path {
        None => Ok((MarketConfig::default(), None)),
        Some(p) => {
            let bytes = read(p)?;
            let config: MarketConfig = serde_json::from_slice(&bytes)
                .map_err(|e| anyhow!("{}: {e}", p.display()))?;
            Ok((config, Some(bytes)))
        }
    }
}

fn market_command(command: MarketCommand) -> Result<u8> {
    match command {
        MarketCommand::Apps { apps, config, out } => {
            let (market_config, config_bytes) = load_config(&config)?;
            let apps_bytes = read(&apps)?;
            let records = load_apps(&apps_bytes)?
                .into_result()
                .map_err(|e| anyhow!("{}: {e}", apps.display()))?;
            let shares = app_market_shares(&records, &market_config)?;
            let values = scale_shares(&shares, market_config.software_market())?;
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["name", "share", "value"])?;
            for (name, share) in &shares {
                wtr.write_record([name.as_str(), &format!("{share}"), &values[name].to_string()])?;
            }
            let table = wtr.into_inner()?;
            match &out {
                Some(path) => {
                    std::fs::write(path, &table)?;
                    let mut manifest = RunManifest::new(&argv());
                    manifest.input(&apps, &apps_bytes);
                    if let (Some(p), Some(b)) = (&config, &config_bytes) {
                        manifest.input(p, b);
                    }
                    manifest.config("software_market", market_config.software_market());
                    manifest.config("annualization", &market_config.annualization);
                    manifest.write(path)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{}", String::from_utf8_lossy(&table)),
            }
            Ok(0)
        }
        MarketCommand::Robots { segments, robots, config, out } => {
            let (market_config, config_bytes) = load_config(&config)?;
            let segment_bytes = read(&segments)?;
            let segment_shares = load_segments(&segment_bytes)?
                .into_result()
                .map_err(|e| anyhow!("{}: {e}", segments.display()))?;
            let robot_bytes = read(&robots)?;
            let subclasses = load_robots(&robot_bytes)?
                .into_result()
                .map_err(|e| anyhow!("{}: {e}", robots.display()))?;
            let report = robot_revenue_pipeline(&market_config, &segment_shares, &subclasses)?;

            for segment in &report.segments {
                println!(
                    "segment {} (revenue {}, x = {:.1}):",
                    segment.segment, segment.revenue, segment.adjustment_factor
                );
                print!("{}", String::from_utf8_lossy(&export_segment_csv(segment)));
                println!();
            }
            for idle in &report.unallocated {
                println!("segment {} has revenue {} but no units; held unallocated", idle.segment, idle.revenue);
            }
            println!("allocated total: {}", report.allocated_total());

            if let Some(path) = &out {
                let mut wtr = csv::Writer::from_writer(Vec::new());
                wtr.write_record(["node", "revenue"])?;
                for (node, revenue) in &report.per_node {
                    wtr.write_record([node.as_str(), &revenue.to_string()])?;
                }
                std::fs::write(path, wtr.into_inner()?)?;
                let mut manifest = RunManifest::new(&argv());
                manifest.input(&segments, &segment_bytes);
                manifest.input(&robots, &robot_bytes);
                if let (Some(p), Some(b)) = (&config, &config_bytes) {
                    manifest.input(p, b);
                }
                manifest.config("robotics_market", market_config.robotics_market);
                manifest.write(path)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        MarketCommand::Combined { snapshot, apps, assignments, segments, robots, config, out } => {
            let (market_config, config_bytes) = load_config(&config)?;
            let snapshot_bytes = read(&snapshot)?;
            let parsed = load_snapshot(&snapshot_bytes)
                .map_err(|e| anyhow!("{}: {e}", snapshot.display()))?;
            let apps_bytes = read(&apps)?;
            let records = load_apps(&apps_bytes)?
                .into_result()
                .map_err(|e| anyhow!("{}: {e}", apps.display()))?;
            let assignment_bytes = read(&assignments)?;
            let placed = read_assignments(&parsed, &assignment_bytes, &assignments, false)?;

            // Software value per node: shares scaled to the software
            // market, summed over each record's assigned node.
            let shares = app_market_shares(&records, &market_config)?;
            let values = scale_shares(&shares, market_config.software_market())?;
            let mut software: BTreeMap<String, Currency> = BTreeMap::new();
            for assignment in &placed {
                let Some(value) = values.get(&assignment.item) else { continue };
                let title = parsed
                    .get(&assignment.node)
                    .map(|n| n.title.clone())
                    .expect("assignment nodes resolve");
                let slot = software.entry(title).or_insert(Currency::ZERO);
                *slot = slot.saturating_add(*value);
            }

            let segment_bytes = read(&segments)?;
            let segment_shares = load_segments(&segment_bytes)?
                .into_result()
                .map_err(|e| anyhow!("{}: {e}", segments.display()))?;
            let robot_bytes = read(&robots)?;
            let subclasses = load_robots(&robot_bytes)?
                .into_result()
                .map_err(|e| anyhow!("{}: {e}", robots.display()))?;
            let robot_report = robot_revenue_pipeline(&market_config, &segment_shares, &subclasses)?;

            let view = combine(&parsed, &software, &robot_report.per_node, &market_config)?;
            let (sw, rb) = view.rounded_split();
            println!(
                "global split: software {sw}% / robotics {rb}%  (software {}, robotics {}, total {})",
                view.software_market, view.robotics_market, view.total_market
            );

            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["node", "software", "robot", "total", "software_fraction"])?;
            for (node, value) in &view.per_node {
                wtr.write_record([
                    node.as_str(),
                    &value.software.to_string(),
                    &value.robot.to_string(),
                    &value.total.to_string(),
                    &format!("{:.6}", value.software_fraction),
                ])?;
            }
            let table = wtr.into_inner()?;
            match &out {
                Some(path) => {
                    std::fs::write(path, &table)?;
                    let mut manifest = RunManifest::new(&argv());
                    manifest.input(&snapshot, &snapshot_bytes);
                    manifest.input(&apps, &apps_bytes);
                    manifest.input(&assignments, &assignment_bytes);
                    manifest.input(&segments, &segment_bytes);
                    manifest.input(&robots, &robot_bytes);
                    if let (Some(p), Some(b)) = (&config, &config_bytes) {
                        manifest.input(p, b);
                    }
                    manifest.snapshot_version(parsed.version());
                    manifest.config("total_ai_market", market_config.total_ai_market);
                    manifest.config("robotics_market", market_config.robotics_market);
                    manifest.config("annualization", &market_config.annualization);
                    manifest.write(path)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{}", String::from_utf8_lossy(&table)),
            }
            Ok(0)
        }
    }
}

fn sunburst_command(
    snapshot_path: &Path,
    tally_path: &Path,
    depth: u32,
    scale_max: f64,
    svg: Option<PathBuf>,
    json: Option<PathBuf>,
    weighting: WeightingArg,
) -> Result<u8> {
    let snapshot_bytes = read(snapshot_path)?;
    let snapshot = load_snapshot(&snapshot_bytes)
        .map_err(|e| anyhow!("{}: {e}", snapshot_path.display()))?;
    let tally_bytes = read(tally_path)?;
    let parsed =
        parse_tally_csv(&tally_bytes).map_err(|e| anyhow!("{}: {e}", tally_path.display()))?;
    let tallies = Tallies::from_map(parsed);

    let model = build_sunburst(&snapshot, &tallies, depth, scale_max, weighting.into())?;
    println!(
        "sunburst: {} arcs over {} rings, total weight {}",
        model.arcs.len(),
        model.max_depth,
        model.total
    );

    let primary = svg.as_ref().or(json.as_ref()).cloned();
    if let Some(path) = &svg {
        std::fs::write(path, emit_svg(&model))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &json {
        std::fs::write(path, emit_doc(&model))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if let Some(primary) = primary {
        let mut manifest = RunManifest::new(&argv());
        manifest.input(snapshot_path, &snapshot_bytes);
        manifest.input(tally_path, &tally_bytes);
        manifest.snapshot_version(snapshot.version());
        manifest.config("depth", depth);
        manifest.config("scale_max", scale_max);
        manifest.config("label_threshold_deg", model.label_threshold_deg);
        manifest.write(&primary)?;
    }
    Ok(0)
}

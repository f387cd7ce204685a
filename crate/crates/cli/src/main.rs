use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use guiforge::advanced::{GenerationClient, HttpClient, StubClient};
use guiforge::config::{ClientKind, ConfigError, PipelineConfig};
use guiforge::dataset::compute_stats;
use guiforge::eval::{evaluate, read_jsonl, GroundingCase, Prediction};
use guiforge::pipeline::{
    advanced_pages, annotate_stage, augment_pages, load_and_annotate, load_annotated, synthesize_all, synthesize_pages,
    write_capture, write_splits, AnnotatedPage, AugmentInputs, Resources, StageOutput, StageSummary, Stages,
};
use guiforge::sample::Source;

#[derive(Parser)]
#[command(
    name = "guiforge",
    version,
    about = "Build GUI grounding datasets from rendered webpages"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads per stage; 0 uses one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render urls in a browser and save snapshot + screenshot page directories.
    Capture {
        /// Text file with one url per line; `#` starts a comment.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Remote-debugging WebSocket url; falls back to the config, then GUIFORGE_BROWSER_WS.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, value_enum, default_value = "fineweb")]
        source: SourceArg,
    },
    /// Annotate captured snapshots into page annotations.
    Annotate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Elementary template tasks over annotated pages.
    Synthesize(StageArgs),
    /// Cropped and icon-embedded variants over annotated pages.
    Augment(StageArgs),
    /// Model-assisted tasks over annotated pages.
    Advanced(StageArgs),
    /// Annotate raw captures in memory and run every synthesis stage into one dataset.
    Pipeline {
        #[command(flatten)]
        stage: StageArgs,
        #[arg(long)]
        skip_augment: bool,
        #[arg(long)]
        skip_advanced: bool,
    },
    /// Record, task and source counts of a dataset.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Click accuracy of point predictions against grounding cases.
    Eval {
        /// Grounding cases, one JSON object per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
    },
}

#[derive(clap::Args)]
struct StageArgs {
    #[arg(long)]
    input: PathBuf,
    /// Dataset directory; defaults to `output.dataset_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Fineweb,
    TopDomains,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Fineweb => Source::Fineweb,
            SourceArg::TopDomains => Source::TopDomains,
        }
    }
}

/// Bad configuration; reported with exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("invalid configuration: {0}")]
struct BadConfig(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| level.into()))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<BadConfig>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(|e| match e {
            ConfigError::Io { .. } => anyhow::Error::new(e),
            other => BadConfig(other.to_string()).into(),
        })?,
        None => PipelineConfig::new(0),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.concurrency.workers = w;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    if cfg.concurrency.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.concurrency.workers)
            .build_global()
            .context("starting worker pool")?;
    }
    match cli.command {
        Command::Capture {
            input,
            out,
            endpoint,
            source,
        } => capture(cfg, &input, &out, endpoint, source.into()),
        Command::Annotate { input, out } => {
            let summary = annotate_stage(&input, &out, &cfg.annotate)?;
            report("annotate", &summary);
            Ok(())
        }
        Command::Synthesize(args) => stage(&cfg, "synthesize", &args, |pages, res, cfg| {
            Ok(synthesize_pages(pages, &res.templates, &cfg.synth_config(), cfg.seed))
        }),
        Command::Augment(args) => stage(&cfg, "augment", &args, |pages, res, cfg| {
            let inputs = AugmentInputs {
                templates: &res.templates,
                icons: &res.icons,
                synth: cfg.synth_config(),
                augment: cfg.augment,
            };
            Ok(augment_pages(pages, &inputs, cfg.seed))
        }),
        Command::Advanced(args) => stage(&cfg, "advanced", &args, |pages, res, cfg| {
            let client = make_client(cfg)?;
            Ok(advanced_pages(
                pages,
                client.as_ref(),
                &res.prompts,
                &res.templates,
                cfg.synth_config().codec(),
                cfg.seed,
                cfg.advanced.max_concurrency,
            ))
        }),
        Command::Pipeline {
            stage: args,
            skip_augment,
            skip_advanced,
        } => {
            let res = resources(&cfg)?;
            let stages = Stages {
                augment: !skip_augment,
                advanced: !skip_advanced,
            };
            let client = if stages.advanced {
                Some(make_client(&cfg)?)
            } else {
                None
            };
            let out = args.out.clone().unwrap_or_else(|| cfg.output.dataset_dir.clone());
            let (pages, errors) = load_and_annotate(&args.input, &cfg.annotate)?;
            let mut output = synthesize_all(&pages, &cfg, &res, client.as_deref(), stages);
            output.summary.errors.splice(0..0, errors);
            finish("pipeline", output, &out, &cfg)
        }
        Command::Stats { input } => {
            let stats = compute_stats(&input)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(())
        }
        Command::Eval { input, predictions } => {
            let cases: Vec<GroundingCase> = read_jsonl(&input)?;
            let preds: Vec<Prediction> = read_jsonl(&predictions)?;
            let report = evaluate(&cases, &preds)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn resources(cfg: &PipelineConfig) -> Result<Resources> {
    Resources::load(cfg).map_err(|e| BadConfig(e).into())
}

fn make_client(cfg: &PipelineConfig) -> Result<Box<dyn GenerationClient>> {
    let a = &cfg.advanced;
    Ok(match a.client {
        ClientKind::Stub => {
            let Some(dir) = &a.stub_dir else {
                bail!(BadConfig("advanced.stub_dir: required for the stub client".into()));
            };
            Box::new(
                StubClient::from_dir(dir).with_context(|| format!("loading stub responses from {}", dir.display()))?,
            )
        }
        ClientKind::Http => {
            let Some(endpoint) = &a.endpoint else {
                bail!(BadConfig("advanced.endpoint: required for the http client".into()));
            };
            Box::new(
                HttpClient::from_env(endpoint.clone(), Duration::from_secs_f64(a.timeout_secs))
                    .map_err(|e| BadConfig(e.to_string()))?,
            )
        }
    })
}

type StageFn = fn(&[AnnotatedPage], &Resources, &PipelineConfig) -> Result<StageOutput>;

fn stage(cfg: &PipelineConfig, name: &str, args: &StageArgs, f: StageFn) -> Result<()> {
    let res = resources(cfg)?;
    let (pages, errors) = load_annotated(&args.input)?;
    let mut output = f(&pages, &res, cfg)?;
    output.summary.errors.splice(0..0, errors);
    let out = args.out.clone().unwrap_or_else(|| cfg.output.dataset_dir.clone());
    finish(name, output, &out, cfg)
}

fn finish(name: &str, output: StageOutput, out: &Path, cfg: &PipelineConfig) -> Result<()> {
    let summary = output.summary.clone();
    let written = write_splits(output, out, cfg)?;
    report(name, &summary);
    for (dir, m) in written {
        println!("wrote {} records, {} images to {}", m.records, m.images, dir.display());
    }
    Ok(())
}

/// Prints the stage summary and per-stage error counts; details go to stderr.
fn report(stage: &str, s: &StageSummary) {
    println!(
        "{stage}: {} items, {} samples, {} skipped, {} rejected, {} errors",
        s.items,
        s.samples,
        s.skipped,
        s.rejected_items,
        s.errors.len()
    );
    let mut counts = std::collections::BTreeMap::new();
    for e in &s.errors {
        *counts.entry(e.stage).or_insert(0usize) += 1;
    }
    for (stage, n) in counts {
        println!("  {stage}: {n} failed items");
    }
    for e in &s.errors {
        eprintln!("  {} [{}]: {}", e.item, e.stage, e.message);
    }
}

fn capture(mut cfg: PipelineConfig, input: &Path, out: &Path, endpoint: Option<String>, source: Source) -> Result<()> {
    if endpoint.is_some() {
        cfg.capture.protocol_endpoint = endpoint;
    }
    let capture_cfg = cfg.capture_config().map_err(|e| BadConfig(e.to_string()))?;
    let extractor = match &cfg.capture.extractor_script {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading extractor {}", p.display()))?,
        None => guiforge_browser::DEFAULT_EXTRACTOR.to_string(),
    };
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let urls: Vec<String> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if urls.is_empty() {
        bail!("{} lists no urls", input.display());
    }

    let rt = tokio::runtime::Runtime::new().context("starting async runtime")?;
    let results = rt.block_on(guiforge_browser::capture_urls(
        &capture_cfg,
        &urls,
        cfg.seed,
        &extractor,
    ))?;

    let mut pages = 0;
    let mut failed = Vec::new();
    for (i, (url, result)) in results.iter().enumerate() {
        match result {
            Ok(captures) => {
                for c in captures {
                    write_capture(out, &page_name(i, url, c.capture_index), c, source)?;
                    pages += 1;
                }
            }
            Err(e) => failed.push(e),
        }
    }
    println!("capture: {} urls, {pages} pages, {} errors", urls.len(), failed.len());
    let mut by_phase = std::collections::BTreeMap::new();
    for e in &failed {
        *by_phase.entry(e.phase.to_string()).or_insert(0usize) += 1;
        eprintln!("  {e}");
    }
    for (phase, n) in by_phase {
        println!("  {phase}: {n} failed urls");
    }
    Ok(())
}

/// Stable directory name: url position, a readable host slug, capture index.
fn page_name(index: usize, url: &str, capture_index: usize) -> String {
    let host = url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(String::from))
        .unwrap_or_default();
    let slug: String = host
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .take(40)
        .collect();
    format!("{index:05}-{slug}-{capture_index}")
}

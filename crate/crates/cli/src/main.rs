mod render;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use archgraph_core::analytics::{CentralityKind, DistanceMode};
use archgraph_core::diffusion::KernelKind;
use archgraph_core::feed::{ingest_all, parse_feed_list, FeedSource, Lexicon, Sentiment, Stopwords};
use archgraph_core::{CbmModel, NodeId};
use archgraph_service::export::{export_graph, ExportFormat};
use archgraph_service::ops::{self, AnalyzeRequest, CommunityMethod, CommunityRequest, Direct, ImpactSettings, KernelSpec};
use archgraph_service::persist::{self, ParseMode};
use archgraph_service::store::{FileStorage, MemoryStorage, ModelStore, StoreOptions};
use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::render::Format;

/// Graph analytics workbench for component business models.
#[derive(Debug, Parser)]
#[command(name = "archgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model file (JSON). Defaults to $ARCHGRAPH_MODEL.
    #[arg(env = "ARCHGRAPH_MODEL", value_name = "MODEL")]
    model: PathBuf,
    /// Ignore unknown keys instead of rejecting the file.
    #[arg(long)]
    lax: bool,
}

impl ModelArgs {
    fn load(&self) -> Result<CbmModel> {
        Ok(persist::load(&self.model, ParseMode::lax(self.lax))?)
    }
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Comma-separated relation types to keep; all types when absent.
    #[arg(long, value_name = "T1,T2")]
    edge_types: Option<String>,
}

impl FilterArgs {
    fn filter(&self) -> ops::TypeFilter {
        ops::parse_types(self.edge_types.as_deref())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Polarity {
    Positive,
    Neutral,
    Negative,
}

impl From<Polarity> for Sentiment {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::Positive => Sentiment::Positive,
            Polarity::Neutral => Sentiment::Neutral,
            Polarity::Negative => Sentiment::Negative,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file against the model rules.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Rank components (or edges) by a centrality metric.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_metric, default_value = "degree")]
        metric: CentralityKind,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_parser = parse_distance, default_value = "hop")]
        distance: DistanceMode,
        /// Use weighted degree.
        #[arg(long)]
        weighted: bool,
        /// Divide betweenness by the number of node pairs.
        #[arg(long)]
        normalized: bool,
        #[arg(long, default_value_t = ops::DEFAULT_DAMPING)]
        damping: f64,
        #[arg(long, default_value_t = ops::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = ops::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Print the degree histogram instead of scores.
        #[arg(long)]
        histogram: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Partition the components into communities.
    Communities {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_method, default_value = "gn")]
        method: CommunityMethod,
        /// Number of communities for Girvan-Newman.
        #[arg(long, conflicts_with = "auto")]
        k: Option<usize>,
        /// Stop Girvan-Newman at the modularity maximum (the default).
        #[arg(long)]
        auto: bool,
        /// Tie-breaking seed for label propagation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = ops::DEFAULT_LPA_SWEEPS)]
        max_iter: usize,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Spread impact from seed components through a graph kernel.
    Diffuse {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Seed as COMPONENT=INTENSITY; repeatable.
        #[arg(long = "seed", value_name = "ID=X", value_parser = parse_seed, required = true)]
        seeds: Vec<(NodeId, f64)>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Score news feeds against the model and optionally diffuse the result.
    Impact {
        #[command(flatten)]
        model: ModelArgs,
        /// File listing feed URLs or paths, one per line.
        #[arg(long)]
        feeds: Option<PathBuf>,
        /// Additional feed URL or path; repeatable.
        #[arg(long = "feed", value_name = "SOURCE")]
        extra_feeds: Vec<String>,
        #[command(flatten)]
        text: TextArgs,
        /// Keep only seeds of this sentiment.
        #[arg(long, value_enum)]
        polarity: Option<Polarity>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Kernel to diffuse the seeds through.
        #[arg(long, value_parser = parse_kernel)]
        diffuse: Option<KernelKind>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        restart: Option<f64>,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Write the graph as Graphviz dot or an edge list.
    Export {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_export, default_value = "dot")]
        format: ExportFormat,
        #[command(flatten)]
        filter: FilterArgs,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Serve the HTTP API. Mutations are written back to the model file.
    Serve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long)]
        feeds: Option<PathBuf>,
        #[command(flatten)]
        text: TextArgs,
        /// Disable snapshot caches.
        #[arg(long)]
        no_cache: bool,
        /// Keep mutations in memory only.
        #[arg(long)]
        read_only: bool,
    },
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long, value_parser = parse_kernel, default_value = "rl")]
    kernel: KernelKind,
    /// Kernel parameter; for rl it must lie in (0, alpha_max).
    #[arg(long)]
    alpha: Option<f64>,
    /// Restart probability for rwr.
    #[arg(long)]
    restart: Option<f64>,
    /// Row-normalize the kernel before propagating.
    #[arg(long)]
    normalize: bool,
}

#[derive(Debug, Args)]
struct TextArgs {
    /// Sentiment lexicon, `token<TAB>polarity` per line.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Stopword list, one word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Tags extracted per component.
    #[arg(long, default_value_t = ops::DEFAULT_TAGS)]
    tags: usize,
}

impl TextArgs {
    fn settings(&self, polarity: Option<Sentiment>) -> Result<ImpactSettings> {
        let lexicon = match &self.lexicon {
            Some(p) => Lexicon::parse(&read(p)?).with_context(|| format!("lexicon {}", p.display()))?,
            None => Lexicon::default(),
        };
        let stopwords = match &self.stopwords {
            Some(p) => Stopwords::parse(&read(p)?),
            None => Stopwords::default(),
        };
        Ok(ImpactSettings {
            lexicon,
            stopwords,
            tags_per_component: self.tags,
            polarity,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_metric(s: &str) -> Result<CentralityKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_distance(s: &str) -> Result<DistanceMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_method(s: &str) -> Result<CommunityMethod, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_export(s: &str) -> Result<ExportFormat, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_seed(s: &str) -> Result<(NodeId, f64), String> {
    let (id, x) = s
        .split_once('=')
        .ok_or_else(|| format!("expected COMPONENT=INTENSITY, got '{s}'"))?;
    let x: f64 = x.parse().map_err(|_| format!("intensity '{x}' is not a number"))?;
    Ok((NodeId::new(id), x))
}

/// Feed sources listed in `path`; relative file paths are taken relative
/// to the list's directory.
fn feed_list(path: &Path) -> Result<Vec<FeedSource>> {
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(parse_feed_list(&read(path)?)
        .into_iter()
        .map(|s| match s {
            FeedSource::File(p) if p.is_relative() => FeedSource::File(base.join(p)),
            other => other,
        })
        .collect())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = &mut std::io::stdout().lock();
    match cli.command {
        Command::Validate { model } => {
            let m = model.load()?;
            let violations = m.validate();
            if violations.is_empty() {
                println!(
                    "{}: valid ({} components, {} edges, revision {})",
                    model.model.display(),
                    m.components.len(),
                    m.edges.len(),
                    m.revision()
                );
                return Ok(ExitCode::SUCCESS);
            }
            for v in &violations {
                println!("{v}");
            }
            eprintln!("{}: {} violation(s)", model.model.display(), violations.len());
            return Ok(ExitCode::FAILURE);
        }
        Command::Analyze {
            model,
            metric,
            filter,
            distance,
            weighted,
            normalized,
            damping,
            tol,
            max_iter,
            histogram,
            format,
        } => {
            let m = model.load()?;
            if histogram {
                let report = ops::histogram(&Direct(&m), &filter.filter(), Utc::now())?;
                render::histogram(out, &report, format)?;
            } else {
                let mut req = AnalyzeRequest::new(metric);
                req.edge_types = filter.filter();
                req.distance = distance;
                req.weighted = weighted;
                req.normalized = normalized;
                req.damping = damping;
                req.tol = tol;
                req.max_iter = max_iter;
                let report = ops::analyze(&Direct(&m), &req, Utc::now())?;
                render::analytics(out, &report, format)?;
            }
        }
        Command::Communities {
            model,
            method,
            k,
            auto: _,
            seed,
            max_iter,
            filter,
            format,
        } => {
            let m = model.load()?;
            let mut req = CommunityRequest::new(method);
            req.k = k;
            req.seed = seed;
            req.max_iter = max_iter;
            req.edge_types = filter.filter();
            let report = ops::communities(&Direct(&m), &req, Utc::now())?;
            render::communities(out, &report, format)?;
        }
        Command::Diffuse {
            model,
            kernel,
            seeds,
            top,
            filter,
            format,
        } => {
            let m = model.load()?;
            let spec = KernelSpec {
                kind: kernel.kernel,
                alpha: kernel.alpha,
                restart: kernel.restart,
                normalize: kernel.normalize,
            };
            let seeds: BTreeMap<NodeId, f64> = seeds.into_iter().collect();
            let report = ops::diffuse(&Direct(&m), &filter.filter(), &spec, &seeds, Utc::now())?;
            render::diffusion(out, &report, top, format)?;
        }
        Command::Impact {
            model,
            feeds,
            extra_feeds,
            text,
            polarity,
            top,
            diffuse,
            alpha,
            restart,
            filter,
            format,
        } => {
            let m = model.load()?;
            let mut sources = match &feeds {
                Some(p) => feed_list(p)?,
                None => Vec::new(),
            };
            sources.extend(extra_feeds.iter().map(|s| FeedSource::parse(s)));
            if sources.is_empty() {
                bail!("no feeds given; use --feeds <file> or --feed <source>");
            }
            let settings = text.settings(polarity.map(Into::into))?;
            let batch = ingest_all(&sources);
            let filter = filter.filter();
            let spec = diffuse.map(|kind| KernelSpec {
                kind,
                alpha,
                restart,
                normalize: false,
            });
            let report = ops::impact(
                &Direct(&m),
                &batch.items,
                batch.warnings,
                &settings,
                spec.as_ref().map(|s| (&filter, s)),
                Utc::now(),
            )?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            render::impact(out, &report, &batch.items, top, format)?;
        }
        Command::Export {
            model,
            format,
            filter,
            output,
        } => {
            let m = model.load()?;
            let doc = export_graph(&m, filter.filter().as_ref(), format)?;
            match output {
                Some(p) => std::fs::write(&p, doc).with_context(|| format!("cannot write {}", p.display()))?,
                None => std::io::Write::write_all(out, doc.as_bytes())?,
            }
        }
        Command::Serve {
            model,
            bind,
            feeds,
            text,
            no_cache,
            read_only,
        } => {
            let m = model.load()?;
            let options = StoreOptions {
                caching: !no_cache,
                feeds: match &feeds {
                    Some(p) => feed_list(p)?,
                    None => Vec::new(),
                },
                impact: text.settings(None)?,
            };
            let store = if read_only {
                ModelStore::new(m, MemoryStorage::default(), options)
            } else {
                ModelStore::new(m, FileStorage::new(&model.model), options)
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(archgraph_service::serve(Arc::new(store), &bind))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Full-window orchestration: ingest, vectorize, cluster, score, compose,
//! deliver, all under one declarative configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    build_threshold_graph, dedup_clusters, enumerate_cliques_capped, similarity_matrix, Cluster,
    DEFAULT_NODE_CAP, DEFAULT_SIMILARITY_THRESHOLD,
};
use crate::compose::{build_post, ComposeConfig, TitleFont};
use crate::embed::{
    load_table_provider, vectorize_article, ArticleVector, EmbedError, EmbeddingProvider,
    HashProvider, VectorizeConfig, DEFAULT_DIMENSION, DEFAULT_N_TOKENS,
};
use crate::fetch::Fetcher;
use crate::ingest::{
    article_id, poll_feed, read_article, select_window, Article, ArticleStore, ExtractionRules,
    FeedSource, IngestError,
};
use crate::publish::{
    deliver, ChannelConfig, DeliveryLedger, Outcome, PublishError, Receipt,
};
use crate::score::{
    classify, compare_scores, score_cluster, should_publish, CategoryMaps, PublishPolicy, Region,
};
use crate::textpipe::{Lexicon, StopList};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("another pipeline run holds the lock {path}; remove it if stale")]
    Locked { path: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Publish(#[from] PublishError),
}

fn config_err<E: std::fmt::Display>(prefix: &str) -> impl FnOnce(E) -> PipelineError + '_ {
    move |e| PipelineError::Config(format!("{prefix}: {e}"))
}

// ---- declarative configuration ------------------------------------------

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(default)]
    pipeline: PipelineSettings,
    #[serde(default)]
    embedding: EmbeddingSettings,
    #[serde(default)]
    text: TextSettings,
    #[serde(default)]
    policy: PublishPolicy,
    #[serde(default)]
    compose: ComposeSettings,
    #[serde(default)]
    storage: StorageSettings,
    #[serde(default)]
    sources: Vec<SourceConfig>,
    #[serde(default)]
    channels: Vec<ChannelConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(default)]
struct PipelineSettings {
    window_hours: i64,
    similarity_threshold: f64,
    n_tokens: usize,
    node_cap: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            window_hours: 24,
            similarity_threshold: DEFAULT_SIMILARITY_THRESHOLD,
            n_tokens: DEFAULT_N_TOKENS,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
enum EmbeddingSettings {
    /// Deterministic keyed-hash vectors; good for tests and replays.
    Hash {
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Pretrained word-vector table.
    Table { table_path: PathBuf },
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}

impl Default for EmbeddingSettings {
    fn default() -> Self {
        EmbeddingSettings::Hash {
            dimension: DEFAULT_DIMENSION,
            seed: 0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
struct TextSettings {
    lexicon_path: Option<PathBuf>,
    stopwords_path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
struct ComposeSettings {
    font_path: Option<PathBuf>,
    #[serde(flatten)]
    config: ComposeConfig,
}

#[derive(Debug, Deserialize)]
#[serde(default)]
struct StorageSettings {
    article_dir: PathBuf,
    ledger_path: PathBuf,
}

impl Default for StorageSettings {
    fn default() -> Self {
        Self {
            article_dir: PathBuf::from("data/articles"),
            ledger_path: PathBuf::from("data/ledger.jsonl"),
        }
    }
}

/// One feed source as written in the config file.
#[derive(Debug, Deserialize)]
pub struct SourceConfig {
    pub source_id: String,
    pub name: String,
    pub feed_url: String,
    #[serde(flatten)]
    pub rules: ExtractionRules,
    #[serde(default)]
    pub category_map: BTreeMap<String, Region>,
}

/// A validated, path-resolved pipeline ready to run.
pub struct Pipeline {
    pub sources: Vec<(FeedSource, ExtractionRules)>,
    pub lexicon: Lexicon,
    pub stops: StopList,
    pub provider: Box<dyn EmbeddingProvider>,
    pub policy: PublishPolicy,
    pub category_maps: CategoryMaps,
    pub compose: ComposeConfig,
    pub font: TitleFont,
    pub channels: Vec<ChannelConfig>,
    pub article_dir: PathBuf,
    pub ledger_path: PathBuf,
    pub window: Duration,
    pub tau: f64,
    pub vectorize: VectorizeConfig,
    pub node_cap: usize,
}

impl Pipeline {
    /// Parses, validates and resolves a config file. Input paths (lexicon,
    /// vector table, font, placeholder) resolve against the config file's
    /// directory; output paths (stores, sinks) against `workdir`.
    pub fn load(config_path: &Path, workdir: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(config_path).map_err(|e| {
            PipelineError::Config(format!("cannot read {}: {e}", config_path.display()))
        })?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(config_err(&format!("cannot parse {}", config_path.display())))?;
        let config_dir = config_path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();

        if raw.pipeline.window_hours <= 0 {
            return Err(PipelineError::Config("window_hours must be positive".into()));
        }
        let tau = raw.pipeline.similarity_threshold;
        if !(tau > 0.0 && tau < 1.0) {
            return Err(PipelineError::Config(format!(
                "similarity_threshold {tau} must lie in (0, 1)"
            )));
        }
        if raw.pipeline.n_tokens == 0 {
            return Err(PipelineError::Config("n_tokens must be at least 1".into()));
        }
        raw.policy.validate().map_err(PipelineError::Config)?;
        for channel in &raw.channels {
            channel.validate().map_err(PipelineError::Config)?;
        }
        {
            let mut ids: Vec<&str> = raw.sources.iter().map(|s| s.source_id.as_str()).collect();
            ids.sort_unstable();
            let before = ids.len();
            ids.dedup();
            if ids.len() != before {
                return Err(PipelineError::Config("duplicate source_id in sources".into()));
            }
            if raw.sources.iter().any(|s| s.feed_url.is_empty()) {
                return Err(PipelineError::Config("every source needs a feed_url".into()));
            }
        }

        let resolve_in = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                config_dir.join(p)
            }
        };
        let resolve_out = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                workdir.join(p)
            }
        };

        let lexicon = match &raw.text.lexicon_path {
            Some(p) => Lexicon::load(&resolve_in(p)).map_err(config_err("lexicon"))?,
            None => Lexicon::new(),
        };
        let stops = match &raw.text.stopwords_path {
            Some(p) => StopList::load(&resolve_in(p)).map_err(config_err("stop list"))?,
            None => StopList::new(),
        };

        let provider: Box<dyn EmbeddingProvider> = match &raw.embedding {
            EmbeddingSettings::Hash { dimension, seed } => Box::new(
                HashProvider::new(*dimension, *seed).map_err(config_err("embedding"))?,
            ),
            EmbeddingSettings::Table { table_path } => Box::new(
                load_table_provider(&resolve_in(table_path)).map_err(config_err("embedding"))?,
            ),
        };

        let font = match &raw.compose.font_path {
            Some(p) => TitleFont::load(&resolve_in(p)).map_err(config_err("font"))?,
            None => TitleFont::embedded(),
        };
        let mut compose = raw.compose.config;
        // the placeholder is an input asset unless it is a remote URL
        if !compose.placeholder_image.contains("://") {
            compose.placeholder_image = resolve_in(Path::new(&compose.placeholder_image))
                .display()
                .to_string();
        }

        let category_maps: CategoryMaps = raw
            .sources
            .iter()
            .map(|s| (s.source_id.clone(), s.category_map.clone()))
            .collect();
        let sources = raw
            .sources
            .into_iter()
            .map(|s| {
                let feed = FeedSource {
                    source_id: s.source_id,
                    name: s.name,
                    feed_url: s.feed_url,
                    category_map: s.category_map,
                };
                (feed, s.rules)
            })
            .collect();

        let channels = raw
            .channels
            .into_iter()
            .map(|c| match c {
                ChannelConfig::FileSink { dir } => ChannelConfig::FileSink {
                    dir: resolve_out(&dir),
                },
                ChannelConfig::ShortText { limit, dir } => ChannelConfig::ShortText {
                    limit,
                    dir: resolve_out(&dir),
                },
                ChannelConfig::RssFeed {
                    store_path,
                    image_dir,
                    base_url,
                    feed,
                } => ChannelConfig::RssFeed {
                    store_path: resolve_out(&store_path),
                    image_dir: resolve_out(&image_dir),
                    base_url,
                    feed,
                },
                webhook @ ChannelConfig::Webhook { .. } => webhook,
            })
            .collect();

        Ok(Self {
            sources,
            lexicon,
            stops,
            provider,
            policy: raw.policy,
            category_maps,
            compose,
            font,
            channels,
            article_dir: resolve_out(&raw.storage.article_dir),
            ledger_path: resolve_out(&raw.storage.ledger_path),
            window: Duration::hours(raw.pipeline.window_hours),
            tau,
            vectorize: VectorizeConfig {
                n_tokens: raw.pipeline.n_tokens,
            },
            node_cap: raw.pipeline.node_cap,
        })
    }
}

// ---- run report -----------------------------------------------------------

/// Per-stage counts and delivery receipts for one pipeline run.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    /// Articles inserted or updated during ingest.
    pub fetched: usize,
    pub window_size: usize,
    pub vectorized: usize,
    /// Window articles without embeddable tokens.
    pub skipped: usize,
    pub cliques: usize,
    pub clusters: usize,
    /// Posts that cleared the publish gate and were sent to channels.
    pub published: usize,
    pub receipts: Vec<Receipt>,
    pub errors: Vec<String>,
    pub timings_ms: Vec<(String, u128)>,
}

impl RunReport {
    pub fn has_failures(&self) -> bool {
        !self.errors.is_empty() || self.receipts.iter().any(Receipt::failed)
    }

    /// Human-readable summary, one block per run.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("run report\n");
        out.push_str(&format!("  fetched:    {}\n", self.fetched));
        out.push_str(&format!("  window:     {} articles\n", self.window_size));
        out.push_str(&format!(
            "  vectorized: {} ({} skipped)\n",
            self.vectorized, self.skipped
        ));
        out.push_str(&format!("  cliques:    {}\n", self.cliques));
        out.push_str(&format!("  clusters:   {}\n", self.clusters));
        out.push_str(&format!("  published:  {}\n", self.published));
        if !self.receipts.is_empty() {
            out.push_str("  receipts:\n");
            for r in &self.receipts {
                let status = match &r.outcome {
                    Outcome::Delivered { detail } => format!("delivered ({detail})"),
                    Outcome::Failed { error } => format!("FAILED ({error})"),
                    Outcome::Duplicate => "duplicate, suppressed".to_string(),
                };
                out.push_str(&format!("    {} {} {}\n", r.channel, r.post_id, status));
            }
        }
        if !self.errors.is_empty() {
            out.push_str("  errors:\n");
            for e in &self.errors {
                out.push_str(&format!("    {e}\n"));
            }
        }
        let timings: Vec<String> = self
            .timings_ms
            .iter()
            .map(|(stage, ms)| format!("{stage} {ms}ms"))
            .collect();
        out.push_str(&format!("  timings:    {}\n", timings.join(", ")));
        out
    }
}

// ---- advisory lock ---------------------------------------------------------

/// One run at a time per article store.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(article_dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(article_dir).map_err(|source| PipelineError::Io {
            context: format!("creating {}", article_dir.display()),
            source,
        })?;
        let path = article_dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(PipelineError::Locked {
                path: path.display().to_string(),
            }),
            Err(source) => Err(PipelineError::Io {
                context: format!("creating lock {}", path.display()),
                source,
            }),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

// ---- stages ----------------------------------------------------------------

/// Polls every feed and upserts new or changed articles. Per-source and
/// per-entry failures are recorded, never fatal.
pub fn ingest_feeds(
    pipeline: &Pipeline,
    store: &mut ArticleStore,
    fetcher: &dyn Fetcher,
    now: DateTime<Utc>,
    report: &mut RunReport,
) {
    for (source, rules) in &pipeline.sources {
        let raw = match fetcher.fetch(&source.feed_url) {
            Ok(bytes) => bytes,
            Err(e) => {
                report.errors.push(format!("feed {}: {e}", source.source_id));
                continue;
            }
        };
        let entries = match poll_feed(source, &raw) {
            Ok(entries) => entries,
            Err(e) => {
                report.errors.push(format!("feed {}: {e}", source.source_id));
                continue;
            }
        };
        for entry in entries {
            let id = article_id(&source.source_id, &entry.guid);
            let html = match fetcher.fetch(&entry.link) {
                Ok(bytes) => bytes,
                Err(e) => {
                    report.errors.push(format!("page {}: {e}", entry.link));
                    continue;
                }
            };
            let mut article = match read_article(&source.source_id, &entry, &html, rules, now) {
                Ok(article) => article,
                Err(e) => {
                    report.errors.push(e.to_string());
                    continue;
                }
            };
            if let Some(prior) = store.get(&id) {
                // an update keeps the original publish time for windowing
                article.published_at = prior.published_at;
                let unchanged = article.title == prior.title
                    && article.perex == prior.perex
                    && article.body == prior.body
                    && article.image_url == prior.image_url
                    && article.categories == prior.categories;
                if unchanged {
                    continue;
                }
            }
            match store.upsert(article) {
                Ok(_) => report.fetched += 1,
                Err(e) => report.errors.push(e.to_string()),
            }
        }
    }
}

/// Window articles that vectorized successfully, vectors aligned with
/// article refs by index.
struct EmbeddedWindow<'a> {
    vectors: Vec<ArticleVector>,
    articles: Vec<&'a Article>,
}

fn vectorize_window<'a>(
    pipeline: &Pipeline,
    window: &[&'a Article],
    report: &mut RunReport,
) -> EmbeddedWindow<'a> {
    let mut vectors = Vec::with_capacity(window.len());
    let mut articles = Vec::with_capacity(window.len());
    for article in window {
        match vectorize_article(
            article,
            pipeline.provider.as_ref(),
            &pipeline.vectorize,
            &pipeline.lexicon,
            &pipeline.stops,
        ) {
            Ok(v) => {
                vectors.push(v);
                articles.push(*article);
            }
            Err(EmbedError::NoEmbeddableTokens { .. }) => report.skipped += 1,
            Err(e) => {
                report.skipped += 1;
                report.errors.push(e.to_string());
            }
        }
    }
    report.vectorized = vectors.len();
    EmbeddedWindow { vectors, articles }
}

fn cluster_window(
    pipeline: &Pipeline,
    window: &EmbeddedWindow<'_>,
    report: &mut RunReport,
) -> Vec<Cluster> {
    let matrix = similarity_matrix(&window.vectors);
    let graph = build_threshold_graph(&matrix, pipeline.tau);
    let cliques = match enumerate_cliques_capped(&graph, pipeline.node_cap) {
        Ok(cliques) => cliques,
        Err(e) => {
            report.errors.push(e.to_string());
            return Vec::new();
        }
    };
    report.cliques = cliques.len();
    let ids: Vec<String> = window.vectors.iter().map(|v| v.article_id.clone()).collect();
    let clusters = dedup_clusters(&cliques, &ids, |clique| {
        let members: Vec<&Article> = clique.iter().map(|&i| window.articles[i]).collect();
        score_cluster(&members)
    });
    report.clusters = clusters.len();
    clusters
}

/// Composes and delivers the post for one gate-passing cluster.
fn publish_cluster(
    pipeline: &Pipeline,
    cluster: &Cluster,
    window: &EmbeddedWindow<'_>,
    fetcher: &dyn Fetcher,
    ledger: &mut DeliveryLedger,
    now: DateTime<Utc>,
    report: &mut RunReport,
) -> Result<(), PipelineError> {
    let members: Vec<&Article> = cluster.indices.iter().map(|&i| window.articles[i]).collect();
    let member_vectors: Vec<ArticleVector> = cluster
        .indices
        .iter()
        .map(|&i| window.vectors[i].clone())
        .collect();

    let representative_id = crate::compose::select_representative(&member_vectors).to_string();
    let representative = *members
        .iter()
        .find(|a| a.article_id == representative_id)
        .expect("representative is a member");
    let category = classify(
        &members,
        &cluster.score,
        &pipeline.policy,
        representative,
        &pipeline.category_maps,
    );

    let mut resolved_url = representative
        .image_url
        .clone()
        .unwrap_or_else(|| pipeline.compose.placeholder_image.clone());
    let fetched = fetcher
        .fetch(&resolved_url)
        .ok()
        .and_then(|bytes| {
            image::load_from_memory(&bytes)
                .ok()
                .map(|img| (bytes, (img.width(), img.height())))
        });
    let (image_bytes, dims) = match fetched {
        Some(ok) => ok,
        None => {
            // unreachable or undecodable lead image: fall back to the placeholder
            report.errors.push(format!(
                "image {resolved_url} unusable for {}; using placeholder",
                representative.article_id
            ));
            resolved_url = pipeline.compose.placeholder_image.clone();
            let bytes = fetcher.fetch(&resolved_url).map_err(|e| {
                PipelineError::Config(format!("placeholder image {resolved_url} unreadable: {e}"))
            })?;
            let img = image::load_from_memory(&bytes).map_err(|e| {
                PipelineError::Config(format!("placeholder image {resolved_url} undecodable: {e}"))
            })?;
            let dims = (img.width(), img.height());
            (bytes, dims)
        }
    };

    let articles: BTreeMap<String, &Article> = members
        .iter()
        .map(|a| (a.article_id.clone(), *a))
        .collect();
    let mut post = build_post(
        cluster,
        &articles,
        &member_vectors,
        category,
        &pipeline.compose,
        dims,
        now,
    );
    // the rendered image may have come from the placeholder fallback
    post.image.source_image_url = resolved_url;

    let png = match crate::compose::render_image(
        &post.image,
        &image_bytes,
        &pipeline.font,
        &pipeline.compose.font_rules,
    ) {
        Ok(png) => png,
        Err(e) => {
            report.errors.push(format!("render {}: {e}", post.post_id));
            return Ok(());
        }
    };

    report.published += 1;
    for (index, channel) in pipeline.channels.iter().enumerate() {
        let channel_id = format!("{}#{index}", channel.kind());
        if ledger.is_delivered(&post.post_id, &channel_id) {
            report.receipts.push(Receipt {
                channel: channel_id,
                post_id: post.post_id.clone(),
                outcome: Outcome::Duplicate,
                artifacts: vec![],
            });
            continue;
        }
        let receipt = match deliver(channel, &post, &png) {
            Ok(receipt) => receipt,
            Err(e) => {
                // config-level failures surface as failed receipts here;
                // validation should have caught them before the run
                Receipt {
                    channel: channel_id.clone(),
                    post_id: post.post_id.clone(),
                    outcome: Outcome::Failed { error: e.to_string() },
                    artifacts: vec![],
                }
            }
        };
        let delivered = receipt.delivered();
        report.receipts.push(Receipt {
            channel: channel_id.clone(),
            ..receipt
        });
        if delivered {
            ledger.record(&post.post_id, &channel_id, now)?;
        }
    }
    Ok(())
}

/// One full pipeline run over the current window. Deterministic for fixed
/// store contents, embedding provider, and `now`.
pub fn run_once(
    pipeline: &Pipeline,
    store: &mut ArticleStore,
    fetcher: &dyn Fetcher,
    now: DateTime<Utc>,
    fetch_feeds: bool,
) -> Result<RunReport, PipelineError> {
    let mut report = RunReport::default();
    let mut ledger = DeliveryLedger::open(&pipeline.ledger_path)?;

    if fetch_feeds {
        let t = Instant::now();
        ingest_feeds(pipeline, store, fetcher, now, &mut report);
        report.timings_ms.push(("ingest".into(), t.elapsed().as_millis()));
    }

    let t = Instant::now();
    let window = select_window(store, now, pipeline.window);
    report.window_size = window.len();
    let embedded = vectorize_window(pipeline, &window, &mut report);
    report
        .timings_ms
        .push(("vectorize".into(), t.elapsed().as_millis()));

    let t = Instant::now();
    let clusters = cluster_window(pipeline, &embedded, &mut report);
    report
        .timings_ms
        .push(("cluster".into(), t.elapsed().as_millis()));

    let t = Instant::now();
    for cluster in &clusters {
        if !should_publish(&cluster.score, &pipeline.policy) {
            continue;
        }
        publish_cluster(pipeline, cluster, &embedded, fetcher, &mut ledger, now, &mut report)?;
    }
    report
        .timings_ms
        .push(("compose+deliver".into(), t.elapsed().as_millis()));

    debug_assert!(
        report.published <= report.clusters && report.clusters <= report.cliques,
        "stage counts must form a funnel"
    );
    Ok(report)
}

/// Debugging dump of the current window: similarity matrix, cliques with
/// their scores, the deduplicated clusters, and the gate decision for each.
pub fn inspect(
    pipeline: &Pipeline,
    store: &ArticleStore,
    now: DateTime<Utc>,
) -> Result<String, PipelineError> {
    let mut report = RunReport::default();
    let window = select_window(store, now, pipeline.window);
    let EmbeddedWindow { vectors, articles } = vectorize_window(pipeline, &window, &mut report);

    let mut out = String::new();
    out.push_str(&format!(
        "window: {} articles at {} (last {}h, {} skipped)\n",
        vectors.len(),
        now.to_rfc3339(),
        pipeline.window.num_hours(),
        report.skipped,
    ));
    for (i, article) in articles.iter().enumerate() {
        out.push_str(&format!(
            "  [{i}] {} {} {} {:?}\n",
            article.article_id,
            article.source_id,
            article.published_at.to_rfc3339(),
            article.title,
        ));
    }

    let matrix = similarity_matrix(&vectors);
    out.push_str(&format!("similarity matrix (tau = {}):\n", pipeline.tau));
    for i in 0..matrix.n() {
        let row: Vec<String> = (0..matrix.n())
            .map(|j| format!("{:.4}", matrix.get(i, j)))
            .collect();
        out.push_str(&format!("  [{i}] {}\n", row.join(" ")));
    }

    let graph = build_threshold_graph(&matrix, pipeline.tau);
    let cliques = enumerate_cliques_capped(&graph, pipeline.node_cap)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    out.push_str(&format!("cliques: {}\n", cliques.len()));
    let ids: Vec<String> = vectors.iter().map(|v| v.article_id.clone()).collect();
    let mut rated: Vec<(Vec<usize>, crate::score::ClusterScore)> = cliques
        .iter()
        .map(|clique| {
            let members: Vec<&Article> = clique.iter().map(|&i| articles[i]).collect();
            (clique.clone(), score_cluster(&members))
        })
        .collect();
    rated.sort_by(|(_, a), (_, b)| compare_scores(b, a));
    for (clique, score) in &rated {
        out.push_str(&format!(
            "  {:?} size={} sources={} span={}s avg_len={:.1}\n",
            clique, score.size, score.distinct_sources, score.time_span_secs, score.avg_length
        ));
    }

    let clusters = dedup_clusters(&cliques, &ids, |clique| {
        let members: Vec<&Article> = clique.iter().map(|&i| articles[i]).collect();
        score_cluster(&members)
    });
    out.push_str(&format!("clusters after dedup: {}\n", clusters.len()));
    for cluster in &clusters {
        let gate = if should_publish(&cluster.score, &pipeline.policy) {
            "publish"
        } else {
            "below gate"
        };
        out.push_str(&format!(
            "  {:?} size={} sources={} -> {gate}\n",
            cluster.indices, cluster.score.size, cluster.score.distinct_sources
        ));
    }
    Ok(out)
}

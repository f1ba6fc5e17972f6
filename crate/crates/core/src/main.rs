use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand};

use newsburst::fetch::{Fetcher, FileFetcher, HttpFetcher};
use newsburst::ingest::ArticleStore;
use newsburst::pipeline::{ingest_feeds, inspect, run_once, Pipeline, RunLock, RunReport};
use newsburst::publish::{start_feed_server, ChannelConfig, PostStore};

#[derive(Parser)]
#[command(name = "newsburst", version, about = "News burst detection and auto-posting pipeline")]
struct Cli {
    /// Pipeline configuration file
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Clock override (RFC 3339, e.g. 2020-10-01T12:00:00Z) for reproducible runs
    #[arg(long, global = true)]
    now: Option<String>,
    /// Base directory for relative output paths (stores, sinks)
    #[arg(long, global = true, default_value = ".")]
    workdir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Poll the configured feeds and store new or updated articles
    Ingest,
    /// Full pipeline over the live feeds: ingest, cluster, compose, deliver
    Run {
        /// Also write the run report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Dump the current window: similarity matrix, cliques, scores, gate decisions
    Inspect,
    /// Serve the output RSS feed and hosted images over HTTP
    ServeFeed {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
    /// Full pipeline offline against a fixture directory (fixture:// URLs)
    Replay {
        /// Fixture root; defaults to the config file's directory
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Also write the run report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output with status 0
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn parse_now(now: &Option<String>) -> Result<DateTime<Utc>, String> {
    match now {
        None => Ok(Utc::now()),
        Some(text) => DateTime::parse_from_rfc3339(text)
            .map(|dt| dt.with_timezone(&Utc))
            .map_err(|e| format!("invalid --now {text:?}: {e}")),
    }
}

fn execute(cli: Cli) -> Result<ExitCode, String> {
    let now = parse_now(&cli.now)?;
    let pipeline = Pipeline::load(&cli.config, &cli.workdir).map_err(|e| e.to_string())?;
    let config_dir = cli
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| std::path::Path::new("."))
        .to_path_buf();

    match cli.command {
        Command::Ingest => {
            let _lock = RunLock::acquire(&pipeline.article_dir).map_err(|e| e.to_string())?;
            let mut store = ArticleStore::open(&pipeline.article_dir).map_err(|e| e.to_string())?;
            let fetcher = HttpFetcher::new(&config_dir);
            let mut report = RunReport::default();
            ingest_feeds(&pipeline, &mut store, &fetcher, now, &mut report);
            println!("fetched {} articles, {} stored total", report.fetched, store.len());
            for e in &report.errors {
                eprintln!("warning: {e}");
            }
            Ok(if report.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Run { report } => {
            let fetcher = HttpFetcher::new(&config_dir);
            run_pipeline(&pipeline, &fetcher, now, true, report)
        }
        Command::Replay { fixtures, report } => {
            let root = fixtures.unwrap_or(config_dir);
            let fetcher = FileFetcher::new(&root);
            run_pipeline(&pipeline, &fetcher, now, true, report)
        }
        Command::Inspect => {
            let store = ArticleStore::open(&pipeline.article_dir).map_err(|e| e.to_string())?;
            let dump = inspect(&pipeline, &store, now).map_err(|e| e.to_string())?;
            print!("{dump}");
            Ok(ExitCode::SUCCESS)
        }
        Command::ServeFeed { addr } => {
            let feed_channel = pipeline.channels.iter().find_map(|c| match c {
                ChannelConfig::RssFeed {
                    store_path,
                    image_dir,
                    feed,
                    ..
                } => Some((store_path.clone(), image_dir.clone(), feed.clone())),
                _ => None,
            });
            let (store_path, image_dir, meta) = feed_channel
                .ok_or("config error: serve-feed needs an rss_feed channel".to_string())?;
            let handle = start_feed_server(&addr, PostStore::new(store_path), image_dir, meta)
                .map_err(|e| e.to_string())?;
            println!("serving feed at http://{}/feed.xml", handle.addr);
            handle.join();
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_pipeline(
    pipeline: &Pipeline,
    fetcher: &dyn Fetcher,
    now: DateTime<Utc>,
    fetch_feeds: bool,
    report_path: Option<PathBuf>,
) -> Result<ExitCode, String> {
    let _lock = RunLock::acquire(&pipeline.article_dir).map_err(|e| e.to_string())?;
    let mut store = ArticleStore::open(&pipeline.article_dir).map_err(|e| e.to_string())?;
    let report = run_once(pipeline, &mut store, fetcher, now, fetch_feeds)
        .map_err(|e| e.to_string())?;
    print!("{}", report.render());
    if let Some(path) = report_path {
        let json = serde_json::to_vec_pretty(&report).expect("report serializes");
        std::fs::write(&path, json).map_err(|e| format!("writing report {}: {e}", path.display()))?;
    }
    Ok(if report.has_failures() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

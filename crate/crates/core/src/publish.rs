//! Channel delivery: file sink, image-plus-caption webhook, short-text
//! channel, and an RSS output feed backed by a post store and a static
//! image host. A delivery ledger keeps every channel idempotent per post.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compose::Post;
use crate::util::digest_hex;

#[derive(Debug, Error)]
pub enum PublishError {
    #[error("webhook token missing")]
    MissingToken,
    #[error("short-text limit {limit} cannot fit the link ({needed} chars needed)")]
    LimitTooSmall { limit: usize, needed: usize },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt record in {path}: {source}")]
    CorruptRecord {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("failed to bind feed server on {addr}: {reason}")]
    Bind { addr: String, reason: String },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> PublishError {
    let context = context.into();
    move |source| PublishError::Io { context, source }
}

/// Stored record of one published post, backing the output feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub image_url: String,
    pub publish_date: DateTime<Utc>,
    pub title: String,
}

/// Channel metadata for the emitted feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedMeta {
    pub title: String,
    pub link: String,
    pub description: String,
}

/// One delivery target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelConfig {
    /// Writes the rendered image and the full post JSON to a directory.
    #[serde(rename = "file")]
    FileSink { dir: PathBuf },
    /// POSTs the image and caption as multipart form data.
    Webhook {
        endpoint: String,
        token: String,
        #[serde(default = "default_retry_base_ms")]
        retry_base_ms: u64,
    },
    /// Writes "title link" capped to a character limit.
    ShortText { limit: usize, dir: PathBuf },
    /// Hosts the image publicly and appends a record to the post store.
    RssFeed {
        store_path: PathBuf,
        image_dir: PathBuf,
        base_url: String,
        feed: FeedMeta,
    },
}

fn default_retry_base_ms() -> u64 {
    500
}

impl ChannelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ChannelConfig::FileSink { .. } => "file",
            ChannelConfig::Webhook { .. } => "webhook",
            ChannelConfig::ShortText { .. } => "short_text",
            ChannelConfig::RssFeed { .. } => "rss_feed",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            ChannelConfig::Webhook { endpoint, token, .. } => {
                if endpoint.is_empty() {
                    return Err("webhook endpoint must not be empty".into());
                }
                if token.is_empty() {
                    return Err("webhook token must not be empty".into());
                }
            }
            ChannelConfig::ShortText { limit, .. } => {
                if *limit < 30 {
                    return Err(format!("short-text limit {limit} is below the minimum of 30"));
                }
            }
            ChannelConfig::RssFeed { base_url, .. } => {
                if base_url.is_empty() {
                    return Err("rss_feed base_url must not be empty".into());
                }
            }
            ChannelConfig::FileSink { .. } => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Delivered { detail: String },
    Failed { error: String },
    /// Suppressed by the delivery ledger; already sent in an earlier run.
    Duplicate,
}

/// Result of one delivery attempt on one channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Receipt {
    pub channel: String,
    pub post_id: String,
    pub outcome: Outcome,
    /// Paths or URLs the delivery produced.
    pub artifacts: Vec<String>,
}

impl Receipt {
    pub fn delivered(&self) -> bool {
        matches!(self.outcome, Outcome::Delivered { .. })
    }

    pub fn failed(&self) -> bool {
        matches!(self.outcome, Outcome::Failed { .. })
    }
}

/// Writes `<post_id>.png` and `<post_id>.json` into the sink directory.
pub fn publish_file(post: &Post, png: &[u8], dir: &Path) -> Receipt {
    let receipt = |outcome, artifacts| Receipt {
        channel: "file".into(),
        post_id: post.post_id.clone(),
        outcome,
        artifacts,
    };
    let png_path = dir.join(format!("{}.png", post.post_id));
    let json_path = dir.join(format!("{}.json", post.post_id));
    let result = fs::create_dir_all(dir)
        .and_then(|()| fs::write(&png_path, png))
        .and_then(|()| {
            let json = serde_json::to_vec_pretty(post).expect("post serializes");
            fs::write(&json_path, json)
        });
    match result {
        Ok(()) => receipt(
            Outcome::Delivered {
                detail: "wrote image and post record".into(),
            },
            vec![
                png_path.display().to_string(),
                json_path.display().to_string(),
            ],
        ),
        Err(e) => receipt(
            Outcome::Failed {
                error: format!("io error: {e}"),
            },
            vec![],
        ),
    }
}

const MULTIPART_BOUNDARY: &str = "----newsburst-form-3c1a9f42d7";

/// Multipart body with an image part and a caption part.
fn multipart_body(post: &Post, png: &[u8]) -> Vec<u8> {
    let mut body = Vec::with_capacity(png.len() + 1024);
    let b = MULTIPART_BOUNDARY;
    write!(
        body,
        "--{b}\r\nContent-Disposition: form-data; name=\"image\"; filename=\"{}.png\"\r\nContent-Type: image/png\r\n\r\n",
        post.post_id
    )
    .expect("writing to vec");
    body.extend_from_slice(png);
    write!(
        body,
        "\r\n--{b}\r\nContent-Disposition: form-data; name=\"caption\"\r\n\r\n{}\r\n--{b}--\r\n",
        post.description
    )
    .expect("writing to vec");
    body
}

/// POSTs the post image and caption to the endpoint with bearer auth.
/// Non-2xx responses and transport failures are retried with exponential
/// backoff, three attempts in total, then reported as a failed receipt.
pub fn publish_webhook(
    post: &Post,
    png: &[u8],
    endpoint: &str,
    token: &str,
    retry_base_ms: u64,
) -> Result<Receipt, PublishError> {
    if token.is_empty() {
        return Err(PublishError::MissingToken);
    }
    let body = multipart_body(post, png);
    let content_type = format!("multipart/form-data; boundary={MULTIPART_BOUNDARY}");

    let mut last_error = String::new();
    for attempt in 0..3u32 {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(retry_base_ms << (attempt - 1)));
        }
        let response = ureq::post(endpoint)
            .set("Authorization", &format!("Bearer {token}"))
            .set("Content-Type", &content_type)
            .send_bytes(&body);
        match response {
            Ok(resp) => {
                let detail = resp.into_string().unwrap_or_default().trim().to_string();
                return Ok(Receipt {
                    channel: "webhook".into(),
                    post_id: post.post_id.clone(),
                    outcome: Outcome::Delivered { detail },
                    artifacts: vec![endpoint.to_string()],
                });
            }
            Err(ureq::Error::Status(code, _)) => {
                last_error = format!("endpoint returned status {code}");
            }
            Err(e) => {
                last_error = format!("transport error: {e}");
            }
        }
    }
    Ok(Receipt {
        channel: "webhook".into(),
        post_id: post.post_id.clone(),
        outcome: Outcome::Failed {
            error: format!("{last_error} after 3 attempts"),
        },
        artifacts: vec![],
    })
}

/// Formats "title link", truncating the title at a word boundary with an
/// ellipsis when the whole string would exceed the limit. The link is never
/// truncated.
pub fn format_short_text(post: &Post, limit: usize) -> Result<String, PublishError> {
    let link_chars = post.link.chars().count();
    if limit < link_chars + 2 {
        return Err(PublishError::LimitTooSmall {
            limit,
            needed: link_chars + 2,
        });
    }
    let full = format!("{} {}", post.title, post.link);
    if full.chars().count() <= limit {
        return Ok(full);
    }
    // space and ellipsis eat two characters of the budget
    let budget = limit - link_chars - 2;
    let chars: Vec<char> = post.title.chars().collect();
    let mut cut = budget.min(chars.len());
    while cut > 0 && !chars[cut].is_whitespace() {
        cut -= 1;
    }
    if cut == 0 {
        cut = budget;
    }
    let truncated: String = chars[..cut].iter().collect();
    Ok(format!("{}… {}", truncated.trim_end(), post.link))
}

/// Content-addressed local image host: identical bytes map to the identical
/// public URL.
#[derive(Debug, Clone)]
pub struct ImageHost {
    pub dir: PathBuf,
    pub base_url: String,
}

impl ImageHost {
    pub fn new(dir: PathBuf, base_url: String) -> Self {
        Self { dir, base_url }
    }

    pub fn host_image(&self, png: &[u8]) -> Result<String, PublishError> {
        let name = format!("{}.png", digest_hex(&[png], 64));
        let path = self.dir.join(&name);
        if !path.exists() {
            fs::create_dir_all(&self.dir)
                .map_err(io_err(format!("creating image host dir {}", self.dir.display())))?;
            fs::write(&path, png)
                .map_err(io_err(format!("writing hosted image {}", path.display())))?;
        }
        let base = self.base_url.trim_end_matches('/');
        Ok(format!("{base}/{name}"))
    }
}

/// Append-only JSONL store of published post records.
#[derive(Debug, Clone)]
pub struct PostStore {
    path: PathBuf,
}

impl PostStore {
    pub fn new(path: PathBuf) -> Self {
        Self { path }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load(&self) -> Result<Vec<PostRecord>, PublishError> {
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&self.path)
            .map_err(io_err(format!("reading post store {}", self.path.display())))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                serde_json::from_str(line).map_err(|source| PublishError::CorruptRecord {
                    path: self.path.display().to_string(),
                    source,
                })
            })
            .collect()
    }

    pub fn append(&self, record: &PostRecord) -> Result<(), PublishError> {
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent)
                .map_err(io_err(format!("creating {}", parent.display())))?;
        }
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(io_err(format!("opening post store {}", self.path.display())))?;
        file.write_all(line.as_bytes())
            .map_err(io_err(format!("appending to {}", self.path.display())))
    }
}

fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

/// Emits the RSS 2.0 feed for the stored post records, newest first.
/// Item element order is fixed: title, link, enclosure, pubDate, guid.
pub fn emit_rss(records: &[PostRecord], meta: &FeedMeta) -> Vec<u8> {
    let mut ordered: Vec<&PostRecord> = records.iter().collect();
    ordered.sort_by(|a, b| {
        b.publish_date
            .cmp(&a.publish_date)
            .then_with(|| a.title.cmp(&b.title))
            .then_with(|| a.image_url.cmp(&b.image_url))
    });

    let mut xml = String::new();
    xml.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    xml.push_str("<rss version=\"2.0\">\n<channel>\n");
    xml.push_str(&format!("<title>{}</title>\n", xml_escape(&meta.title)));
    xml.push_str(&format!("<link>{}</link>\n", xml_escape(&meta.link)));
    xml.push_str(&format!(
        "<description>{}</description>\n",
        xml_escape(&meta.description)
    ));
    for record in ordered {
        let url = xml_escape(&record.image_url);
        xml.push_str("<item>\n");
        xml.push_str(&format!("<title>{}</title>\n", xml_escape(&record.title)));
        xml.push_str(&format!("<link>{url}</link>\n"));
        xml.push_str(&format!(
            "<enclosure url=\"{url}\" length=\"0\" type=\"image/png\"/>\n"
        ));
        xml.push_str(&format!(
            "<pubDate>{}</pubDate>\n",
            record.publish_date.to_rfc2822()
        ));
        xml.push_str(&format!("<guid isPermaLink=\"false\">{url}</guid>\n"));
        xml.push_str("</item>\n");
    }
    xml.push_str("</channel>\n</rss>\n");
    xml.into_bytes()
}

/// Remembers which (post, channel) pairs were delivered so pipeline re-runs
/// never double-post. Persisted as JSONL beside the article store.
#[derive(Debug)]
pub struct DeliveryLedger {
    path: PathBuf,
    seen: BTreeSet<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct LedgerEntry {
    post_id: String,
    channel: String,
    delivered_at: DateTime<Utc>,
}

impl DeliveryLedger {
    pub fn open(path: &Path) -> Result<Self, PublishError> {
        let mut seen = BTreeSet::new();
        if path.exists() {
            let text = fs::read_to_string(path)
                .map_err(io_err(format!("reading ledger {}", path.display())))?;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let entry: LedgerEntry =
                    serde_json::from_str(line).map_err(|source| PublishError::CorruptRecord {
                        path: path.display().to_string(),
                        source,
                    })?;
                seen.insert((entry.post_id, entry.channel));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            seen,
        })
    }

    pub fn is_delivered(&self, post_id: &str, channel: &str) -> bool {
        self.seen.contains(&(post_id.to_string(), channel.to_string()))
    }

    pub fn record(
        &mut self,
        post_id: &str,
        channel: &str,
        delivered_at: DateTime<Utc>,
    ) -> Result<(), PublishError> {
        if !self.seen.insert((post_id.to_string(), channel.to_string())) {
            return Ok(());
        }
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent)
                .map_err(io_err(format!("creating {}", parent.display())))?;
        }
        let entry = LedgerEntry {
            post_id: post_id.to_string(),
            channel: channel.to_string(),
            delivered_at,
        };
        let mut line = serde_json::to_string(&entry).expect("entry serializes");
        line.push('\n');
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(io_err(format!("opening ledger {}", self.path.display())))?;
        file.write_all(line.as_bytes())
            .map_err(io_err(format!("appending to ledger {}", self.path.display())))
    }
}

/// Delivers one post through one channel. Runtime failures come back as
/// failed receipts; only configuration problems are hard errors.
pub fn deliver(config: &ChannelConfig, post: &Post, png: &[u8]) -> Result<Receipt, PublishError> {
    match config {
        ChannelConfig::FileSink { dir } => Ok(publish_file(post, png, dir)),
        ChannelConfig::Webhook {
            endpoint,
            token,
            retry_base_ms,
        } => publish_webhook(post, png, endpoint, token, *retry_base_ms),
        ChannelConfig::ShortText { limit, dir } => {
            let receipt = |outcome, artifacts| Receipt {
                channel: "short_text".into(),
                post_id: post.post_id.clone(),
                outcome,
                artifacts,
            };
            let text = match format_short_text(post, *limit) {
                Ok(text) => text,
                Err(e) => {
                    return Ok(receipt(Outcome::Failed { error: e.to_string() }, vec![]));
                }
            };
            let path = dir.join(format!("{}.txt", post.post_id));
            let result = fs::create_dir_all(dir).and_then(|()| fs::write(&path, &text));
            Ok(match result {
                Ok(()) => receipt(
                    Outcome::Delivered {
                        detail: format!("{} chars", text.chars().count()),
                    },
                    vec![path.display().to_string()],
                ),
                Err(e) => receipt(
                    Outcome::Failed {
                        error: format!("io error: {e}"),
                    },
                    vec![],
                ),
            })
        }
        ChannelConfig::RssFeed {
            store_path,
            image_dir,
            base_url,
            ..
        } => {
            let receipt = |outcome, artifacts| Receipt {
                channel: "rss_feed".into(),
                post_id: post.post_id.clone(),
                outcome,
                artifacts,
            };
            let host = ImageHost::new(image_dir.clone(), base_url.clone());
            let hosted = match host.host_image(png) {
                Ok(url) => url,
                Err(e) => {
                    return Ok(receipt(Outcome::Failed { error: e.to_string() }, vec![]));
                }
            };
            let record = PostRecord {
                image_url: hosted.clone(),
                publish_date: post.created_at,
                title: post.title.clone(),
            };
            let store = PostStore::new(store_path.clone());
            Ok(match store.append(&record) {
                Ok(()) => receipt(
                    Outcome::Delivered {
                        detail: "hosted image and stored record".into(),
                    },
                    vec![hosted],
                ),
                Err(e) => receipt(Outcome::Failed { error: e.to_string() }, vec![]),
            })
        }
    }
}

/// Running static server for the output feed and its hosted images.
pub struct FeedServerHandle {
    pub addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl FeedServerHandle {
    /// Blocks until the serving thread exits (it only exits on `unblock`).
    pub fn join(mut self) {
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for FeedServerHandle {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

/// Serves GET /feed.xml (rendered from the post store on every request) and
/// GET /images/<name> from the image host directory.
pub fn start_feed_server(
    bind: &str,
    store: PostStore,
    image_dir: PathBuf,
    meta: FeedMeta,
) -> Result<FeedServerHandle, PublishError> {
    let server = tiny_http::Server::http(bind).map_err(|e| PublishError::Bind {
        addr: bind.to_string(),
        reason: e.to_string(),
    })?;
    let server = Arc::new(server);
    let addr = server
        .server_addr()
        .to_ip()
        .expect("http server has an ip address");

    let serving = Arc::clone(&server);
    let thread = std::thread::spawn(move || {
        for request in serving.incoming_requests() {
            let url = request.url().to_string();
            let response = route(&url, &store, &image_dir, &meta);
            let _ = match response {
                Some((bytes, content_type)) => {
                    let header = tiny_http::Header::from_bytes(
                        &b"Content-Type"[..],
                        content_type.as_bytes(),
                    )
                    .expect("static header");
                    request.respond(tiny_http::Response::from_data(bytes).with_header(header))
                }
                None => request
                    .respond(tiny_http::Response::from_string("not found").with_status_code(404)),
            };
        }
    });

    Ok(FeedServerHandle {
        addr,
        server,
        thread: Some(thread),
    })
}

fn route(
    url: &str,
    store: &PostStore,
    image_dir: &Path,
    meta: &FeedMeta,
) -> Option<(Vec<u8>, String)> {
    if url == "/feed.xml" {
        let records = store.load().ok()?;
        return Some((emit_rss(&records, meta), "application/rss+xml".into()));
    }
    if let Some(name) = url.strip_prefix("/images/") {
        // hosted names are digest.png only; refuse anything path-like
        if name.contains('/') || name.contains("..") {
            return None;
        }
        let bytes = fs::read(image_dir.join(name)).ok()?;
        return Some((bytes, "image/png".into()));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{CropRect, FontTier, ImageSpec};
    use crate::score::{PostCategory, Region};

    pub(crate) fn test_post(post_id: &str) -> Post {
        Post {
            post_id: post_id.to_string(),
            representative_article_id: "art1".into(),
            title: "Titulek zprávy".into(),
            description: "První odstavec popisu.".into(),
            image: ImageSpec {
                source_image_url: "fixture://images/a.png".into(),
                crop: CropRect { x: 0, y: 0, side: 600 },
                frame_color: [21, 101, 192],
                frame_width: 24,
                title_text: "Titulek zprávy".into(),
                font_tier: FontTier::Large,
            },
            category: PostCategory {
                region: Region::National,
                important: false,
            },
            link: "https://example.cz/a".into(),
            hashtags: vec!["zpravy".into()],
            created_at: "2020-10-01T12:00:00Z".parse().unwrap(),
        }
    }

    #[test]
    fn publish_file_round_trips_post_json() {
        let dir = tempfile::tempdir().unwrap();
        let post = test_post("p1");
        let receipt = publish_file(&post, b"PNGDATA", dir.path());
        assert!(receipt.delivered());
        assert_eq!(receipt.artifacts.len(), 2);
        assert_eq!(fs::read(dir.path().join("p1.png")).unwrap(), b"PNGDATA");
        let json = fs::read_to_string(dir.path().join("p1.json")).unwrap();
        let back: Post = serde_json::from_str(&json).unwrap();
        assert_eq!(back, post);
    }

    #[test]
    fn publish_file_reports_unwritable_dir() {
        let post = test_post("p1");
        let receipt = publish_file(&post, b"PNG", Path::new("/proc/nonexistent/sink"));
        assert!(receipt.failed());
    }

    #[test]
    fn two_posts_make_four_distinct_files() {
        let dir = tempfile::tempdir().unwrap();
        publish_file(&test_post("p1"), b"A", dir.path());
        publish_file(&test_post("p2"), b"B", dir.path());
        let count = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(count, 4);
    }

    #[test]
    fn short_text_fits_title_and_link() {
        let mut post = test_post("p1");
        post.title = "t".repeat(40);
        post.link = "https://ex.cz/123456789".into(); // 23 chars
        let out = format_short_text(&post, 280).unwrap();
        assert_eq!(out.chars().count(), 64);
        assert!(out.ends_with(&post.link));
    }

    #[test]
    fn short_text_truncates_title_never_link() {
        let mut post = test_post("p1");
        post.title = "slovo ".repeat(60).trim_end().to_string(); // 359 chars
        post.link = "https://ex.cz/123456789".into(); // 23 chars
        let out = format_short_text(&post, 280).unwrap();
        assert!(out.chars().count() <= 280);
        assert!(out.ends_with(&format!(" {}", post.link)));
        assert!(out.contains('…'));
    }

    #[test]
    fn short_text_rejects_impossible_limit() {
        let mut post = test_post("p1");
        post.link = "https://example.cz/very-long-path".into();
        assert!(matches!(
            format_short_text(&post, 20),
            Err(PublishError::LimitTooSmall { .. })
        ));
    }

    #[test]
    fn hosting_identical_bytes_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let host =
            ImageHost::new(dir.path().to_path_buf(), "http://127.0.0.1:8080/images/".into());
        let one = host.host_image(b"PNG1").unwrap();
        let two = host.host_image(b"PNG1").unwrap();
        assert_eq!(one, two);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn hosting_distinct_bytes_yields_distinct_urls() {
        let dir = tempfile::tempdir().unwrap();
        let host = ImageHost::new(dir.path().to_path_buf(), "http://h/images".into());
        assert_ne!(host.host_image(b"A").unwrap(), host.host_image(b"B").unwrap());
    }

    fn record(title: &str, date: &str) -> PostRecord {
        PostRecord {
            image_url: format!("http://h/images/{title}.png"),
            publish_date: date.parse().unwrap(),
            title: title.to_string(),
        }
    }

    fn feed_meta() -> FeedMeta {
        FeedMeta {
            title: "Výběr zpráv".into(),
            link: "http://127.0.0.1:8080/feed.xml".into(),
            description: "Automaticky vybrané zprávy".into(),
        }
    }

    #[test]
    fn rss_with_no_records_is_wellformed() {
        let xml = emit_rss(&[], &feed_meta());
        let text = String::from_utf8(xml).unwrap();
        assert!(text.contains("<channel>"));
        assert!(!text.contains("<item>"));
    }

    #[test]
    fn rss_orders_newest_first() {
        let records = vec![
            record("a", "2020-10-01T08:00:00Z"),
            record("b", "2020-10-01T10:00:00Z"),
            record("c", "2020-10-01T09:00:00Z"),
        ];
        let xml = String::from_utf8(emit_rss(&records, &feed_meta())).unwrap();
        let pos = |t: &str| xml.find(&format!("<title>{t}</title>")).unwrap();
        assert!(pos("b") < pos("c"));
        assert!(pos("c") < pos("a"));
    }

    #[test]
    fn rss_escapes_markup_in_titles() {
        let records = vec![record("a < b & c", "2020-10-01T08:00:00Z")];
        let xml = String::from_utf8(emit_rss(&records, &feed_meta())).unwrap();
        assert!(xml.contains("a &lt; b &amp; c"));
        assert!(!xml.contains("<title>a < b"));
    }

    #[test]
    fn ledger_suppresses_repeat_deliveries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.jsonl");
        let now = Utc::now();
        {
            let mut ledger = DeliveryLedger::open(&path).unwrap();
            assert!(!ledger.is_delivered("p1", "file"));
            ledger.record("p1", "file", now).unwrap();
            assert!(ledger.is_delivered("p1", "file"));
        }
        let reopened = DeliveryLedger::open(&path).unwrap();
        assert!(reopened.is_delivered("p1", "file"));
        assert!(!reopened.is_delivered("p1", "webhook"));
        assert!(!reopened.is_delivered("p2", "file"));
    }

    #[test]
    fn post_store_appends_and_loads() {
        let dir = tempfile::tempdir().unwrap();
        let store = PostStore::new(dir.path().join("posts.jsonl"));
        assert!(store.load().unwrap().is_empty());
        let r1 = record("a", "2020-10-01T08:00:00Z");
        let r2 = record("b", "2020-10-01T09:00:00Z");
        store.append(&r1).unwrap();
        store.append(&r2).unwrap();
        assert_eq!(store.load().unwrap(), vec![r1, r2]);
    }

    #[test]
    fn short_text_channel_validation() {
        let c = ChannelConfig::ShortText {
            limit: 10,
            dir: PathBuf::from("out"),
        };
        assert!(c.validate().is_err());
        let c = ChannelConfig::ShortText {
            limit: 280,
            dir: PathBuf::from("out"),
        };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn webhook_requires_token() {
        let post = test_post("p1");
        assert!(matches!(
            publish_webhook(&post, b"PNG", "http://127.0.0.1:1/hook", "", 1),
            Err(PublishError::MissingToken)
        ));
    }

    #[test]
    fn multipart_body_contains_both_parts() {
        let post = test_post("p1");
        let body = multipart_body(&post, b"BINARYPNG");
        let text = String::from_utf8_lossy(&body);
        assert!(text.contains("name=\"image\""));
        assert!(text.contains("filename=\"p1.png\""));
        assert!(text.contains("BINARYPNG"));
        assert!(text.contains("name=\"caption\""));
        assert!(text.contains("První odstavec popisu."));
        assert!(text.trim_end().ends_with(&format!("--{MULTIPART_BOUNDARY}--")));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn short_text_always_fits_and_keeps_link(
                title in "[a-zA-Zěščřžýáíé ]{0,400}",
                path in "[a-z0-9]{1,40}",
            ) {
                let mut post = test_post("p1");
                post.title = title;
                post.link = format!("https://ex.cz/{path}");
                let out = format_short_text(&post, 280).unwrap();
                prop_assert!(out.chars().count() <= 280);
                prop_assert!(out.ends_with(&post.link));
            }
        }
    }
}

//! Feed polling, article page extraction, the on-disk article store, and
//! time-window selection.
//!
//! Parsing operations all take bytes so they run offline; live fetching is
//! behind [`crate::fetch::Fetcher`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use quick_xml::events::Event;
use quick_xml::Reader;
use scraper::{Html, Selector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::Region;
use crate::util::digest_hex;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed feed: {0}")]
    MalformedFeed(String),
    #[error("invalid CSS selector {selector:?}")]
    BadSelector { selector: String },
    #[error("extraction failed for {url}: {reason}")]
    ExtractionFailed { url: String, reason: String },
    #[error("article store error at {path}: {source}")]
    Store {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt article record {path}: {source}")]
    CorruptRecord {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// One configured news source: its feed plus per-source extraction rules
/// and the mapping from feed category strings to regions.
#[derive(Debug, Clone)]
pub struct FeedSource {
    pub source_id: String,
    pub name: String,
    pub feed_url: String,
    pub category_map: BTreeMap<String, Region>,
}

/// One entry of a polled feed, normalized across RSS 2.0 and Atom.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedEntry {
    pub guid: String,
    pub link: String,
    pub title: String,
    pub published_at: DateTime<Utc>,
    pub categories: Vec<String>,
}

/// A fetched and extracted news article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub article_id: String,
    pub source_id: String,
    pub url: String,
    pub title: String,
    pub perex: String,
    pub body: String,
    pub image_url: Option<String>,
    pub published_at: DateTime<Utc>,
    pub fetched_at: DateTime<Utc>,
    pub categories: Vec<String>,
}

/// Deterministic article identity: digest of (source_id, guid).
pub fn article_id(source_id: &str, guid: &str) -> String {
    digest_hex(&[source_id.as_bytes(), guid.as_bytes()], 32)
}

/// Per-source CSS selectors locating the perex, the body blocks, and the
/// lead image on an article page.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionRules {
    pub perex_selector: String,
    pub body_selector: String,
    #[serde(default)]
    pub image_selector: Option<String>,
    #[serde(default = "default_image_attr")]
    pub image_attr: String,
}

fn default_image_attr() -> String {
    "src".to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    Inserted,
    Updated,
}

enum FeedFormat {
    Rss,
    Atom,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Guid,
    Link,
    Title,
    Published,
    Updated,
    Category,
}

#[derive(Default)]
struct PendingEntry {
    guid: Option<String>,
    link: Option<String>,
    title: Option<String>,
    published: Option<String>,
    updated: Option<String>,
    categories: Vec<String>,
}

impl PendingEntry {
    fn finish(self) -> Option<FeedEntry> {
        let link = self.link.unwrap_or_default();
        let guid = match self.guid.filter(|g| !g.is_empty()) {
            Some(guid) => guid,
            None if !link.is_empty() => link.clone(),
            None => {
                log::warn!("skipping feed entry without guid or link");
                return None;
            }
        };
        let date = self.published.or(self.updated);
        let published_at = match date.as_deref().and_then(parse_feed_date) {
            Some(ts) => ts,
            None => {
                log::warn!("skipping feed entry {guid}: missing or unparseable publish date");
                return None;
            }
        };
        Some(FeedEntry {
            guid,
            link,
            title: self.title.unwrap_or_default(),
            published_at,
            categories: self.categories,
        })
    }
}

fn parse_feed_date(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    DateTime::parse_from_rfc2822(s)
        .or_else(|_| DateTime::parse_from_rfc3339(s))
        .ok()
        .map(|dt| dt.with_timezone(&Utc))
}

/// Parses a fetched feed document (RSS 2.0 or Atom) into entries, in feed
/// order. Entries missing both guid and link, or missing a parseable
/// publish date, are skipped with a warning.
pub fn poll_feed(source: &FeedSource, raw_xml: &[u8]) -> Result<Vec<FeedEntry>, IngestError> {
    let text = std::str::from_utf8(raw_xml)
        .map_err(|e| IngestError::MalformedFeed(format!("feed for {} is not UTF-8: {e}", source.source_id)))?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut format: Option<FeedFormat> = None;
    let mut entries = Vec::new();
    let mut pending: Option<PendingEntry> = None;
    let mut entry_depth = 0usize;
    let mut collecting: Option<Field> = None;
    let mut text_buf = String::new();

    loop {
        match reader.read_event() {
            Err(e) => return Err(IngestError::MalformedFeed(e.to_string())),
            Ok(Event::Eof) => break,
            Ok(Event::Start(e)) => {
                let name = e.local_name();
                let name = String::from_utf8_lossy(name.as_ref()).into_owned();
                match format {
                    None => {
                        format = Some(match name.as_str() {
                            "rss" => FeedFormat::Rss,
                            "feed" => FeedFormat::Atom,
                            other => {
                                return Err(IngestError::MalformedFeed(format!(
                                    "unrecognized root element <{other}>"
                                )))
                            }
                        });
                    }
                    Some(ref fmt) => {
                        if let Some(entry) = pending.as_mut() {
                            entry_depth += 1;
                            if entry_depth == 1 {
                                collecting = field_for(fmt, &name);
                                text_buf.clear();
                                if matches!(fmt, FeedFormat::Atom) {
                                    capture_atom_attrs(&e, &name, entry);
                                }
                            }
                        } else if is_entry_element(fmt, &name) {
                            pending = Some(PendingEntry::default());
                            entry_depth = 0;
                            collecting = None;
                        }
                    }
                }
            }
            Ok(Event::Empty(e)) => {
                let name = e.local_name();
                let name = String::from_utf8_lossy(name.as_ref()).into_owned();
                if let (Some(fmt), Some(entry)) = (format.as_ref(), pending.as_mut()) {
                    if entry_depth == 0 && matches!(fmt, FeedFormat::Atom) {
                        capture_atom_attrs(&e, &name, entry);
                    }
                }
            }
            Ok(Event::Text(t)) => {
                if collecting.is_some() {
                    let piece = t
                        .unescape()
                        .map_err(|e| IngestError::MalformedFeed(e.to_string()))?;
                    text_buf.push_str(&piece);
                }
            }
            Ok(Event::CData(c)) => {
                if collecting.is_some() {
                    text_buf.push_str(&String::from_utf8_lossy(&c.into_inner()));
                }
            }
            Ok(Event::End(_)) => {
                if entry_depth == 0 {
                    // closing </item> / </entry>, or an element outside entries
                    if let Some(done) = pending.take().and_then(PendingEntry::finish) {
                        entries.push(done);
                    }
                    collecting = None;
                } else if let Some(entry) = pending.as_mut() {
                    if entry_depth == 1 {
                        if let Some(field) = collecting.take() {
                            store_field(entry, field, text_buf.trim());
                        }
                    }
                    entry_depth -= 1;
                }
            }
            Ok(_) => {}
        }
    }

    if format.is_none() {
        return Err(IngestError::MalformedFeed("no root element".into()));
    }
    Ok(entries)
}

fn is_entry_element(format: &FeedFormat, name: &str) -> bool {
    match format {
        FeedFormat::Rss => name == "item",
        FeedFormat::Atom => name == "entry",
    }
}

fn field_for(format: &FeedFormat, name: &str) -> Option<Field> {
    match (format, name) {
        (FeedFormat::Rss, "guid") => Some(Field::Guid),
        (FeedFormat::Rss, "link") => Some(Field::Link),
        (FeedFormat::Rss, "pubDate") => Some(Field::Published),
        (FeedFormat::Atom, "id") => Some(Field::Guid),
        (FeedFormat::Atom, "published") => Some(Field::Published),
        (FeedFormat::Atom, "updated") => Some(Field::Updated),
        (_, "title") => Some(Field::Title),
        (FeedFormat::Rss, "category") => Some(Field::Category),
        _ => None,
    }
}

fn capture_atom_attrs(e: &quick_xml::events::BytesStart<'_>, name: &str, entry: &mut PendingEntry) {
    match name {
        "link" => {
            let rel = attr_value(e, "rel");
            if rel.as_deref().is_none() || rel.as_deref() == Some("alternate") {
                if let Some(href) = attr_value(e, "href") {
                    entry.link = Some(href);
                }
            }
        }
        "category" => {
            if let Some(term) = attr_value(e, "term") {
                entry.categories.push(term);
            }
        }
        _ => {}
    }
}

fn attr_value(e: &quick_xml::events::BytesStart<'_>, key: &str) -> Option<String> {
    e.try_get_attribute(key)
        .ok()
        .flatten()
        .and_then(|a| a.unescape_value().ok())
        .map(|v| v.into_owned())
}

fn store_field(entry: &mut PendingEntry, field: Field, value: &str) {
    if value.is_empty() {
        return;
    }
    match field {
        Field::Guid => entry.guid = Some(value.to_string()),
        Field::Link => entry.link = Some(value.to_string()),
        Field::Title => entry.title = Some(value.to_string()),
        Field::Published => entry.published = Some(value.to_string()),
        Field::Updated => entry.updated = Some(value.to_string()),
        Field::Category => entry.categories.push(value.to_string()),
    }
}

/// Extracts an [`Article`] from a fetched page using the source's selectors.
///
/// The perex is the first block matched by the perex selector, the body is
/// every block matched by the body selector joined by blank lines, and the
/// lead image comes from the image selector's configured attribute.
pub fn read_article(
    source_id: &str,
    entry: &FeedEntry,
    html: &[u8],
    rules: &ExtractionRules,
    fetched_at: DateTime<Utc>,
) -> Result<Article, IngestError> {
    let doc = Html::parse_document(&String::from_utf8_lossy(html));

    let perex_sel = parse_selector(&rules.perex_selector)?;
    let body_sel = parse_selector(&rules.body_selector)?;

    let perex = doc
        .select(&perex_sel)
        .map(|el| normalize_block(el.text()))
        .find(|t| !t.is_empty())
        .unwrap_or_default();

    let blocks: Vec<String> = doc
        .select(&body_sel)
        .map(|el| normalize_block(el.text()))
        .filter(|t| !t.is_empty())
        .collect();
    if blocks.is_empty() {
        return Err(IngestError::ExtractionFailed {
            url: entry.link.clone(),
            reason: format!("body selector {:?} matched no text", rules.body_selector),
        });
    }
    let body = blocks.join("\n\n");

    let image_url = match &rules.image_selector {
        Some(selector) => {
            let sel = parse_selector(selector)?;
            doc.select(&sel)
                .find_map(|el| el.value().attr(&rules.image_attr))
                .map(str::to_string)
        }
        None => None,
    };

    let title = if entry.title.trim().is_empty() {
        return Err(IngestError::ExtractionFailed {
            url: entry.link.clone(),
            reason: "feed entry has no title".into(),
        });
    } else {
        entry.title.trim().to_string()
    };

    Ok(Article {
        article_id: article_id(source_id, &entry.guid),
        source_id: source_id.to_string(),
        url: entry.link.clone(),
        title,
        perex,
        body,
        image_url,
        // a publish date in the future is clamped so published_at <= fetched_at holds
        published_at: entry.published_at.min(fetched_at),
        fetched_at,
        categories: entry.categories.clone(),
    })
}

fn parse_selector(selector: &str) -> Result<Selector, IngestError> {
    Selector::parse(selector).map_err(|_| IngestError::BadSelector {
        selector: selector.to_string(),
    })
}

fn normalize_block<'a>(text: impl Iterator<Item = &'a str>) -> String {
    let joined: String = text.collect();
    joined.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Keyed collection of articles, one record per `article_id`, optionally
/// persisted as one JSON document per record under a directory.
///
/// Writes are expected to be serialized by the caller (single writer).
#[derive(Debug, Default)]
pub struct ArticleStore {
    dir: Option<PathBuf>,
    map: BTreeMap<String, Article>,
}

impl ArticleStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (and creates if needed) a persistent store directory, loading
    /// every existing record.
    pub fn open(dir: &Path) -> Result<Self, IngestError> {
        fs::create_dir_all(dir).map_err(|source| IngestError::Store {
            path: dir.display().to_string(),
            source,
        })?;
        let mut map = BTreeMap::new();
        let listing = fs::read_dir(dir).map_err(|source| IngestError::Store {
            path: dir.display().to_string(),
            source,
        })?;
        for dent in listing {
            let dent = dent.map_err(|source| IngestError::Store {
                path: dir.display().to_string(),
                source,
            })?;
            let path = dent.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let bytes = fs::read(&path).map_err(|source| IngestError::Store {
                path: path.display().to_string(),
                source,
            })?;
            let article: Article =
                serde_json::from_slice(&bytes).map_err(|source| IngestError::CorruptRecord {
                    path: path.display().to_string(),
                    source,
                })?;
            map.insert(article.article_id.clone(), article);
        }
        Ok(Self {
            dir: Some(dir.to_path_buf()),
            map,
        })
    }

    /// Inserts or fully replaces the record with the article's id.
    pub fn upsert(&mut self, article: Article) -> Result<UpsertOutcome, IngestError> {
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{}.json", article.article_id));
            let json = serde_json::to_vec_pretty(&article).expect("article serializes");
            fs::write(&path, json).map_err(|source| IngestError::Store {
                path: path.display().to_string(),
                source,
            })?;
        }
        let prior = self.map.insert(article.article_id.clone(), article);
        Ok(match prior {
            Some(_) => UpsertOutcome::Updated,
            None => UpsertOutcome::Inserted,
        })
    }

    pub fn get(&self, article_id: &str) -> Option<&Article> {
        self.map.get(article_id)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Article> {
        self.map.values()
    }
}

/// Articles published inside the half-open interval
/// (now - duration, now], sorted ascending by (published_at, article_id).
pub fn select_window(
    store: &ArticleStore,
    now: DateTime<Utc>,
    duration: Duration,
) -> Vec<&Article> {
    assert!(duration > Duration::zero(), "window duration must be positive");
    let oldest = now - duration;
    let mut window: Vec<&Article> = store
        .iter()
        .filter(|a| a.published_at > oldest && a.published_at <= now)
        .collect();
    window.sort_by(|a, b| {
        (a.published_at, &a.article_id).cmp(&(b.published_at, &b.article_id))
    });
    window
}

/// Minimal article constructor for tests in other modules.
#[cfg(test)]
pub fn test_article(id: &str, source_id: &str, title: &str, body: &str) -> Article {
    let now = DateTime::parse_from_rfc3339("2020-10-01T12:00:00Z")
        .unwrap()
        .with_timezone(&Utc);
    Article {
        article_id: id.to_string(),
        source_id: source_id.to_string(),
        url: format!("fixture://pages/{id}.html"),
        title: title.to_string(),
        perex: String::new(),
        body: body.to_string(),
        image_url: None,
        published_at: now,
        fetched_at: now,
        categories: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source() -> FeedSource {
        FeedSource {
            source_id: "s1".into(),
            name: "Source One".into(),
            feed_url: "fixture://feeds/s1.xml".into(),
            category_map: BTreeMap::new(),
        }
    }

    fn entry(guid: &str) -> FeedEntry {
        FeedEntry {
            guid: guid.into(),
            link: format!("fixture://pages/{guid}.html"),
            title: "Titulek".into(),
            published_at: "2020-10-01T09:00:00Z".parse().unwrap(),
            categories: vec![],
        }
    }

    fn rules() -> ExtractionRules {
        ExtractionRules {
            perex_selector: "p.perex".into(),
            body_selector: "div.article p".into(),
            image_selector: Some("img.lead".into()),
            image_attr: "src".into(),
        }
    }

    const RSS_TWO_ITEMS: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<rss version="2.0"><channel>
  <title>Zdroj</title><link>https://example.cz</link><description>d</description>
  <item>
    <title>První zpráva</title>
    <link>https://example.cz/a</link>
    <guid>g1</guid>
    <pubDate>Thu, 01 Oct 2020 08:00:00 GMT</pubDate>
    <category>Domácí</category>
  </item>
  <item>
    <title>Druhá zpráva</title>
    <link>https://example.cz/b</link>
    <guid>g2</guid>
    <pubDate>Thu, 01 Oct 2020 09:00:00 GMT</pubDate>
  </item>
</channel></rss>"#;

    #[test]
    fn poll_feed_empty_rss() {
        let xml = r#"<rss version="2.0"><channel><title>t</title></channel></rss>"#;
        assert!(poll_feed(&source(), xml.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn poll_feed_preserves_item_order_and_fields() {
        let entries = poll_feed(&source(), RSS_TWO_ITEMS.as_bytes()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].guid, "g1");
        assert_eq!(entries[1].guid, "g2");
        assert_eq!(entries[0].title, "První zpráva");
        assert_eq!(entries[0].categories, vec!["Domácí"]);
        assert_eq!(
            entries[0].published_at,
            "2020-10-01T08:00:00Z".parse::<DateTime<Utc>>().unwrap()
        );
    }

    #[test]
    fn poll_feed_skips_item_without_pub_date() {
        let xml = r#"<rss version="2.0"><channel>
          <item><title>Bez data</title><link>https://example.cz/x</link><guid>gx</guid></item>
          <item><title>S datem</title><link>https://example.cz/y</link><guid>gy</guid>
            <pubDate>Thu, 01 Oct 2020 09:00:00 GMT</pubDate></item>
        </channel></rss>"#;
        let entries = poll_feed(&source(), xml.as_bytes()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].guid, "gy");
    }

    #[test]
    fn poll_feed_defaults_guid_to_link() {
        let xml = r#"<rss version="2.0"><channel>
          <item><title>t</title><link>https://example.cz/only-link</link>
            <pubDate>Thu, 01 Oct 2020 09:00:00 GMT</pubDate></item>
        </channel></rss>"#;
        let entries = poll_feed(&source(), xml.as_bytes()).unwrap();
        assert_eq!(entries[0].guid, "https://example.cz/only-link");
    }

    #[test]
    fn poll_feed_skips_item_with_neither_guid_nor_link() {
        let xml = r#"<rss version="2.0"><channel>
          <item><title>anonym</title><pubDate>Thu, 01 Oct 2020 09:00:00 GMT</pubDate></item>
        </channel></rss>"#;
        assert!(poll_feed(&source(), xml.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn poll_feed_rejects_malformed_xml() {
        assert!(matches!(
            poll_feed(&source(), b"<rss><channel><item></channel></rss>"),
            Err(IngestError::MalformedFeed(_))
        ));
        assert!(matches!(
            poll_feed(&source(), b"<html><body/></html>"),
            Err(IngestError::MalformedFeed(_))
        ));
    }

    #[test]
    fn poll_feed_is_deterministic() {
        let a = poll_feed(&source(), RSS_TWO_ITEMS.as_bytes()).unwrap();
        let b = poll_feed(&source(), RSS_TWO_ITEMS.as_bytes()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn poll_feed_parses_atom() {
        let xml = r#"<?xml version="1.0"?>
        <feed xmlns="http://www.w3.org/2005/Atom">
          <title>Zdroj</title>
          <entry>
            <title>Atomová zpráva</title>
            <id>tag:example.cz,2020:a1</id>
            <link rel="alternate" href="https://example.cz/a1"/>
            <published>2020-10-01T08:30:00Z</published>
            <category term="Zahraniční"/>
          </entry>
        </feed>"#;
        let entries = poll_feed(&source(), xml.as_bytes()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].guid, "tag:example.cz,2020:a1");
        assert_eq!(entries[0].link, "https://example.cz/a1");
        assert_eq!(entries[0].categories, vec!["Zahraniční"]);
    }

    const PAGE: &str = r#"<html><body>
      <p class="perex">Úvodní odstavec zprávy.</p>
      <img class="lead" src="https://img.example.cz/lead.jpg"/>
      <div class="article">
        <p>První blok textu.</p>
        <p>Druhý   blok
        textu.</p>
        <p>Třetí blok textu.</p>
      </div>
    </body></html>"#;

    #[test]
    fn read_article_extracts_perex_body_image() {
        let a = read_article("s1", &entry("g1"), PAGE.as_bytes(), &rules(), Utc::now()).unwrap();
        assert_eq!(a.perex, "Úvodní odstavec zprávy.");
        assert_eq!(
            a.body,
            "První blok textu.\n\nDruhý blok textu.\n\nTřetí blok textu."
        );
        assert_eq!(a.image_url.as_deref(), Some("https://img.example.cz/lead.jpg"));
        assert_eq!(a.article_id, article_id("s1", "g1"));
    }

    #[test]
    fn read_article_absent_image_selector_match() {
        let page = r#"<html><body><p class="perex">P.</p>
          <div class="article"><p>Blok.</p></div></body></html>"#;
        let a = read_article("s1", &entry("g1"), page.as_bytes(), &rules(), Utc::now()).unwrap();
        assert_eq!(a.image_url, None);
    }

    #[test]
    fn read_article_fails_when_body_matches_nothing() {
        let page = r#"<html><body><p class="perex">P.</p></body></html>"#;
        assert!(matches!(
            read_article("s1", &entry("g1"), page.as_bytes(), &rules(), Utc::now()),
            Err(IngestError::ExtractionFailed { .. })
        ));
    }

    #[test]
    fn read_article_clamps_future_publish_date() {
        let fetched = "2020-10-01T12:00:00Z".parse().unwrap();
        let mut e = entry("g1");
        e.published_at = "2020-10-02T00:00:00Z".parse().unwrap();
        let a = read_article("s1", &e, PAGE.as_bytes(), &rules(), fetched).unwrap();
        assert_eq!(a.published_at, fetched);
    }

    #[test]
    fn upsert_inserts_then_updates() {
        let mut store = ArticleStore::in_memory();
        let mut a = test_article(&article_id("s1", "g1"), "s1", "T", "B");
        assert_eq!(store.upsert(a.clone()).unwrap(), UpsertOutcome::Inserted);
        assert_eq!(store.len(), 1);
        a.body = "Nové tělo".into();
        assert_eq!(store.upsert(a.clone()).unwrap(), UpsertOutcome::Updated);
        assert_eq!(store.len(), 1);
        assert_eq!(store.get(&a.article_id).unwrap().body, "Nové tělo");
    }

    #[test]
    fn upsert_is_idempotent() {
        let mut store = ArticleStore::in_memory();
        let a = test_article("id1", "s1", "T", "B");
        store.upsert(a.clone()).unwrap();
        store.upsert(a.clone()).unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.get("id1"), Some(&a));
    }

    #[test]
    fn same_guid_different_sources_yield_two_records() {
        let id_a = article_id("s1", "g1");
        let id_b = article_id("s2", "g1");
        assert_ne!(id_a, id_b);
        let mut store = ArticleStore::in_memory();
        store.upsert(test_article(&id_a, "s1", "T", "B")).unwrap();
        store.upsert(test_article(&id_b, "s2", "T", "B")).unwrap();
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn store_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = test_article("id1", "s1", "Titulek", "Tělo článku.");
        a.image_url = Some("fixture://images/a.png".into());
        a.categories = vec!["Domácí".into()];
        {
            let mut store = ArticleStore::open(dir.path()).unwrap();
            store.upsert(a.clone()).unwrap();
        }
        let reopened = ArticleStore::open(dir.path()).unwrap();
        assert_eq!(reopened.get("id1"), Some(&a));
    }

    fn at(ts: &str) -> DateTime<Utc> {
        ts.parse().unwrap()
    }

    fn article_at(id: &str, published: &str) -> Article {
        let mut a = test_article(id, "s1", "T", "B");
        a.published_at = at(published);
        a.fetched_at = at(published);
        a
    }

    #[test]
    fn select_window_keeps_only_recent() {
        let mut store = ArticleStore::in_memory();
        store.upsert(article_at("a", "2020-10-01T13:00:00Z")).unwrap(); // now-23h
        store.upsert(article_at("b", "2020-09-30T11:00:00Z")).unwrap(); // now-25h
        let window = select_window(&store, at("2020-10-02T12:00:00Z"), Duration::hours(24));
        assert_eq!(window.len(), 1);
        assert_eq!(window[0].article_id, "a");
    }

    #[test]
    fn select_window_empty_store() {
        let store = ArticleStore::in_memory();
        assert!(select_window(&store, Utc::now(), Duration::hours(24)).is_empty());
    }

    #[test]
    fn select_window_excludes_exact_old_boundary() {
        let mut store = ArticleStore::in_memory();
        store.upsert(article_at("edge", "2020-10-01T12:00:00Z")).unwrap();
        let window = select_window(&store, at("2020-10-02T12:00:00Z"), Duration::hours(24));
        assert!(window.is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn poll_feed_total_and_deterministic_on_arbitrary_bytes(
                bytes in proptest::collection::vec(any::<u8>(), 0..600),
            ) {
                let first = poll_feed(&source(), &bytes);
                let second = poll_feed(&source(), &bytes);
                prop_assert_eq!(format!("{first:?}"), format!("{second:?}"));
            }
        }
    }

    #[test]
    fn select_window_sorted_and_insertion_order_invariant() {
        let mut forward = ArticleStore::in_memory();
        let mut backward = ArticleStore::in_memory();
        let articles = vec![
            article_at("z", "2020-10-02T10:00:00Z"),
            article_at("a", "2020-10-02T10:00:00Z"),
            article_at("m", "2020-10-02T09:00:00Z"),
        ];
        for a in &articles {
            forward.upsert(a.clone()).unwrap();
        }
        for a in articles.iter().rev() {
            backward.upsert(a.clone()).unwrap();
        }
        let now = at("2020-10-02T12:00:00Z");
        let w1: Vec<_> = select_window(&forward, now, Duration::hours(24))
            .iter()
            .map(|a| a.article_id.clone())
            .collect();
        let w2: Vec<_> = select_window(&backward, now, Duration::hours(24))
            .iter()
            .map(|a| a.article_id.clone())
            .collect();
        assert_eq!(w1, vec!["m", "a", "z"]);
        assert_eq!(w1, w2);
    }
}

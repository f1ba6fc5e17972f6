//! URL fetching behind a trait so every pipeline stage can run offline.

use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("GET {url} returned status {status}")]
    Http { url: String, status: u16 },
    #[error("failed to fetch {url}: {reason}")]
    Transport { url: String, reason: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no handler for URL scheme: {url}")]
    UnsupportedScheme { url: String },
}

pub trait Fetcher: Send + Sync {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError>;
}

/// Live fetcher: http(s) URLs over the network, plain paths from disk
/// (resolved against `local_root`, used for bundled assets).
pub struct HttpFetcher {
    agent: ureq::Agent,
    local_root: PathBuf,
}

impl HttpFetcher {
    pub fn new(local_root: &Path) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(30))
            .build();
        Self {
            agent,
            local_root: local_root.to_path_buf(),
        }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        if url.starts_with("http://") || url.starts_with("https://") {
            let response = self.agent.get(url).call().map_err(|e| match e {
                ureq::Error::Status(status, _) => FetchError::Http {
                    url: url.to_string(),
                    status,
                },
                other => FetchError::Transport {
                    url: url.to_string(),
                    reason: other.to_string(),
                },
            })?;
            let mut bytes = Vec::new();
            response
                .into_reader()
                .read_to_end(&mut bytes)
                .map_err(|e| FetchError::Transport {
                    url: url.to_string(),
                    reason: e.to_string(),
                })?;
            return Ok(bytes);
        }
        if url.contains("://") {
            return Err(FetchError::UnsupportedScheme { url: url.to_string() });
        }
        read_local(&self.local_root, url)
    }
}

/// Offline fetcher for replays and tests: resolves `fixture://` URLs and
/// plain paths against a root directory, never touches the network.
pub struct FileFetcher {
    root: PathBuf,
}

impl FileFetcher {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
        }
    }
}

impl Fetcher for FileFetcher {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        if let Some(rel) = url.strip_prefix("fixture://") {
            return read_local(&self.root, rel);
        }
        if url.contains("://") {
            return Err(FetchError::UnsupportedScheme { url: url.to_string() });
        }
        read_local(&self.root, url)
    }
}

fn read_local(root: &Path, rel: &str) -> Result<Vec<u8>, FetchError> {
    let path = if Path::new(rel).is_absolute() {
        PathBuf::from(rel)
    } else {
        root.join(rel)
    };
    std::fs::read(&path).map_err(|source| FetchError::Io {
        path: path.display().to_string(),
        source,
    })
}

//! Token vector providers and article vectorization.
//!
//! An article vector is the unit-normalized mean of the token vectors for
//! the first [`VectorizeConfig::n_tokens`] preprocessed tokens of the title
//! followed by the body. Tokens the provider cannot answer are skipped.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::ingest::Article;
use crate::textpipe::{preprocess, Lexicon, StopList};

/// Vector dimension the pretrained tables were produced with.
pub const DEFAULT_DIMENSION: usize = 200;
/// How many preprocessed tokens of title + body feed the article vector.
pub const DEFAULT_N_TOKENS: usize = 50;

/// Settings used when training the word-vector tables this module consumes.
/// Recorded for provenance only; no training happens in this crate.
pub const TRAINING_EPOCHS: u32 = 10;
pub const TRAINING_LEARNING_RATE: f64 = 0.1;
pub const TRAINING_CONTEXT_WINDOW: usize = 5;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("bad vector file {path}: {reason}")]
    BadVectorFile { path: String, reason: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("article {article_id} has no embeddable tokens")]
    NoEmbeddableTokens { article_id: String },
}

/// Source of token vectors. Every returned vector has exactly
/// `dimension()` finite components.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn lookup(&self, token: &str) -> Option<Vec<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub struct VectorizeConfig {
    pub n_tokens: usize,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        Self {
            n_tokens: DEFAULT_N_TOKENS,
        }
    }
}

/// Unit-norm embedding of one article.
#[derive(Debug, Clone)]
pub struct ArticleVector {
    pub article_id: String,
    pub v: Vec<f64>,
}

/// Provider backed by a word-vector text file: first line "count dimension",
/// then one "token v1 v2 ... vdim" line per token.
pub struct TableProvider {
    dimension: usize,
    table: HashMap<String, Vec<f64>>,
}

impl TableProvider {
    pub fn token_count(&self) -> usize {
        self.table.len()
    }
}

impl EmbeddingProvider for TableProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn lookup(&self, token: &str) -> Option<Vec<f64>> {
        self.table.get(token).cloned()
    }
}

pub fn load_table_provider(path: &Path) -> Result<TableProvider, EmbedError> {
    let text = fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let bad = |reason: String| EmbedError::BadVectorFile {
        path: path.display().to_string(),
        reason,
    };

    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("bad header {header:?}, expected \"count dimension\"")))?;
    let dimension: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("bad header {header:?}, expected \"count dimension\"")))?;
    if dimension == 0 {
        return Err(EmbedError::ZeroDimension);
    }

    let mut table = HashMap::with_capacity(count);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| bad(format!("line {}: missing token", idx + 2)))?;
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", idx + 2)))?;
        if values.len() != dimension {
            return Err(bad(format!(
                "line {}: expected {dimension} components, found {}",
                idx + 2,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("line {}: non-finite component", idx + 2)));
        }
        table.insert(token.to_string(), values);
    }
    if table.len() != count {
        return Err(bad(format!(
            "header declares {count} tokens, file contains {}",
            table.len()
        )));
    }
    if table.is_empty() {
        return Err(bad("no token vectors".into()));
    }
    Ok(TableProvider { dimension, table })
}

/// Deterministic keyed-hash provider: answers every token with a unit vector
/// whose components are drawn from a seeded integer hash of (token, index),
/// mapped affinely onto [-1, 1]. Identical across runs and platforms.
pub struct HashProvider {
    dimension: usize,
    seed: u64,
}

impl HashProvider {
    pub fn new(dimension: usize, seed: u64) -> Result<Self, EmbedError> {
        if dimension == 0 {
            return Err(EmbedError::ZeroDimension);
        }
        Ok(Self { dimension, seed })
    }
}

impl EmbeddingProvider for HashProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn lookup(&self, token: &str) -> Option<Vec<f64>> {
        let mut state = self.seed;
        for byte in token.as_bytes() {
            state = mix64(state ^ u64::from(*byte));
        }
        let mut v: Vec<f64> = (0..self.dimension)
            .map(|i| {
                let h = mix64(state ^ (i as u64));
                // top 53 bits convert to f64 exactly
                let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
                unit * 2.0 - 1.0
            })
            .collect();
        if normalize(&mut v).is_none() {
            v[0] = 1.0;
        }
        Some(v)
    }
}

fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Scales `v` to unit length in place. Returns None when the norm is zero.
pub(crate) fn normalize(v: &mut [f64]) -> Option<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Some(())
}

/// Builds the unit-norm article vector: preprocess title then body, take the
/// first `cfg.n_tokens` tokens, drop the ones the provider cannot answer,
/// average the rest, normalize.
pub fn vectorize_article(
    article: &Article,
    provider: &dyn EmbeddingProvider,
    cfg: &VectorizeConfig,
    lexicon: &Lexicon,
    stops: &StopList,
) -> Result<ArticleVector, EmbedError> {
    let mut tokens = preprocess(&article.title, lexicon, stops);
    tokens.extend(preprocess(&article.body, lexicon, stops));

    let dim = provider.dimension();
    let mut sum = vec![0.0f64; dim];
    let mut answered = 0usize;
    for token in tokens.iter().take(cfg.n_tokens) {
        if let Some(v) = provider.lookup(token) {
            debug_assert_eq!(v.len(), dim);
            for (acc, x) in sum.iter_mut().zip(&v) {
                *acc += x;
            }
            answered += 1;
        }
    }
    if answered == 0 {
        return Err(EmbedError::NoEmbeddableTokens {
            article_id: article.article_id.clone(),
        });
    }
    for x in sum.iter_mut() {
        *x /= answered as f64;
    }
    if normalize(&mut sum).is_none() {
        // token vectors cancelled out exactly; nothing usable to cluster on
        return Err(EmbedError::NoEmbeddableTokens {
            article_id: article.article_id.clone(),
        });
    }
    Ok(ArticleVector {
        article_id: article.article_id.clone(),
        v: sum,
    })
}

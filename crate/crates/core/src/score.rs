//! Cluster rating, the publish gate, and post categorization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::Article;
use crate::textpipe::tokenize;

/// Rating tuple for a cluster. Size and source diversity are the primary
/// criteria; time span and average length only break ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterScore {
    pub size: usize,
    pub distinct_sources: usize,
    /// Seconds between the earliest and latest publish timestamps.
    pub time_span_secs: i64,
    /// Mean body length in tokens, before lemmatization.
    pub avg_length: f64,
}

/// Thresholds a cluster must clear to be published, and the stricter pair
/// that marks it important.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishPolicy {
    pub min_size: usize,
    pub min_distinct_sources: usize,
    pub important_min_size: usize,
    pub important_min_sources: usize,
}

impl Default for PublishPolicy {
    fn default() -> Self {
        Self {
            min_size: 3,
            min_distinct_sources: 2,
            important_min_size: 5,
            important_min_sources: 3,
        }
    }
}

impl PublishPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if self.important_min_size < self.min_size
            || self.important_min_sources < self.min_distinct_sources
        {
            return Err("important thresholds must be at least the base publish thresholds".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    National,
    International,
}

/// Post category: region plus the important flag that upgrades the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostCategory {
    pub region: Region,
    pub important: bool,
}

/// Per-source mapping from feed category strings to regions, keyed by
/// source id.
pub type CategoryMaps = BTreeMap<String, BTreeMap<String, Region>>;

/// Computes the rating tuple for a cluster's members.
pub fn score_cluster(members: &[&Article]) -> ClusterScore {
    assert!(!members.is_empty(), "cannot score an empty cluster");
    let size = members.len();

    let mut sources: Vec<&str> = members.iter().map(|a| a.source_id.as_str()).collect();
    sources.sort_unstable();
    sources.dedup();
    let distinct_sources = sources.len();

    let earliest = members.iter().map(|a| a.published_at).min().expect("non-empty");
    let latest = members.iter().map(|a| a.published_at).max().expect("non-empty");
    let time_span_secs = (latest - earliest).num_seconds();

    let total_tokens: usize = members.iter().map(|a| tokenize(&a.body).len()).sum();
    let avg_length = total_tokens as f64 / size as f64;

    ClusterScore {
        size,
        distinct_sources,
        time_span_secs,
        avg_length,
    }
}

/// Ranking comparison: `Greater` when `a` outranks `b`. Lexicographic over
/// size (bigger first), source diversity (more first), time span (tighter
/// first), average length (longer first).
pub fn compare_scores(a: &ClusterScore, b: &ClusterScore) -> std::cmp::Ordering {
    a.size
        .cmp(&b.size)
        .then_with(|| a.distinct_sources.cmp(&b.distinct_sources))
        .then_with(|| b.time_span_secs.cmp(&a.time_span_secs))
        .then_with(|| a.avg_length.total_cmp(&b.avg_length))
}

/// Publish gate: primary criteria only.
pub fn should_publish(score: &ClusterScore, policy: &PublishPolicy) -> bool {
    score.size >= policy.min_size && score.distinct_sources >= policy.min_distinct_sources
}

/// Region of one article: the first of its feed categories that its
/// source's category map answers; unmapped articles count as national.
fn article_region(article: &Article, maps: &CategoryMaps) -> Region {
    if let Some(map) = maps.get(&article.source_id) {
        for category in &article.categories {
            if let Some(&region) = map.get(category) {
                return region;
            }
        }
    }
    Region::National
}

/// Picks the post category: region by majority vote over the members'
/// mapped feed categories (ties resolved by the representative's region),
/// important when the cluster clears the stricter thresholds.
pub fn classify(
    members: &[&Article],
    score: &ClusterScore,
    policy: &PublishPolicy,
    representative: &Article,
    maps: &CategoryMaps,
) -> PostCategory {
    let mut national = 0usize;
    let mut international = 0usize;
    for member in members {
        match article_region(member, maps) {
            Region::National => national += 1,
            Region::International => international += 1,
        }
    }
    let region = match national.cmp(&international) {
        std::cmp::Ordering::Greater => Region::National,
        std::cmp::Ordering::Less => Region::International,
        std::cmp::Ordering::Equal => article_region(representative, maps),
    };
    let important = score.size >= policy.important_min_size
        && score.distinct_sources >= policy.important_min_sources;
    PostCategory { region, important }
}

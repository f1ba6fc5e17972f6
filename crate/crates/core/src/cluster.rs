//! Window clustering: cosine similarity matrix, threshold graph, maximal
//! clique enumeration, and greedy overlap resolution by score order.
//!
//! Every article pair inside a cluster is similar above the threshold; the
//! clusters that survive dedup are pairwise disjoint.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::embed::ArticleVector;
use crate::score::{compare_scores, ClusterScore};

/// Clique enumeration refuses windows larger than this; worst-case clique
/// counts grow exponentially with node count.
pub const DEFAULT_NODE_CAP: usize = 2_000;

/// Pairwise similarity threshold for connecting two articles.
pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.92;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("window has {n} articles, above the clique enumeration cap of {cap}")]
    TooManyNodes { n: usize, cap: usize },
}

/// Symmetric matrix of pairwise cosine similarities.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    n: usize,
    s: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[i * self.n + j]
    }
}

/// Similarity matrix of unit-norm vectors: the entry (i, j) is the dot
/// product of vectors i and j, which for unit vectors is their cosine.
pub fn similarity_matrix(vectors: &[ArticleVector]) -> SimilarityMatrix {
    let n = vectors.len();
    if n > 0 {
        let dim = vectors[0].v.len();
        assert!(
            vectors.iter().all(|av| av.v.len() == dim),
            "all article vectors must share one dimension"
        );
    }
    let mut s = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = vectors[i]
                .v
                .iter()
                .zip(&vectors[j].v)
                .map(|(a, b)| a * b)
                .sum();
            s[i * n + j] = dot;
            s[j * n + i] = dot;
        }
    }
    SimilarityMatrix { n, s }
}

/// Undirected graph over article indices with an edge wherever similarity
/// strictly exceeds the threshold.
#[derive(Debug, Clone)]
pub struct ThresholdGraph {
    n: usize,
    adj: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl ThresholdGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Builds a graph directly from an edge list; test and tooling helper.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![false; n * n];
        for &(i, j) in edges {
            if i != j {
                adj[i * n + j] = true;
                adj[j * n + i] = true;
            }
        }
        let neighbors = neighbor_lists(n, &adj);
        Self { n, adj, neighbors }
    }
}

fn neighbor_lists(n: usize, adj: &[bool]) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| (0..n).filter(|&j| adj[i * n + j]).collect())
        .collect()
}

/// Connects every pair with similarity strictly above `tau`.
pub fn build_threshold_graph(m: &SimilarityMatrix, tau: f64) -> ThresholdGraph {
    assert!(tau > 0.0 && tau < 1.0, "threshold must lie in (0, 1)");
    let n = m.n();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && m.get(i, j) > tau {
                adj[i * n + j] = true;
            }
        }
    }
    let neighbors = neighbor_lists(n, &adj);
    ThresholdGraph { n, adj, neighbors }
}

/// Enumerates all maximal cliques of the graph with the default node cap.
///
/// Isolated nodes come back as singleton cliques. The result is canonical:
/// members ascending within a clique, cliques ordered by size descending
/// then lexicographically by members.
pub fn enumerate_cliques(g: &ThresholdGraph) -> Result<Vec<Vec<usize>>, ClusterError> {
    enumerate_cliques_capped(g, DEFAULT_NODE_CAP)
}

/// [`enumerate_cliques`] with an explicit node-count guard.
pub fn enumerate_cliques_capped(
    g: &ThresholdGraph,
    cap: usize,
) -> Result<Vec<Vec<usize>>, ClusterError> {
    if g.n() > cap {
        return Err(ClusterError::TooManyNodes { n: g.n(), cap });
    }
    // the recursion would report the empty set as a clique of the empty graph
    if g.n() == 0 {
        return Ok(Vec::new());
    }
    let mut cliques = Vec::new();
    let r = Vec::new();
    let p: Vec<usize> = (0..g.n()).collect();
    let x = Vec::new();
    bron_kerbosch(g, r, p, x, &mut cliques);
    for clique in &mut cliques {
        clique.sort_unstable();
    }
    cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(cliques)
}

/// Recursive pivoted clique expansion: grows the working clique `r` from
/// candidates `p`, with `x` holding vertices already covered elsewhere.
fn bron_kerbosch(
    g: &ThresholdGraph,
    r: Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    // pivot on the candidate covering the most of p to prune branches
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| g.has_edge(u, v)).count())
        .expect("p or x is non-empty");
    let todo: Vec<usize> = p.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();

    for v in todo {
        let mut next_r = r.clone();
        next_r.push(v);
        let next_p = p.iter().copied().filter(|&u| g.has_edge(v, u)).collect();
        let next_x = x.iter().copied().filter(|&u| g.has_edge(v, u)).collect();
        bron_kerbosch(g, next_r, next_p, next_x, out);
        p.retain(|&u| u != v);
        x.push(v);
    }
}

/// A disjoint group of mutually similar articles with its rating.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Member article ids, ascending.
    pub members: Vec<String>,
    /// Positions of the members in the window vector list, ascending.
    pub indices: Vec<usize>,
    pub score: ClusterScore,
}

/// Resolves overlapping cliques: rate every clique, walk them in descending
/// score order, and accept a clique only when none of its members was
/// already taken by a better-scored one. Rejected cliques are dropped
/// whole, so accepted clusters are pairwise disjoint.
pub fn dedup_clusters<F>(cliques: &[Vec<usize>], ids: &[String], rate: F) -> Vec<Cluster>
where
    F: Fn(&[usize]) -> ClusterScore,
{
    let mut rated: Vec<(ClusterScore, &Vec<usize>)> =
        cliques.iter().map(|c| (rate(c), c)).collect();
    // stable sort keeps the canonical clique order as the tie-break
    rated.sort_by(|(a, _), (b, _)| compare_scores(b, a));

    let mut taken = BTreeSet::new();
    let mut accepted = Vec::new();
    for (score, clique) in rated {
        if clique.iter().any(|i| taken.contains(i)) {
            continue;
        }
        taken.extend(clique.iter().copied());
        let mut indices = clique.clone();
        indices.sort_unstable();
        let mut members: Vec<String> = indices.iter().map(|&i| ids[i].clone()).collect();
        members.sort_unstable();
        accepted.push(Cluster {
            members,
            indices,
            score,
        });
    }
    accepted
}

//! News burst detection and auto-posting pipeline.
//!
//! Polls RSS/Atom feeds, extracts article text, embeds articles as averaged
//! word vectors, clusters a sliding time window by maximal cliques on a
//! cosine-similarity threshold graph, rates the clusters, and publishes a
//! composed image-plus-description post for each cluster that clears the
//! publish gate.

pub mod cluster;
pub mod compose;
pub mod embed;
pub mod fetch;
pub mod ingest;
pub mod pipeline;
pub mod publish;
pub mod score;
pub mod textpipe;

mod util;

pub use util::digest_hex;

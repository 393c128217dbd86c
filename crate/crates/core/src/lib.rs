//! Topic modeling and innovation analytics for timestamped document corpora.
//!
//! The crate covers the whole analysis chain:
//!
//! - [`corpus`]: ingest bibliographic records, repair dates, bin by month.
//! - [`textprep`]: tokenization, df / tf-idf vocabulary pruning, bag-of-words.
//! - [`lda`]: synthetic LDA sampler, online variational Bayes trainer, inference.
//! - [`coherence`]: sliding-window co-occurrence, PMI / NPMI, topic coherence and
//!   hyperparameter grid search.
//! - [`trends`]: monthly topic and topic-group probability series, Pearson correlation.
//! - [`innovation`]: KLD surprise, windowed novelty / transience / resonance,
//!   novelty effectiveness, z-scores.
//! - [`entities`]: author name normalization and fuzzy deduplication (exact linear
//!   assignment), author and venue rankings.
//! - [`cli`]: the staged batch pipeline behind the `topic-resonance` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod cli;
pub mod coherence;
pub mod corpus;
pub mod entities;
pub mod innovation;
pub mod lda;
pub mod special;
pub mod synthetic;
pub mod textprep;
pub mod trends;

pub use corpus::{Document, IngestReport, Month, RawRecord};
pub use lda::{LdaConfig, TopicDistribution, TopicModel};
pub use textprep::{BagOfWords, Tokenizer, Vocabulary};

//! Word embedding induction and sentence boundary detection for
//! unpunctuated, speech-transcript-style token streams.
//!
//! The crate is organised along the pipeline:
//!
//! * [`corpus`]: normalization, gold-label ingestion and k-fold splits.
//! * [`embeddings`]: vocabulary, negative-sampling trainers for the plain,
//!   order-sensitive and subword families, and the text embedding format.
//! * [`nn`]: a small hand-differentiated layer library (convolution,
//!   temporal max-pooling, LSTM, dropout, softmax), RMSProp and a
//!   finite-difference gradient checker.
//! * [`model`]: the recurrent-convolutional boundary labeler built from
//!   those layers.
//! * [`eval`]: boundary metrics, the cross-validated experiment grid and
//!   report writers.
//! * [`synth`]: generators for synthetic corpora used by tests and demos.

pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod model;
pub mod nn;
pub mod synth;

pub use crate::corpus::{Dataset, FoldSplit, Label, Token, Transcript};
pub use crate::embeddings::{EmbeddingTable, InductionConfig, MethodTag, SubwordTable, Vocabulary};
pub use crate::error::{Error, Result};
pub use crate::eval::{ConfusionCounts, GridSpec, MetricsReport};
pub use crate::model::{BoundaryPrediction, ModelConfig, RcnnParams, SbdModel};
pub use crate::nn::Tensor2;




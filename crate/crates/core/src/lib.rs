//! Greedy beam-search mining of gapped, multi-attribute token patterns that
//! separate two classes of text.

pub mod bundle;
pub mod config;
pub mod corpus;
pub mod error;
pub mod matcher;
pub mod metrics;
pub mod miner;
pub mod postprocess;
pub mod report;

pub use bundle::{fit, ResultBundle};
pub use config::{ConfigOverrides, MinerConfig};
pub use corpus::{Attribute, AttributeRegistry, Example, Label, Polarity, Token};
pub use error::{Error, Result};
pub use matcher::{Pattern, Window};
pub use metrics::{ContingencyCounts, MetricSpec, Scalar};
pub use miner::{mine, Mined, ScoredPattern};
pub use postprocess::{pattern2text, remove_redundant, vectorize, TernaryVector, Vectorizer};

/// Scalar used by result bundles and the command-line tool.
pub type Real = f64;
pub type ScoredPatternF64 = ScoredPattern<f64>;
pub type ScoredPatternF32 = ScoredPattern<f32>;
pub type MinedF64 = Mined<f64>;
pub type MinedF32 = Mined<f32>;

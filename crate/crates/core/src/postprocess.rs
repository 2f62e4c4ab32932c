//! Redundant-pattern removal, English rendering of patterns, and ternary
//! feature vectors.

use std::fmt;

use crate::bundle::ResultBundle;
use crate::corpus::{Augmenter, AttributeRegistry, Example, Label, Polarity};
use crate::error::Result;
use crate::matcher::{self, Pattern, Window};
use crate::metrics::Scalar;
use crate::miner::{rank_compare, ScoredPattern};

/// Drops every pattern subsumed by another pattern of the list (and, with
/// `require_lower_score`, only when its score is strictly lower). Survivors
/// keep their relative order.
pub fn remove_redundant<T: Scalar>(patterns: &[ScoredPattern<T>], window: &Window, require_lower_score: bool) -> Vec<ScoredPattern<T>> {
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.sort_by(|&a, &b| rank_compare(&patterns[a], &patterns[b]));
    let mut removed = vec![false; patterns.len()];
    // Subsumption is transitive, so comparing against any pattern (removed
    // or not) gives the same survivors as comparing against survivors only.
    for &p in &order {
        removed[p] = order.iter().any(|&g| {
            g != p
                && (!require_lower_score || patterns[p].score < patterns[g].score)
                && matcher::subsumes(&patterns[g].pattern, &patterns[p].pattern, window)
        });
    }
    patterns
        .iter()
        .zip(&removed)
        .filter(|(_, &r)| !r)
        .map(|(p, _)| p.clone())
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// English rendering of a pattern, e.g. "A positive-sentiment word, closely
/// followed by a determiner, and then by a proper noun".
pub fn pattern2text(p: &Pattern, window: &Window, registry: &AttributeRegistry) -> Result<String> {
    let contiguous = p.window(window) == p.num_slots();
    let mut out = String::new();
    for (i, slot) in p.slots().iter().enumerate() {
        let parts = slot.iter().map(|a| registry.describe(a)).collect::<Result<Vec<_>>>()?;
        let desc = parts.join(" which is also ");
        match i {
            0 => out.push_str(&capitalize(&desc)),
            _ if contiguous => {
                out.push_str(", immediately followed by ");
                out.push_str(&desc);
            }
            1 => {
                out.push_str(", closely followed by ");
                out.push_str(&desc);
            }
            _ => {
                out.push_str(", and then by ");
                out.push_str(&desc);
            }
        }
    }
    Ok(out)
}

/// Per-pattern feature vector: `+1` for a matched positive pattern, `-1` for
/// a matched negative pattern, `0` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryVector(pub Vec<i8>);

impl fmt::Display for TernaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Vectorizes texts against the patterns of a bundle, in rank order.
pub struct Vectorizer {
    patterns: Vec<(Pattern, Polarity)>,
    window: Window,
    augmenter: Augmenter,
}

impl Vectorizer {
    pub fn new(bundle: &ResultBundle) -> Result<Self> {
        Ok(Vectorizer {
            patterns: bundle
                .patterns
                .iter()
                .map(|r| (r.pattern.clone(), r.polarity))
                .collect(),
            window: bundle.configuration.window(),
            augmenter: bundle.configuration.augmenter()?,
        })
    }

    /// Extractors the bundle was fitted with; apply to texts before
    /// [`Vectorizer::vectorize`].
    pub fn augmenter(&self) -> &Augmenter {
        &self.augmenter
    }

    pub fn vectorize(&self, text: &Example) -> TernaryVector {
        TernaryVector(
            self.patterns
                .iter()
                .map(|(p, polarity)| {
                    if !matcher::matches(p, &text.tokens, &self.window) {
                        0
                    } else if *polarity == Label::Positive {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        )
    }
}

pub fn vectorize(text: &Example, bundle: &ResultBundle) -> Result<TernaryVector> {
    Ok(Vectorizer::new(bundle)?.vectorize(text))
}

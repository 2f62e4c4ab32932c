//! Scores over pattern/label contingency counts and the ranking order used
//! wherever patterns are sorted.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, Polarity};
use crate::error::{Error, Result};

/// Floating-point type scores are computed in.
pub trait Scalar:
    Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    fn from_real(x: f64) -> Self {
        Self::from_f64(x).expect("finite real representable as scalar")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static {}

/// Matches of one pattern against a labeled corpus, counted per example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub matched_pos: usize,
    pub matched_neg: usize,
    pub total_pos: usize,
    pub total_neg: usize,
}

impl ContingencyCounts {
    pub fn new(matched_pos: usize, matched_neg: usize, total_pos: usize, total_neg: usize) -> Result<Self> {
        let c = ContingencyCounts {
            matched_pos,
            matched_neg,
            total_pos,
            total_neg,
        };
        if matched_pos > total_pos || matched_neg > total_neg || total_pos + total_neg == 0 {
            return Err(Error::Config(format!("inconsistent contingency counts {c:?}")));
        }
        Ok(c)
    }

    pub fn matched(&self) -> usize {
        self.matched_pos + self.matched_neg
    }

    pub fn total(&self) -> usize {
        self.total_pos + self.total_neg
    }

    pub fn coverage<T: Scalar>(&self) -> T {
        T::from_count(self.matched()) / T::from_count(self.total())
    }

    /// Counts with the roles of the two classes exchanged.
    pub fn swapped(&self) -> Self {
        ContingencyCounts {
            matched_pos: self.matched_neg,
            matched_neg: self.matched_pos,
            total_pos: self.total_neg,
            total_neg: self.total_pos,
        }
    }

    /// Counts seen from the point of view of `class` as the target.
    pub fn for_class(&self, class: Label) -> Self {
        match class {
            Label::Positive => *self,
            Label::Negative => self.swapped(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricSpec {
    #[default]
    InformationGain,
    FBeta(f64),
    Precision,
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::InformationGain => f.write_str("information_gain"),
            MetricSpec::FBeta(beta) => write!(f, "f_beta:{beta}"),
            MetricSpec::Precision => f.write_str("precision"),
        }
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "information_gain" => Ok(MetricSpec::InformationGain),
            "precision" => Ok(MetricSpec::Precision),
            other => {
                let beta = other
                    .strip_prefix("f_beta:")
                    .and_then(|b| b.trim().parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "unknown metric `{other}` (expected information_gain, f_beta:<beta> or precision)"
                        ))
                    })?;
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(Error::Config(format!("f_beta requires beta > 0, got {beta}")));
                }
                Ok(MetricSpec::FBeta(beta))
            }
        }
    }
}

impl TryFrom<String> for MetricSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MetricSpec> for String {
    fn from(m: MetricSpec) -> String {
        m.to_string()
    }
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

/// Entropy in bits of a two-way split with the given counts.
pub fn binary_entropy<T: Scalar>(a: usize, b: usize) -> T {
    let n = a + b;
    let term = |k: usize| {
        if k == 0 {
            T::zero()
        } else {
            let p: T = ratio(k, n);
            -p * p.log2()
        }
    };
    term(a) + term(b)
}

/// Mutual information (bits) between the label and the match indicator.
pub fn information_gain<T: Scalar>(c: &ContingencyCounts) -> T {
    // independence: mp/P == mn/N, checked exactly
    if c.matched_pos * c.total_neg == c.matched_neg * c.total_pos {
        return T::zero();
    }
    let total = c.total();
    let matched = c.matched();
    let prior: T = binary_entropy(c.total_pos, c.total_neg);
    let in_match: T = binary_entropy(c.matched_pos, c.matched_neg);
    let out_match: T = binary_entropy(c.total_pos - c.matched_pos, c.total_neg - c.matched_neg);
    let conditional = ratio::<T>(matched, total) * in_match + ratio::<T>(total - matched, total) * out_match;
    (prior - conditional).max(T::zero())
}

pub fn precision<T: Scalar>(c: &ContingencyCounts) -> T {
    ratio(c.matched_pos, c.matched())
}

pub fn recall<T: Scalar>(c: &ContingencyCounts) -> T {
    ratio(c.matched_pos, c.total_pos)
}

/// F-beta of the positive class; zero when nothing positive is matched.
pub fn f_beta<T: Scalar>(c: &ContingencyCounts, beta: T) -> T {
    if c.matched_pos == 0 {
        return T::zero();
    }
    let p = precision::<T>(c);
    let r = recall::<T>(c);
    let b2 = beta * beta;
    (T::one() + b2) * p * r / (b2 * p + r)
}

/// Evaluates `metric` for the positive class only.
pub fn one_sided<T: Scalar>(c: &ContingencyCounts, metric: MetricSpec) -> T {
    match metric {
        MetricSpec::InformationGain => information_gain(c),
        MetricSpec::FBeta(beta) => f_beta(c, T::from_real(beta)),
        MetricSpec::Precision => precision(c),
    }
}

/// Score and polarity of a pattern, whichever class it indicates.
///
/// Information gain is already symmetric; the polarity is the class that is
/// over-represented among the matches. Other metrics are evaluated for both
/// classes and the better one wins. Ties go to positive.
pub fn symmetric_score<T: Scalar>(c: &ContingencyCounts, metric: MetricSpec) -> (T, Polarity) {
    if c.matched() == 0 {
        return (T::zero(), Label::Positive);
    }
    match metric {
        MetricSpec::InformationGain => {
            let lhs = c.matched_pos * c.total();
            let rhs = c.total_pos * c.matched();
            let polarity = if lhs < rhs { Label::Negative } else { Label::Positive };
            (information_gain(c), polarity)
        }
        _ => {
            let pos: T = one_sided(c, metric);
            let neg: T = one_sided(&c.swapped(), metric);
            if neg > pos {
                (neg, Label::Negative)
            } else {
                (pos, Label::Positive)
            }
        }
    }
}

/// Fields that decide a pattern's rank.
#[derive(Debug, Clone, Copy)]
pub struct RankKey<'a, T> {
    pub score: T,
    /// Examples matched; stands in for coverage within one corpus.
    pub matched: usize,
    pub slots: usize,
    pub attributes: usize,
    pub canonical: &'a str,
}

/// Higher score, then higher coverage, then fewer slots, then fewer
/// attributes, then the lexicographically smaller canonical string.
pub fn compare_rank<T: Scalar>(a: &RankKey<'_, T>, b: &RankKey<'_, T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.matched.cmp(&a.matched))
        .then_with(|| a.slots.cmp(&b.slots))
        .then_with(|| a.attributes.cmp(&b.attributes))
        .then_with(|| a.canonical.cmp(b.canonical))
}

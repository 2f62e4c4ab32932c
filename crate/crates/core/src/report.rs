//! Payloads of the report API: pattern table and detail, highlighted
//! example pages and example detail. All are pure reads of a bundle.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bundle::{AnnotatedExample, PatternRecord, ResultBundle, CSV_HEADER};
use crate::config::MinerConfig;
use crate::corpus::Label;
use crate::error::{Error, Result};

pub const PAGE_SIZE: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetStats {
    pub num_positive: usize,
    pub num_negative: usize,
    pub num_tokens_positive: usize,
    pub num_tokens_negative: usize,
    /// Examples matched by at least one pattern.
    pub covered_positive: usize,
    pub covered_negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub configuration: MinerConfig,
    pub alphabet: Vec<String>,
    pub num_patterns: usize,
    pub dataset: DatasetStats,
}

pub fn summary(bundle: &ResultBundle) -> Summary {
    let ds = &bundle.dataset;
    let tokens = |xs: &[AnnotatedExample]| xs.iter().map(|e| e.tokens.len()).sum();
    let covered = |xs: &[AnnotatedExample]| xs.iter().filter(|e| !e.matches.is_empty()).count();
    Summary {
        configuration: bundle.configuration.clone(),
        alphabet: bundle.alphabet.iter().map(|a| a.to_string()).collect(),
        num_patterns: bundle.patterns.len(),
        dataset: DatasetStats {
            num_positive: ds.positive.len(),
            num_negative: ds.negative.len(),
            num_tokens_positive: tokens(&ds.positive),
            num_tokens_negative: tokens(&ds.negative),
            covered_positive: covered(&ds.positive),
            covered_negative: covered(&ds.negative),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortDir {
    Asc,
    Desc,
}

fn compare_column(a: &PatternRecord, b: &PatternRecord, column: &str) -> Ordering {
    let f = |x: f64, y: f64| x.total_cmp(&y);
    match column {
        "rank" => a.rank.cmp(&b.rank),
        "pattern" => a.pattern.to_string().cmp(&b.pattern.to_string()),
        "polarity" => a.polarity.as_str().cmp(b.polarity.as_str()),
        "meaning" => a.meaning.cmp(&b.meaning),
        "num_pos_matched" => a.num_pos_matched.cmp(&b.num_pos_matched),
        "num_neg_matched" => a.num_neg_matched.cmp(&b.num_neg_matched),
        "coverage" => f(a.coverage, b.coverage),
        "metric" => f(a.metric, b.metric),
        "precision" => f(a.precision, b.precision),
        "recall" => f(a.recall, b.recall),
        "f1" => f(a.f1, b.f1),
        _ => unreachable!("column validated"),
    }
}

/// Pattern table, optionally sorted by a CSV column. Ties keep rank order
/// whatever the direction.
pub fn patterns(bundle: &ResultBundle, sort: Option<&str>, dir: Option<&str>) -> Result<Vec<PatternRecord>> {
    let dir = match dir {
        None | Some("asc") => SortDir::Asc,
        Some("desc") => SortDir::Desc,
        Some(other) => return Err(Error::BadRequest(format!("invalid dir `{other}` (expected asc or desc)"))),
    };
    let column = sort.unwrap_or("rank");
    if !CSV_HEADER.contains(&column) {
        return Err(Error::BadRequest(format!(
            "invalid sort column `{column}`; valid columns: {}",
            CSV_HEADER.join(", ")
        )));
    }
    let mut rows = bundle.patterns.clone();
    rows.sort_by(|a, b| {
        let o = compare_column(a, b, column);
        let o = if dir == SortDir::Desc { o.reverse() } else { o };
        o.then(a.rank.cmp(&b.rank))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchedExample {
    pub id: usize,
    pub label: Label,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub occurrences: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDetail {
    pub pattern: PatternRecord,
    pub positive: Vec<MatchedExample>,
    pub negative: Vec<MatchedExample>,
}

pub fn pattern_detail(bundle: &ResultBundle, rank: usize) -> Result<PatternDetail> {
    let record = bundle
        .pattern(rank)
        .ok_or_else(|| Error::NotFound(format!("pattern rank {rank}")))?;
    let matched = |xs: &[AnnotatedExample]| {
        xs.iter()
            .filter_map(|e| {
                e.matches.iter().find(|m| m.rank == rank).map(|m| MatchedExample {
                    id: e.id,
                    label: e.label,
                    raw_text: e.raw_text.clone(),
                    tokens: e.tokens.clone(),
                    occurrences: m.occurrences.clone(),
                })
            })
            .collect()
    };
    Ok(PatternDetail {
        pattern: record.clone(),
        positive: matched(&bundle.dataset.positive),
        negative: matched(&bundle.dataset.negative),
    })
}

/// Token colouring: matched only by positive patterns, only by negative
/// ones, by both, or by none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Highlight {
    None,
    Positive,
    Negative,
    Both,
}

impl Highlight {
    pub fn classify(positive_hits: usize, negative_hits: usize) -> Self {
        match (positive_hits > 0, negative_hits > 0) {
            (false, false) => Highlight::None,
            (true, false) => Highlight::Positive,
            (false, true) => Highlight::Negative,
            (true, true) => Highlight::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighlightedToken {
    pub surface: String,
    pub highlight: Highlight,
    /// Ranks of the patterns with an occurrence on this token.
    pub patterns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighlightedExample {
    pub id: usize,
    pub label: Label,
    pub raw_text: String,
    pub tokens: Vec<HighlightedToken>,
}

pub fn highlight(bundle: &ResultBundle, ex: &AnnotatedExample) -> HighlightedExample {
    let mut hits: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ex.tokens.len()];
    for m in &ex.matches {
        for &i in m.occurrences.iter().flatten() {
            if let Some(h) = hits.get_mut(i) {
                h.insert(m.rank);
            }
        }
    }
    let polarity = |rank: usize| bundle.pattern(rank).map(|p| p.polarity);
    let tokens = ex
        .tokens
        .iter()
        .zip(hits)
        .map(|(surface, ranks)| {
            let pos = ranks.iter().filter(|&&r| polarity(r) == Some(Label::Positive)).count();
            let neg = ranks.iter().filter(|&&r| polarity(r) == Some(Label::Negative)).count();
            HighlightedToken {
                surface: surface.clone(),
                highlight: Highlight::classify(pos, neg),
                patterns: ranks.into_iter().collect(),
            }
        })
        .collect();
    HighlightedExample {
        id: ex.id,
        label: ex.label,
        raw_text: ex.raw_text.clone(),
        tokens,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamplePage {
    pub label: Label,
    /// 1-based, after clamping.
    pub page: usize,
    pub page_size: usize,
    pub num_pages: usize,
    pub total: usize,
    pub examples: Vec<HighlightedExample>,
}

/// One page of examples; out-of-range pages clamp to the nearest valid one.
pub fn examples_page(bundle: &ResultBundle, label: Label, page: usize) -> ExamplePage {
    let all = bundle.dataset.examples(label);
    let num_pages = all.len().div_ceil(PAGE_SIZE).max(1);
    let page = page.clamp(1, num_pages);
    let examples = all
        .iter()
        .skip((page - 1) * PAGE_SIZE)
        .take(PAGE_SIZE)
        .map(|e| highlight(bundle, e))
        .collect();
    ExamplePage {
        label,
        page,
        page_size: PAGE_SIZE,
        num_pages,
        total: all.len(),
        examples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleDetail {
    pub example: HighlightedExample,
    pub positive_patterns: Vec<PatternRecord>,
    pub negative_patterns: Vec<PatternRecord>,
}

pub fn example_detail(bundle: &ResultBundle, label: Label, id: usize) -> Result<ExampleDetail> {
    let ex = bundle
        .dataset
        .examples(label)
        .get(id)
        .ok_or_else(|| Error::NotFound(format!("{} example {id}", label.short())))?;
    let matching: Vec<&PatternRecord> = ex.matches.iter().filter_map(|m| bundle.pattern(m.rank)).collect();
    let by = |pol: Label| matching.iter().filter(|p| p.polarity == pol).map(|p| (*p).clone()).collect();
    Ok(ExampleDetail {
        example: highlight(bundle, ex),
        positive_patterns: by(Label::Positive),
        negative_patterns: by(Label::Negative),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{Dataset, PatternMatch};
    use crate::matcher::Pattern;

    fn record(rank: usize, p: &str, polarity: Label, precision: f64) -> PatternRecord {
        PatternRecord {
            rank,
            pattern: Pattern::parse(p).unwrap(),
            polarity,
            meaning: format!("meaning {rank}"),
            num_pos_matched: 1,
            num_neg_matched: 1,
            coverage: 0.5,
            metric: 1.0 / rank as f64,
            precision,
            recall: 0.5,
            f1: 0.5,
        }
    }

    fn example(id: usize, label: Label, n: usize, matches: Vec<PatternMatch>) -> AnnotatedExample {
        AnnotatedExample {
            id,
            label,
            raw_text: format!("example {id}"),
            tokens: (0..n).map(|i| format!("t{i}")).collect(),
            matches,
        }
    }

    fn fixture() -> ResultBundle {
        let positive = (0..30)
            .map(|i| {
                let m = if i == 0 {
                    vec![
                        PatternMatch { rank: 1, occurrences: vec![vec![0, 1]] },
                        PatternMatch { rank: 2, occurrences: vec![vec![1]] },
                    ]
                } else {
                    vec![]
                };
                example(i, Label::Positive, 3, m)
            })
            .collect();
        ResultBundle {
            configuration: MinerConfig::default(),
            alphabet: vec![],
            patterns: vec![
                record(1, "[A:a, B:b]", Label::Positive, 0.5),
                record(2, "[B:b]", Label::Negative, 0.9),
                record(3, "[C:c]", Label::Positive, 0.5),
            ],
            dataset: Dataset {
                positive,
                negative: vec![example(0, Label::Negative, 2, vec![PatternMatch { rank: 2, occurrences: vec![vec![0]] }])],
            },
        }
    }

    #[test]
    fn sorting_by_column_breaks_ties_by_rank() {
        let b = fixture();
        let ranks = |rows: Vec<PatternRecord>| rows.iter().map(|r| r.rank).collect::<Vec<_>>();
        assert_eq!(ranks(patterns(&b, None, None).unwrap()), [1, 2, 3]);
        assert_eq!(ranks(patterns(&b, Some("precision"), Some("desc")).unwrap()), [2, 1, 3]);
        assert_eq!(ranks(patterns(&b, Some("precision"), Some("asc")).unwrap()), [1, 3, 2]);
        assert_eq!(ranks(patterns(&b, Some("metric"), Some("asc")).unwrap()), [3, 2, 1]);
    }

    #[test]
    fn invalid_sort_requests() {
        let b = fixture();
        let err = patterns(&b, Some("colour"), None).unwrap_err();
        assert!(matches!(&err, Error::BadRequest(m) if m.contains("num_pos_matched")));
        assert!(patterns(&b, Some("rank"), Some("up")).is_err());
    }

    #[test]
    fn pattern_detail_lists_matched_examples() {
        let d = pattern_detail(&fixture(), 2).unwrap();
        assert_eq!(d.positive.len(), 1);
        assert_eq!(d.negative.len(), 1);
        assert_eq!(d.negative[0].occurrences, vec![vec![0]]);
        assert!(matches!(pattern_detail(&fixture(), 4), Err(Error::NotFound(_))));
        assert!(matches!(pattern_detail(&fixture(), 0), Err(Error::NotFound(_))));
    }

    #[test]
    fn token_highlights() {
        let b = fixture();
        let h = highlight(&b, &b.dataset.positive[0]);
        let classes: Vec<Highlight> = h.tokens.iter().map(|t| t.highlight).collect();
        assert_eq!(classes, [Highlight::Positive, Highlight::Both, Highlight::None]);
        assert_eq!(h.tokens[1].patterns, [1, 2]);
        let n = highlight(&b, &b.dataset.negative[0]);
        assert_eq!(n.tokens[0].highlight, Highlight::Negative);
    }

    #[test]
    fn pages_clamp_and_partition() {
        let b = fixture();
        let p1 = examples_page(&b, Label::Positive, 1);
        assert_eq!((p1.num_pages, p1.examples.len(), p1.total), (2, 25, 30));
        let p2 = examples_page(&b, Label::Positive, 99);
        assert_eq!((p2.page, p2.examples.len()), (2, 5));
        assert_eq!(examples_page(&b, Label::Positive, 0).page, 1);
        let ids: Vec<usize> = p1.examples.iter().chain(&p2.examples).map(|e| e.id).collect();
        assert_eq!(ids, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn example_detail_splits_by_polarity() {
        let d = example_detail(&fixture(), Label::Positive, 0).unwrap();
        assert_eq!(d.positive_patterns.iter().map(|p| p.rank).collect::<Vec<_>>(), [1]);
        assert_eq!(d.negative_patterns.iter().map(|p| p.rank).collect::<Vec<_>>(), [2]);
        assert!(matches!(example_detail(&fixture(), Label::Negative, 5), Err(Error::NotFound(_))));
    }

    #[test]
    fn summary_counts() {
        let s = summary(&fixture());
        assert_eq!(s.dataset.num_positive, 30);
        assert_eq!(s.dataset.covered_positive, 1);
        assert_eq!(s.dataset.num_tokens_negative, 2);
        assert_eq!(s.num_patterns, 3);
    }
}

//! The result bundle: configuration, alphabet, ranked patterns and the
//! annotated training set. Exported as canonical JSON (sorted keys) and as a
//! CSV pattern table.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::MinerConfig;
use crate::corpus::{Attribute, Example, Label, Polarity, DEFAULT_TEMPLATE};
use crate::error::{Error, Result};
use crate::matcher::{self, Pattern};
use crate::metrics::{compare_rank, ContingencyCounts, RankKey};
use crate::miner::{mine, ScoredPattern};
use crate::postprocess::pattern2text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternRecord {
    /// 1-based; the stable identifier used by every export and endpoint.
    pub rank: usize,
    pub pattern: Pattern,
    pub polarity: Polarity,
    pub meaning: String,
    pub num_pos_matched: usize,
    pub num_neg_matched: usize,
    pub coverage: f64,
    /// Score under the configured metric.
    pub metric: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PatternRecord {
    pub fn from_scored(rank: usize, sp: &ScoredPattern<f64>, meaning: String) -> Self {
        PatternRecord {
            rank,
            pattern: sp.pattern.clone(),
            polarity: sp.polarity,
            meaning,
            num_pos_matched: sp.counts.matched_pos,
            num_neg_matched: sp.counts.matched_neg,
            coverage: sp.coverage,
            metric: sp.score,
            precision: sp.precision,
            recall: sp.recall,
            f1: sp.f1,
        }
    }

    pub fn counts(&self, total_pos: usize, total_neg: usize) -> ContingencyCounts {
        ContingencyCounts {
            matched_pos: self.num_pos_matched,
            matched_neg: self.num_neg_matched,
            total_pos,
            total_neg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternMatch {
    pub rank: usize,
    pub occurrences: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedExample {
    pub id: usize,
    pub label: Label,
    pub raw_text: String,
    pub tokens: Vec<String>,
    /// Patterns matching this example, by ascending rank.
    pub matches: Vec<PatternMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub positive: Vec<AnnotatedExample>,
    pub negative: Vec<AnnotatedExample>,
}

impl Dataset {
    pub fn examples(&self, label: Label) -> &[AnnotatedExample] {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultBundle {
    pub configuration: MinerConfig,
    pub alphabet: Vec<Attribute>,
    pub patterns: Vec<PatternRecord>,
    pub dataset: Dataset,
}

fn relabel(examples: &[Example], label: Label) -> Vec<Example> {
    examples
        .iter()
        .enumerate()
        .map(|(id, e)| Example {
            id,
            label,
            tokens: e.tokens.clone(),
            raw_text: e.raw_text.clone(),
        })
        .collect()
}

/// Fits patterns distinguishing `pos` from `neg` and packages the result.
pub fn fit(pos: &[Example], neg: &[Example], cfg: &MinerConfig) -> Result<ResultBundle> {
    cfg.validate()?;
    if pos.is_empty() {
        return Err(Error::MissingClass("positive"));
    }
    if neg.is_empty() {
        return Err(Error::MissingClass("negative"));
    }
    let augmenter = cfg.augmenter()?;
    let mut examples = relabel(pos, Label::Positive);
    examples.extend(relabel(neg, Label::Negative));
    for ex in &mut examples {
        augmenter.augment(&mut ex.tokens);
    }
    let mined = mine::<f64>(&examples, cfg)?;

    // Every key in the alphabet needs a description; ingested custom keys
    // without one get the generic template, recorded in the configuration.
    let mut configuration = cfg.clone();
    let registry = cfg.registry();
    let undescribed: BTreeSet<&str> = mined
        .alphabet
        .iter()
        .map(Attribute::key)
        .filter(|k| !registry.contains(k))
        .collect();
    for key in undescribed {
        configuration
            .descriptions
            .insert(key.to_string(), DEFAULT_TEMPLATE.to_string());
    }
    let registry = configuration.registry();
    let window = configuration.window();

    let patterns = mined
        .patterns
        .iter()
        .enumerate()
        .map(|(i, sp)| {
            let meaning = pattern2text(&sp.pattern, &window, &registry)?;
            Ok(PatternRecord::from_scored(i + 1, sp, meaning))
        })
        .collect::<Result<Vec<_>>>()?;

    let annotate = |ex: &Example| AnnotatedExample {
        id: ex.id,
        label: ex.label,
        raw_text: ex.raw_text.clone(),
        tokens: ex.tokens.iter().map(|t| t.surface.clone()).collect(),
        matches: patterns
            .iter()
            .filter_map(|r| {
                let m = matcher::match_pattern(&r.pattern, &ex.tokens, &window);
                m.matched.then_some(PatternMatch {
                    rank: r.rank,
                    occurrences: m.occurrences,
                })
            })
            .collect(),
    };
    let (p, n): (Vec<&Example>, Vec<&Example>) = examples.iter().partition(|e| e.label == Label::Positive);
    let dataset = Dataset {
        positive: p.into_iter().map(annotate).collect(),
        negative: n.into_iter().map(annotate).collect(),
    };
    Ok(ResultBundle {
        configuration,
        alphabet: mined.alphabet,
        patterns,
        dataset,
    })
}

impl ResultBundle {
    pub fn total_pos(&self) -> usize {
        self.dataset.positive.len()
    }

    pub fn total_neg(&self) -> usize {
        self.dataset.negative.len()
    }

    pub fn pattern(&self, rank: usize) -> Option<&PatternRecord> {
        rank.checked_sub(1).and_then(|i| self.patterns.get(i))
    }

    /// Checks ranks, ordering, annotation references and occurrence indices.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidBundle(m));
        for (i, r) in self.patterns.iter().enumerate() {
            if r.rank != i + 1 {
                return bad(format!("pattern at position {} has rank {}", i + 1, r.rank));
            }
        }
        let canon: Vec<String> = self.patterns.iter().map(|r| r.pattern.to_string()).collect();
        let key = |i: usize| RankKey {
            score: self.patterns[i].metric,
            matched: self.patterns[i].num_pos_matched + self.patterns[i].num_neg_matched,
            slots: self.patterns[i].pattern.num_slots(),
            attributes: self.patterns[i].pattern.num_attributes(),
            canonical: canon[i].as_str(),
        };
        for i in 1..self.patterns.len() {
            if compare_rank(&key(i - 1), &key(i)) != std::cmp::Ordering::Less {
                return bad(format!("patterns {} and {} are out of rank order", i, i + 1));
            }
        }
        for label in [Label::Positive, Label::Negative] {
            for (i, ex) in self.dataset.examples(label).iter().enumerate() {
                if ex.id != i || ex.label != label {
                    return bad(format!("{} example at position {i} has id {} / label {}", label, ex.id, ex.label));
                }
                for m in &ex.matches {
                    let Some(p) = self.pattern(m.rank) else {
                        return bad(format!("{} example {i} references unknown rank {}", label, m.rank));
                    };
                    for occ in &m.occurrences {
                        let ok = occ.len() == p.pattern.num_slots()
                            && occ.windows(2).all(|w| w[0] < w[1])
                            && occ.last().is_some_and(|&l| l < ex.tokens.len());
                        if !ok {
                            return bad(format!("{} example {i}: invalid occurrence {occ:?} for rank {}", label, m.rank));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON text: sorted keys, two-space indentation, trailing
    /// newline.
    pub fn to_json_string(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut out = String::new();
        write_canonical(&value, 0, &mut out)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let bundle: ResultBundle = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn to_json(&self, path: &Path) -> Result<()> {
        let text = self.to_json_string()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Pattern table rows, header first, as written by [`ResultBundle::write_csv`].
    pub fn csv_table(&self) -> Vec<Vec<String>> {
        let mut rows = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect()];
        for r in &self.patterns {
            rows.push(vec![
                r.rank.to_string(),
                r.pattern.to_string(),
                r.polarity.to_string(),
                r.meaning.clone(),
                r.num_pos_matched.to_string(),
                r.num_neg_matched.to_string(),
                format!("{:.4}", r.coverage),
                format!("{:.4}", r.metric),
                format!("{:.4}", r.precision),
                format!("{:.4}", r.recall),
                format!("{:.4}", r.f1),
            ]);
        }
        rows
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for row in self.csv_table() {
            writer.write_record(&row)?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "rank",
    "pattern",
    "polarity",
    "meaning",
    "num_pos_matched",
    "num_neg_matched",
    "coverage",
    "metric",
    "precision",
    "recall",
    "f1",
];

/// Reads a CSV table (header included) back into rows of fields.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn write_canonical(v: &Value, indent: usize, out: &mut String) -> Result<()> {
    const STEP: &str = "  ";
    match v {
        Value::Object(map) if !map.is_empty() => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.push_str("{\n");
            for (i, (k, val)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                out.push_str(&STEP.repeat(indent + 1));
                out.push_str(&serde_json::to_string(k)?);
                out.push_str(": ");
                write_canonical(val, indent + 1, out)?;
            }
            out.push('\n');
            out.push_str(&STEP.repeat(indent));
            out.push('}');
        }
        Value::Array(items) if !items.is_empty() => {
            // arrays of scalars stay on one line
            if items.iter().all(|x| !x.is_object() && !x.is_array()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&serde_json::to_string(x)?);
                }
                out.push(']');
                return Ok(());
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                out.push_str(&STEP.repeat(indent + 1));
                write_canonical(x, indent + 1, out)?;
            }
            out.push('\n');
            out.push_str(&STEP.repeat(indent));
            out.push(']');
        }
        other => out.push_str(&serde_json::to_string(other)?),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use crate::matcher::Window;
    use crate::metrics::MetricSpec;

    fn spam_record() -> PatternRecord {
        let sp = ScoredPattern::<f64>::new(
            Pattern::parse("[SENTIMENT:pos, POS:DET, POS:PROPN]").unwrap(),
            ContingencyCounts::new(3, 0, 3, 3).unwrap(),
            MetricSpec::InformationGain,
        );
        let meaning = pattern2text(&sp.pattern, &Window::gaps(2), &crate::corpus::AttributeRegistry::standard()).unwrap();
        PatternRecord::from_scored(1, &sp, meaning)
    }

    fn bundle(patterns: Vec<PatternRecord>) -> ResultBundle {
        ResultBundle {
            configuration: MinerConfig {
                gaps_allowed: Some(2),
                ..MinerConfig::default()
            },
            alphabet: vec![Attribute::parse("SENTIMENT:pos").unwrap()],
            patterns,
            dataset: Dataset {
                positive: Vec::new(),
                negative: Vec::new(),
            },
        }
    }

    #[test]
    fn csv_row_for_spam_pattern() {
        let mut out = Vec::new();
        bundle(vec![spam_record()]).write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(
            lines[1],
            "1,\"[SENTIMENT:pos, POS:DET, POS:PROPN]\",positive,\"A positive-sentiment word, closely followed by a determiner, and then by a proper noun\",3,0,0.5000,1.0000,1.0000,1.0000,1.0000"
        );
    }

    #[test]
    fn empty_bundle_csv_is_header_only() {
        let mut out = Vec::new();
        bundle(Vec::new()).write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn csv_reparses_to_same_table() {
        let mut rec = spam_record();
        rec.meaning = "has, commas and \"quotes\"".into();
        let b = bundle(vec![rec]);
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        assert_eq!(read_csv(&out[..]).unwrap(), b.csv_table());
    }

    #[test]
    fn json_round_trip_and_sorted_keys() {
        let b = bundle(vec![spam_record()]);
        let text = b.to_json_string().unwrap();
        assert_eq!(ResultBundle::from_json_str(&text).unwrap(), b);
        let top: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        assert_eq!(top, ["alphabet", "configuration", "dataset", "patterns"]);
        assert_eq!(text, ResultBundle::from_json_str(&text).unwrap().to_json_string().unwrap());
    }

    #[test]
    fn validation_catches_bad_references() {
        let mut b = bundle(vec![spam_record()]);
        b.dataset.positive.push(AnnotatedExample {
            id: 0,
            label: Label::Positive,
            raw_text: "a b".into(),
            tokens: vec!["a".into(), "b".into()],
            matches: vec![PatternMatch {
                rank: 2,
                occurrences: vec![],
            }],
        });
        assert!(matches!(b.validate(), Err(Error::InvalidBundle(_))));
        b.dataset.positive[0].matches[0] = PatternMatch {
            rank: 1,
            occurrences: vec![vec![0, 1, 5]],
        };
        assert!(b.validate().is_err());
        b.dataset.positive[0].matches.clear();
        b.validate().unwrap();
    }

    #[test]
    fn fit_rejects_empty_class() {
        let ex = Example {
            id: 0,
            label: Label::Positive,
            tokens: vec![Token::new("x")],
            raw_text: "x".into(),
        };
        assert!(matches!(fit(&[ex], &[], &MinerConfig::default()), Err(Error::MissingClass("negative"))));
    }
}

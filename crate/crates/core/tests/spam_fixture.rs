use std::path::PathBuf;

use grasp_core::corpus::{ingest_pretagged, Augmenter};
use grasp_core::matcher::match_pattern;
use grasp_core::{fit, pattern2text, Example, Label, MinerConfig, Pattern, Window};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn spam_config() -> MinerConfig {
    MinerConfig {
        num_patterns: 200,
        gaps_allowed: Some(2),
        alphabet_size: 200,
        include_standard: ["TEXT", "POS", "NER", "SENTIMENT"].iter().map(|s| s.to_string()).collect(),
        ..MinerConfig::default()
    }
}

fn load(label: Label) -> Vec<Example> {
    let file = if label == Label::Positive { "spam_pos.jsonl" } else { "spam_neg.jsonl" };
    ingest_pretagged(&data(file), label, &Augmenter::passthrough()).unwrap()
}

#[test]
fn spam_pattern_occurrences() {
    let p = Pattern::parse("[SENTIMENT:pos, POS:DET, POS:PROPN]").unwrap();
    let w = Window::gaps(2);
    let occ: Vec<Vec<Vec<usize>>> = load(Label::Positive)
        .iter()
        .map(|e| match_pattern(&p, &e.tokens, &w).occurrences)
        .collect();
    assert_eq!(occ[0][0], [2, 3, 4]);
    assert_eq!(occ[1][0], [2, 3, 5]);
    assert_eq!(occ[2][0], [3, 6, 7]);
    assert!(load(Label::Negative).iter().all(|e| !match_pattern(&p, &e.tokens, &w).matched));
}

#[test]
fn spam_fit_ranks_the_det_propn_pattern_first() {
    let b = fit(&load(Label::Positive), &load(Label::Negative), &spam_config()).unwrap();
    let top = &b.patterns[0];
    assert_eq!(top.pattern.to_string(), "[SENTIMENT:pos, POS:DET, POS:PROPN]", "{:#?}", &b.patterns[..5]);
    assert_eq!(top.meaning, "A positive-sentiment word, closely followed by a determiner, and then by a proper noun");
    assert_eq!((top.num_pos_matched, top.num_neg_matched), (3, 0));
    let first = &b.dataset.positive[0];
    let m = first.matches.iter().find(|m| m.rank == 1).unwrap();
    assert_eq!(m.occurrences, vec![vec![2, 3, 4]]);
    let reg = b.configuration.registry();
    assert_eq!(pattern2text(&top.pattern, &b.configuration.window(), &reg).unwrap(), top.meaning);
}

#[test]
fn sentiment_lexicon_tags_raw_text() {
    let mut cfg = MinerConfig::default();
    let text = format!("lexicon = SENTIMENT={}\n", data("sentiment.tsv").display());
    grasp_core::ConfigOverrides::parse(&text, &data("")).unwrap().apply(&mut cfg).unwrap();
    let aug = cfg.augmenter().unwrap();
    let ex = grasp_core::corpus::read_raw("Get it for FREE ! call the headset line".as_bytes(), Label::Positive, &aug)
        .unwrap()
        .examples;
    let tokens = &ex[0].tokens;
    assert!(tokens[3].contains(&grasp_core::Attribute::parse("SENTIMENT:pos").unwrap()));
    assert!(tokens[3].contains(&grasp_core::Attribute::parse("TEXT:free").unwrap()));
    assert_eq!(tokens[7].values_of("SENTIMENT").count(), 0);
}

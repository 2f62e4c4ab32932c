use std::path::PathBuf;

use grasp_core::config::ConfigOverrides;
use grasp_core::corpus::{ingest_pretagged, Augmenter};
use grasp_core::matcher::match_pattern;
use grasp_core::{fit, Example, Label, MinerConfig, ResultBundle, Vectorizer};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn load(file: &str, label: Label) -> Vec<Example> {
    ingest_pretagged(&data(file), label, &Augmenter::passthrough()).unwrap()
}

fn argument_bundle() -> ResultBundle {
    let text = format!(
        "num_patterns = 20\ngaps_allowed = 2\ninclude_standard = LEMMA, POS\nlexicon = ARGUMENTATIVE={}\n\
         describe = ARGUMENTATIVE=an argumentative word\n",
        data("argumentative.tsv").display()
    );
    let mut cfg = MinerConfig::default();
    ConfigOverrides::parse(&text, &data("")).unwrap().apply(&mut cfg).unwrap();
    fit(
        &load("argument_pos.jsonl", Label::Positive),
        &load("argument_neg.jsonl", Label::Negative),
        &cfg,
    )
    .unwrap()
}

#[test]
fn lexicon_attributes_reach_the_patterns() {
    let b = argument_bundle();
    assert!(b.alphabet.iter().any(|a| a.as_str() == "ARGUMENTATIVE:true"));
    assert!(b.alphabet.iter().all(|a| a.key() != "TEXT"));
    let top = &b.patterns[0];
    assert_eq!(top.polarity, Label::Positive);
    assert_eq!(top.num_neg_matched, 0);
    let lexical = b
        .patterns
        .iter()
        .find(|p| p.pattern.to_string().contains("ARGUMENTATIVE:true"))
        .expect("a pattern using the lexicon");
    assert!(lexical.meaning.contains("argumentative word"), "{}", lexical.meaning);
    b.validate().unwrap();
}

#[test]
fn vectors_agree_with_the_matcher_on_fixture_texts() {
    let b = argument_bundle();
    let v = Vectorizer::new(&b).unwrap();
    let window = b.configuration.window();
    let files = [
        ("argument_pos.jsonl", Label::Positive),
        ("argument_neg.jsonl", Label::Negative),
        ("spam_pos.jsonl", Label::Positive),
        ("spam_neg.jsonl", Label::Negative),
    ];
    for (file, label) in files {
        for mut ex in load(file, label) {
            v.augmenter().augment(&mut ex.tokens);
            let row = v.vectorize(&ex);
            assert_eq!(row.0.len(), b.patterns.len());
            for (r, &x) in b.patterns.iter().zip(&row.0) {
                let m = match_pattern(&r.pattern, &ex.tokens, &window);
                assert_eq!(x != 0, m.matched, "{} on {:?}", r.pattern, ex.raw_text);
                if x != 0 {
                    let expected = if r.polarity == Label::Positive { 1 } else { -1 };
                    assert_eq!(x, expected);
                    assert!(!m.occurrences.is_empty());
                }
            }
        }
    }
}

#[test]
fn json_and_csv_round_trip() {
    let b = argument_bundle();
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("b.json");
    b.to_json(&json).unwrap();
    assert_eq!(ResultBundle::load(&json).unwrap(), b);
    let again = argument_bundle().to_json_string().unwrap();
    assert_eq!(std::fs::read_to_string(&json).unwrap(), again);

    let csv = dir.path().join("b.csv");
    b.to_csv(&csv).unwrap();
    let table = grasp_core::bundle::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(table, b.csv_table());
}

//! Attribute-augmented tokens, labeled examples, and corpus ingestion.
//!
//! Tagging (POS, NER, lemmas, hypernyms, ...) happens outside this crate; it
//! arrives through the pre-tagged JSON-lines format. The only extractors run
//! here are the lowercased `TEXT` attribute and lexicon lookups.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute keys with built-in extractors or description templates.
pub const STANDARD_KEYS: [&str; 7] = ["TEXT", "LEMMA", "POS", "NER", "DEP", "HYPERNYM", "SENTIMENT"];

/// Class of an example, and the polarity of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

pub type Polarity = Label;

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }

    /// Short form used in URLs.
    pub fn short(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" | "positive" => Ok(Label::Positive),
            "neg" | "negative" => Ok(Label::Negative),
            _ => Err(Error::BadRequest(format!(
                "unknown label `{s}` (expected pos or neg)"
            ))),
        }
    }
}

/// A `KEY:value` property of a token.
///
/// Stored in rendered form, so the derived ordering is the lexicographic
/// ordering of canonical strings.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Attribute {
    text: Box<str>,
    split: usize,
}

pub(crate) fn is_key_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Attribute {
    pub fn new(key: &str, value: &str) -> Result<Self> {
        Self::parse(&format!("{key}:{value}"))
    }

    /// Parses `KEY:value`, splitting at the first colon.
    pub fn parse(text: &str) -> Result<Self> {
        let invalid = |reason| Error::InvalidAttribute {
            text: text.to_string(),
            reason,
        };
        let split = text.find(':').ok_or_else(|| invalid("missing `:`"))?;
        if split == 0 {
            return Err(invalid("empty key"));
        }
        if !text[..split].chars().all(is_key_char) {
            return Err(invalid("key must be ASCII letters, digits or `_`"));
        }
        if split + 1 == text.len() {
            return Err(invalid("empty value"));
        }
        Ok(Attribute {
            text: text.into(),
            split,
        })
    }

    pub fn key(&self) -> &str {
        &self.text[..self.split]
    }

    pub fn value(&self) -> &str {
        &self.text[self.split + 1..]
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl std::borrow::Borrow<str> for Attribute {
    fn borrow(&self) -> &str {
        &self.text
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.text)
    }
}

impl FromStr for Attribute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Attribute::parse(s)
    }
}

impl TryFrom<String> for Attribute {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Attribute::parse(&s)
    }
}

impl From<Attribute> for String {
    fn from(a: Attribute) -> String {
        a.text.into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    attributes: BTreeSet<Attribute>,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            attributes: BTreeSet::new(),
        }
    }

    /// Builds a token from rendered attributes, treating every key as
    /// single-valued except `HYPERNYM`.
    pub fn with_attrs(surface: impl Into<String>, attrs: &[&str]) -> Result<Self> {
        let mut token = Token::new(surface);
        for a in attrs {
            let attr = Attribute::parse(a)?;
            let multi = attr.key() == "HYPERNYM";
            token.insert(attr, multi)?;
        }
        Ok(token)
    }

    pub fn attributes(&self) -> &BTreeSet<Attribute> {
        &self.attributes
    }

    pub fn contains(&self, attr: &Attribute) -> bool {
        self.attributes.contains(attr)
    }

    /// All attributes carrying `key`.
    pub fn values_of<'a>(&'a self, key: &str) -> impl Iterator<Item = &'a Attribute> + 'a {
        // keys contain no ':', so "KEY:" .. "KEY;" brackets exactly this key
        let lo = format!("{key}:");
        let hi = format!("{key};");
        self.attributes.range::<str, _>((
            std::ops::Bound::Included(lo.as_str()),
            std::ops::Bound::Excluded(hi.as_str()),
        ))
    }

    /// Adds an attribute; a second distinct value for a single-valued key is
    /// an error.
    pub fn insert(&mut self, attr: Attribute, multi_valued: bool) -> Result<()> {
        if !multi_valued {
            if let Some(existing) = self.values_of(attr.key()).next() {
                if *existing != attr {
                    return Err(Error::DuplicateAttribute {
                        key: attr.key().to_string(),
                        surface: self.surface.clone(),
                    });
                }
            }
        }
        self.attributes.insert(attr);
        Ok(())
    }

    /// Adds an attribute, replacing any other value of the same key unless
    /// the key is multi-valued.
    pub fn set(&mut self, attr: Attribute, multi_valued: bool) {
        if !multi_valued {
            self.remove_key(attr.key());
        }
        self.attributes.insert(attr);
    }

    pub fn remove_key(&mut self, key: &str) {
        let stale: Vec<Attribute> = self.values_of(key).cloned().collect();
        for a in stale {
            self.attributes.remove(&a);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    /// Index within its class.
    pub id: usize,
    pub label: Label,
    pub tokens: Vec<Token>,
    pub raw_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorKind {
    BuiltinText,
    BuiltinLexicon,
    IngestedColumn,
}

/// How an attribute key is produced and how its values read in English.
///
/// Description templates substitute `{value}` and `{key}` (the lowercased
/// key). Built-in keys also use `{pos_name}`, `{sentiment}`, `{synset_word}`
/// and `{synset_pos}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeExtractorSpec {
    pub key: String,
    pub kind: ExtractorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<BTreeMap<String, String>>,
    pub description_template: String,
    #[serde(default)]
    pub multi_valued: bool,
}

pub const DEFAULT_TEMPLATE: &str = "a word with {key} '{value}'";

impl AttributeExtractorSpec {
    pub fn lexicon(
        key: &str,
        entries: BTreeMap<String, String>,
        template: Option<String>,
    ) -> Result<Self> {
        validate_key(key)?;
        let lexicon = entries
            .into_iter()
            .map(|(w, v)| (w.to_lowercase(), v))
            .collect();
        Ok(AttributeExtractorSpec {
            key: key.to_string(),
            kind: ExtractorKind::BuiltinLexicon,
            lexicon: Some(lexicon),
            description_template: template.unwrap_or_else(|| DEFAULT_TEMPLATE.to_string()),
            multi_valued: false,
        })
    }

    pub fn column(key: &str, template: Option<String>, multi_valued: bool) -> Result<Self> {
        validate_key(key)?;
        Ok(AttributeExtractorSpec {
            key: key.to_string(),
            kind: ExtractorKind::IngestedColumn,
            lexicon: None,
            description_template: template.unwrap_or_else(|| DEFAULT_TEMPLATE.to_string()),
            multi_valued,
        })
    }

    pub fn describe(&self, value: &str) -> String {
        render_template(&self.description_template, &self.key, value)
    }
}

fn validate_key(key: &str) -> Result<()> {
    if key.is_empty() || !key.chars().all(is_key_char) {
        return Err(Error::Config(format!("invalid attribute key `{key}`")));
    }
    Ok(())
}

fn render_template(template: &str, key: &str, value: &str) -> String {
    let mut out = template
        .replace("{key}", &key.to_lowercase())
        .replace("{value}", value);
    if out.contains("{pos_name}") {
        out = out.replace("{pos_name}", &pos_name(value));
    }
    if out.contains("{sentiment}") {
        let s = match value {
            "pos" => "positive",
            "neg" => "negative",
            other => other,
        };
        out = out.replace("{sentiment}", s);
    }
    if out.contains("{synset_") {
        // `communication.n.02` -> ("communication", "n")
        let mut parts = value.rsplitn(3, '.');
        let (word, pos) = match (parts.next(), parts.next(), parts.next()) {
            (Some(_sense), Some(pos), Some(word)) => (word, pos),
            _ => (value, "?"),
        };
        out = out
            .replace("{synset_word}", &word.replace('_', " "))
            .replace("{synset_pos}", pos);
    }
    out
}

fn pos_name(tag: &str) -> String {
    let name = match tag {
        "ADJ" => "an adjective",
        "ADP" => "a preposition",
        "ADV" => "an adverb",
        "AUX" => "an auxiliary verb",
        "CCONJ" | "CONJ" => "a coordinating conjunction",
        "DET" => "a determiner",
        "INTJ" => "an interjection",
        "NOUN" => "a noun",
        "NUM" => "a number",
        "PART" => "a particle",
        "PRON" => "a pronoun",
        "PROPN" => "a proper noun",
        "PUNCT" => "a punctuation mark",
        "SCONJ" => "a subordinating conjunction",
        "SYM" => "a symbol",
        "VERB" => "a verb",
        "SPACE" => "a space",
        "X" => "an unclassified word",
        other => return format!("a word tagged {other}"),
    };
    name.to_string()
}

/// Description templates and multi-valuedness per attribute key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeRegistry {
    specs: BTreeMap<String, AttributeExtractorSpec>,
}

impl AttributeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the standard keys.
    pub fn standard() -> Self {
        let mut reg = Self::new();
        let builtin = |key: &str, kind, template: &str, multi_valued| AttributeExtractorSpec {
            key: key.to_string(),
            kind,
            lexicon: None,
            description_template: template.to_string(),
            multi_valued,
        };
        use ExtractorKind::*;
        reg.register(builtin("TEXT", BuiltinText, "the word '{value}'", false));
        reg.register(builtin("LEMMA", IngestedColumn, "the word '{value}'", false));
        reg.register(builtin("POS", IngestedColumn, "{pos_name}", false));
        reg.register(builtin("NER", IngestedColumn, "a {value} entity", false));
        reg.register(builtin("DEP", IngestedColumn, "a word with dependency '{value}'", false));
        reg.register(builtin(
            "HYPERNYM",
            IngestedColumn,
            "a type of {synset_word} ({synset_pos})",
            true,
        ));
        reg.register(builtin(
            "SENTIMENT",
            IngestedColumn,
            "a {sentiment}-sentiment word",
            false,
        ));
        reg
    }

    /// Inserts or replaces the spec for `spec.key`.
    pub fn register(&mut self, spec: AttributeExtractorSpec) {
        self.specs.insert(spec.key.clone(), spec);
    }

    pub fn get(&self, key: &str) -> Option<&AttributeExtractorSpec> {
        self.specs.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.specs.contains_key(key)
    }

    pub fn is_multi_valued(&self, key: &str) -> bool {
        self.specs.get(key).is_some_and(|s| s.multi_valued)
    }

    pub fn describe(&self, attr: &Attribute) -> Result<String> {
        let spec = self
            .get(attr.key())
            .ok_or_else(|| Error::UnknownKey(attr.key().to_string()))?;
        Ok(spec.describe(attr.value()))
    }

    pub fn specs(&self) -> impl Iterator<Item = &AttributeExtractorSpec> {
        self.specs.values()
    }
}

/// Adds `spec.key:<value>` to every token whose lowercased surface is in the
/// lexicon. Misses are no-ops.
pub fn apply_lexicon_extractor(tokens: &mut [Token], spec: &AttributeExtractorSpec) {
    let Some(lexicon) = &spec.lexicon else {
        return;
    };
    for token in tokens.iter_mut() {
        if let Some(value) = lexicon.get(&token.surface.to_lowercase()) {
            if let Ok(attr) = Attribute::new(&spec.key, value) {
                token.set(attr, spec.multi_valued);
            }
        }
    }
}

/// Applies the configured extractors to ingested tokens.
#[derive(Debug, Clone)]
pub struct Augmenter {
    /// `None` keeps every ingested attribute and adds no `TEXT`.
    include_standard: Option<BTreeSet<String>>,
    lexicons: Vec<AttributeExtractorSpec>,
    multi_valued: BTreeSet<String>,
}

impl Augmenter {
    /// Keeps file contents exactly; `HYPERNYM` is the only multi-valued key.
    pub fn passthrough() -> Self {
        Augmenter {
            include_standard: None,
            lexicons: Vec::new(),
            multi_valued: ["HYPERNYM".to_string()].into(),
        }
    }

    pub fn new(
        include_standard: &BTreeSet<String>,
        lexicons: &[AttributeExtractorSpec],
        multi_valued: &BTreeSet<String>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for spec in lexicons {
            if !seen.insert(spec.key.as_str()) {
                return Err(Error::Config(format!(
                    "more than one extractor for key `{}`",
                    spec.key
                )));
            }
        }
        let mut multi = multi_valued.clone();
        multi.insert("HYPERNYM".to_string());
        multi.extend(
            lexicons
                .iter()
                .filter(|s| s.multi_valued)
                .map(|s| s.key.clone()),
        );
        Ok(Augmenter {
            include_standard: Some(include_standard.clone()),
            lexicons: lexicons.to_vec(),
            multi_valued: multi,
        })
    }

    pub fn is_multi_valued(&self, key: &str) -> bool {
        self.multi_valued.contains(key)
    }

    pub fn augment(&self, tokens: &mut [Token]) {
        if let Some(include) = &self.include_standard {
            for key in STANDARD_KEYS {
                if !include.contains(key) {
                    for t in tokens.iter_mut() {
                        t.remove_key(key);
                    }
                }
            }
            if include.contains("TEXT") {
                for t in tokens.iter_mut() {
                    if t.surface.is_empty() {
                        continue;
                    }
                    if let Ok(attr) = Attribute::new("TEXT", &t.surface.to_lowercase()) {
                        t.set(attr, false);
                    }
                }
            }
        }
        for spec in &self.lexicons {
            apply_lexicon_extractor(tokens, spec);
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordOut<'a> {
    text: &'a str,
    tokens: Vec<TokenOut<'a>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TokenOut<'a> {
    attrs: Vec<&'a str>,
    surface: &'a str,
}

#[derive(Debug, Deserialize)]
struct RecordIn {
    text: String,
    tokens: Vec<TokenIn>,
}

#[derive(Debug, Deserialize)]
struct TokenIn {
    surface: String,
    #[serde(default)]
    attrs: Vec<String>,
}

/// Result of reading a corpus file.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub examples: Vec<Example>,
    /// Records dropped because they had no tokens.
    pub skipped_empty: usize,
}

/// Reads the pre-tagged JSON-lines format: one `{"text", "tokens"}` record
/// per line, each token `{"surface", "attrs": ["KEY:value", ...]}`.
pub fn read_pretagged<R: BufRead>(reader: R, label: Label, aug: &Augmenter) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (lineno, line) in reader.lines().enumerate() {
        let record = lineno + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            record,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordIn = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            record,
            message: e.to_string(),
        })?;
        let mut tokens = Vec::with_capacity(rec.tokens.len());
        for t in rec.tokens {
            let mut token = Token::new(t.surface);
            for a in &t.attrs {
                let attr = Attribute::parse(a).map_err(|e| Error::MalformedRecord {
                    record,
                    message: e.to_string(),
                })?;
                let multi = aug.is_multi_valued(attr.key());
                token.insert(attr, multi).map_err(|e| Error::MalformedRecord {
                    record,
                    message: e.to_string(),
                })?;
            }
            tokens.push(token);
        }
        push_example(&mut out, label, tokens, rec.text, aug);
    }
    Ok(out)
}

/// Reads one plain-text example per line, split on whitespace.
pub fn read_raw<R: BufRead>(reader: R, label: Label, aug: &Augmenter) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::MalformedRecord {
            record: lineno + 1,
            message: e.to_string(),
        })?;
        let tokens = line.split_whitespace().map(Token::new).collect();
        push_example(&mut out, label, tokens, line, aug);
    }
    Ok(out)
}

fn push_example(out: &mut Ingested, label: Label, mut tokens: Vec<Token>, raw: String, aug: &Augmenter) {
    if tokens.is_empty() {
        out.skipped_empty += 1;
        return;
    }
    aug.augment(&mut tokens);
    out.examples.push(Example {
        id: out.examples.len(),
        label,
        tokens,
        raw_text: raw,
    });
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn warn_skipped(path: &Path, ingested: &Ingested) {
    if ingested.skipped_empty > 0 {
        log::warn!(
            "{}: skipped {} empty example(s)",
            path.display(),
            ingested.skipped_empty
        );
    }
}

pub fn ingest_pretagged(path: &Path, label: Label, aug: &Augmenter) -> Result<Vec<Example>> {
    let ingested = read_pretagged(open(path)?, label, aug)?;
    warn_skipped(path, &ingested);
    Ok(ingested.examples)
}

pub fn ingest_raw(path: &Path, label: Label, aug: &Augmenter) -> Result<Vec<Example>> {
    let ingested = read_raw(open(path)?, label, aug)?;
    warn_skipped(path, &ingested);
    Ok(ingested.examples)
}

/// Writes examples in the pre-tagged format with sorted keys and attributes.
pub fn write_pretagged<W: Write>(examples: &[Example], mut w: W) -> Result<()> {
    for ex in examples {
        let rec = RecordOut {
            text: &ex.raw_text,
            tokens: ex
                .tokens
                .iter()
                .map(|t| TokenOut {
                    attrs: t.attributes.iter().map(Attribute::as_str).collect(),
                    surface: &t.surface,
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

/// Reads a `word<TAB>value` lexicon; words are lowercased.
pub fn load_lexicon(path: &Path) -> Result<BTreeMap<String, String>> {
    read_lexicon(open(path)?)
}

pub fn read_lexicon<R: BufRead>(reader: R) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let record = lineno + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            record,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let (word, value) = line.split_once('\t').ok_or_else(|| Error::MalformedRecord {
            record,
            message: "expected `word<TAB>value`".to_string(),
        })?;
        let (word, value) = (word.trim(), value.trim());
        if word.is_empty() || value.is_empty() {
            return Err(Error::MalformedRecord {
                record,
                message: "empty word or value".to_string(),
            });
        }
        out.insert(word.to_lowercase(), value.to_string());
    }
    Ok(out)
}

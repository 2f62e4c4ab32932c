//! Miner configuration and the `key = value` configuration file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{load_lexicon, AttributeExtractorSpec, AttributeRegistry, Augmenter, STANDARD_KEYS};
use crate::error::{Error, Result};
use crate::matcher::Window;
use crate::metrics::MetricSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinerConfig {
    pub num_patterns: usize,
    pub alphabet_size: usize,
    pub max_slots: usize,
    /// When set, overrides `window_size` with `slots + gaps_allowed`.
    pub gaps_allowed: Option<usize>,
    pub window_size: usize,
    /// Minimum fraction of all training examples a pattern must match.
    pub min_coverage: f64,
    pub metric: MetricSpec,
    pub beam_width: usize,
    pub include_standard: BTreeSet<String>,
    pub custom_extractors: Vec<AttributeExtractorSpec>,
    /// Ingested custom keys that may carry several values per token.
    #[serde(default)]
    pub multi_valued: BTreeSet<String>,
    /// Description templates for ingested custom keys.
    #[serde(default)]
    pub descriptions: BTreeMap<String, String>,
    pub remove_redundant: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            num_patterns: 100,
            alphabet_size: 200,
            max_slots: 5,
            gaps_allowed: None,
            window_size: 10,
            min_coverage: 0.005,
            metric: MetricSpec::InformationGain,
            beam_width: 200,
            include_standard: STANDARD_KEYS.iter().map(|s| s.to_string()).collect(),
            custom_extractors: Vec::new(),
            multi_valued: BTreeSet::new(),
            descriptions: BTreeMap::new(),
            remove_redundant: true,
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_patterns == 0 {
            return fail("num_patterns must be at least 1".into());
        }
        if self.max_slots == 0 {
            return fail("max_slots must be at least 1".into());
        }
        if self.window_size == 0 {
            return fail("window_size must be at least 1".into());
        }
        if self.beam_width == 0 {
            return fail("beam_width must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return fail(format!("min_coverage must lie in [0, 1], got {}", self.min_coverage));
        }
        if let Some(k) = self.include_standard.iter().find(|k| !STANDARD_KEYS.contains(&k.as_str())) {
            return fail(format!("`{k}` is not a standard attribute (expected one of {STANDARD_KEYS:?})"));
        }
        if self.beam_width < self.num_patterns {
            log::warn!(
                "beam_width {} is smaller than num_patterns {}",
                self.beam_width,
                self.num_patterns
            );
        }
        self.augmenter().map(|_| ())
    }

    pub fn window(&self) -> Window {
        Window {
            gaps_allowed: self.gaps_allowed,
            window_size: self.window_size,
        }
    }

    pub fn augmenter(&self) -> Result<Augmenter> {
        Augmenter::new(&self.include_standard, &self.custom_extractors, &self.multi_valued)
    }

    /// Standard templates plus every configured extractor and description.
    pub fn registry(&self) -> AttributeRegistry {
        let mut reg = AttributeRegistry::standard();
        for (key, template) in &self.descriptions {
            let multi = self.multi_valued.contains(key);
            match reg.get(key).cloned() {
                Some(mut spec) => {
                    spec.description_template = template.clone();
                    reg.register(spec);
                }
                None => {
                    if let Ok(spec) = AttributeExtractorSpec::column(key, Some(template.clone()), multi) {
                        reg.register(spec);
                    }
                }
            }
        }
        for spec in &self.custom_extractors {
            let mut spec = spec.clone();
            if let Some(t) = self.descriptions.get(&spec.key) {
                spec.description_template = t.clone();
            }
            reg.register(spec);
        }
        reg
    }
}

/// Settings read from a configuration file or command-line flags, applied
/// on top of a [`MinerConfig`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub num_patterns: Option<usize>,
    pub alphabet_size: Option<usize>,
    pub max_slots: Option<usize>,
    pub gaps_allowed: Option<Option<usize>>,
    pub window_size: Option<usize>,
    pub min_coverage: Option<f64>,
    pub metric: Option<MetricSpec>,
    pub beam_width: Option<usize>,
    pub include_standard: Option<BTreeSet<String>>,
    pub remove_redundant: Option<bool>,
    /// `(key, lexicon file)`
    pub lexicons: Vec<(String, PathBuf)>,
    /// `(key, template)`
    pub descriptions: Vec<(String, String)>,
    pub multi_valued: Vec<String>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

/// Splits `KEY=rest` as used by `lexicon` and `describe`.
pub fn split_key_value(value: &str) -> Result<(String, String)> {
    let (k, v) = value
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{value}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

pub fn parse_key_list(value: &str) -> BTreeSet<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

impl ConfigOverrides {
    /// Parses `key = value` lines; `#` starts a comment line. Relative
    /// lexicon paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            o.set(key.trim(), value.trim(), base_dir)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(o)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<()> {
        match key {
            "num_patterns" => self.num_patterns = Some(parse_num(key, value)?),
            "alphabet_size" => self.alphabet_size = Some(parse_num(key, value)?),
            "max_slots" => self.max_slots = Some(parse_num(key, value)?),
            "gaps_allowed" => {
                self.gaps_allowed = Some(match value {
                    "" | "none" => None,
                    v => Some(parse_num(key, v)?),
                })
            }
            "window_size" => self.window_size = Some(parse_num(key, value)?),
            "min_coverage" => self.min_coverage = Some(parse_num(key, value)?),
            "metric" => self.metric = Some(value.parse()?),
            "beam_width" => self.beam_width = Some(parse_num(key, value)?),
            "include_standard" => self.include_standard = Some(parse_key_list(value)),
            "remove_redundant" => self.remove_redundant = Some(parse_num(key, value)?),
            "lexicon" => {
                let (k, path) = split_key_value(value)?;
                self.lexicons.push((k, base_dir.join(path)));
            }
            "describe" => self.descriptions.push(split_key_value(value)?),
            "multi_valued" => self.multi_valued.extend(parse_key_list(value)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies these settings, loading lexicon files.
    pub fn apply(&self, cfg: &mut MinerConfig) -> Result<()> {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { cfg.$f = v.clone(); } )* };
        }
        take!(
            num_patterns,
            alphabet_size,
            max_slots,
            gaps_allowed,
            window_size,
            min_coverage,
            metric,
            beam_width,
            include_standard,
            remove_redundant
        );
        cfg.multi_valued.extend(self.multi_valued.iter().cloned());
        for (key, template) in &self.descriptions {
            cfg.descriptions.insert(key.clone(), template.clone());
        }
        for (key, path) in &self.lexicons {
            let entries = load_lexicon(path)?;
            let template = cfg.descriptions.get(key).cloned();
            let mut spec = AttributeExtractorSpec::lexicon(key, entries, template)?;
            spec.multi_valued = cfg.multi_valued.contains(key);
            cfg.custom_extractors.retain(|s| s.key != spec.key);
            cfg.custom_extractors.push(spec);
        }
        cfg.custom_extractors.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(())
    }
}

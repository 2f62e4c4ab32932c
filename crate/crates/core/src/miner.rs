//! Alphabet selection and greedy beam growth of patterns.
//!
//! Candidate scoring runs on an interned copy of the corpus: every alphabet
//! attribute gets a bit, every token a bitmask, and a slot test is a masked
//! compare. Children are only evaluated on the examples their parent
//! matched, since appending a slot or adding an attribute can only shrink
//! the match set.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::config::MinerConfig;
use crate::corpus::{Attribute, Example, Label, Polarity};
use crate::error::{Error, Result};
use crate::matcher::{self, Pattern, Window};
use crate::metrics::{compare_rank, f_beta, precision, recall, symmetric_score, ContingencyCounts, MetricSpec, RankKey, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPattern<T = f64> {
    pub pattern: Pattern,
    pub score: T,
    pub polarity: Polarity,
    pub counts: ContingencyCounts,
    pub coverage: T,
    /// Precision, recall and F1 are taken with respect to `polarity`.
    pub precision: T,
    pub recall: T,
    pub f1: T,
    canonical: String,
}

impl<T: Scalar> ScoredPattern<T> {
    pub fn new(pattern: Pattern, counts: ContingencyCounts, metric: MetricSpec) -> Self {
        let (score, polarity) = symmetric_score::<T>(&counts, metric);
        Self::with_score(pattern, counts, score, polarity)
    }

    pub fn with_score(pattern: Pattern, counts: ContingencyCounts, score: T, polarity: Polarity) -> Self {
        let view = counts.for_class(polarity);
        ScoredPattern {
            canonical: pattern.to_string(),
            pattern,
            score,
            polarity,
            counts,
            coverage: counts.coverage(),
            precision: precision(&view),
            recall: recall(&view),
            f1: f_beta(&view, T::one()),
        }
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn rank_key(&self) -> RankKey<'_, T> {
        RankKey {
            score: self.score,
            matched: self.counts.matched(),
            slots: self.pattern.num_slots(),
            attributes: self.pattern.num_attributes(),
            canonical: &self.canonical,
        }
    }
}

/// Ranking order: see [`compare_rank`].
pub fn rank_compare<T: Scalar>(a: &ScoredPattern<T>, b: &ScoredPattern<T>) -> Ordering {
    compare_rank(&a.rank_key(), &b.rank_key())
}

fn class_totals(examples: &[Example]) -> (usize, usize) {
    let pos = examples.iter().filter(|e| e.label == Label::Positive).count();
    (pos, examples.len() - pos)
}

fn require_both_classes(examples: &[Example]) -> Result<(usize, usize)> {
    let (pos, neg) = class_totals(examples);
    if pos == 0 {
        return Err(Error::MissingClass("positive"));
    }
    if neg == 0 {
        return Err(Error::MissingClass("negative"));
    }
    Ok((pos, neg))
}

/// Scores one pattern by matching it against every example directly.
pub fn score_pattern<T: Scalar>(pattern: &Pattern, examples: &[Example], window: &Window, metric: MetricSpec) -> ScoredPattern<T> {
    let (total_pos, total_neg) = class_totals(examples);
    let mut counts = ContingencyCounts {
        matched_pos: 0,
        matched_neg: 0,
        total_pos,
        total_neg,
    };
    for ex in examples {
        if matcher::matches(pattern, &ex.tokens, window) {
            match ex.label {
                Label::Positive => counts.matched_pos += 1,
                Label::Negative => counts.matched_neg += 1,
            }
        }
    }
    ScoredPattern::new(pattern.clone(), counts, metric)
}

fn below_min_coverage(matched: usize, total: usize, min_coverage: f64) -> bool {
    (matched as f64) / (total as f64) < min_coverage
}

/// Single attributes scored by their example-level presence, filtered by
/// `min_coverage`, best `alphabet_size` first.
pub fn scored_alphabet<T: Scalar>(examples: &[Example], cfg: &MinerConfig) -> Result<Vec<ScoredPattern<T>>> {
    let (total_pos, total_neg) = require_both_classes(examples)?;
    let mut presence: BTreeMap<&Attribute, (usize, usize)> = BTreeMap::new();
    for ex in examples {
        let mut seen = HashSet::new();
        for attr in ex.tokens.iter().flat_map(|t| t.attributes()) {
            if seen.insert(attr) {
                let e = presence.entry(attr).or_default();
                match ex.label {
                    Label::Positive => e.0 += 1,
                    Label::Negative => e.1 += 1,
                }
            }
        }
    }
    let total = total_pos + total_neg;
    let mut scored: Vec<ScoredPattern<T>> = presence
        .into_iter()
        .filter(|(_, (p, n))| !below_min_coverage(p + n, total, cfg.min_coverage))
        .map(|(attr, (p, n))| {
            let counts = ContingencyCounts {
                matched_pos: p,
                matched_neg: n,
                total_pos,
                total_neg,
            };
            ScoredPattern::new(Pattern::single(attr.clone()), counts, cfg.metric)
        })
        .collect();
    scored.sort_by(rank_compare);
    scored.truncate(cfg.alphabet_size);
    Ok(scored)
}

pub fn build_alphabet(examples: &[Example], cfg: &MinerConfig) -> Result<Vec<Attribute>> {
    Ok(scored_alphabet::<f64>(examples, cfg)?
        .into_iter()
        .map(|sp| sp.pattern.attributes().next().cloned().expect("single-slot pattern"))
        .collect())
}

/// Corpus with attributes interned as bit positions.
struct Index {
    words: usize,
    /// Sorted, so ascending ids follow canonical string order.
    attrs: Vec<Attribute>,
    examples: Vec<IndexedExample>,
    total_pos: usize,
    total_neg: usize,
}

struct IndexedExample {
    positive: bool,
    len: usize,
    masks: Vec<u64>,
}

type IdSlots = Vec<Vec<u32>>;

impl Index {
    fn new(attrs: impl IntoIterator<Item = Attribute>, examples: &[Example]) -> Self {
        let mut attrs: Vec<Attribute> = attrs.into_iter().collect();
        attrs.sort();
        attrs.dedup();
        let words = attrs.len().div_ceil(64).max(1);
        let (total_pos, total_neg) = class_totals(examples);
        let indexed = examples
            .iter()
            .map(|ex| {
                let mut masks = vec![0u64; ex.tokens.len() * words];
                for (t, token) in ex.tokens.iter().enumerate() {
                    for a in token.attributes() {
                        if let Ok(id) = attrs.binary_search(a) {
                            masks[t * words + id / 64] |= 1 << (id % 64);
                        }
                    }
                }
                IndexedExample {
                    positive: ex.label == Label::Positive,
                    len: ex.tokens.len(),
                    masks,
                }
            })
            .collect();
        Index {
            words,
            attrs,
            examples: indexed,
            total_pos,
            total_neg,
        }
    }

    fn id(&self, a: &Attribute) -> u32 {
        self.attrs.binary_search(a).expect("attribute is indexed") as u32
    }

    fn ids(&self, p: &Pattern) -> IdSlots {
        p.slots()
            .iter()
            .map(|s| s.iter().map(|a| self.id(a)).collect())
            .collect()
    }

    fn pattern(&self, slots: &IdSlots) -> Pattern {
        Pattern::new(
            slots
                .iter()
                .map(|s| s.iter().map(|&i| self.attrs[i as usize].clone()).collect())
                .collect(),
        )
        .expect("non-empty slots")
    }

    fn canonical(&self, slots: &IdSlots) -> String {
        let mut out = String::from("[");
        for (i, slot) in slots.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            for (j, &id) in slot.iter().enumerate() {
                if j > 0 {
                    out.push('&');
                }
                out.push_str(self.attrs[id as usize].as_str());
            }
        }
        out.push(']');
        out
    }

    /// Examples matched by `slots`, restricted to `within` when given.
    fn matching(&self, slots: &IdSlots, window: usize, within: Option<&[u32]>) -> Vec<u32> {
        let w = self.words;
        let mut masks = vec![0u64; slots.len() * w];
        for (s, slot) in slots.iter().enumerate() {
            for &id in slot {
                masks[s * w + id as usize / 64] |= 1 << (id % 64);
            }
        }
        let k = slots.len();
        let test_example = |e: u32| {
            let ex = &self.examples[e as usize];
            matcher::occurs(k, ex.len, window, |s, t| {
                let sm = &masks[s * w..(s + 1) * w];
                let tm = &ex.masks[t * w..(t + 1) * w];
                sm.iter().zip(tm).all(|(a, b)| b & a == *a)
            })
        };
        match within {
            Some(ids) => ids.iter().copied().filter(|&e| test_example(e)).collect(),
            None => (0..self.examples.len() as u32).filter(|&e| test_example(e)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct Cand<T> {
    slots: IdSlots,
    canonical: String,
    attributes: usize,
    counts: ContingencyCounts,
    score: T,
    polarity: Polarity,
    matched: Vec<u32>,
}

impl<T: Scalar> Cand<T> {
    fn key(&self) -> RankKey<'_, T> {
        RankKey {
            score: self.score,
            matched: self.counts.matched(),
            slots: self.slots.len(),
            attributes: self.attributes,
            canonical: &self.canonical,
        }
    }

    fn without_matches(&self) -> Self {
        Cand {
            slots: self.slots.clone(),
            canonical: self.canonical.clone(),
            attributes: self.attributes,
            counts: self.counts,
            score: self.score,
            polarity: self.polarity,
            matched: Vec::new(),
        }
    }
}

fn cand_cmp<T: Scalar>(a: &Cand<T>, b: &Cand<T>) -> Ordering {
    compare_rank(&a.key(), &b.key())
}

struct Engine<'a> {
    index: &'a Index,
    cfg: &'a MinerConfig,
    window: Window,
    alphabet: Vec<u32>,
    seen: HashSet<IdSlots>,
}

impl<'a> Engine<'a> {
    fn new(index: &'a Index, cfg: &'a MinerConfig, alphabet: &[Attribute]) -> Self {
        Engine {
            index,
            cfg,
            window: cfg.window(),
            alphabet: alphabet.iter().map(|a| index.id(a)).collect(),
            seen: HashSet::new(),
        }
    }

    /// Scores `slots`; `None` when below `min_coverage`.
    fn evaluate<T: Scalar>(&self, slots: IdSlots, within: Option<&[u32]>) -> Option<Cand<T>> {
        let idx = self.index;
        let matched = idx.matching(&slots, self.window.for_slots(slots.len()), within);
        let total = idx.total_pos + idx.total_neg;
        if below_min_coverage(matched.len(), total, self.cfg.min_coverage) {
            return None;
        }
        let matched_pos = matched.iter().filter(|&&e| idx.examples[e as usize].positive).count();
        let counts = ContingencyCounts {
            matched_pos,
            matched_neg: matched.len() - matched_pos,
            total_pos: idx.total_pos,
            total_neg: idx.total_neg,
        };
        let (score, polarity) = symmetric_score::<T>(&counts, self.cfg.metric);
        Some(Cand {
            canonical: idx.canonical(&slots),
            attributes: slots.iter().map(Vec::len).sum(),
            slots,
            counts,
            score,
            polarity,
            matched,
        })
    }

    /// Scored children of `beam` that were not seen before and pass
    /// `min_coverage`, in generation order.
    fn children<T: Scalar>(&mut self, beam: &[Cand<T>]) -> Vec<Cand<T>> {
        let mut todo: Vec<(usize, IdSlots)> = Vec::new();
        for (parent_idx, parent) in beam.iter().enumerate() {
            for &a in &self.alphabet {
                if parent.slots.len() < self.cfg.max_slots {
                    let mut child = parent.slots.clone();
                    child.push(vec![a]);
                    if self.seen.insert(child.clone()) {
                        todo.push((parent_idx, child));
                    }
                }
                for s in 0..parent.slots.len() {
                    let slot = &parent.slots[s];
                    let Err(at) = slot.binary_search(&a) else {
                        continue;
                    };
                    let mut child = parent.slots.clone();
                    child[s].insert(at, a);
                    if self.seen.insert(child.clone()) {
                        todo.push((parent_idx, child));
                    }
                }
            }
        }
        todo.into_par_iter()
            .filter_map(|(p, slots)| self.evaluate(slots, Some(&beam[p].matched)))
            .collect()
    }

    /// One growth step: seeds and their surviving children, best
    /// `beam_width` kept. Also returns the children.
    fn step<T: Scalar>(&mut self, beam: Vec<Cand<T>>) -> (Vec<Cand<T>>, Vec<Cand<T>>) {
        let children = self.children(&beam);
        let mut next = beam;
        next.extend(children.iter().cloned());
        next.sort_by(cand_cmp);
        next.truncate(self.cfg.beam_width);
        (next, children)
    }
}

fn to_scored<T: Scalar>(index: &Index, c: &Cand<T>) -> ScoredPattern<T> {
    ScoredPattern::with_score(index.pattern(&c.slots), c.counts, c.score, c.polarity)
}

/// One growth step from `seed`: every seed with each alphabet attribute
/// appended as a new slot or added to an existing slot. Returns seeds plus
/// surviving children, ranked and cut to `beam_width`.
pub fn grow<T: Scalar>(seed: &[ScoredPattern<T>], alphabet: &[Attribute], examples: &[Example], cfg: &MinerConfig) -> Vec<ScoredPattern<T>> {
    let attrs = alphabet
        .iter()
        .cloned()
        .chain(seed.iter().flat_map(|s| s.pattern.attributes().cloned()));
    let index = Index::new(attrs, examples);
    let mut engine = Engine::new(&index, cfg, alphabet);
    let total = index.total_pos + index.total_neg;
    let beam: Vec<Cand<T>> = seed
        .iter()
        .map(|sp| {
            let slots = index.ids(&sp.pattern);
            engine.seen.insert(slots.clone());
            let matched = index.matching(&slots, engine.window.for_slots(slots.len()), None);
            Cand {
                canonical: sp.canonical.clone(),
                attributes: sp.pattern.num_attributes(),
                slots,
                counts: sp.counts,
                score: sp.score,
                polarity: sp.polarity,
                matched,
            }
        })
        .collect();
    debug_assert!(total > 0 || beam.is_empty());
    let (next, _) = engine.step(beam);
    next.iter().map(|c| to_scored(&index, c)).collect()
}

/// Outcome of a mining run.
#[derive(Debug, Clone)]
pub struct Mined<T = f64> {
    pub alphabet: Vec<Attribute>,
    /// Final patterns in rank order.
    pub patterns: Vec<ScoredPattern<T>>,
    /// Growth steps performed.
    pub iterations: usize,
    /// Distinct patterns scored and above `min_coverage`.
    pub pool_size: usize,
}

/// Alphabet selection, beam growth, redundancy removal and final cut.
/// `examples` must already be augmented.
pub fn mine<T: Scalar>(examples: &[Example], cfg: &MinerConfig) -> Result<Mined<T>> {
    cfg.validate()?;
    require_both_classes(examples)?;
    let alphabet: Vec<Attribute> = scored_alphabet::<T>(examples, cfg)?
        .into_iter()
        .map(|sp| sp.pattern.attributes().next().cloned().expect("single-slot pattern"))
        .collect();
    if alphabet.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let index = Index::new(alphabet.iter().cloned(), examples);
    let mut engine = Engine::new(&index, cfg, &alphabet);

    let mut beam: Vec<Cand<T>> = Vec::new();
    for &a in &engine.alphabet {
        let slots = vec![vec![a]];
        engine.seen.insert(slots.clone());
        if let Some(c) = engine.evaluate(slots, None) {
            beam.push(c);
        }
    }
    beam.sort_by(cand_cmp);
    beam.truncate(cfg.beam_width);
    let mut pool: Vec<Cand<T>> = beam.iter().map(Cand::without_matches).collect();

    let mut iterations = 0;
    for _ in 1..cfg.max_slots.max(1) {
        let frontier = if pool.len() >= cfg.num_patterns {
            let k = cfg.num_patterns - 1;
            pool.select_nth_unstable_by(k, cand_cmp);
            Some(pool[k].clone())
        } else {
            None
        };
        let (next, children) = engine.step(beam);
        beam = next;
        iterations += 1;
        let improved = children
            .iter()
            .any(|c| frontier.as_ref().is_none_or(|f| cand_cmp(c, f) == Ordering::Less));
        pool.extend(children.iter().map(Cand::without_matches));
        log::debug!("step {iterations}: {} new patterns, pool {}", children.len(), pool.len());
        if !improved {
            break;
        }
    }

    pool.sort_by(cand_cmp);
    let pool_size = pool.len();
    let window = cfg.window();
    let mut kept: Vec<&Cand<T>> = Vec::with_capacity(cfg.num_patterns);
    for c in &pool {
        if kept.len() == cfg.num_patterns {
            break;
        }
        if cfg.remove_redundant && kept.iter().any(|g| g.score > c.score && ids_subsume(&g.slots, &c.slots, &window)) {
            continue;
        }
        kept.push(c);
    }
    Ok(Mined {
        alphabet,
        patterns: kept.into_iter().map(|c| to_scored(&index, c)).collect(),
        iterations,
        pool_size,
    })
}

fn sorted_subset(a: &[u32], b: &[u32]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

fn ids_subsume(general: &IdSlots, specific: &IdSlots, window: &Window) -> bool {
    matcher::subsumes_by(
        general.len(),
        specific.len(),
        window.for_slots(general.len()),
        window.for_slots(specific.len()),
        |g, s| sorted_subset(&general[g], &specific[s]),
    )
}

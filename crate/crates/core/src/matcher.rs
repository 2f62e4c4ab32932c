//! Patterns over attribute-augmented tokens and window-constrained
//! subsequence matching.
//!
//! A pattern is an ordered list of slots; a slot is a set of attributes a
//! single token must all carry. A pattern with `k` slots matches a token
//! sequence when there are indices `i1 < ... < ik` whose tokens satisfy the
//! slots in order and `ik - i1 + 1` fits in the effective window.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_key_char, Attribute, Token};
use crate::error::{Error, Result};

/// Window length in tokens: `num_slots + gaps` when gaps are configured,
/// otherwise the fixed window size.
pub fn effective_window(num_slots: usize, gaps_allowed: Option<usize>, window_size: usize) -> usize {
    match gaps_allowed {
        Some(g) => num_slots + g,
        None => window_size,
    }
}

/// Gap/window configuration shared by every pattern of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub gaps_allowed: Option<usize>,
    pub window_size: usize,
}

impl Window {
    pub fn gaps(g: usize) -> Self {
        Window {
            gaps_allowed: Some(g),
            window_size: 10,
        }
    }

    pub fn fixed(window_size: usize) -> Self {
        Window {
            gaps_allowed: None,
            window_size,
        }
    }

    pub fn for_slots(&self, num_slots: usize) -> usize {
        effective_window(num_slots, self.gaps_allowed, self.window_size)
    }
}

pub type Slot = BTreeSet<Attribute>;

/// An ordered, non-empty list of non-empty slots.
///
/// Canonical string: `[A:x&B:y, C:z]`: slots separated by `, `, in-slot
/// attributes sorted and joined by `&`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pattern {
    slots: Vec<Slot>,
}

impl Pattern {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() || slots.iter().any(BTreeSet::is_empty) {
            let p = Pattern { slots };
            return Err(Error::InvalidPattern {
                text: p.to_string(),
                reason: "patterns and slots must be non-empty".to_string(),
            });
        }
        Ok(Pattern { slots })
    }

    pub fn single(attr: Attribute) -> Self {
        Pattern {
            slots: vec![BTreeSet::from([attr])],
        }
    }

    /// Parses the canonical string; attribute order inside a slot is free.
    pub fn parse(text: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidPattern {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let body = text
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| invalid("expected `[...]`"))?;
        let mut slots = Vec::new();
        for slot_text in split_before_attr(body, ", ") {
            let mut slot = BTreeSet::new();
            for attr_text in split_before_attr(slot_text, "&") {
                let attr = Attribute::parse(attr_text).map_err(|e| invalid(&e.to_string()))?;
                slot.insert(attr);
            }
            slots.push(slot);
        }
        Pattern::new(slots).map_err(|_| invalid("empty pattern or slot"))
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn num_attributes(&self) -> usize {
        self.slots.iter().map(BTreeSet::len).sum()
    }

    pub fn attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.slots.iter().flatten()
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// `self` with a new last slot `{attr}`.
    pub fn appended(&self, attr: Attribute) -> Pattern {
        let mut slots = self.slots.clone();
        slots.push(BTreeSet::from([attr]));
        Pattern { slots }
    }

    /// `self` with `attr` added to slot `index`; `None` if already present.
    pub fn with_slot_extended(&self, index: usize, attr: Attribute) -> Option<Pattern> {
        if self.slots[index].contains(&attr) {
            return None;
        }
        let mut slots = self.slots.clone();
        slots[index].insert(attr);
        Some(Pattern { slots })
    }

    pub fn window(&self, window: &Window) -> usize {
        window.for_slots(self.num_slots())
    }
}

/// Splits at `sep` only where the following text starts with `KEY:`.
fn split_before_attr<'a>(s: &'a str, sep: &str) -> Vec<&'a str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut from = 0;
    while let Some(off) = s[from..].find(sep) {
        let at = from + off;
        let rest = &s[at + sep.len()..];
        let key_len = rest.find(|c: char| !is_key_char(c)).unwrap_or(rest.len());
        if key_len > 0 && rest[key_len..].starts_with(':') {
            parts.push(&s[start..at]);
            start = at + sep.len();
        }
        from = at + sep.len();
    }
    parts.push(&s[start..]);
    parts
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            for (j, attr) in slot.iter().enumerate() {
                if j > 0 {
                    f.write_str("&")?;
                }
                f.write_str(attr.as_str())?;
            }
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({self})")
    }
}

impl FromStr for Pattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Pattern::parse(s)
    }
}

impl TryFrom<String> for Pattern {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Pattern::parse(&s)
    }
}

impl From<Pattern> for String {
    fn from(p: Pattern) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched: bool,
    /// One token index per slot, strictly increasing.
    pub occurrences: Vec<Vec<usize>>,
}

/// Leftmost-greedy completion from `start`: each further slot takes the
/// earliest feasible token inside the window. Earliest choices minimise the
/// end index, so this succeeds iff any occurrence begins at `start`.
pub(crate) fn greedy_from<F>(
    num_slots: usize,
    len: usize,
    window: usize,
    start: usize,
    test: &F,
    out: Option<&mut Vec<usize>>,
) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    let limit = len.min(start + window);
    let mut pos = start;
    let mut out = out;
    if let Some(o) = out.as_deref_mut() {
        o.clear();
        o.push(start);
    }
    for slot in 1..num_slots {
        match (pos + 1..limit).find(|&t| test(slot, t)) {
            Some(t) => {
                pos = t;
                if let Some(o) = out.as_deref_mut() {
                    o.push(t);
                }
            }
            None => return false,
        }
    }
    true
}

/// Match predicate over an abstract `test(slot, token)`.
pub(crate) fn occurs<F>(num_slots: usize, len: usize, window: usize, test: F) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    if num_slots == 0 || num_slots > window {
        return false;
    }
    (0..len).any(|i| test(0, i) && greedy_from(num_slots, len, window, i, &test, None))
}

pub(crate) fn occurrences<F>(num_slots: usize, len: usize, window: usize, test: F) -> Vec<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    let mut found: Vec<Vec<usize>> = Vec::new();
    if num_slots == 0 || num_slots > window {
        return found;
    }
    let mut buf = Vec::with_capacity(num_slots);
    for i in 0..len {
        if test(0, i) && greedy_from(num_slots, len, window, i, &test, Some(&mut buf)) && found.last() != Some(&buf) {
            found.push(buf.clone());
        }
    }
    found
}

fn slot_test<'a>(p: &'a Pattern, tokens: &'a [Token]) -> impl Fn(usize, usize) -> bool + 'a {
    move |slot, tok| p.slots[slot].iter().all(|a| tokens[tok].contains(a))
}

/// Whether `p` occurs anywhere in `tokens`.
pub fn matches(p: &Pattern, tokens: &[Token], window: &Window) -> bool {
    occurs(p.num_slots(), tokens.len(), p.window(window), slot_test(p, tokens))
}

/// Match predicate plus every leftmost-greedy occurrence, scanning start
/// positions left to right.
pub fn match_pattern(p: &Pattern, tokens: &[Token], window: &Window) -> MatchResult {
    let occurrences = occurrences(p.num_slots(), tokens.len(), p.window(window), slot_test(p, tokens));
    MatchResult {
        matched: !occurrences.is_empty(),
        occurrences,
    }
}

/// Syntactic subsumption over an abstract `subset(general_slot,
/// specific_slot)` relation.
///
/// Needs an order-preserving embedding `j1 < ... < jk` of the general slots
/// into the specific ones, with slot-wise subsets, such that the general
/// window still covers the stretch of a specific match from `j1` to `jk`:
/// `w_general >= w_specific - k_specific + (jk - j1 + 1)`.
pub(crate) fn subsumes_by<F>(
    general_slots: usize,
    specific_slots: usize,
    general_window: usize,
    specific_window: usize,
    subset: F,
) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    if general_slots == 0 || general_slots > specific_slots {
        return false;
    }
    for first in 0..specific_slots {
        if !subset(0, first) {
            continue;
        }
        let mut pos = first;
        let mut ok = true;
        for g in 1..general_slots {
            match (pos + 1..specific_slots).find(|&j| subset(g, j)) {
                Some(j) => pos = j,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            // later starts leave even less room
            return false;
        }
        let stretch = pos - first + 1;
        if general_window + specific_slots >= specific_window + stretch {
            return true;
        }
    }
    false
}

/// True when every match of `specific` contains a match of `general`.
pub fn subsumes(general: &Pattern, specific: &Pattern, window: &Window) -> bool {
    subsumes_by(
        general.num_slots(),
        specific.num_slots(),
        general.window(window),
        specific.window(window),
        |g, s| general.slots[g].is_subset(&specific.slots[s]),
    )
}

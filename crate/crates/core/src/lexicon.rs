//! Lexicon-based document and firm-day scoring.
//!
//! Two lexicon kinds coexist: a calibrated score map (word -> real weight)
//! produced by [`crate::calibrate`], and a static positive/negative word list.
//! Scores attach to stemmed words, so callers must clean text first.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ToneError {
    /// No word of the document appears in the lexicon; the document has no
    /// defined tone and is treated as tone-missing upstream.
    NoScoredWords,
    NoDocuments,
}

impl core::fmt::Display for ToneError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ToneError::NoScoredWords => write!(f, "document contains no scored word"),
            ToneError::NoDocuments => write!(f, "no documents for this firm-day"),
        }
    }
}

/// Per-document tone: the score-weighted relative frequency of lexicon words,
/// with the full token count as denominator. Unscored words contribute zero
/// weight but still count in the denominator.
pub fn doc_tone(tokens: &[String], scores: &BTreeMap<String, f64>) -> Result<f64, ToneError> {
    if tokens.is_empty() {
        return Err(ToneError::NoScoredWords);
    }
    let mut sum = 0.0;
    let mut hits = 0usize;
    for t in tokens {
        if let Some(&z) = scores.get(t) {
            sum += z;
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(ToneError::NoScoredWords);
    }
    Ok(sum / tokens.len() as f64)
}

/// Firm-day tone: score-weighted average term frequency across the day's
/// documents. Aggregates the per-word average frequencies first, which is
/// numerically (to rounding) and algebraically the mean of the per-document
/// tones.
///
/// Every document must itself be scoreable; callers drop tone-missing
/// documents before aggregation.
pub fn daily_tone(
    docs: &[&[String]],
    scores: &BTreeMap<String, f64>,
) -> Result<f64, ToneError> {
    if docs.is_empty() {
        return Err(ToneError::NoDocuments);
    }
    let d = docs.len() as f64;
    let mut avg_freq: BTreeMap<&str, f64> = BTreeMap::new();
    for tokens in docs {
        if tokens.is_empty() {
            return Err(ToneError::NoScoredWords);
        }
        let n = tokens.len() as f64;
        let mut hits = 0usize;
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for t in tokens.iter() {
            if scores.contains_key(t.as_str()) {
                *counts.entry(t.as_str()).or_insert(0) += 1;
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(ToneError::NoScoredWords);
        }
        for (w, c) in counts {
            *avg_freq.entry(w).or_insert(0.0) += c as f64 / n / d;
        }
    }
    Ok(avg_freq
        .iter()
        .map(|(w, f)| scores[*w] * f)
        .sum())
}

/// Static positive/negative lexicon; the two sets are disjoint.
#[derive(Clone, Debug, Default)]
pub struct StaticLexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl StaticLexicon {
    /// Builds the lexicon from (already stemmed) word sets. Words landing in
    /// both sets after stemming are dropped from both and reported so the
    /// caller can log them.
    pub fn new(positive: BTreeSet<String>, negative: BTreeSet<String>) -> (Self, Vec<String>) {
        let conflicts: Vec<String> = positive.intersection(&negative).cloned().collect();
        let mut lex = StaticLexicon { positive, negative };
        for w in &conflicts {
            lex.positive.remove(w);
            lex.negative.remove(w);
        }
        (lex, conflicts)
    }

    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }
}

/// Net positive-minus-negative hits over the token count; 0 without hits.
pub fn lm_tone(tokens: &[String], lex: &StaticLexicon) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let mut net = 0i64;
    for t in tokens {
        if lex.positive.contains(t) {
            net += 1;
        } else if lex.negative.contains(t) {
            net -= 1;
        }
    }
    net as f64 / tokens.len() as f64
}

/// Words whose distinct-day occurrence count reaches the threshold, sorted.
pub fn filter_vocab(day_counts: &BTreeMap<String, usize>, min_days: usize) -> Vec<String> {
    day_counts
        .iter()
        .filter(|(_, &c)| c >= min_days)
        .map(|(w, _)| w.clone())
        .collect()
}

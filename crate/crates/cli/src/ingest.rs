//! Corpus ingestion: screens, near-duplicate removal, classification.

use std::collections::BTreeMap;
use std::path::Path;

use tonestudy_core::dedup::{dedup_block, DedupConfig};
use tonestudy_core::text::{clean_text, digit_char_ratio, distinct_token_ratio};

use crate::classify::classify;
use crate::config::StudyConfig;
use crate::csvio;
use crate::dates::parse_timestamp;
use crate::doc::{read_raw_jsonl, write_clean_jsonl, CleanDoc, RawDoc};
use crate::{CliError, Result};

pub const REJECTION_RULES: [&str; 9] = [
    "malformed",
    "min_words",
    "multi_firm",
    "relevance",
    "source_type",
    "excluded_tag",
    "digit_ratio",
    "distinct_ratio",
    "duplicate",
];

#[derive(Clone, Debug, Default)]
pub struct IngestStats {
    pub input: usize,
    pub retained: usize,
    pub rejections: BTreeMap<&'static str, usize>,
}

impl IngestStats {
    fn bump(&mut self, rule: &'static str) {
        *self.rejections.entry(rule).or_insert(0) += 1;
    }

    pub fn rejected_total(&self) -> usize {
        self.rejections.values().sum()
    }
}

struct Candidate {
    doc: RawDoc,
    tokens: Vec<String>,
    day: i32,
    seconds: u32,
}

/// First screen that fires owns the document; `None` means it survives.
fn screen(doc: &RawDoc, tokens: &[String], cfg: &StudyConfig) -> Option<&'static str> {
    if tokens.len() < cfg.min_words {
        return Some("min_words");
    }
    if doc.major_firm_count > cfg.max_major_firms {
        return Some("multi_firm");
    }
    if doc.relevance < cfg.min_relevance {
        return Some("relevance");
    }
    if !cfg.allowed_sources.iter().any(|s| s == &doc.source_type) {
        return Some("source_type");
    }
    if doc.tags.iter().any(|t| {
        let t = t.to_lowercase();
        cfg.excluded_tags.iter().any(|x| x.to_lowercase() == t)
    }) {
        return Some("excluded_tag");
    }
    if digit_char_ratio(&doc.raw_text) > cfg.max_digit_ratio {
        return Some("digit_ratio");
    }
    if distinct_token_ratio(tokens) < cfg.min_distinct_ratio {
        return Some("distinct_ratio");
    }
    None
}

pub fn run_ingest(
    input: &Path,
    output: &Path,
    stats_out: Option<&Path>,
    cfg: &StudyConfig,
) -> Result<IngestStats> {
    let rows = read_raw_jsonl(input)?;
    let mut stats = IngestStats { input: rows.len(), ..Default::default() };

    let mut candidates: Vec<Candidate> = Vec::new();
    for row in rows {
        let doc = match row {
            Ok(d) => d,
            Err(_) => {
                stats.bump("malformed");
                continue;
            }
        };
        let (day, seconds) = match parse_timestamp(&doc.timestamp) {
            Ok(t) => t,
            Err(_) => {
                stats.bump("malformed");
                continue;
            }
        };
        if !(0.0..=100.0).contains(&doc.relevance) {
            stats.bump("malformed");
            continue;
        }
        let tokens = clean_text(&doc.raw_text);
        match screen(&doc, &tokens, cfg) {
            Some(rule) => stats.bump(rule),
            None => candidates.push(Candidate { doc, tokens, day, seconds }),
        }
    }

    // Earliest-wins near-duplicate removal within each (firm, day) block.
    candidates.sort_by(|a, b| {
        (a.day, a.seconds, &a.doc.doc_id).cmp(&(b.day, b.seconds, &b.doc.doc_id))
    });
    let dedup_cfg = DedupConfig { threshold: cfg.dedup_threshold, ..DedupConfig::default() };
    let mut blocks: BTreeMap<(String, i32), Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        blocks.entry((c.doc.firm_id.clone(), c.day)).or_default().push(i);
    }
    let mut dropped = vec![false; candidates.len()];
    for idx in blocks.values() {
        let docs: Vec<Vec<String>> = idx.iter().map(|&i| candidates[i].tokens.clone()).collect();
        for (pos, owner) in dedup_block(&docs, &dedup_cfg).iter().enumerate() {
            if owner.is_some() {
                dropped[idx[pos]] = true;
            }
        }
    }

    let mut retained: Vec<CleanDoc> = Vec::new();
    for (i, c) in candidates.into_iter().enumerate() {
        if dropped[i] {
            stats.bump("duplicate");
            continue;
        }
        let (class, rule_trace) = classify(&c.doc, cfg);
        retained.push(CleanDoc {
            doc_id: c.doc.doc_id,
            firm_id: c.doc.firm_id,
            timestamp: c.doc.timestamp,
            source_type: c.doc.source_type,
            relevance: c.doc.relevance,
            tags: c.doc.tags,
            major_firm_count: c.doc.major_firm_count,
            raw_text: c.doc.raw_text,
            tokens: c.tokens,
            class: class.into(),
            rule_trace,
        });
    }
    stats.retained = retained.len();
    if stats.retained + stats.rejected_total() != stats.input {
        return Err(CliError::validation("attrition accounting out of balance"));
    }

    write_clean_jsonl(output, &retained)?;
    if let Some(path) = stats_out {
        write_stats(path, &stats)?;
    }
    Ok(stats)
}

pub fn write_stats(path: &Path, stats: &IngestStats) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Row<'a> {
        rule: &'a str,
        count: usize,
    }
    let mut rows = vec![
        Row { rule: "input", count: stats.input },
        Row { rule: "retained", count: stats.retained },
    ];
    for rule in REJECTION_RULES {
        rows.push(Row { rule, count: stats.rejections.get(rule).copied().unwrap_or(0) });
    }
    csvio::write_csv(path, &rows)
}

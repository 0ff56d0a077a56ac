//! Document classification: earnings press releases, call transcripts, news.

use std::collections::BTreeSet;

use crate::config::StudyConfig;
use crate::doc::{CLASS_NEWS, CLASS_PRESS_RELEASE, CLASS_TRANSCRIPT, RawDoc, SOURCE_NEWSWIRE};

/// Classifies one document. A `transcript` tag wins over the press-release
/// rule; everything else is news. Returns the class and the rules that fired.
pub fn classify(doc: &RawDoc, cfg: &StudyConfig) -> (&'static str, Vec<String>) {
    let tags_lower: Vec<String> = doc.tags.iter().map(|t| t.to_lowercase()).collect();
    if tags_lower.iter().any(|t| t == "transcript") {
        return (CLASS_TRANSCRIPT, vec!["tag:transcript".into()]);
    }
    if doc.source_type == SOURCE_NEWSWIRE {
        let matched = cfg
            .press_release_tags
            .iter()
            .find(|pr| tags_lower.iter().any(|t| t == &pr.to_lowercase()));
        if let Some(tag) = matched {
            let text = doc.raw_text.to_lowercase();
            if text.contains("contact") {
                if let Some(neg) = cfg.negative_keywords.iter().find(|k| text.contains(&k.to_lowercase())) {
                    return (CLASS_NEWS, vec![format!("negative:{neg}")]);
                }
                return (
                    CLASS_PRESS_RELEASE,
                    vec!["source:newswire".into(), format!("tag:{tag}"), "text:contact".into()],
                );
            }
        }
    }
    (CLASS_NEWS, Vec::new())
}

/// Cosine similarity between a document's distinct stems and the reference
/// term set, both as binary vectors.
pub fn keyword_similarity(tokens: &[String], reference: &BTreeSet<String>) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    let distinct: BTreeSet<&str> = tokens.iter().map(|t| t.as_str()).collect();
    if distinct.is_empty() {
        return 0.0;
    }
    let overlap = distinct.iter().filter(|t| reference.contains(**t)).count();
    overlap as f64 / ((distinct.len() as f64) * (reference.len() as f64)).sqrt()
}

/// Picks the best of several same-firm-quarter disclosure candidates by
/// keyword similarity. Candidates must be pre-sorted by (timestamp, doc_id)
/// so ties resolve to the earliest; returns (index, tie_fired).
pub fn select_candidate(scores: &[f64]) -> (usize, bool) {
    assert!(!scores.is_empty());
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    let tied = scores.iter().enumerate().any(|(i, &s)| i != best && s == scores[best]);
    (best, tied)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(source: &str, tags: &[&str], text: &str) -> RawDoc {
        RawDoc {
            doc_id: "d".into(),
            firm_id: "f".into(),
            timestamp: "2006-03-14T08:00:00".into(),
            source_type: source.into(),
            relevance: 95.0,
            tags: tags.iter().map(|s| s.to_string()).collect(),
            major_firm_count: 1,
            raw_text: text.into(),
        }
    }

    #[test]
    fn press_release_rule() {
        let cfg = StudyConfig::default();
        let d = doc("newswire", &["Company Earnings"], "Quarterly results. Contact: IR dept.");
        let (class, trace) = classify(&d, &cfg);
        assert_eq!(class, CLASS_PRESS_RELEASE);
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn missing_contact_is_news() {
        let cfg = StudyConfig::default();
        let d = doc("newswire", &["company earnings"], "Quarterly results.");
        assert_eq!(classify(&d, &cfg).0, CLASS_NEWS);
    }

    #[test]
    fn newspaper_never_press_release() {
        let cfg = StudyConfig::default();
        let d = doc("newspaper", &["company earnings"], "results. contact");
        assert_eq!(classify(&d, &cfg).0, CLASS_NEWS);
    }

    #[test]
    fn negative_keyword_blocks() {
        let cfg = StudyConfig::default();
        let d = doc(
            "newswire",
            &["company earnings"],
            "Webcast Alert: results call. contact ir",
        );
        let (class, trace) = classify(&d, &cfg);
        assert_eq!(class, CLASS_NEWS);
        assert!(trace[0].starts_with("negative:"));
    }

    #[test]
    fn transcript_tag_wins() {
        let cfg = StudyConfig::default();
        let d = doc("newswire", &["transcript", "company earnings"], "contact");
        assert_eq!(classify(&d, &cfg).0, CLASS_TRANSCRIPT);
    }

    #[test]
    fn similarity_orders_candidates() {
        let reference: BTreeSet<String> =
            ["earn", "quarter", "result"].iter().map(|s| s.to_string()).collect();
        let on_topic: Vec<String> = ["earn", "quarter", "filler"].iter().map(|s| s.to_string()).collect();
        let off_topic: Vec<String> = ["filler", "other"].iter().map(|s| s.to_string()).collect();
        assert!(keyword_similarity(&on_topic, &reference) > keyword_similarity(&off_topic, &reference));
    }

    #[test]
    fn tie_breaks_to_first() {
        let (best, tied) = select_candidate(&[0.5, 0.5, 0.1]);
        assert_eq!(best, 0);
        assert!(tied);
        let (best, tied) = select_candidate(&[0.1, 0.9]);
        assert_eq!(best, 1);
        assert!(!tied);
    }
}

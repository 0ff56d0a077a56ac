//! Study configuration: every tunable of the pipeline in one JSON document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Windows {
    pub pre: (i32, i32),
    pub event: (i32, i32),
    pub short: (i32, i32),
    pub long: (i32, i32),
}

impl Default for Windows {
    fn default() -> Self {
        Windows { pre: (-5, -2), event: (-1, 1), short: (2, 5), long: (2, 20) }
    }
}

impl Windows {
    pub fn named(&self) -> [(&'static str, (i32, i32)); 4] {
        [("pre", self.pre), ("event", self.event), ("short", self.short), ("long", self.long)]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Estimation window length in trading days.
    pub l: i32,
    /// Offset between estimation window and event day.
    pub k: i32,
    /// Minimum tone (or return) observations for a normal-level fit.
    pub min_obs: usize,
    pub windows: Windows,
    pub winsor_lo: f64,
    pub winsor_hi: f64,
    pub dedup_threshold: f64,
    /// A word enters the calibration vocabulary when the corpus uses it on at
    /// least this many distinct days.
    pub min_days: usize,
    pub min_words: usize,
    pub min_relevance: f64,
    pub max_major_firms: u32,
    pub max_digit_ratio: f64,
    pub min_distinct_ratio: f64,
    /// Quarters of history required before the first residual-tone refit.
    pub start_quarters: usize,
    /// Equal-weight the tone factor instead of market-cap weighting.
    pub equal_weight: bool,
    pub seed: u64,
    pub allowed_sources: Vec<String>,
    pub excluded_tags: Vec<String>,
    pub press_release_tags: Vec<String>,
    /// Phrases whose presence disqualifies a press-release candidate.
    pub negative_keywords: Vec<String>,
    /// Reference terms scoring press-release candidates when a firm-quarter
    /// has several.
    pub reference_terms: Vec<String>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            l: 30,
            k: 5,
            min_obs: 10,
            windows: Windows::default(),
            winsor_lo: 0.01,
            winsor_hi: 0.99,
            dedup_threshold: 0.9,
            min_days: 200,
            min_words: 200,
            min_relevance: 85.0,
            max_major_firms: 2,
            max_digit_ratio: 0.25,
            min_distinct_ratio: 0.2,
            start_quarters: 16,
            equal_weight: false,
            seed: 1,
            allowed_sources: vec!["newswire".into(), "newspaper".into(), "web".into()],
            excluded_tags: vec!["patents".into()],
            press_release_tags: vec![
                "press releases".into(),
                "company earnings".into(),
                "financial results".into(),
                "interim financial results".into(),
                "financial performance and reports".into(),
                "earnings per share".into(),
            ],
            negative_keywords: vec![
                "conference call announcement".into(),
                "dividend declaration".into(),
                "annual general meeting".into(),
                "webcast alert".into(),
            ],
            reference_terms: vec![
                "earnings".into(),
                "quarter".into(),
                "results".into(),
                "revenue".into(),
                "income".into(),
                "eps".into(),
                "outlook".into(),
            ],
        }
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        let cfg: StudyConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l <= 0 || self.k < 0 {
            return Err(CliError::validation("estimation window needs l > 0 and k >= 0"));
        }
        // The estimation window, offset and the 20-day post window must fit in
        // 61 trading days so back-to-back quarterly events cannot overlap.
        if self.l + self.k + 20 > 61 {
            return Err(CliError::validation(format!(
                "window layout l+k+20 = {} exceeds the 61 trading day budget",
                self.l + self.k + 20
            )));
        }
        for (name, (a, b)) in self.windows.named() {
            if a > b {
                return Err(CliError::validation(format!("window {name} has reversed bounds")));
            }
        }
        if !(0.0..1.0).contains(&self.winsor_lo)
            || !(0.0..=1.0).contains(&self.winsor_hi)
            || self.winsor_lo >= self.winsor_hi
        {
            return Err(CliError::validation("winsor bounds must satisfy 0 <= lo < hi <= 1"));
        }
        if !(0.0..=1.0).contains(&self.dedup_threshold) || self.dedup_threshold == 0.0 {
            return Err(CliError::validation("dedup threshold must be in (0, 1]"));
        }
        if self.min_obs == 0 {
            return Err(CliError::validation("min_obs must be at least 1"));
        }
        if self.allowed_sources.is_empty() {
            return Err(CliError::validation("allowed_sources must not be empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        StudyConfig::default().validate().unwrap();
    }

    #[test]
    fn oversized_layout_rejected() {
        let cfg = StudyConfig { l: 40, ..StudyConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn load_round_trip_with_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.json");
        std::fs::write(&path, r#"{"l": 20, "seed": 7}"#).unwrap();
        let cfg = StudyConfig::load(&path).unwrap();
        assert_eq!(cfg.l, 20);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.k, 5);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.json");
        std::fs::write(&path, r#"{"ll": 20}"#).unwrap();
        assert!(StudyConfig::load(&path).is_err());
    }
}

//! News document model and JSONL serialization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const SOURCE_NEWSWIRE: &str = "newswire";
pub const SOURCE_NEWSPAPER: &str = "newspaper";
pub const SOURCE_WEB: &str = "web";

pub const CLASS_NEWS: &str = "news";
pub const CLASS_PRESS_RELEASE: &str = "earnings_press_release";
pub const CLASS_TRANSCRIPT: &str = "earnings_call_transcript";

/// One input article, as provided by the vendor dump.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawDoc {
    pub doc_id: String,
    pub firm_id: String,
    /// `YYYY-MM-DDTHH:MM:SS`
    pub timestamp: String,
    pub source_type: String,
    pub relevance: f64,
    #[serde(default)]
    pub tags: Vec<String>,
    pub major_firm_count: u32,
    pub raw_text: String,
}

/// A retained article: the raw fields plus tokens and classification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CleanDoc {
    pub doc_id: String,
    pub firm_id: String,
    pub timestamp: String,
    pub source_type: String,
    pub relevance: f64,
    pub tags: Vec<String>,
    pub major_firm_count: u32,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub class: String,
    /// Which classification rules fired; empty for plain news.
    pub rule_trace: Vec<String>,
}

impl CleanDoc {
    pub fn is_newswire(&self) -> bool {
        self.source_type == SOURCE_NEWSWIRE
    }
}

/// Reads raw documents line by line; unparseable lines come back as `Err`
/// entries so the caller can count them without aborting the run.
pub fn read_raw_jsonl(path: &Path) -> Result<Vec<std::result::Result<RawDoc, String>>> {
    let f = File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawDoc>(&line) {
            Ok(d) => out.push(Ok(d)),
            Err(e) => out.push(Err(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

pub fn read_clean_jsonl(path: &Path) -> Result<Vec<CleanDoc>> {
    let f = File::open(path)
        .map_err(|e| CliError::validation(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: CleanDoc = serde_json::from_str(&line)
            .map_err(|e| CliError::validation(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(d);
    }
    Ok(out)
}

pub fn write_clean_jsonl(path: &Path, docs: &[CleanDoc]) -> Result<()> {
    let f = File::create(path)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    for d in docs {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

//! Raw text normalisation.
//!
//! `clean_text` turns an article body into the token list every downstream
//! measure is built on: whitespace-delimited chunks that look like web
//! addresses are dropped whole, everything that is not an ASCII letter acts
//! as a separator, the remaining words are lowercased and Porter-stemmed.
//! Because stemming is one-to-one, the token count equals the pre-stem word
//! count that the length filter and the tone denominators use.
//!
//! Words are ASCII `a-z` runs; accented or otherwise non-ASCII letters
//! separate words just like punctuation does.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::porter;

/// Cleans one document body into stemmed lowercase tokens.
pub fn clean_text(raw: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in raw.split_whitespace() {
        if is_url_chunk(chunk) {
            continue;
        }
        let mut word = String::new();
        for c in chunk.chars() {
            if c.is_ascii_alphabetic() {
                word.push(c.to_ascii_lowercase());
            } else if !word.is_empty() {
                tokens.push(porter::stem(&word));
                word.clear();
            }
        }
        if !word.is_empty() {
            tokens.push(porter::stem(&word));
        }
    }
    tokens
}

/// A whitespace-delimited chunk counts as a URL when it carries an explicit
/// scheme or the conventional www. prefix.
fn is_url_chunk(chunk: &str) -> bool {
    let lower_starts = |prefix: &str| {
        chunk.len() >= prefix.len()
            && chunk.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
    };
    lower_starts("http://") || lower_starts("https://") || lower_starts("www.") || chunk.contains("://")
}

/// Share of digit characters among non-whitespace characters of the raw text.
///
/// Used by the machine-generated-text screen; whitespace is excluded from the
/// denominator so that formatting does not dilute the ratio.
pub fn digit_char_ratio(raw: &str) -> f64 {
    let mut digits = 0u64;
    let mut total = 0u64;
    for c in raw.chars() {
        if c.is_whitespace() {
            continue;
        }
        total += 1;
        if c.is_ascii_digit() {
            digits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        digits as f64 / total as f64
    }
}

/// Distinct-token share of the cleaned token list; 1.0 for an empty list.
pub fn distinct_token_ratio(tokens: &[String]) -> f64 {
    if tokens.is_empty() {
        return 1.0;
    }
    let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    distinct.len() as f64 / tokens.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(raw: &str) -> Vec<String> {
        clean_text(raw)
    }

    #[test]
    fn urls_numbers_punctuation_removed() {
        assert_eq!(toks("Visit http://x.co NOW!! 24%"), ["visit", "now"]);
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks("  \t\n ").is_empty());
        assert!(toks("123 45% :-)").is_empty());
    }

    #[test]
    fn stemming_applied_per_word() {
        assert_eq!(toks("running runs RUN."), ["run", "run", "run"]);
    }

    #[test]
    fn url_variants() {
        assert!(toks("HTTPS://a.b WWW.example.com ftp://x.y").is_empty());
        // "www" without the dot is an ordinary word.
        assert_eq!(toks("www alone"), ["www", "alon"]);
    }

    #[test]
    fn punctuation_splits_words() {
        assert_eq!(toks("state-of-the-art"), ["state", "of", "the", "art"]);
        assert_eq!(toks("don't"), ["don", "t"]);
    }

    #[test]
    fn non_ascii_letters_separate() {
        assert_eq!(toks("café au lait"), ["caf", "au", "lait"]);
    }

    #[test]
    fn digit_ratio() {
        assert_eq!(digit_char_ratio(""), 0.0);
        assert_eq!(digit_char_ratio("abcd"), 0.0);
        assert_eq!(digit_char_ratio("a1b2"), 0.5);
        assert_eq!(digit_char_ratio("1 2  3"), 1.0);
    }

    #[test]
    fn distinct_ratio() {
        assert_eq!(distinct_token_ratio(&[]), 1.0);
        let t = clean_text("buy buy buy buy sell");
        assert_eq!(distinct_token_ratio(&t), 2.0 / 5.0);
    }
}

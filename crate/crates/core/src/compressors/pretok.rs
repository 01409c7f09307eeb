use std::sync::OnceLock;

use regex::bytes::Regex;
use serde::{Deserialize, Serialize};

/// Word-level pattern: an optional leading space glued to a letter run,
/// digit run or punctuation run; whitespace runs stand alone. Bytes the
/// pattern cannot match (invalid UTF-8) become their own pretokens.
const DEFAULT_PATTERN: &str = r"'(?:[sdmt]|ll|ve|re)| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pretokenizer {
    #[serde(rename = "default")]
    DefaultRegex,
    /// Whole lines including the trailing newline.
    #[serde(rename = "line")]
    LineSeparated,
}

fn default_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(DEFAULT_PATTERN).expect("pretokenizer pattern compiles"))
}

impl Pretokenizer {
    /// Splits `text` into pretokens whose concatenation is `text`.
    pub fn split<'a>(&self, text: &'a [u8]) -> Vec<&'a [u8]> {
        match self {
            Pretokenizer::LineSeparated => text.split_inclusive(|&b| b == b'\n').collect(),
            Pretokenizer::DefaultRegex => {
                let mut out = Vec::new();
                let mut pos = 0;
                for m in default_regex().find_iter(text) {
                    if m.start() > pos {
                        out.push(&text[pos..m.start()]);
                    }
                    out.push(m.as_bytes());
                    pos = m.end();
                }
                if pos < text.len() {
                    out.push(&text[pos..]);
                }
                out
            }
        }
    }
}

impl std::str::FromStr for Pretokenizer {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "default" => Ok(Pretokenizer::DefaultRegex),
            "line" | "lines" => Ok(Pretokenizer::LineSeparated),
            other => Err(crate::Error::invalid(format!(
                "unknown pretokenizer {other:?}"
            ))),
        }
    }
}

//! JSONL corpora and a seeded generator of small Python-like documents.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }

    pub fn bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }
}

impl AsRef<[u8]> for Document {
    fn as_ref(&self) -> &[u8] {
        self.text.as_bytes()
    }
}

/// Reads one `{"id": .., "text": ..}` object per line. Blank lines are skipped;
/// line numbers in errors are 1-based.
pub fn read_jsonl(path: &Path) -> Result<Vec<Document>> {
    let reader = BufReader::new(File::open(path).map_err(Error::io_at(path))?);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Corpus {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Corpus {
            line: i + 1,
            reason: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_jsonl(path: &Path, docs: &[Document]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for d in docs {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

const NOUNS: &[&str] = &[
    "value", "count", "index", "item", "node", "total", "result", "buffer", "name", "size", "key",
    "path", "line", "token", "score", "weight", "offset", "limit", "record", "entry",
];
const VERBS: &[&str] = &[
    "get", "set", "compute", "update", "load", "parse", "build", "find", "merge", "scale", "check",
    "read", "write", "filter", "sort",
];
const OPS: &[&str] = &["+", "-", "*", "//", "%"];
const CMPS: &[&str] = &["<", ">", "==", "!=", "<=", ">="];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).unwrap()
    }

    fn ident(&mut self) -> String {
        if self.rng.gen_bool(0.6) {
            self.pick(NOUNS).to_string()
        } else {
            format!("{}_{}", self.pick(NOUNS), self.pick(NOUNS))
        }
    }

    fn expr(&mut self, vars: &[String]) -> String {
        let a = vars.choose(&mut self.rng).unwrap().clone();
        match self.rng.gen_range(0..4) {
            0 => a,
            1 => format!("{a} {} {}", self.pick(OPS), self.rng.gen_range(1..100)),
            2 => format!(
                "{a} {} {}",
                self.pick(OPS),
                vars.choose(&mut self.rng).unwrap()
            ),
            _ => format!("len({a})"),
        }
    }

    fn stmt(&mut self, vars: &mut Vec<String>, indent: usize, out: &mut String) {
        let pad = " ".repeat(indent);
        match self.rng.gen_range(0..6) {
            0 | 1 => {
                let v = self.ident();
                let e = self.expr(vars);
                out.push_str(&format!("{pad}{v} = {e}\n"));
                vars.push(v);
            }
            2 if indent < 12 => {
                let e = self.expr(vars);
                let c = self.pick(CMPS);
                out.push_str(&format!("{pad}if {e} {c} {}:\n", self.rng.gen_range(0..50)));
                self.stmt(vars, indent + 4, out);
            }
            3 if indent < 12 => {
                let v = self.pick(NOUNS);
                let src = vars.choose(&mut self.rng).unwrap().clone();
                out.push_str(&format!("{pad}for {v} in {src}:\n"));
                vars.push(v.to_string());
                self.stmt(vars, indent + 4, out);
            }
            4 => {
                let f = format!("{}_{}", self.pick(VERBS), self.pick(NOUNS));
                let e = self.expr(vars);
                out.push_str(&format!("{pad}{f}({e})\n"));
            }
            _ => {
                let e = self.expr(vars);
                out.push_str(&format!(
                    "{pad}# {} the {}\n{pad}print({e})\n",
                    self.pick(VERBS),
                    self.pick(NOUNS)
                ));
            }
        }
    }

    fn function(&mut self, out: &mut String) {
        let name = format!("{}_{}", self.pick(VERBS), self.pick(NOUNS));
        let argc = self.rng.gen_range(1..4);
        let mut vars: Vec<String> = (0..argc).map(|_| self.pick(NOUNS).to_string()).collect();
        vars.dedup();
        out.push_str(&format!("def {name}({}):\n", vars.join(", ")));
        if self.rng.gen_bool(0.5) {
            out.push_str(&format!(
                "    \"\"\"{} the {}.\"\"\"\n",
                self.pick(VERBS),
                self.pick(NOUNS)
            ));
        }
        for _ in 0..self.rng.gen_range(2..7) {
            self.stmt(&mut vars, 4, out);
        }
        let e = self.expr(&vars);
        out.push_str(&format!("    return {e}\n"));
    }
}

/// `n` deterministic Python-like documents of one to three functions each.
pub fn synthetic_code_corpus(n: usize, seed: u64) -> Vec<Document> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut g = Gen { rng };
            let mut text = String::new();
            for k in 0..g.rng.gen_range(1..4) {
                if k > 0 {
                    text.push_str("\n\n");
                }
                g.function(&mut text);
            }
            Document::new(format!("doc-{i:06}"), text)
        })
        .collect()
}

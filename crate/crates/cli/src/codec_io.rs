//! Codeword file format.
//!
//! ```text
//! # pragrate-codec mode=<known-source|universal> m=<m> n=<n> alphabet=<symbols> [source=<p1,p2,..>] count=<k>
//! <codeword 1>
//! ...
//! ```
//!
//! Each codeword is a line of ASCII `0`/`1`; the empty codeword is an
//! empty line. `count` fixes the number of codeword lines.

use std::collections::BTreeMap;

use pragrate::{Codeword, OrderingMode, SourcePmf};

use crate::Failure;

const MAGIC: &str = "# pragrate-codec";

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub mode: OrderingMode,
    pub m: usize,
    pub n: u32,
    pub alphabet: Vec<char>,
    pub source: Option<SourcePmf>,
    pub count: usize,
}

impl Header {
    pub fn render(&self) -> String {
        let alphabet: String = self.alphabet.iter().collect();
        let mut line = format!(
            "{MAGIC} mode={} m={} n={} alphabet={alphabet}",
            self.mode, self.m, self.n
        );
        if let Some(p) = &self.source {
            line.push_str(&format!(" source={p}"));
        }
        line.push_str(&format!(" count={}", self.count));
        line
    }

    pub fn parse(line: &str) -> Result<Self, Failure> {
        let bad = |why: &str| Failure::Input(format!("malformed codec header: {why}"));
        let rest = line
            .strip_prefix(MAGIC)
            .ok_or_else(|| bad("missing magic"))?;
        let mut fields = BTreeMap::new();
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad(tok))?;
            if fields.insert(k, v).is_some() {
                return Err(bad(&format!("duplicate field {k}")));
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| bad(&format!("no {k}")))
        };
        let mode = get("mode")?.parse().map_err(|_| bad("mode"))?;
        let m: usize = get("m")?.parse().map_err(|_| bad("m"))?;
        let n: u32 = get("n")?.parse().map_err(|_| bad("n"))?;
        let count = get("count")?.parse().map_err(|_| bad("count"))?;
        let alphabet: Vec<char> = get("alphabet")?.chars().collect();
        if alphabet.len() != m {
            return Err(bad("alphabet length differs from m"));
        }
        let source = match fields.get("source") {
            Some(s) => Some(s.parse::<SourcePmf>().map_err(|_| bad("source"))?),
            None => None,
        };
        if let Some(k) = fields
            .keys()
            .find(|k| !["mode", "m", "n", "alphabet", "source", "count"].contains(k))
        {
            return Err(bad(&format!("unknown field {k}")));
        }
        Ok(Self {
            mode,
            m,
            n,
            alphabet,
            source,
            count,
        })
    }
}

/// Maps characters to symbol indices `0..m`.
pub fn symbols(alphabet: &[char], s: &str) -> Result<Vec<u8>, Failure> {
    s.chars()
        .map(|c| {
            alphabet
                .iter()
                .position(|&a| a == c)
                .map(|i| i as u8)
                .ok_or_else(|| Failure::Input(format!("symbol {c:?} is not in the alphabet")))
        })
        .collect()
}

pub fn chars(alphabet: &[char], x: &[u8]) -> String {
    x.iter().map(|&i| alphabet[i as usize]).collect()
}

pub fn write_file(header: &Header, codewords: &[Codeword]) -> String {
    let mut out = header.render();
    out.push('\n');
    for c in codewords {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

pub fn read_file(text: &str) -> Result<(Header, Vec<Codeword>), Failure> {
    let mut lines = text.split('\n');
    let header = Header::parse(lines.next().unwrap_or_default().trim_end_matches('\r'))?;
    let body: Vec<&str> = lines.collect();
    // A trailing newline leaves one empty fragment after the last codeword.
    let available = match body.last() {
        Some(&"") => body.len() - 1,
        _ => body.len(),
    };
    if available != header.count {
        return Err(Failure::Input(format!(
            "header promises {} codewords, file has {available}",
            header.count
        )));
    }
    let codewords = body[..available]
        .iter()
        .map(|l| {
            l.trim_end_matches('\r')
                .parse::<Codeword>()
                .map_err(Failure::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((header, codewords))
}

use std::fs;
use std::path::Path;
use std::str::FromStr;

use pragrate::{CodeMode, SourcePmf};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Markdown,
    Json,
}

/// A source given inline (`0.2,0.8` or `[0.2,0.8]`), as a JSON array, or as
/// a path to a file holding either form.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Probs(Vec<f64>),
    Text(String),
}

impl SourceSpec {
    pub fn resolve(&self) -> Result<SourcePmf, Failure> {
        match self {
            SourceSpec::Probs(p) => Ok(SourcePmf::new(p.clone())?),
            SourceSpec::Text(s) => {
                let text = if Path::new(s).is_file() {
                    fs::read_to_string(s)
                        .map_err(|e| Failure::Input(format!("cannot read source file {s}: {e}")))?
                } else {
                    s.clone()
                };
                Ok(SourcePmf::from_str(text.trim())?)
            }
        }
    }
}

/// Block lengths: `50`, `10,20,30`, `a..b` or `a..b:step` (inclusive).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    One(u32),
    List(Vec<u32>),
    Text(String),
}

impl NSpec {
    pub fn values(&self) -> Result<Vec<u32>, Failure> {
        let out = match self {
            NSpec::One(n) => vec![*n],
            NSpec::List(v) => v.clone(),
            NSpec::Text(s) => parse_n(s)?,
        };
        if out.is_empty() {
            return Err(Failure::Input("the n range is empty".into()));
        }
        if out.contains(&0) {
            return Err(Failure::Input("block lengths must be at least 1".into()));
        }
        Ok(out)
    }
}

fn parse_u32(s: &str) -> Result<u32, Failure> {
    s.trim()
        .parse()
        .map_err(|_| Failure::Input(format!("not a block length: {s:?}")))
}

fn parse_n(s: &str) -> Result<Vec<u32>, Failure> {
    if let Some((a, rest)) = s.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, step)) => (b, parse_u32(step)?),
            None => (rest, 1),
        };
        if step == 0 {
            return Err(Failure::Input("range step must be positive".into()));
        }
        let (a, b) = (parse_u32(a)?, parse_u32(b)?);
        return Ok((a..=b).step_by(step as usize).collect());
    }
    s.split(',').map(parse_u32).collect()
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("not a number: {x:?}")))
        })
        .collect()
}

/// JSON run configuration; command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: Option<SourceSpec>,
    pub n: Option<NSpec>,
    pub eps: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub mode: Option<CodeMode>,
    pub format: Option<Format>,
    pub cap_types: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("invalid config {}: {e}", path.display())))
    }

    pub fn source(&self) -> Result<SourcePmf, Failure> {
        self.source
            .as_ref()
            .ok_or_else(|| Failure::Input("no source given (use --source)".into()))?
            .resolve()
    }

    pub fn ns(&self) -> Result<Vec<u32>, Failure> {
        self.n
            .as_ref()
            .ok_or_else(|| Failure::Input("no block length given (use --n)".into()))?
            .values()
    }

    pub fn cap(&self) -> u64 {
        self.cap_types.unwrap_or(pragrate::types::DEFAULT_TYPE_CAP)
    }

    /// Exactly one of the epsilon and delta lists.
    pub fn targets(&self) -> Result<Targets, Failure> {
        let nonempty = |v: &Vec<f64>, what: &str| {
            if v.is_empty() {
                Err(Failure::Input(format!("the {what} list is empty")))
            } else {
                Ok(v.clone())
            }
        };
        match (&self.eps, &self.delta) {
            (Some(e), None) => Ok(Targets::Epsilon(nonempty(e, "epsilon")?)),
            (None, Some(d)) => Ok(Targets::Delta(nonempty(d, "delta")?)),
            (Some(_), Some(_)) => Err(Failure::Input(
                "give either --eps or --delta, not both".into(),
            )),
            (None, None) => Err(Failure::Input("give --eps or --delta".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Epsilon(Vec<f64>),
    Delta(Vec<f64>),
}

impl Targets {
    /// `(epsilon, delta)` pairs at block length `n`.
    pub fn at(&self, n: u32) -> Result<Vec<(f64, f64)>, Failure> {
        match self {
            Targets::Epsilon(v) => Ok(v
                .iter()
                .map(|&e| (e, pragrate::delta_from_epsilon(n, e)))
                .collect()),
            Targets::Delta(v) => v
                .iter()
                .map(|&d| {
                    let e = (-(n as f64) * d).exp2();
                    if e > 0.0 {
                        Ok((e, d))
                    } else {
                        Err(Failure::Input(format!(
                            "2^(-n delta) underflows at n = {n}, delta = {d}"
                        )))
                    }
                })
                .collect(),
        }
    }
}

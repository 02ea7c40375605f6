//! Working one-to-one codes on `A^n`.
//!
//! Both codes list `A^n` class by class (lexicographically inside a type
//! class) and send the 1-based index `k` of a string as the binary
//! expansion of `k` without its leading one, a codeword of `floor(log2 k)`
//! bits. They differ only in how the classes are ordered:
//!
//! * known-source: decreasing per-string probability under `P`;
//! * universal: increasing empirical entropy, independent of any source.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::approximations::berry_esseen_log_factor;
use crate::distributions::{tilt_unchecked, SourcePmf};
use crate::error::{Error, Result};
use crate::exponents::{moment_envelope, solve_alpha_star};
use crate::limits::{probability_order, tails_for_order, LengthDistribution};
use crate::numeric::LOG2_E;
use crate::types::{
    check_type_cap, enumerate_types, low_entropy_count, low_entropy_log2_count, rank_in_type_class,
    sort_by_entropy, string_count, unrank_in_type_class, BinomialRows, NType, DEFAULT_TYPE_CAP,
};

/// A one-to-one codeword; the empty codeword is valid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Codeword {
    bits: Vec<bool>,
}

impl Codeword {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Codeword of the 1-based index `k`.
    pub fn from_index(k: &BigUint) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::Input("codeword indices start at 1".into()));
        }
        let len = k.bits() - 1;
        let bits = (0..len).rev().map(|i| k.bit(i)).collect();
        Ok(Self { bits })
    }

    /// The 1-based index this codeword stands for: `2^len + value(bits)`.
    pub fn index(&self) -> BigUint {
        let mut k = BigUint::one();
        for &b in &self.bits {
            k <<= 1;
            if b {
                k += 1u32;
            }
        }
        k
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidCodeword(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Codeword::new)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingMode {
    KnownSource,
    Universal,
}

impl fmt::Display for OrderingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderingMode::KnownSource => "known-source",
            OrderingMode::Universal => "universal",
        })
    }
}

impl FromStr for OrderingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known-source" | "known" => Ok(OrderingMode::KnownSource),
            "universal" => Ok(OrderingMode::Universal),
            other => Err(Error::Input(format!("unknown code mode {other:?}"))),
        }
    }
}

/// The total order on `A^n` shared by encoder and decoder.
#[derive(Debug, Clone)]
pub struct CodeOrdering {
    mode: OrderingMode,
    source: Option<SourcePmf>,
    n: u32,
    m: usize,
    types: Vec<NType>,
    /// 0-based index of the first string of each class.
    offsets: Vec<BigUint>,
    position: HashMap<Vec<u32>, usize>,
}

impl CodeOrdering {
    /// Known-source ordering for `P^n`.
    pub fn known_source(p: &SourcePmf, n: u32) -> Result<Self> {
        let types = probability_order(p, n)?;
        Ok(Self::build(
            OrderingMode::KnownSource,
            Some(p.clone()),
            n,
            p.alphabet_size(),
            types,
        ))
    }

    /// Universal ordering on `m`-ary strings of length `n`.
    pub fn universal(n: u32, m: usize) -> Result<Self> {
        if n == 0 || !(2..=256).contains(&m) {
            return Err(Error::Input(format!(
                "need n >= 1 and 2 <= m <= 256, got n={n}, m={m}"
            )));
        }
        check_type_cap(n, m, DEFAULT_TYPE_CAP)?;
        let mut types = enumerate_types(n, m);
        sort_by_entropy(&mut types);
        Ok(Self::build(OrderingMode::Universal, None, n, m, types))
    }

    /// Builds either ordering; the universal mode ignores `source` apart
    /// from its alphabet size when `m` is not given.
    pub fn new(
        mode: OrderingMode,
        source: Option<&SourcePmf>,
        n: u32,
        m: Option<usize>,
    ) -> Result<Self> {
        match mode {
            OrderingMode::KnownSource => {
                let p = source
                    .ok_or_else(|| Error::Input("known-source mode needs a source".into()))?;
                if m.is_some_and(|m| m != p.alphabet_size()) {
                    return Err(Error::Input(
                        "alphabet size disagrees with the source".into(),
                    ));
                }
                Self::known_source(p, n)
            }
            OrderingMode::Universal => {
                let m = m
                    .or(source.map(|p| p.alphabet_size()))
                    .ok_or_else(|| Error::Input("universal mode needs the alphabet size".into()))?;
                Self::universal(n, m)
            }
        }
    }

    fn build(
        mode: OrderingMode,
        source: Option<SourcePmf>,
        n: u32,
        m: usize,
        types: Vec<NType>,
    ) -> Self {
        let mut rows = BinomialRows::new();
        let mut offsets = Vec::with_capacity(types.len());
        let mut acc = BigUint::zero();
        for t in &types {
            offsets.push(acc.clone());
            acc += rows.multinomial(t.counts());
        }
        let position = types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.counts().to_vec(), i))
            .collect();
        Self {
            mode,
            source,
            n,
            m,
            types,
            offsets,
            position,
        }
    }

    pub fn mode(&self) -> OrderingMode {
        self.mode
    }

    pub fn source(&self) -> Option<&SourcePmf> {
        self.source.as_ref()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Type classes in code order.
    pub fn type_order(&self) -> &[NType] {
        &self.types
    }

    /// 1-based index of `x` in the ordering.
    pub fn index_of(&self, x: &[u8]) -> Result<BigUint> {
        if x.len() != self.n as usize {
            return Err(Error::Input(format!(
                "string has length {}, the code is for n = {}",
                x.len(),
                self.n
            )));
        }
        let (t, rank) = rank_in_type_class(x, self.m)?;
        let pos = self.position[t.counts()];
        Ok(&self.offsets[pos] + rank + 1u32)
    }

    /// String at 1-based index `k`.
    pub fn string_at(&self, k: &BigUint) -> Result<Vec<u8>> {
        let total = string_count(self.n, self.m);
        if k.is_zero() || *k > total {
            return Err(Error::InvalidCodeword(format!(
                "index {k} is outside 1..={total}"
            )));
        }
        let idx = k - 1u32;
        let pos = self.offsets.partition_point(|o| *o <= idx) - 1;
        let rank = idx - &self.offsets[pos];
        unrank_in_type_class(&self.types[pos], &rank)
    }
}

pub fn encode(ordering: &CodeOrdering, x: &[u8]) -> Result<Codeword> {
    Codeword::from_index(&ordering.index_of(x)?)
}

pub fn decode(ordering: &CodeOrdering, c: &Codeword) -> Result<Vec<u8>> {
    ordering.string_at(&c.index())
}

/// Length distribution of the universal code when the data come from `p`.
pub fn universal_length_distribution(p: &SourcePmf, n: u32) -> Result<LengthDistribution> {
    let ordering = CodeOrdering::universal(n, p.alphabet_size())?;
    Ok(tails_for_order(p, n, ordering.type_order()))
}

/// `P(index(X^n) >= 2^L)` under the universal ordering, i.e. the
/// probability that the universal codeword has at least `L` bits.
pub fn universal_excess_probability(p: &SourcePmf, n: u32, length: u32) -> Result<f64> {
    Ok(universal_length_distribution(p, n)?.tail(length))
}

/// The threshold sequence `alpha_n` behind the universal code's guarantee,
/// with its constants and the realized rate `(log2 |E_n| + 1)/n` where
/// `E_n = { x^n : H(type) <= H(P_{alpha_n}) }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalThreshold {
    pub n: u32,
    pub delta: f64,
    pub alpha_star: f64,
    pub alpha_n: f64,
    pub p_bar: f64,
    pub q_bar: f64,
    pub r_bar: f64,
    /// `alpha_n` lies in `[alpha*, 1)`; otherwise the fields below are diagnostics only.
    pub in_range: bool,
    /// `H(P_{alpha_n})`, when `alpha_n` is a valid tilt parameter.
    pub threshold_entropy: Option<f64>,
    pub log2_e_n: Option<f64>,
    #[serde(serialize_with = "crate::report::serialize_opt_biguint")]
    pub e_n: Option<BigUint>,
    /// `(log2 |E_n| + 1)/n`.
    pub realized_rate: Option<f64>,
}

/// Largest `n` at which `|E_n|` is also computed exactly.
pub const EXACT_E_N_MAX: u32 = 2000;

pub fn universal_threshold_alpha_n(
    p: &SourcePmf,
    delta: f64,
    n: u32,
) -> Result<UniversalThreshold> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    let s = solve_alpha_star(p, delta)?;
    let a = s.alpha_star;
    let env = moment_envelope(p);
    let t = &s.tilted;
    let p_bar = t.sigma3_sq * LOG2_E;
    let q_bar = LOG2_E / 2.0
        * ((env.sigma3_inf_sq - (1.0 - a) * env.rho3_sup).abs() + env.sigma3_sup_sq + env.rho3_sup);
    let r_bar = berry_esseen_log_factor(t.sigma2_sq, t.rho2) / (1.0 - a);
    let nf = n as f64;
    let alpha_n =
        a + 1.0 / (2.0 * p_bar * (1.0 - a)) * nf.log2() / nf - (q_bar + r_bar) / p_bar / nf;
    let in_range = alpha_n >= a && alpha_n < 1.0;

    let mut out = UniversalThreshold {
        n,
        delta,
        alpha_star: a,
        alpha_n,
        p_bar,
        q_bar,
        r_bar,
        in_range,
        threshold_entropy: None,
        log2_e_n: None,
        e_n: None,
        realized_rate: None,
    };
    if alpha_n > 0.0 && alpha_n <= 1.0 {
        let h = tilt_unchecked(p, alpha_n).entropy;
        let m = p.alphabet_size();
        out.threshold_entropy = Some(h);
        if check_type_cap(n, m, DEFAULT_TYPE_CAP).is_ok() {
            let log2_e = if n <= EXACT_E_N_MAX {
                let census = low_entropy_count(n, m, h)?;
                let l = census.log2_count;
                out.e_n = Some(census.count);
                l
            } else {
                low_entropy_log2_count(n, m, h)?
            };
            out.log2_e_n = Some(log2_e);
            out.realized_rate = Some((log2_e + 1.0) / nf);
        }
    }
    Ok(out)
}

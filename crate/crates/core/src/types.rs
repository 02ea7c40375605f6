//! Method-of-types machinery: n-types, exact type-class sizes, ranking
//! within a type class, and low-entropy string counts.
//!
//! All orderings of types in this crate share one convention: count
//! vectors ascend lexicographically, so for `n = 2, m = 2` the order is
//! `(0,2), (1,1), (2,0)`.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::distributions::empirical_entropy;
use crate::error::{Error, Result};
use crate::numeric::{biguint_log2, log2_sum_exp2, LOG2_E};

/// Slack added to entropy thresholds, in bits.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// Largest number of types any enumeration will visit.
pub const DEFAULT_TYPE_CAP: u64 = 10_000_000;

/// An n-type: symbol counts of a length-n string over an m-ary alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NType {
    counts: Vec<u32>,
}

impl NType {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Input(format!(
                "a type needs at least 2 symbols, got {}",
                counts.len()
            )));
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::Input("a type must have n >= 1".into()));
        }
        Ok(Self { counts })
    }

    /// The type of a string over `{0, .., m-1}`.
    pub fn of_string(x: &[u8], m: usize) -> Result<Self> {
        let mut counts = vec![0u32; m];
        for (i, &s) in x.iter().enumerate() {
            let slot = counts.get_mut(s as usize).ok_or_else(|| {
                Error::Input(format!(
                    "symbol {s} at position {i} is outside the alphabet of size {m}"
                ))
            })?;
            *slot += 1;
        }
        NType::new(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    /// Entropy of the empirical distribution, in bits.
    pub fn entropy(&self) -> f64 {
        empirical_entropy(&self.counts)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// `log2 |T(t)|` from log-gamma; no big integers involved.
    pub fn log2_class_size(&self) -> f64 {
        let n = self.n() as f64;
        let mut s = ln_gamma(n + 1.0);
        for &c in &self.counts {
            s -= ln_gamma(c as f64 + 1.0);
        }
        s * LOG2_E
    }
}

/// `C(n + m - 1, m - 1)`, the number of n-types on m symbols.
pub fn type_count(n: u32, m: usize) -> BigUint {
    binomial(n as u64 + m as u64 - 1, m as u64 - 1)
}

pub(crate) fn check_type_cap(n: u32, m: usize, cap: u64) -> Result<()> {
    let count = type_count(n, m);
    if count > BigUint::from(cap) {
        return Err(Error::Resource(format!(
            "n = {n}, m = {m} has {count} types, above the cap of {cap}"
        )));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k.min(n - k)))
}

/// Iterates all n-types on m symbols in ascending lexicographic order.
#[derive(Debug, Clone)]
pub struct TypeIter {
    next: Option<Vec<u32>>,
}

impl TypeIter {
    pub fn new(n: u32, m: usize) -> Self {
        assert!(m >= 2 && n >= 1, "need n >= 1 and m >= 2");
        let mut first = vec![0u32; m];
        first[m - 1] = n;
        Self { next: Some(first) }
    }
}

impl Iterator for TypeIter {
    type Item = NType;

    fn next(&mut self) -> Option<NType> {
        let current = self.next.take()?;
        let m = current.len();
        // Successor: bump the entry before the last nonzero one and move the
        // remainder of that nonzero entry to the end.
        if let Some(k) = current.iter().rposition(|&c| c > 0).filter(|&k| k > 0) {
            let mut succ = current.clone();
            let s = succ[k];
            succ[k - 1] += 1;
            succ[k] = 0;
            succ[m - 1] = s - 1;
            self.next = Some(succ);
        }
        Some(NType { counts: current })
    }
}

/// Every composition of `n` into `m` parts, ascending lexicographically.
pub fn enumerate_types(n: u32, m: usize) -> Vec<NType> {
    TypeIter::new(n, m).collect()
}

/// Lazily computed rows of Pascal's triangle.
#[derive(Debug, Default)]
pub(crate) struct BinomialRows {
    rows: HashMap<u32, Vec<BigUint>>,
}

impl BinomialRows {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    fn row(&mut self, a: u32) -> &[BigUint] {
        self.rows.entry(a).or_insert_with(|| {
            let mut row = Vec::with_capacity(a as usize + 1);
            let mut cur = BigUint::one();
            row.push(cur.clone());
            for k in 0..a {
                cur = cur * BigUint::from(a - k) / BigUint::from(k + 1);
                row.push(cur.clone());
            }
            row
        })
    }

    /// `n! / prod c!` as a product of binomials over prefix sums.
    pub(crate) fn multinomial(&mut self, counts: &[u32]) -> BigUint {
        let mut acc = BigUint::one();
        let mut prefix = 0u32;
        for &c in counts {
            prefix += c;
            if c > 0 && c < prefix {
                acc *= &self.row(prefix)[c as usize];
            }
        }
        acc
    }
}

/// Exact size of the type class, `n! / prod_a counts(a)!`.
pub fn type_class_size(t: &NType) -> BigUint {
    let mut acc = BigUint::one();
    let mut prefix = 0u64;
    for &c in &t.counts {
        prefix += c as u64;
        acc *= binomial(prefix, c as u64);
    }
    acc
}

/// `|T(t)|` divided by `2^{nH(t)} n^{-(k-1)/2} prod_a t(a)^{-1/2}`,
/// evaluated in the log domain. Requires every count to be positive.
pub fn stirling_ratio(t: &NType) -> Result<f64> {
    if t.counts.contains(&0) {
        return Err(Error::domain(format!(
            "stirling ratio needs a full-support type, got counts {:?}",
            t.counts
        )));
    }
    let n = t.n() as f64;
    let k = t.m() as f64;
    let log2_size = if t.n() <= 1000 {
        biguint_log2(&type_class_size(t))
    } else {
        t.log2_class_size()
    };
    let log2_rhs = n * t.entropy()
        - (k - 1.0) / 2.0 * n.log2()
        - 0.5 * t.frequencies().iter().map(|f| f.log2()).sum::<f64>();
    Ok((log2_size - log2_rhs).exp2())
}

/// Number of n-types with entropy in `[h - 1/n, h]`.
pub fn entropy_slab_count(n: u32, m: usize, h: f64) -> Result<u64> {
    check_type_cap(n, m, DEFAULT_TYPE_CAP)?;
    let lo = h - 1.0 / n as f64 - THRESHOLD_SLACK;
    let hi = h + THRESHOLD_SLACK;
    Ok(TypeIter::new(n, m)
        .filter(|t| {
            let e = t.entropy();
            e >= lo && e <= hi
        })
        .count() as u64)
}

/// Exact count of strings whose empirical entropy is at most a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub n: u32,
    pub m: usize,
    pub threshold_bits: f64,
    #[serde(serialize_with = "crate::report::serialize_biguint")]
    pub count: BigUint,
    pub log2_count: f64,
    /// `count / (n^{(m-3)/2} 2^{n h})`.
    pub theta_ratio: f64,
}

pub(crate) fn theta_ratio(n: u32, m: usize, h: f64, log2_count: f64) -> f64 {
    let nf = n as f64;
    (log2_count - (m as f64 - 3.0) / 2.0 * nf.log2() - nf * h).exp2()
}

/// `|B_n| = |{x^n : H(type(x^n)) <= h}|`, summed exactly over types.
pub fn low_entropy_count(n: u32, m: usize, h: f64) -> Result<CensusReport> {
    if n == 0 || m < 2 {
        return Err(Error::domain("need n >= 1 and m >= 2"));
    }
    check_type_cap(n, m, DEFAULT_TYPE_CAP)?;
    let mut rows = BinomialRows::new();
    let mut count = BigUint::zero();
    for t in TypeIter::new(n, m) {
        if t.entropy() <= h + THRESHOLD_SLACK {
            count += rows.multinomial(&t.counts);
        }
    }
    let log2_count = biguint_log2(&count);
    Ok(CensusReport {
        n,
        m,
        threshold_bits: h,
        theta_ratio: theta_ratio(n, m, h, log2_count),
        count,
        log2_count,
    })
}

/// `log2 |B_n|` from summed log-multinomials, without big integers.
pub fn low_entropy_log2_count(n: u32, m: usize, h: f64) -> Result<f64> {
    if n == 0 || m < 2 {
        return Err(Error::domain("need n >= 1 and m >= 2"));
    }
    check_type_cap(n, m, DEFAULT_TYPE_CAP)?;
    let terms: Vec<f64> = TypeIter::new(n, m)
        .filter(|t| t.entropy() <= h + THRESHOLD_SLACK)
        .map(|t| t.log2_class_size())
        .collect();
    Ok(log2_sum_exp2(&terms))
}

/// Lexicographic rank of `x` among the strings of its type.
///
/// Symbols are `0..m`. Returns the type together with the rank.
pub fn rank_in_type_class(x: &[u8], m: usize) -> Result<(NType, BigUint)> {
    let t = NType::of_string(x, m)?;
    let mut counts = t.counts.clone();
    let mut remaining = t.n();
    // Number of arrangements of the suffix still to be placed.
    let mut arrangements = type_class_size(&t);
    let mut rank = BigUint::zero();
    for &s in x {
        let s = s as usize;
        let smaller: u32 = counts[..s].iter().sum();
        if smaller > 0 {
            rank += &arrangements * BigUint::from(smaller) / BigUint::from(remaining);
        }
        arrangements = arrangements * BigUint::from(counts[s]) / BigUint::from(remaining);
        counts[s] -= 1;
        remaining -= 1;
    }
    Ok((t, rank))
}

/// Inverse of [`rank_in_type_class`].
pub fn unrank_in_type_class(t: &NType, rank: &BigUint) -> Result<Vec<u8>> {
    let mut arrangements = type_class_size(t);
    if *rank >= arrangements {
        return Err(Error::domain(format!(
            "rank {rank} is out of range for a type class of size {arrangements}"
        )));
    }
    if t.m() > 256 {
        return Err(Error::Input(
            "alphabets above 256 symbols are not supported".into(),
        ));
    }
    let mut counts = t.counts.clone();
    let mut remaining = t.n();
    let mut r = rank.clone();
    let mut out = Vec::with_capacity(remaining as usize);
    while remaining > 0 {
        let mut chosen = None;
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let block = &arrangements * BigUint::from(c) / BigUint::from(remaining);
            if r < block {
                chosen = Some((s, block));
                break;
            }
            r -= block;
        }
        let (s, block) =
            chosen.ok_or_else(|| Error::Internal("unrank ran past the class".into()))?;
        out.push(s as u8);
        arrangements = block;
        counts[s] -= 1;
        remaining -= 1;
    }
    Ok(out)
}

/// Sorts types by ascending empirical entropy; equal entropies fall back to
/// the shared lexicographic order.
///
/// Entropies closer than `1e-10` bits are compared exactly: lower entropy
/// means a larger `prod_a c_a^{c_a}` at equal `n`.
pub fn sort_by_entropy(types: &mut [NType]) {
    let mut keyed: Vec<(f64, NType)> = types.iter().map(|t| (t.entropy(), t.clone())).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len() && keyed[end].0 - keyed[end - 1].0 <= 1e-10 {
            end += 1;
        }
        if end - start > 1 {
            let group = &mut keyed[start..end];
            let mut with_power: Vec<(BigUint, NType)> = group
                .iter()
                .map(|(_, t)| (self_power_product(t.counts()), t.clone()))
                .collect();
            with_power.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            for (slot, (_, t)) in group.iter_mut().zip(with_power) {
                slot.1 = t;
            }
        }
        start = end;
    }
    for (slot, (_, t)) in types.iter_mut().zip(keyed) {
        *slot = t;
    }
}

/// `prod_a c_a^{c_a}`.
fn self_power_product(counts: &[u32]) -> BigUint {
    counts
        .iter()
        .filter(|&&c| c > 1)
        .fold(BigUint::one(), |acc, &c| acc * BigUint::from(c).pow(c))
}

/// Exact comparison of empirical entropies of two types with equal `n`.
pub fn cmp_entropy_exact(a: &NType, b: &NType) -> Ordering {
    debug_assert_eq!(a.n(), b.n());
    self_power_product(b.counts()).cmp(&self_power_product(a.counts()))
}

/// `m^n` as a big integer.
pub fn string_count(n: u32, m: usize) -> BigUint {
    BigUint::from(m).pow(n)
}

/// `n! / prod c!` straight from factorials; test oracle only.
#[cfg(test)]
pub(crate) fn multinomial_by_factorials(counts: &[u32]) -> BigUint {
    let fact = |k: u32| (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i));
    let n: u32 = counts.iter().sum();
    let mut den = BigUint::one();
    for &c in counts {
        den *= fact(c);
    }
    let (q, r) = num_integer::Integer::div_rem(&fact(n), &den);
    assert!(r.is_zero());
    q
}

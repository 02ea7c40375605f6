//! Exact fundamental limits of one-to-one coding for a known memoryless
//! source.
//!
//! The optimal code lists all strings by decreasing probability and gives
//! the k-th string (1-based) a codeword of `floor(log2 k)` bits. Strings of
//! one type are equiprobable, so the whole length distribution is obtained
//! from the `C(n+m-1, m-1)` type classes with big-integer rank arithmetic;
//! the `m^n` strings are never listed.

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::distributions::SourcePmf;
use crate::error::{Error, Result};
use crate::numeric::{biguint_log2, log2_add, CompensatedSum};
use crate::types::{check_type_cap, string_count, BinomialRows, NType, TypeIter, DEFAULT_TYPE_CAP};

/// Largest string space [`brute_force_limits`] will enumerate.
pub const BRUTE_FORCE_MAX_STRINGS: u64 = 2_000_000;
pub const BRUTE_FORCE_MAX_N: u32 = 12;

/// `P(length >= L)` for one codeword length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub length: u32,
    pub tail_prob: f64,
    /// `log2` of the tail; stays finite when `tail_prob` underflows.
    pub log2_tail: f64,
}

/// Tail probabilities of the codeword length of a one-to-one code.
///
/// `boundaries[L]` holds `P(length >= L)` for `L = 0, 1, ..`, ending with
/// the first length no codeword reaches (tail 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthDistribution {
    pub n: u32,
    pub boundaries: Vec<TailPoint>,
}

impl LengthDistribution {
    pub fn tail(&self, length: u32) -> f64 {
        self.boundaries
            .get(length as usize)
            .map_or(0.0, |b| b.tail_prob)
    }

    pub fn log2_tail(&self, length: u32) -> f64 {
        self.boundaries
            .get(length as usize)
            .map_or(f64::NEG_INFINITY, |b| b.log2_tail)
    }

    /// Smallest `L` with `P(length >= L) <= 2^{log2_eps}`.
    pub fn min_length_within(&self, log2_eps: f64) -> u32 {
        self.boundaries
            .iter()
            .find(|b| b.log2_tail <= log2_eps)
            .map_or(self.boundaries.len() as u32, |b| b.length)
    }
}

/// Types sorted by decreasing per-string probability.
///
/// Types whose `log2` probabilities agree to within `1e-9 * max(1, |v|)`
/// are treated as equiprobable and kept in the shared lexicographic order.
pub fn probability_order(p: &SourcePmf, n: u32) -> Result<Vec<NType>> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    let m = p.alphabet_size();
    check_type_cap(n, m, DEFAULT_TYPE_CAP)?;
    let mut keyed: Vec<(f64, NType)> = TypeIter::new(n, m)
        .map(|t| (p.log2_prob_of_counts(t.counts()), t))
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len() {
            let (prev, cur) = (keyed[end - 1].0, keyed[end].0);
            if prev - cur > 1e-9 * prev.abs().max(1.0) {
                break;
            }
            end += 1;
        }
        keyed[start..end].sort_by(|a, b| a.1.cmp(&b.1));
        start = end;
    }
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

/// Where each rank boundary `2^L` falls in an ordered list of type classes.
struct BoundarySplit {
    /// Index of the class containing rank `2^L`.
    class: usize,
    /// Strings of that class at rank `>= 2^L`.
    count_from_boundary: BigUint,
}

fn split_boundaries(sizes: &[BigUint], total: &BigUint) -> Vec<BoundarySplit> {
    let max_len = total.bits() as u32; // 2^L <= total  iff  L < bits(total)
    let mut out = Vec::with_capacity(max_len as usize);
    let mut start = BigUint::one();
    let mut boundary = BigUint::one();
    let mut length = 0u32;
    for (i, size) in sizes.iter().enumerate() {
        let end = &start + size - 1u32;
        while length < max_len && boundary <= end {
            out.push(BoundarySplit {
                class: i,
                count_from_boundary: &end - &boundary + 1u32,
            });
            length += 1;
            boundary <<= 1;
        }
        start = end + 1u32;
    }
    out
}

/// Length distribution of the code that lists the classes of `order` in
/// sequence (lexicographic within a class) under source `p`.
pub(crate) fn tails_for_order(p: &SourcePmf, n: u32, order: &[NType]) -> LengthDistribution {
    let m = p.alphabet_size();
    let mut rows = BinomialRows::new();
    let sizes: Vec<BigUint> = order.iter().map(|t| rows.multinomial(t.counts())).collect();
    let log2_probs: Vec<f64> = order
        .iter()
        .map(|t| p.log2_prob_of_counts(t.counts()))
        .collect();
    let log2_mass: Vec<f64> = sizes
        .iter()
        .zip(&log2_probs)
        .map(|(s, lp)| biguint_log2(s) + lp)
        .collect();

    // Suffix masses: suffix[i] = mass of classes i.. in linear and log2 form.
    let k = order.len();
    let mut suffix_lin = vec![0.0; k + 1];
    let mut suffix_log = vec![f64::NEG_INFINITY; k + 1];
    let mut acc = CompensatedSum::new();
    for i in (0..k).rev() {
        acc.add(log2_mass[i].exp2());
        suffix_lin[i] = acc.value();
        suffix_log[i] = log2_add(suffix_log[i + 1], log2_mass[i]);
    }

    let total = string_count(n, m);
    let mut boundaries: Vec<TailPoint> = split_boundaries(&sizes, &total)
        .into_iter()
        .enumerate()
        .map(|(length, split)| {
            let partial_log = biguint_log2(&split.count_from_boundary) + log2_probs[split.class];
            let tail_prob = partial_log.exp2() + suffix_lin[split.class + 1];
            let log2_tail = if tail_prob > 1e-280 {
                tail_prob.log2()
            } else {
                log2_add(partial_log, suffix_log[split.class + 1])
            };
            TailPoint {
                length: length as u32,
                tail_prob,
                log2_tail,
            }
        })
        .collect();
    if let Some(first) = boundaries.first_mut() {
        first.tail_prob = 1.0;
        first.log2_tail = 0.0;
    }
    boundaries.push(TailPoint {
        length: boundaries.len() as u32,
        tail_prob: 0.0,
        log2_tail: f64::NEG_INFINITY,
    });
    LengthDistribution { n, boundaries }
}

/// Length distribution of the optimal one-to-one code for `P^n`.
pub fn length_distribution(p: &SourcePmf, n: u32) -> Result<LengthDistribution> {
    let order = probability_order(p, n)?;
    Ok(tails_for_order(p, n, &order))
}

/// `eps_n*(R, P) = P(length >= nR)` for the optimal code.
pub fn excess_rate_probability(p: &SourcePmf, n: u32, rate: f64) -> Result<f64> {
    if rate.is_nan() || rate < 0.0 {
        return Err(Error::domain(format!("rate {rate} must be nonnegative")));
    }
    let dist = length_distribution(p, n)?;
    Ok(dist.tail(length_threshold(n, rate)))
}

/// Smallest integer length `L` with `L >= n * rate`.
pub fn length_threshold(n: u32, rate: f64) -> u32 {
    let x = n as f64 * rate;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u32
    } else {
        x.ceil() as u32
    }
}

/// `R_n*(eps, P)` together with the length at which it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalRate {
    pub n: u32,
    /// `log2 eps`.
    pub log2_epsilon: f64,
    /// `L* = min { L : P(length >= L) <= eps }`.
    pub l_star: u32,
    /// `(L* - 1) / n`, bits per symbol.
    pub rate: f64,
}

/// `R_n*(eps, P)`: the infimum of rates whose excess probability is at most `eps`.
///
/// The event `length >= nR` only changes when `ceil(nR)` does, so the
/// admissible rates are `R > (L* - 1)/n` and the infimum is `(L* - 1)/n`.
pub fn optimal_rate(p: &SourcePmf, n: u32, epsilon: f64) -> Result<f64> {
    Ok(optimal_rate_detail(p, n, epsilon)?.rate)
}

pub fn optimal_rate_detail(p: &SourcePmf, n: u32, epsilon: f64) -> Result<OptimalRate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "epsilon = {epsilon} is not in (0, 1)"
        )));
    }
    optimal_rate_log2(p, n, epsilon.log2())
}

/// As [`optimal_rate_detail`] with `eps = 2^{log2_eps}`, for targets below
/// the double-precision range.
pub fn optimal_rate_log2(p: &SourcePmf, n: u32, log2_eps: f64) -> Result<OptimalRate> {
    if log2_eps.is_nan() || log2_eps >= 0.0 {
        return Err(Error::domain(format!(
            "log2 eps = {log2_eps} must be negative"
        )));
    }
    let dist = length_distribution(p, n)?;
    Ok(rate_from_distribution(&dist, log2_eps))
}

pub(crate) fn rate_from_distribution(dist: &LengthDistribution, log2_eps: f64) -> OptimalRate {
    let l_star = dist.min_length_within(log2_eps);
    OptimalRate {
        n: dist.n,
        log2_epsilon: log2_eps,
        l_star,
        rate: (l_star as f64 - 1.0) / dist.n as f64,
    }
}

/// A full-support pmf with exact rational entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPmf {
    probs: Vec<BigRational>,
}

impl RationalPmf {
    pub fn new(probs: Vec<BigRational>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid("alphabet size must be at least 2"));
        }
        if probs.iter().any(|q| *q <= BigRational::zero()) {
            return Err(Error::invalid("rational pmf entries must be positive"));
        }
        let sum: BigRational = probs.iter().cloned().sum();
        if !sum.is_one() {
            return Err(Error::invalid(format!("rational pmf sums to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Builds from `(numerator, denominator)` pairs.
    pub fn from_fractions(fracs: &[(i64, i64)]) -> Result<Self> {
        Self::new(
            fracs
                .iter()
                .map(|&(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
                .collect(),
        )
    }

    /// Recovers short fractions such as `1/5` from decimal inputs like `0.2`.
    pub fn from_source(p: &SourcePmf) -> Result<Self> {
        let probs = p
            .probs()
            .iter()
            .map(|&x| {
                let r = Ratio::<i64>::approximate_float(x)
                    .filter(|r| *r.denom() <= 1_000_000_000)
                    .ok_or_else(|| Error::invalid(format!("{x} has no short rational form")))?;
                Ok(BigRational::new(
                    BigInt::from(*r.numer()),
                    BigInt::from(*r.denom()),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn to_source(&self) -> Result<SourcePmf> {
        let probs: Vec<f64> = self
            .probs
            .iter()
            .map(|q| q.to_f64().unwrap_or(f64::NAN))
            .collect();
        let sum: f64 = probs.iter().sum();
        // Float rounding may leave the sum a few ulps off; nudge the largest entry.
        let mut probs = probs;
        if let Some((i, _)) = probs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
            probs[i] += 1.0 - sum;
        }
        SourcePmf::new(probs)
    }

    fn prob_of_counts(&self, counts: &[u32]) -> BigRational {
        counts
            .iter()
            .zip(&self.probs)
            .fold(BigRational::one(), |acc, (&c, q)| acc * pow(q, c))
    }
}

fn pow(q: &BigRational, e: u32) -> BigRational {
    BigRational::new(q.numer().pow(e), q.denom().pow(e))
}

/// Tail probabilities in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLengthDistribution {
    pub n: u32,
    /// `tails[L] = P(length >= L)`; the last entry is zero.
    pub tails: Vec<BigRational>,
}

impl ExactLengthDistribution {
    pub fn to_float(&self) -> LengthDistribution {
        LengthDistribution {
            n: self.n,
            boundaries: self
                .tails
                .iter()
                .enumerate()
                .map(|(l, q)| {
                    let x = q.to_f64().unwrap_or(0.0);
                    TailPoint {
                        length: l as u32,
                        tail_prob: x,
                        log2_tail: x.log2(),
                    }
                })
                .collect(),
        }
    }
}

/// Type-aggregated length distribution with rational tail masses.
///
/// Uses the same class order as [`length_distribution`].
pub fn length_distribution_exact(p: &RationalPmf, n: u32) -> Result<ExactLengthDistribution> {
    let fp = p.to_source()?;
    let order = probability_order(&fp, n)?;
    let mut rows = BinomialRows::new();
    let sizes: Vec<BigUint> = order.iter().map(|t| rows.multinomial(t.counts())).collect();
    let probs: Vec<BigRational> = order.iter().map(|t| p.prob_of_counts(t.counts())).collect();
    let k = order.len();
    let mut suffix = vec![BigRational::zero(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = &suffix[i + 1] + &probs[i] * big_ratio(&sizes[i]);
    }
    let total = string_count(n, p.probs.len());
    let mut tails: Vec<BigRational> = split_boundaries(&sizes, &total)
        .into_iter()
        .map(|s| &probs[s.class] * big_ratio(&s.count_from_boundary) + &suffix[s.class + 1])
        .collect();
    tails.push(BigRational::zero());
    Ok(ExactLengthDistribution { n, tails })
}

fn big_ratio(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// Independent oracle: lists all `m^n` strings, sorts them by exact
/// probability (ties: type order, then string order) and tabulates tails.
pub fn brute_force_limits(p: &RationalPmf, n: u32) -> Result<ExactLengthDistribution> {
    let m = p.probs.len();
    let count = (m as u64).checked_pow(n);
    if n == 0 || n > BRUTE_FORCE_MAX_N || count.map_or(true, |c| c > BRUTE_FORCE_MAX_STRINGS) {
        return Err(Error::Resource(format!(
            "brute force needs 1 <= n <= {BRUTE_FORCE_MAX_N} and m^n <= {BRUTE_FORCE_MAX_STRINGS}"
        )));
    }
    let count = count.unwrap_or(0) as usize;
    let mut strings: Vec<(BigRational, Vec<u32>, usize)> = (0..count)
        .map(|idx| {
            // Most significant digit first, so idx order is string order.
            let mut digits = vec![0usize; n as usize];
            let mut rest = idx;
            for d in digits.iter_mut().rev() {
                *d = rest % m;
                rest /= m;
            }
            let mut prob = BigRational::one();
            let mut counts = vec![0u32; m];
            for &d in &digits {
                prob *= &p.probs[d];
                counts[d] += 1;
            }
            (prob, counts, idx)
        })
        .collect();
    strings.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut suffix = BigRational::zero();
    let mut suffix_at = vec![BigRational::zero(); count + 1];
    for (i, s) in strings.iter().enumerate().rev() {
        suffix += &s.0;
        suffix_at[i] = suffix.clone();
    }
    let mut tails = Vec::new();
    let mut boundary = 1usize;
    while boundary <= count {
        tails.push(suffix_at[boundary - 1].clone());
        boundary <<= 1;
    }
    tails.push(BigRational::zero());
    Ok(ExactLengthDistribution { n, tails })
}

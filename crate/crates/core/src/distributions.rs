//! Probability vectors, entropies, divergences and exponential tilting.
//!
//! Units: entropies and divergences are in bits. The tilted moments carried
//! by [`TiltedPoint`] (`sigma*_sq`, `rho*`) are moments of natural
//! logarithms, i.e. nats; bit-valued formulas multiply them by
//! [`LOG2_E`](crate::numeric::LOG2_E) where needed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, LOG2_E};

/// Absolute tolerance on `sum(p) == 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A full-support probability mass function on `{0, .., m-1}`, `m >= 2`.
///
/// Construction never renormalizes: a vector whose sum is off by more than
/// [`SUM_TOLERANCE`] is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SourcePmf {
    probs: Vec<f64>,
}

impl SourcePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid(format!(
                "alphabet size must be at least 2, got {}",
                probs.len()
            )));
        }
        for (i, &x) in probs.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 || x > 1.0 {
                return Err(Error::invalid(format!(
                    "entry {i} = {x} is not in (0, 1]; sources must have full support"
                )));
            }
        }
        let sum = compensated_sum(probs.iter().copied());
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("entries sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// The uniform distribution on `m` symbols.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// `Bern(p)` written as `(p, 1 - p)`: symbol 0 has probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    /// `H(P)` in bits.
    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.probs)
    }

    /// `log2 P(x^n)` for a string with the given symbol counts.
    pub fn log2_prob_of_counts(&self, counts: &[u32]) -> f64 {
        compensated_sum(
            counts
                .iter()
                .zip(&self.probs)
                .filter(|(&c, _)| c > 0)
                .map(|(&c, &p)| c as f64 * p.log2()),
        )
    }

    /// Minimal coding variance `Var(-log2 P(X))` in bits squared.
    pub fn varentropy(&self) -> f64 {
        let h = self.entropy();
        compensated_sum(self.probs.iter().map(|&p| {
            let d = -p.log2() - h;
            p * d * d
        }))
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().all(|&p| (p - u).abs() <= 1e-15)
    }
}

impl TryFrom<Vec<f64>> for SourcePmf {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SourcePmf::new(v)
    }
}

impl From<SourcePmf> for Vec<f64> {
    fn from(p: SourcePmf) -> Self {
        p.probs
    }
}

impl FromStr for SourcePmf {
    type Err = Error;

    /// Accepts a JSON array (`[0.2, 0.8]`) or a comma-separated list
    /// (`0.2,0.8`).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let inner = trimmed
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(trimmed);
        let probs = inner
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("cannot parse {tok:?} as a probability")))
            })
            .collect::<Result<Vec<_>>>()?;
        SourcePmf::new(probs)
    }
}

impl fmt::Display for SourcePmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.probs.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

fn entropy_unchecked(p: &[f64]) -> f64 {
    let h = -compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()));
    h.max(0.0)
}

fn validate_vector(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid(format!("{what} is empty")));
    }
    if let Some((i, x)) = p
        .iter()
        .enumerate()
        .find(|(_, x)| !x.is_finite() || **x < 0.0)
    {
        return Err(Error::invalid(format!(
            "{what}: entry {i} = {x} is negative or not finite"
        )));
    }
    let sum = compensated_sum(p.iter().copied());
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::invalid(format!(
            "{what}: entries sum to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Entropy in bits of a probability vector; zeros are allowed (`0 log 0 = 0`).
pub fn entropy(p: &[f64]) -> Result<f64> {
    validate_vector(p, "distribution")?;
    Ok(entropy_unchecked(p))
}

/// Entropy in bits of the empirical distribution with the given counts.
///
/// Evaluated on the sorted counts as `log2 n - (1/n) sum c log2 c`, so
/// permutations of the same counts produce bit-identical values.
pub fn empirical_entropy(counts: &[u32]) -> f64 {
    let n: u64 = counts.iter().map(|&c| c as u64).sum();
    if n == 0 {
        return 0.0;
    }
    let mut sorted: Vec<u32> = counts.iter().copied().filter(|&c| c > 1).collect();
    sorted.sort_unstable();
    let nf = n as f64;
    let s = compensated_sum(sorted.iter().map(|&c| c as f64 * (c as f64).log2()));
    (nf.log2() - s / nf).max(0.0)
}

/// Relative entropy `D(q || p)` in bits.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64> {
    validate_vector(q, "q")?;
    validate_vector(p, "p")?;
    if q.len() != p.len() {
        return Err(Error::domain(format!(
            "alphabet sizes differ: {} vs {}",
            q.len(),
            p.len()
        )));
    }
    let mut terms = Vec::with_capacity(q.len());
    for (i, (&qi, &pi)) in q.iter().zip(p).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(Error::domain(format!(
                "support of q is not contained in support of p (symbol {i})"
            )));
        }
        terms.push(qi * (qi / pi).log2());
    }
    Ok(compensated_sum(terms).max(0.0))
}

/// The tilted law `P_alpha(x) = P(x)^alpha / Z_alpha` and its moments.
///
/// With `X ~ P_alpha`:
/// * `sigma1_sq`, `rho1`: variance and third absolute central moment of `ln P_alpha(X)`;
/// * `sigma2_sq`, `rho2`: the same for `ln(P_alpha(X)/P(X))`;
/// * `sigma3_sq`, `rho3`: the same for `ln P(X)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedPoint {
    pub alpha: f64,
    pub pmf: SourcePmf,
    /// `log2 Z_alpha`.
    pub log_z: f64,
    /// `D(P_alpha || P)` in bits.
    pub divergence: f64,
    /// `H(P_alpha)` in bits.
    pub entropy: f64,
    pub sigma1_sq: f64,
    pub rho1: f64,
    pub sigma2_sq: f64,
    pub rho2: f64,
    pub sigma3_sq: f64,
    pub rho3: f64,
}

/// Variance and third absolute central moment of `f` under `w`.
pub(crate) fn central_moments(w: &[f64], f: &[f64]) -> (f64, f64, f64) {
    let mean = compensated_sum(w.iter().zip(f).map(|(&wi, &fi)| wi * fi));
    let var = compensated_sum(w.iter().zip(f).map(|(&wi, &fi)| wi * (fi - mean).powi(2)));
    let abs3 = compensated_sum(
        w.iter()
            .zip(f)
            .map(|(&wi, &fi)| wi * (fi - mean).abs().powi(3)),
    );
    let third = compensated_sum(w.iter().zip(f).map(|(&wi, &fi)| wi * (fi - mean).powi(3)));
    (var.max(0.0), abs3.max(0.0), third)
}

/// Tilts `p` by `alpha in (0, 1]`.
pub fn tilt(p: &SourcePmf, alpha: f64) -> Result<TiltedPoint> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!(
            "tilt parameter alpha = {alpha} is not in (0, 1]"
        )));
    }
    Ok(tilt_unchecked(p, alpha))
}

pub(crate) fn tilt_unchecked(p: &SourcePmf, alpha: f64) -> TiltedPoint {
    let ln_p: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    let w: Vec<f64> = ln_p.iter().map(|l| alpha * l).collect();
    let w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_z = w_max + compensated_sum(w.iter().map(|x| (x - w_max).exp())).ln();
    let ln_q: Vec<f64> = w.iter().map(|x| x - ln_z).collect();
    let q: Vec<f64> = if alpha == 1.0 {
        p.probs().to_vec()
    } else {
        ln_q.iter().map(|x| x.exp()).collect()
    };
    let ln_ratio: Vec<f64> = ln_q.iter().zip(&ln_p).map(|(a, b)| a - b).collect();

    let (sigma1_sq, rho1, _) = central_moments(&q, &ln_q);
    let (sigma2_sq, rho2, _) = central_moments(&q, &ln_ratio);
    let (sigma3_sq, rho3, _) = central_moments(&q, &ln_p);

    let divergence = if alpha == 1.0 {
        0.0
    } else {
        (compensated_sum(q.iter().zip(&ln_ratio).map(|(a, b)| a * b)) * LOG2_E).max(0.0)
    };
    let entropy = (-compensated_sum(q.iter().zip(&ln_q).map(|(a, b)| a * b)) * LOG2_E).max(0.0);

    TiltedPoint {
        alpha,
        pmf: SourcePmf::from_normalized(q),
        log_z: ln_z * LOG2_E,
        divergence,
        entropy,
        sigma1_sq,
        rho1,
        sigma2_sq,
        rho2,
        sigma3_sq,
        rho3,
    }
}

/// Closed-form derivatives along the tilted family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltedDerivatives {
    /// `d/dalpha D(P_alpha || P)`, bits.
    pub d_divergence: f64,
    /// `d^2/dalpha^2 D(P_alpha || P)`, bits.
    pub d2_divergence: f64,
    /// `d/dalpha H(P_alpha)`, bits.
    pub d_entropy: f64,
    /// `d^2/dalpha^2 H(P_alpha)`, bits.
    pub d2_entropy: f64,
    /// `d/dalpha sigma3_sq`, nats squared; equals the third central moment of `ln P(X)`.
    pub d_sigma3_sq: f64,
}

pub fn tilted_derivatives(p: &SourcePmf, alpha: f64) -> Result<TiltedDerivatives> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha = {alpha} is not in the open interval (0, 1)"
        )));
    }
    let t = tilt_unchecked(p, alpha);
    let ln_p: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    let (_, _, third) = central_moments(t.pmf.probs(), &ln_p);
    let s3 = t.sigma3_sq;
    Ok(TiltedDerivatives {
        d_divergence: (alpha - 1.0) * s3 * LOG2_E,
        d2_divergence: LOG2_E * s3 + LOG2_E * (alpha - 1.0) * third,
        d_entropy: -LOG2_E * alpha * s3,
        d2_entropy: -LOG2_E * (s3 + alpha * third),
        d_sigma3_sq: third,
    })
}

/// `alpha [D(Q||P) - D(P_alpha||P)] - D(Q||P_alpha) - (1-alpha)[H(Q) - H(P_alpha)]`.
///
/// Identically zero; exposed so that callers can check the identity on
/// their own inputs.
pub fn tilt_divergence_residual(p: &SourcePmf, q: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha = {alpha} is not in the open interval (0, 1)"
        )));
    }
    let t = tilt_unchecked(p, alpha);
    let d_qp = kl_divergence(q, p.probs())?;
    let d_q_tilt = kl_divergence(q, t.pmf.probs())?;
    let h_q = entropy(q)?;
    Ok(alpha * (d_qp - t.divergence) - d_q_tilt - (1.0 - alpha) * (h_q - t.entropy))
}

//! Approximations to the optimal rate, the explicit achievability and
//! converse constants, and the universal rate bound.
//!
//! An excess-rate target `eps` at block length `n` is turned into an
//! exponent with `delta = log2(1/eps) / n`.

use serde::Serialize;

use crate::distributions::SourcePmf;
use crate::error::{Error, Result};
use crate::exponents::{delta_range, moment_envelope, solve_alpha_star, MomentEnvelope};
use crate::limits::{optimal_rate_log2, LengthDistribution};
use crate::numeric::{normal_upper_tail_inverse, LOG2_E};

/// `delta = log2(1/eps) / n`.
pub fn delta_from_epsilon(n: u32, epsilon: f64) -> f64 {
    -epsilon.log2() / n as f64
}

/// `log2 eps = -n delta`.
pub fn log2_epsilon_from_delta(n: u32, delta: f64) -> f64 {
    -(n as f64) * delta
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "epsilon = {epsilon} is not in (0, 1)"
        )))
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::domain("block length must be at least 1"))
    } else {
        Ok(())
    }
}

/// `log2(n) / n`, the scale of all second-order corrections.
fn log_n_over_n(n: u32) -> f64 {
    (n as f64).log2() / n as f64
}

pub fn shannon_rate(p: &SourcePmf) -> f64 {
    p.entropy()
}

/// `H(P) + sigma(P) Q^{-1}(eps) / sqrt(n) - log2(n) / (2n)`.
pub fn strassen_rate(p: &SourcePmf, n: u32, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let sigma = p.varentropy().sqrt();
    Ok(
        p.entropy() + sigma * normal_upper_tail_inverse(epsilon) / (n as f64).sqrt()
            - 0.5 * log_n_over_n(n),
    )
}

/// Maps `eps` to `delta` and reports the admissible `eps` interval on failure.
fn delta_for(p: &SourcePmf, n: u32, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let delta = delta_from_epsilon(n, epsilon);
    let range = delta_range(p);
    if range.contains(delta) {
        return Ok(delta);
    }
    if range.is_empty() {
        return Err(Error::domain(
            "delta out of range: the source is uniform, so no exponent is admissible".to_string(),
        ));
    }
    let eps_min = (-(n as f64) * range.upper).exp2();
    Err(Error::domain(format!(
        "delta = {delta} is outside (0, {}); at n = {n} epsilon must lie in ({eps_min:e}, 1)",
        range.upper
    )))
}

/// `H(P_{alpha*})` for `delta = log2(1/eps)/n`.
pub fn blahut_rate(p: &SourcePmf, n: u32, epsilon: f64) -> Result<f64> {
    let delta = delta_for(p, n, epsilon)?;
    Ok(solve_alpha_star(p, delta)?.h_tilted)
}

/// `H(P_{alpha*}) - log2(n) / (2n(1 - alpha*))`.
pub fn pragmatic_rate(p: &SourcePmf, n: u32, epsilon: f64) -> Result<f64> {
    let delta = delta_for(p, n, epsilon)?;
    pragmatic_rate_for_delta(p, n, delta)
}

pub fn pragmatic_rate_for_delta(p: &SourcePmf, n: u32, delta: f64) -> Result<f64> {
    check_n(n)?;
    let s = solve_alpha_star(p, delta)?;
    Ok(s.h_tilted - log_n_over_n(n) / (2.0 * (1.0 - s.alpha_star)))
}

/// `log2((1/sigma)(1/sqrt(2 pi) + rho/sigma^2))`, the Berry-Esseen
/// prefactor in bits, for a variance and third absolute moment in nats.
pub fn berry_esseen_log_factor(sigma_sq: f64, rho: f64) -> f64 {
    let sigma = sigma_sq.sqrt();
    ((1.0 / sigma) * (1.0 / (2.0 * std::f64::consts::PI).sqrt() + rho / sigma_sq)).log2()
}

/// The additive constant `c` of the finite-n achievability bound
/// `R_n*(2^{-n delta}, P) <= H(P_{alpha*}) - log2(n)/(2n(1-alpha*)) + c/n`,
/// valid for every `n >= 1`.
pub fn achievability_constant(p: &SourcePmf, delta: f64) -> Result<f64> {
    let s = solve_alpha_star(p, delta)?;
    let t = &s.tilted;
    let a = s.alpha_star;
    Ok(berry_esseen_log_factor(t.sigma1_sq, t.rho1)
        + a / (1.0 - a) * berry_esseen_log_factor(t.sigma2_sq, t.rho2))
}

/// `H(P_{alpha*}) - log2(n)/(2n(1-alpha*)) + c/n`.
pub fn achievability_bound(p: &SourcePmf, n: u32, delta: f64) -> Result<f64> {
    let c = achievability_constant(p, delta)?;
    Ok(pragmatic_rate_for_delta(p, n, delta)? + c / n as f64)
}

/// Constants of the finite-n converse bound
/// `R_n*(2^{-n delta}, P) >= H(P_{alpha*}) - log2(n)/(2n(1-alpha*)) - C/n`
/// for `n > N0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseConstants {
    pub delta: f64,
    pub alpha_star: f64,
    /// `sigma3_sq` at `alpha*`, nats squared.
    pub sigma3_sq: f64,
    pub envelope: MomentEnvelope,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub n1: u64,
    pub n2: u64,
    pub n0: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    /// The achievability constant `c` at the same `delta`.
    pub achievability_c: f64,
}

impl ConverseConstants {
    /// `H(P_{alpha*}) - log2(n)/(2n(1-alpha*)) - C/n`, meaningful for `n > N0`.
    pub fn lower_bound(&self, h_tilted: f64, n: u32) -> f64 {
        h_tilted - log_n_over_n(n) / (2.0 * (1.0 - self.alpha_star)) - self.big_c / n as f64
    }
}

pub fn converse_constants(p: &SourcePmf, delta: f64) -> Result<ConverseConstants> {
    let s = solve_alpha_star(p, delta)?;
    let a = s.alpha_star;
    let sigma3_sq = s.tilted.sigma3_sq;
    let env = moment_envelope(p);
    let (s_inf, s_sup, r_sup) = (env.sigma3_inf_sq, env.sigma3_sup_sq, env.rho3_sup);
    let s_inf_cubed = s_inf.powf(1.5);
    let shape = r_sup / s_inf_cubed + 1.0;

    let p_const = LOG2_E * (1.0 - a) * sigma3_sq;
    let q_const = LOG2_E / 2.0 * (s_sup + r_sup);
    let r_const = 19.0 * LOG2_E * (1.0 - a) * shape * (sigma3_sq + r_sup).sqrt();

    let n1 = first_crossing(
        8,
        |n| n.log2() <= p_const * n.sqrt(),
        |n| p_const * n.sqrt() - n.log2(),
    );
    let n2 = first_crossing(
        3,
        |n| n.log2() <= p_const * (1.0 - a) * n,
        |n| p_const * (1.0 - a) * n - n.log2(),
    );

    let sum = 1.0 + q_const + r_const;
    let n0 = [
        4.4 * shape * shape,
        4.0 * sum * sum / (p_const * p_const),
        2.0 * sum / (p_const * (1.0 - a)),
        n1 as f64,
        n2 as f64,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);

    let big_c = sum / (1.0 - a)
        + LOG2_E / 2.0 * (s_inf - (1.0 - a) * r_sup).abs()
        + LOG2_E / 2.0 * (s_sup + r_sup)
        + 1.0;

    let t = &s.tilted;
    let achievability_c = berry_esseen_log_factor(t.sigma1_sq, t.rho1)
        + a / (1.0 - a) * berry_esseen_log_factor(t.sigma2_sq, t.rho2);

    let out = ConverseConstants {
        delta,
        alpha_star: a,
        sigma3_sq,
        envelope: env,
        p: p_const,
        q: q_const,
        r: r_const,
        n1,
        n2,
        n0,
        big_c,
        achievability_c,
    };
    if !(out.p > 0.0 && out.q > 0.0 && out.r > 0.0 && out.n1 >= 8 && out.n2 >= 3) {
        return Err(Error::Internal(format!(
            "degenerate converse constants: {out:?}"
        )));
    }
    Ok(out)
}

/// `min { n >= start : holds(n) }` where `gap(n) = rhs - lhs` is convex in `n`
/// (first decreasing, then increasing without bound).
///
/// A linear scan is used while the answer is small; past that the
/// increasing branch is bracketed and bisected.
fn first_crossing(start: u64, holds: impl Fn(f64) -> bool, gap: impl Fn(f64) -> f64) -> u64 {
    const SCAN_LIMIT: u64 = 1 << 20;
    for n in start..start + SCAN_LIMIT {
        if holds(n as f64) {
            return n;
        }
    }
    // The gap is increasing beyond the scan window (it was negative
    // throughout, and its minimum lies before the eventual crossing).
    let mut lo = start + SCAN_LIMIT - 1;
    let mut hi = lo.saturating_mul(2);
    while gap(hi as f64) < 0.0 {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return u64::MAX;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid as f64) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Rate bound of the universal empirical-entropy code:
/// `H(P_{alpha*}) + ((m-2)/2 - 1/(2(1-alpha*))) log2(n)/n + O(1/n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalRateBound {
    /// The bound without its `O(1/n)` term.
    pub rate: f64,
    /// Coefficient of `log2(n)/n`.
    pub log_coefficient: f64,
    /// The `O(1/n)` term has no explicit constant.
    pub residual: &'static str,
}

pub fn universal_rate_bound(p: &SourcePmf, n: u32, delta: f64) -> Result<UniversalRateBound> {
    check_n(n)?;
    let s = solve_alpha_star(p, delta)?;
    let m = p.alphabet_size() as f64;
    let coef = (m - 2.0) / 2.0 - 1.0 / (2.0 * (1.0 - s.alpha_star));
    Ok(UniversalRateBound {
        rate: s.h_tilted + coef * log_n_over_n(n),
        log_coefficient: coef,
        residual: "O(1/n), unquantified",
    })
}

/// Prefix-free limit from the one-to-one limit: one extra bit per block.
pub fn prefix_adjust(rate: f64, n: u32) -> f64 {
    rate + 1.0 / n as f64
}

/// Which fundamental limit the exact column reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CodeMode {
    #[default]
    OneToOne,
    Prefix,
}

/// One row of the approximation ladder at `(n, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateLadder {
    pub n: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub exact: Option<f64>,
    pub shannon: f64,
    pub strassen: f64,
    pub blahut: Option<f64>,
    pub pragmatic: Option<f64>,
    pub alpha_star: Option<f64>,
    pub mode: CodeMode,
    pub notes: Vec<String>,
}

/// Computes one ladder row. `exact` may carry a precomputed length
/// distribution for this `n`; otherwise the exact column is computed when
/// `with_exact` is set and the type count allows it.
pub fn ladder_row(
    p: &SourcePmf,
    n: u32,
    epsilon: f64,
    mode: CodeMode,
    exact: Option<&LengthDistribution>,
    with_exact: bool,
) -> Result<RateLadder> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let delta = delta_from_epsilon(n, epsilon);
    let mut notes = Vec::new();

    let exact_rate = match exact {
        Some(dist) => Some(crate::limits::rate_from_distribution(dist, epsilon.log2()).rate),
        None if with_exact => match optimal_rate_log2(p, n, epsilon.log2()) {
            Ok(r) => Some(r.rate),
            Err(e @ Error::Resource(_)) => {
                notes.push(format!("exact: {e}"));
                None
            }
            Err(e) => return Err(e),
        },
        None => None,
    };

    let (blahut, pragmatic, alpha_star) = match delta_for(p, n, epsilon) {
        Ok(d) => {
            let s = solve_alpha_star(p, d)?;
            let prag = s.h_tilted - log_n_over_n(n) / (2.0 * (1.0 - s.alpha_star));
            (Some(s.h_tilted), Some(prag), Some(s.alpha_star))
        }
        Err(e) => {
            notes.push(e.to_string());
            (None, None, None)
        }
    };

    let adjust = |r: f64| match mode {
        CodeMode::OneToOne => r,
        CodeMode::Prefix => prefix_adjust(r, n),
    };
    if mode == CodeMode::Prefix {
        notes.push("prefix mode: exact column is the one-to-one limit + 1/n".into());
    }

    Ok(RateLadder {
        n,
        epsilon,
        delta,
        exact: exact_rate.map(adjust),
        shannon: shannon_rate(p),
        strassen: strassen_rate(p, n, epsilon)?,
        blahut,
        pragmatic,
        alpha_star,
        mode,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::kl_divergence;

    fn bern(p: f64) -> SourcePmf {
        SourcePmf::bernoulli(p).unwrap()
    }

    fn half_delta() -> f64 {
        kl_divergence(&[1.0 / 3.0, 2.0 / 3.0], &[0.2, 0.8]).unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_rate(&bern(0.2)) - 0.722).abs() < 5e-4);
        assert_eq!(shannon_rate(&bern(0.5)), 1.0);
        let p = SourcePmf::new(vec![0.999, 0.001]).unwrap();
        let h = -(0.999f64 * 0.999f64.log2() + 0.001 * 0.001f64.log2());
        assert!((shannon_rate(&p) - h).abs() < 1e-15);
        assert!((h - 0.011408).abs() < 1e-6);
    }

    #[test]
    fn strassen_examples() {
        let p = bern(0.2);
        assert!((p.varentropy().sqrt() - 0.8).abs() < 1e-14);
        assert!((strassen_rate(&p, 50, 0.01444).unwrap() - 0.913).abs() < 1e-3);
        assert!((strassen_rate(&p, 50, 0.00003).unwrap() - 1.119).abs() < 1e-3);
        let median = strassen_rate(&p, 50, 0.5).unwrap();
        assert!((median - (p.entropy() - 50f64.log2() / 100.0)).abs() < 1e-14);
        assert!(strassen_rate(&p, 50, 1.0).is_err());
    }

    #[test]
    fn blahut_and_pragmatic_examples() {
        let p = bern(0.2);
        assert!((blahut_rate(&p, 50, 0.01444).unwrap() - 0.957).abs() < 1e-3);
        assert!((blahut_rate(&p, 50, 0.00003).unwrap() - 1.000).abs() < 1e-3);
        assert!((pragmatic_rate(&p, 50, 0.01444).unwrap() - 0.869).abs() < 1e-3);
        assert!((pragmatic_rate(&p, 50, 0.00003).unwrap() - 0.941).abs() < 1e-3);
        let eps = (-50.0 * half_delta()).exp2();
        let want = (3f64.log2() - 2.0 / 3.0) - 50f64.log2() / (2.0 * 50.0 * 0.5);
        assert!((pragmatic_rate(&p, 50, eps).unwrap() - want).abs() < 1e-10);
        assert!((want - 0.805419).abs() < 1e-6);
        let near_zero = blahut_rate(&p, 50, 0.999999).unwrap();
        assert!((near_zero - p.entropy()).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_reports_epsilon_interval() {
        let err = blahut_rate(&bern(0.2), 50, 1e-9).unwrap_err().to_string();
        assert!(err.contains("epsilon must lie in"), "{err}");
        assert!(pragmatic_rate(&bern(0.5), 50, 0.1).is_err());
    }

    #[test]
    fn achievability_constant_is_finite() {
        let c = achievability_constant(&bern(0.2), 0.070304).unwrap();
        assert!(c.is_finite());
    }

    #[test]
    fn converse_constants_are_consistent() {
        let k = converse_constants(&bern(0.2), 0.070304).unwrap();
        let shape = k.envelope.rho3_sup / k.envelope.sigma3_inf_sq.powf(1.5) + 1.0;
        let sum = 1.0 + k.q + k.r;
        for lower in [
            4.4 * shape * shape,
            4.0 * sum * sum / (k.p * k.p),
            2.0 * sum / (k.p * (1.0 - k.alpha_star)),
            k.n1 as f64,
            k.n2 as f64,
        ] {
            assert!(k.n0 >= lower);
        }
        assert!(k.big_c > 0.0 && k.big_c.is_finite());
        // N1 and N2 are the first crossings.
        let n1 = k.n1 as f64;
        assert!(n1.log2() <= k.p * n1.sqrt());
        assert!(k.n1 == 8 || (n1 - 1.0).log2() > k.p * (n1 - 1.0).sqrt());
        let n2 = k.n2 as f64;
        assert!(n2.log2() <= k.p * (1.0 - k.alpha_star) * n2);
        assert!(k.n2 == 3 || (n2 - 1.0).log2() > k.p * (1.0 - k.alpha_star) * (n2 - 1.0));
    }

    #[test]
    fn converse_constants_near_uniform_stay_finite() {
        let p = SourcePmf::new(vec![0.51, 0.49]).unwrap();
        let delta = 0.5 * delta_range(&p).upper;
        let k = converse_constants(&p, delta).unwrap();
        assert!(k.n0.is_finite() && k.big_c.is_finite() && k.n0 > 1e6);
        assert!(achievability_constant(&p, delta).unwrap().is_finite());
    }

    #[test]
    fn first_crossing_matches_scan() {
        let p = 0.01;
        let got = first_crossing(8, |n| n.log2() <= p * n.sqrt(), |n| p * n.sqrt() - n.log2());
        let mut n = 8u64;
        while (n as f64).log2() > p * (n as f64).sqrt() {
            n += 1;
        }
        assert_eq!(got, n);
        let p = 1e-4;
        let got = first_crossing(8, |n| n.log2() <= p * n.sqrt(), |n| p * n.sqrt() - n.log2());
        let g = got as f64;
        assert!(g.log2() <= p * g.sqrt() && (g - 1.0).log2() > p * (g - 1.0).sqrt());
    }

    #[test]
    fn universal_bound_binary_is_pragmatic() {
        let p = bern(0.2);
        for n in [10, 50, 200] {
            let u = universal_rate_bound(&p, n, 0.1).unwrap();
            let prag = pragmatic_rate_for_delta(&p, n, 0.1).unwrap();
            assert!((u.rate - prag).abs() < 1e-15);
        }
    }

    #[test]
    fn universal_bound_ternary_offset() {
        let p = SourcePmf::new(vec![0.5, 0.3, 0.2]).unwrap();
        let delta = 0.5 * delta_range(&p).upper;
        let u = universal_rate_bound(&p, 100, delta).unwrap();
        let prag = pragmatic_rate_for_delta(&p, 100, delta).unwrap();
        assert!(u.rate > prag);
        assert!((u.rate - prag - 0.5 * 100f64.log2() / 100.0).abs() < 1e-14);
    }

    #[test]
    fn prefix_adjustment() {
        assert!((prefix_adjust(0.940, 50) - 0.960).abs() < 1e-15);
        assert!((prefix_adjust(0.5, u32::MAX) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn ladder_prefix_mode_adds_one_bit() {
        let p = bern(0.2);
        let a = ladder_row(&p, 50, 0.001, CodeMode::OneToOne, None, true).unwrap();
        let b = ladder_row(&p, 50, 0.001, CodeMode::Prefix, None, true).unwrap();
        assert!((b.exact.unwrap() - a.exact.unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(a.pragmatic, b.pragmatic);
    }

    #[test]
    fn ladder_uniform_source_has_no_exponent_columns() {
        let row = ladder_row(&bern(0.5), 50, 0.1, CodeMode::OneToOne, None, true).unwrap();
        assert!(row.blahut.is_none() && row.pragmatic.is_none());
        assert!(row.notes.iter().any(|n| n.contains("delta out of range")));
        assert!(row.exact.is_some());
    }
}

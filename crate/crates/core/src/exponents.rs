//! The inverse error-exponent map `delta -> alpha*`, the error exponent
//! itself, and extremal tilted moments over `alpha`.

use serde::Serialize;

use crate::distributions::{kl_divergence, tilt_unchecked, SourcePmf, TiltedPoint};
use crate::error::{Error, Result};

/// Bracket width at which the `alpha` bisections stop.
pub const ALPHA_TOLERANCE: f64 = 1e-14;

/// Distance from 0 and 1 at which extremal moments are sampled.
pub const ENVELOPE_ETA: f64 = 1e-6;
pub const ENVELOPE_GRID: usize = 4096;
pub const ENVELOPE_REFINE_TOL: f64 = 1e-10;

/// The open interval `(0, D(U || P))` of admissible exponents, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaRange {
    pub upper: f64,
}

impl DeltaRange {
    /// True when `P` is uniform and no exponent is admissible.
    pub fn is_empty(&self) -> bool {
        self.upper <= 0.0
    }

    pub fn contains(&self, delta: f64) -> bool {
        delta > 0.0 && delta < self.upper
    }

    pub(crate) fn check(&self, delta: f64) -> Result<()> {
        if self.contains(delta) {
            Ok(())
        } else {
            Err(Error::DeltaOutOfRange {
                delta,
                upper: self.upper,
            })
        }
    }
}

pub fn delta_range(p: &SourcePmf) -> DeltaRange {
    let m = p.alphabet_size();
    let u = vec![1.0 / m as f64; m];
    let upper = kl_divergence(&u, p.probs()).unwrap_or(0.0);
    DeltaRange {
        upper: if upper <= 1e-15 { 0.0 } else { upper },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaStarSolution {
    pub alpha_star: f64,
    pub delta: f64,
    /// `H(P_{alpha*})` in bits.
    pub h_tilted: f64,
    pub tilted: TiltedPoint,
}

/// Finds the unique `alpha* in (0, 1)` with `D(P_{alpha*} || P) = delta`.
///
/// `alpha -> D(P_alpha || P)` is continuous and strictly decreasing, so plain
/// bisection on `(0, 1)` is used.
pub fn solve_alpha_star(p: &SourcePmf, delta: f64) -> Result<AlphaStarSolution> {
    delta_range(p).check(delta)?;
    let alpha = bisect_decreasing(|a| tilt_unchecked(p, a).divergence, delta);
    let tilted = tilt_unchecked(p, alpha);
    Ok(AlphaStarSolution {
        alpha_star: alpha,
        delta,
        h_tilted: tilted.entropy,
        tilted,
    })
}

/// Root of `f(a) = target` on `(0, 1)` for strictly decreasing `f`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > ALPHA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Delta_P(R) = inf { D(P' || P) : H(P') >= R }` in bits, for
/// `H(P) <= R <= log2 m`.
pub fn error_exponent(p: &SourcePmf, rate: f64) -> Result<f64> {
    let h = p.entropy();
    let max = (p.alphabet_size() as f64).log2();
    const SLACK: f64 = 1e-12;
    if !(rate >= h - SLACK && rate <= max + SLACK) {
        return Err(Error::domain(format!(
            "rate {rate} is outside [H(P), log2 m] = [{h}, {max}]"
        )));
    }
    if rate <= h {
        return Ok(0.0);
    }
    if rate >= max {
        return Ok(delta_range(p).upper);
    }
    let alpha = bisect_decreasing(|a| tilt_unchecked(p, a).entropy, rate);
    Ok(tilt_unchecked(p, alpha).divergence)
}

/// Extremal values of `sigma3_sq(alpha)` and `rho3(alpha)` over `(0, 1)`, in nats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEnvelope {
    pub sigma3_inf_sq: f64,
    pub sigma3_sup_sq: f64,
    pub rho3_sup: f64,
    /// Where each extremum was found.
    pub argmin_sigma3_sq: f64,
    pub argmax_sigma3_sq: f64,
    pub argmax_rho3: f64,
    pub grid_size: usize,
    pub refinement_tol: f64,
    /// Set for a uniform source, where every moment vanishes.
    pub degenerate: bool,
}

pub fn moment_envelope(p: &SourcePmf) -> MomentEnvelope {
    moment_envelope_with_grid(p, ENVELOPE_GRID)
}

/// [`moment_envelope`] with an explicit grid size (at least 3).
pub fn moment_envelope_with_grid(p: &SourcePmf, grid_size: usize) -> MomentEnvelope {
    let grid_size = grid_size.max(3);
    if p.is_uniform() {
        return MomentEnvelope {
            sigma3_inf_sq: 0.0,
            sigma3_sup_sq: 0.0,
            rho3_sup: 0.0,
            argmin_sigma3_sq: 0.5,
            argmax_sigma3_sq: 0.5,
            argmax_rho3: 0.5,
            grid_size,
            refinement_tol: ENVELOPE_REFINE_TOL,
            degenerate: true,
        };
    }
    let (lo, hi) = (ENVELOPE_ETA, 1.0 - ENVELOPE_ETA);
    let step = (hi - lo) / (grid_size - 1) as f64;
    let alphas: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .map(|&a| {
            let t = tilt_unchecked(p, a);
            (t.sigma3_sq, t.rho3)
        })
        .collect();

    let sigma = |a: f64| tilt_unchecked(p, a).sigma3_sq;
    let rho = |a: f64| tilt_unchecked(p, a).rho3;

    let (a_min, s_min) = refine(&alphas, points.iter().map(|x| -x.0), |a| -sigma(a));
    let (a_max, s_max) = refine(&alphas, points.iter().map(|x| x.0), sigma);
    let (a_rho, r_max) = refine(&alphas, points.iter().map(|x| x.1), rho);

    MomentEnvelope {
        sigma3_inf_sq: -s_min,
        sigma3_sup_sq: s_max,
        rho3_sup: r_max,
        argmin_sigma3_sq: a_min,
        argmax_sigma3_sq: a_max,
        argmax_rho3: a_rho,
        grid_size,
        refinement_tol: ENVELOPE_REFINE_TOL,
        degenerate: false,
    }
}

/// Locates the grid maximum of `values`, then polishes it by golden-section
/// search on the neighbouring cells. Returns `(argmax, max)`.
fn refine(alphas: &[f64], values: impl Iterator<Item = f64>, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (idx, best) =
        values.enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let a = alphas[idx.saturating_sub(1)];
    let b = alphas[(idx + 1).min(alphas.len() - 1)];
    let (x, fx) = golden_section_max(&f, a, b, ENVELOPE_REFINE_TOL);
    if fx > best {
        (x, fx)
    } else {
        (alphas[idx], best)
    }
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let candidates = [(x, f(x)), (a, f(a)), (b, f(b))];
    candidates.into_iter().fold(
        (x, f64::NEG_INFINITY),
        |acc, c| if c.1 > acc.1 { c } else { acc },
    )
}

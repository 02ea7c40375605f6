use num_bigint::BigUint;
use pragrate::distributions::{entropy, kl_divergence, tilt, tilt_divergence_residual};
use pragrate::types::{rank_in_type_class, type_class_size, unrank_in_type_class};
use pragrate::*;
use proptest::prelude::*;

fn pmf(m: usize) -> impl Strategy<Value = SourcePmf> {
    prop::collection::vec(0.02f64..1.0, m).prop_filter_map("near uniform", |w| {
        let s: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|x| x / s).collect();
        let spread =
            probs.iter().cloned().fold(0.0, f64::max) - probs.iter().cloned().fold(1.0, f64::min);
        (spread > 0.02).then(|| SourcePmf::new(probs).unwrap())
    })
}

fn any_pmf() -> impl Strategy<Value = SourcePmf> {
    (2usize..=4).prop_flat_map(pmf)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn divergence_and_entropy_decrease_with_alpha(p in any_pmf(), a in 0.01f64..0.98, step in 0.001f64..0.02) {
        let (lo, hi) = (tilt(&p, a).unwrap(), tilt(&p, a + step).unwrap());
        prop_assert!(lo.divergence > hi.divergence);
        prop_assert!(lo.entropy > hi.entropy);
    }

    #[test]
    fn moment_scaling(p in any_pmf(), a in 0.01f64..0.99) {
        let t = tilt(&p, a).unwrap();
        let s2 = (1.0 - a).powi(2) * t.sigma3_sq;
        prop_assert!((t.sigma2_sq - s2).abs() <= 1e-10 * s2.max(t.sigma2_sq));
        let r2 = (1.0 - a).powi(3) * t.rho3;
        prop_assert!((t.rho2 - r2).abs() <= 1e-10 * r2.max(t.rho2));
    }

    #[test]
    fn divergence_identity((p, q) in (2usize..=4).prop_flat_map(|m| (pmf(m), pmf(m))), a in 0.01f64..0.99) {
        prop_assert!(tilt_divergence_residual(&p, q.probs(), a).unwrap().abs() <= 1e-11);
    }

    #[test]
    fn alpha_star_decreases_with_delta(p in any_pmf(), f1 in 0.05f64..0.9, gap in 0.01f64..0.09) {
        let upper = delta_range(&p).upper;
        let a1 = solve_alpha_star(&p, f1 * upper).unwrap();
        let a2 = solve_alpha_star(&p, (f1 + gap) * upper).unwrap();
        prop_assert!(a1.alpha_star > a2.alpha_star);
        prop_assert!(a1.h_tilted < a2.h_tilted);
        prop_assert!((a1.tilted.divergence - f1 * upper).abs() < 1e-9);
    }

    #[test]
    fn error_exponent_is_convex(p in any_pmf(), x in 0.05f64..0.9, d in 0.01f64..0.05) {
        let (h, top) = (p.entropy(), (p.alphabet_size() as f64).log2());
        let r = |t: f64| h + t * (top - h);
        let e = |t: f64| error_exponent(&p, r(t)).unwrap();
        prop_assert!(e(x) <= 0.5 * (e(x - d.min(x)) + e(x + d)) + 1e-12);
    }

    #[test]
    fn rank_round_trip(x in prop::collection::vec(0u8..3, 1..40)) {
        let (t, rank) = rank_in_type_class(&x, 3).unwrap();
        prop_assert!(rank < type_class_size(&t));
        prop_assert_eq!(unrank_in_type_class(&t, &rank).unwrap(), x);
    }

    #[test]
    fn rank_is_lexicographic(
        (x, y) in prop::collection::vec(0u8..3, 2..30)
            .prop_flat_map(|x| (Just(x.clone()), Just(x).prop_shuffle()))
    ) {
        let (_, rx) = rank_in_type_class(&x, 3).unwrap();
        let (_, ry) = rank_in_type_class(&y, 3).unwrap();
        prop_assert_eq!(x.cmp(&y), rx.cmp(&ry));
    }

    #[test]
    fn codec_round_trip(p in pmf(3), x in prop::collection::vec(0u8..3, 1..25)) {
        let n = x.len() as u32;
        for ord in [CodeOrdering::known_source(&p, n).unwrap(), CodeOrdering::universal(n, 3).unwrap()] {
            let c = encode(&ord, &x).unwrap();
            prop_assert_eq!(decode(&ord, &c).unwrap(), x.clone());
            prop_assert_eq!(c.index().bits() as usize, c.len() + 1);
        }
    }

    #[test]
    fn known_source_lengths_follow_probability(p in pmf(2), x in prop::collection::vec(0u8..2, 6), y in prop::collection::vec(0u8..2, 6)) {
        let ord = CodeOrdering::known_source(&p, 6).unwrap();
        let lp = |s: &[u8]| s.iter().map(|&a| p.probs()[a as usize].log2()).sum::<f64>();
        if lp(&x) > lp(&y) + 1e-9 {
            prop_assert!(encode(&ord, &x).unwrap().len() <= encode(&ord, &y).unwrap().len());
        }
    }
}

/// Grid search over the simplex: the minimal divergence among
/// distributions with entropy at least `H(P_alpha)` is attained at `P_alpha`.
fn simplex_min_divergence(p: &[f64], h_min: f64, step: f64) -> f64 {
    let k = (1.0 / step).round() as usize;
    let mut best = f64::INFINITY;
    let mut consider = |q: &[f64]| {
        if entropy(q).unwrap() >= h_min {
            best = best.min(kl_divergence(q, p).unwrap());
        }
    };
    match p.len() {
        2 => (0..=k).for_each(|i| {
            let a = i as f64 * step;
            consider(&[a, 1.0 - a]);
        }),
        3 => {
            for i in 0..=k {
                for j in 0..=(k - i) {
                    let (a, b) = (i as f64 * step, j as f64 * step);
                    consider(&[a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

#[test]
fn tilted_family_attains_constrained_minimum() {
    let cases: [(&[f64], f64); 4] = [
        (&[0.2, 0.8], 0.5),
        (&[0.05, 0.95], 0.3),
        (&[0.6, 0.3, 0.1], 0.5),
        (&[0.7, 0.2, 0.1], 0.8),
    ];
    for (probs, a) in cases {
        let p = SourcePmf::new(probs.to_vec()).unwrap();
        let t = tilt(&p, a).unwrap();
        let grid = simplex_min_divergence(probs, t.entropy, 1e-3);
        assert!(
            (grid - t.divergence).abs() < 2e-3,
            "{probs:?} alpha={a}: grid {grid} vs tilted {}",
            t.divergence
        );
        assert!(grid >= t.divergence - 1e-12);
    }
}

#[test]
fn universal_order_is_source_free() {
    let a = CodeOrdering::new(
        OrderingMode::Universal,
        Some(&SourcePmf::new(vec![0.7, 0.2, 0.1]).unwrap()),
        7,
        None,
    )
    .unwrap();
    let b = CodeOrdering::universal(7, 3).unwrap();
    assert_eq!(a.type_order(), b.type_order());
    let k = BigUint::from(1000u32);
    assert_eq!(a.string_at(&k).unwrap(), b.string_at(&k).unwrap());
}

#[test]
fn known_source_codec_matches_length_distribution() {
    for (probs, n) in [(vec![0.2, 0.8], 10u32), (vec![0.5, 0.3, 0.2], 6)] {
        let p = SourcePmf::new(probs).unwrap();
        let m = p.alphabet_size();
        let ord = CodeOrdering::known_source(&p, n).unwrap();
        let mut mass = vec![0.0; n as usize * 2 + 2];
        for code in 0..m.pow(n) {
            let x: Vec<u8> = (0..n).map(|i| (code / m.pow(i) % m) as u8).collect();
            let len = encode(&ord, &x).unwrap().len();
            mass[len] += x.iter().map(|&a| p.probs()[a as usize]).product::<f64>();
        }
        let dist = pragrate::length_distribution(&p, n).unwrap();
        for l in 0..mass.len() {
            let tail: f64 = mass[l..].iter().sum();
            assert!((dist.tail(l as u32) - tail).abs() < 1e-12, "n={n} L={l}");
        }
    }
}

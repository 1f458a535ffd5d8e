#![allow(clippy::needless_range_loop)]

use momentgate::approx::{
    compact_exhaustion, dini_index, strict_convergence_check, sw_lattice_approx, uniform_grid, Interval, LatticeExpr,
    SampledFunction, SampledSequence, StrictOptions, SwOptions,
};
use momentgate::determinacy::{
    determinacy_report, pn_at_i_partial_sums, range_defect_from_recurrence, DeterminacyConfig,
};
use momentgate::functionals::{strict_continuity_check, IdealSpec, MomentSequence, QuadFunctional, Verdict};
use momentgate::gns::{gauss_quadrature, gns_model, hankel, psd_rank, seminorm, seminorm_and_cs};
use momentgate::poly::Polynomial;
use momentgate::report::canonical_json;
use momentgate::scalar::{Ext, Rational, Scalar};
use momentgate::sqrt_approx::{abs_via_squares, pointwise, sqrt_poly_sequence};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x6d6f_6d65),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..=max_len)
}

fn rational_coeffs(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-20i64..20, 1i64..9), 1..=max_len)
        .prop_map(|v| v.into_iter().map(|(n, d)| Rational::new(n, d)).collect())
}

/// Distinct nodes at least `gap` apart with positive weights.
fn quadrature(max_nodes: usize, gap: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_nodes)
        .prop_flat_map(move |k| {
            (
                prop::collection::vec(0.0..1.0f64, k),
                prop::collection::vec(0.05..1.0f64, k),
                -1.5..1.5f64,
            )
        })
        .prop_map(move |(steps, w, start)| {
            let mut x = start;
            let nodes = steps
                .iter()
                .map(|s| {
                    let v = x;
                    x += gap + s;
                    v
                })
                .collect();
            (nodes, w)
        })
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn poly_ring_identities_exact(a in rational_coeffs(6), b in rational_coeffs(6), c in rational_coeffs(6)) {
        let (p, q, r) = (Polynomial::new(a), Polynomial::new(b), Polynomial::new(c));
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p - &p, Polynomial::zero());
    }

    #[test]
    fn poly_evaluation_is_a_homomorphism(a in coeffs(6), b in coeffs(6), x in -2.0..2.0f64) {
        let (p, q) = (Polynomial::new(a), Polynomial::new(b));
        let scale = 1.0 + p.eval(&x).abs() * q.eval(&x).abs();
        prop_assert!(((&p * &q).eval(&x) - p.eval(&x) * q.eval(&x)).abs() <= 1e-10 * scale);
        prop_assert!(((&p + &q).eval(&x) - p.eval(&x) - q.eval(&x)).abs() <= 1e-10 * scale);
        prop_assert!((p.compose(&q).eval(&x) - p.eval(&q.eval(&x))).abs() <= 1e-8 * (1.0 + p.compose(&q).eval(&x).abs()));
    }

    #[test]
    fn sqrt_recursion_monotone_exact(num in 0i64..=64, n in 1usize..7) {
        let x = Rational::new(num, 64);
        let ps = pointwise(n, &x);
        for k in 0..n {
            prop_assert!(ps[k] <= ps[k + 1]);
            prop_assert!(ps[k + 1] >= Rational::zero());
            prop_assert!(ps[k + 1].clone() * ps[k + 1].clone() <= x);
        }
    }

    #[test]
    fn sqrt_recursion_contraction_float(x in 0.0..=1.0f64, n in 0usize..200) {
        let ps = pointwise(n + 1, &x);
        let r = x.sqrt();
        prop_assert!(ps[n] <= ps[n + 1] + 1e-12);
        prop_assert!(ps[n + 1] <= r + 1e-12);
        prop_assert!(r - ps[n + 1] <= (r - ps[n]) * (1.0 - r / 2.0) + 1e-12);
    }

    #[test]
    fn abs_via_squares_increases_to_abs(vals in prop::collection::vec(-1.0..1.0f64, 2..40), n in 1usize..60) {
        let grid: Vec<f64> = (0..vals.len()).map(|i| i as f64).collect();
        let b = SampledFunction::new(grid, vals.clone()).unwrap();
        let lo = abs_via_squares(&b, 1.0, n).unwrap();
        let hi = abs_via_squares(&b, 1.0, n + 1).unwrap();
        for i in 0..vals.len() {
            prop_assert!(lo.values()[i] <= hi.values()[i] + 1e-12);
            prop_assert!(hi.values()[i] <= vals[i].abs() + 1e-12);
        }
    }

    #[test]
    fn quadrature_functional_positive_and_linear(
        (nodes, weights) in quadrature(8, 0.01),
        f in prop::collection::vec(0.0..5.0f64, 61),
        g in prop::collection::vec(-5.0..5.0f64, 61),
        a in -3.0..3.0f64,
    ) {
        let grid = uniform_grid(-2.0, 12.0, 61);
        let nodes: Vec<f64> = nodes.iter().map(|x| x.clamp(-2.0, 12.0)).collect();
        let q = QuadFunctional::new(nodes, weights).unwrap();
        let fs = SampledFunction::new(grid.clone(), f).unwrap();
        let gs = SampledFunction::new(grid, g).unwrap();
        prop_assert!(q.eval_sampled(&fs).unwrap() >= 0.0);
        let comb = fs.zip_with(&gs, |u, v| u + a * v).unwrap();
        let lhs = q.eval_sampled(&comb).unwrap();
        let rhs = q.eval_sampled(&fs).unwrap() + a * q.eval_sampled(&gs).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs()));
    }

    #[test]
    fn moment_and_quadrature_evaluation_agree((nodes, weights) in quadrature(6, 0.05), c in coeffs(9)) {
        let q = QuadFunctional::new(nodes, weights).unwrap();
        let ms = q.moments(4).unwrap();
        let p = Polynomial::new(c);
        let a = ms.eval(&p).unwrap();
        let b = q.eval_poly(&p);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())));
    }

    #[test]
    fn continuity_witness_holds_for_quadratures(
        (nodes, weights) in quadrature(6, 0.01),
        shape in prop::collection::vec(0.0..3.0f64, 41),
        count in 2usize..30,
    ) {
        let grid = uniform_grid(-2.0, 10.0, 41);
        let nodes: Vec<f64> = nodes.iter().map(|x| x.clamp(-2.0, 10.0)).collect();
        let q = QuadFunctional::new(nodes, weights).unwrap();
        let seq = SampledSequence::from_fn(&grid, count, |k, x| {
            let i = grid.iter().position(|g| *g == x).unwrap();
            if k == count { 0.0 } else { shape[i] / k as f64 }
        }).unwrap();
        let r = strict_continuity_check(&q, &seq, 1e-9, 1e-9).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Pass);
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn hankel_structure(v in prop::collection::vec(0.1..5.0f64, 1..6)) {
        let mut m = vec![1.0];
        for x in &v { m.push(*x); m.push(*x); }
        let ms = MomentSequence::new(m).unwrap();
        let h = hankel(&ms);
        prop_assert!(h.is_hankel());
        for i in 0..h.size() {
            for j in 0..h.size() {
                prop_assert_eq!(h.get(i, j), h.get(j, i));
                prop_assert_eq!(*h.get(i, j), ms.moments()[i + j]);
            }
        }
    }

    #[test]
    fn atomic_moments_rank_and_kernel((nodes, weights) in quadrature(6, 0.4), d in 1usize..5) {
        let ms: MomentSequence<Ext<256>> = MomentSequence::from_quadrature(
            &nodes.iter().map(|x| Ext::from_f64(*x)).collect::<Vec<_>>(),
            &weights.iter().map(|w| Ext::from_f64(*w)).collect::<Vec<_>>(),
            d,
        ).unwrap();
        let r = psd_rank(&hankel(&ms), 1e-30);
        prop_assert!(r.psd);
        prop_assert_eq!(r.rank, nodes.len().min(d + 1));
        let mass: f64 = weights.iter().sum();
        for p in &r.kernel_basis {
            let norm = seminorm(&ms, p).unwrap().to_f64();
            let size: f64 = p.coeffs().iter().map(|c| c.to_f64().abs()).sum();
            prop_assert!(norm <= 1e-20 * size * mass.sqrt().max(1.0));
        }
    }

    #[test]
    fn onb_gram_and_jacobi_invariants((nodes, weights) in quadrature(7, 0.3)) {
        let d = nodes.len().min(4);
        let ms = QuadFunctional::new(nodes.clone(), weights).unwrap().moments(d).unwrap();
        let m = gns_model(&ms, 1e-12).unwrap();
        prop_assert!(m.gram_defect(&hankel(&ms)) <= 1e-8);
        prop_assert!(m.beta.iter().all(|b| *b > 0.0));
        for i in 0..m.multmat.len() {
            for j in 0..m.multmat.len() {
                prop_assert!((m.multmat[i][j] - m.multmat[j][i]).abs() <= 1e-9);
            }
        }
        let (alpha, beta) = m.recurrence();
        let pts = alpha.len().min(beta.len() + 1);
        let rule = gauss_quadrature(&alpha, &beta, &ms.moments()[0], pts).unwrap();
        prop_assert!(rule.weights.iter().all(|w| *w > 0.0));
        for k in 0..(2 * pts).min(ms.moments().len()) {
            let want = ms.moments()[k];
            prop_assert!((rule.moment(k) - want).abs() <= 1e-8 * want.abs().max(1.0));
        }
    }

    #[test]
    fn cauchy_schwarz_under_atomic_moments((nodes, weights) in quadrature(6, 0.01), a in coeffs(4), b in coeffs(4)) {
        let ms = QuadFunctional::new(nodes, weights).unwrap().moments(3).unwrap();
        let r = seminorm_and_cs(&ms, &Polynomial::new(a), &Polynomial::new(b)).unwrap();
        prop_assert!(r.cs_slack >= -1e-12 * r.normf * r.normg.max(1e-300) - 1e-12);
    }

    #[test]
    fn determinacy_traces(alpha in prop::collection::vec(-2.0..2.0f64, 12), beta in prop::collection::vec(0.1..4.0f64, 12)) {
        let s = pn_at_i_partial_sums(&alpha, &beta, 12).unwrap();
        prop_assert!(s.windows(2).all(|w| w[1] >= w[0]));
        for l in 1..=12 {
            let p = range_defect_from_recurrence(&alpha, &beta, l, 1.0, &[0])?[0];
            let m = range_defect_from_recurrence(&alpha, &beta, l, -1.0, &[0])?[0];
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((p - m).abs() <= 1e-10);
            prop_assert!((p - 1.0 / s[l].sqrt()).abs() <= 1e-8);
        }
    }

    #[test]
    fn sw_certificate_reevaluates(c in coeffs(5), eps in 0.02..0.3f64) {
        let grid = uniform_grid(-1.0, 1.0, 41);
        let p = Polynomial::new(c);
        let target = SampledFunction::from_fn(&grid, |x| p.eval(&x)).unwrap();
        let gens = vec![
            SampledFunction::constant(&grid, 1.0).unwrap(),
            SampledFunction::from_fn(&grid, |x| x).unwrap(),
        ];
        let r = sw_lattice_approx(&target, &gens, &Interval::new(-1.0, 1.0).unwrap(), eps, SwOptions::default()).unwrap();
        let ev = r.expr.eval(&gens).unwrap();
        let err = ev.values().iter().zip(target.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= eps + 1e-12);
        prop_assert!((err - r.sup_error).abs() <= 1e-12);
        let back = LatticeExpr::from_json(&r.expr.to_json()).unwrap();
        prop_assert_eq!(back, r.expr);
    }

    #[test]
    fn dini_index_is_minimal(shape in prop::collection::vec(0.0..3.0f64, 30), rates in prop::collection::vec(0.2..1.0f64, 25), frac in 0.0..1.0f64) {
        let grid = uniform_grid(0.0, 1.0, 30);
        let mut decay = vec![1.0];
        for r in &rates { let last = *decay.last().unwrap(); decay.push(last * r); }
        let seq = SampledSequence::from_fn(&grid, decay.len(), |k, x| {
            let i = grid.iter().position(|g| *g == x).unwrap();
            shape[i] * decay[k - 1]
        }).unwrap();
        let k = Interval::new(0.2, 1.0).unwrap();
        let smax = shape.iter().zip(&grid).filter(|(_, x)| k.contains(**x)).map(|(s, _)| *s).fold(0.0, f64::max);
        let maxes: Vec<f64> = decay.iter().map(|d| smax * d).collect();
        let eps = (maxes[maxes.len() - 1] + frac * (maxes[0] - maxes[maxes.len() - 1])).max(1e-12);
        let r = dini_index(&seq, &k, eps).unwrap();
        prop_assert!(r.max_at_k <= eps);
        prop_assert!(r.max_before.is_none_or(|m| m > eps));
    }

    #[test]
    fn larger_ideal_keeps_strict_convergence(amp in 0.1..3.0f64, m in 2usize..10, d in 0usize..3) {
        let grid = uniform_grid(-10.0, 10.0, 81);
        let seq = SampledSequence::from_fn(&grid, m + 3, |n, x| {
            amp * (m as f64 - n as f64).max(0.0) * (1.0 + x.abs().powi(d as i32))
        }).unwrap();
        let zero = SampledFunction::constant(&grid, 0.0).unwrap();
        let ex = compact_exhaustion(5, 2.0).unwrap();
        let o = StrictOptions::default();
        let small = strict_convergence_check(&seq, &zero, IdealSpec::PolyBounded(d), &ex, o).unwrap();
        let big = strict_convergence_check(&seq, &zero, IdealSpec::PolyBounded(d + 1), &ex, o).unwrap();
        let all = strict_convergence_check(&seq, &zero, IdealSpec::AllContinuous, &ex, o).unwrap();
        prop_assert!(small.verdict);
        prop_assert!(big.verdict && all.verdict);
        if d >= 1 {
            let bdd = strict_convergence_check(&seq, &zero, IdealSpec::UniformlyBounded, &ex, o).unwrap();
            prop_assert!(!bdd.verdict);
        }
    }

    #[test]
    fn canonical_json_round_trips(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20), key in "[a-z]{1,8}") {
        let v = serde_json::json!({ key.clone(): xs, "n": 3, "s": "t\"q" });
        let text = canonical_json(&v);
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(canonical_json(&back), text);
    }
}

#[test]
fn sqrt_polynomials_have_zero_constant_term() {
    let s = sqrt_poly_sequence::<Rational>(10);
    for n in 0..=10 {
        if let Some(p) = s.poly(n) {
            assert!(p.coeff(0).is_zero());
        }
    }
}

#[test]
fn verdicts_are_scale_invariant() {
    let cfg = DeterminacyConfig::default();
    type E = Ext<256>;
    let n: MomentSequence<E> = MomentSequence::normal(16);
    let l: MomentSequence<E> = MomentSequence::lognormal(20);
    for c in [E::from_f64(0.125), E::from_i64(1000)] {
        let a = determinacy_report(&n, cfg).unwrap().verdict;
        let b = determinacy_report(&n.scaled(&c).unwrap(), cfg).unwrap().verdict;
        assert_eq!(a, b);
        let a = determinacy_report(&l, cfg).unwrap().verdict;
        let b = determinacy_report(&l.scaled(&c).unwrap(), cfg).unwrap().verdict;
        assert_eq!(a, b);
    }
}

#[test]
fn gauss_rules_settle_on_a_fixed_polynomial_for_determinate_input() {
    type E = Ext<256>;
    let n: MomentSequence<E> = MomentSequence::normal(16);
    let r = determinacy_report(&n, DeterminacyConfig::default()).unwrap();
    assert_eq!(r.verdict.as_str(), "DeterminateEvidence");
    let m = gns_model(&n, 1e-10).unwrap();
    let (alpha, beta) = m.recurrence();
    let p = Polynomial::<E>::from_f64s(&[1.0, 0.0, -0.5, 0.0, 0.04]);
    let vals: Vec<f64> = (14..=16)
        .map(|k| gauss_quadrature(&alpha, &beta, &E::one(), k).unwrap().apply(|x| p.eval(x)).to_f64())
        .collect();
    for w in vals.windows(2) {
        assert!((w[1] - w[0]).abs() <= 1e-6, "{:?}", vals);
    }
}

//! Series-level invariants: reordering and grouping leave certified sums
//! unchanged, splitting reassembles the sum, divergence witnesses are
//! monotone under window growth, and the comparison test is sound.

mod common;

use common::random_certified_stream;
use epscalc::series::{
    dominated_convergence_check, group_pairs, partial_sum, reorder, split_pm, sum_with,
    ApproxElement, Bijection, ConvergenceVerdict, SampleConfig, TermStream,
};
use epscalc::FieldElement;

const P: i64 = 16;

fn certified(v: ConvergenceVerdict) -> ApproxElement {
    v.converged().cloned().expect("certified convergence")
}

#[test]
fn reordering_and_grouping_leave_sums_unchanged() {
    let cfg = SampleConfig::default();
    for seed in 0..40u64 {
        let s = random_certified_stream(seed);
        let base = certified(sum_with(&s, P, &cfg));
        for bij in [
            Bijection::identity(),
            Bijection::pair_swap(),
            Bijection::block_reversal(4),
        ] {
            let r = reorder(&s, &bij, &cfg).unwrap();
            let v = certified(sum_with(&r, P, &cfg));
            assert!(v.agrees_with(&base, P), "seed {}", seed);
        }
        let grouped = certified(sum_with(&group_pairs(&s), P, &cfg));
        assert!(grouped.agrees_with(&base, P), "grouping, seed {}", seed);
    }
}

#[test]
fn splitting_reassembles_the_sum() {
    let cfg = SampleConfig::default();
    for seed in 0..40u64 {
        let s = random_certified_stream(seed);
        let (plus, minus) = split_pm(&s);
        // termwise: non-negative parts and the defining identity
        for n in 0..12u64 {
            assert!(!plus.term(n).is_negative());
            assert!(!minus.term(n).is_negative());
            assert_eq!(s.term(n), plus.term(n) - minus.term(n));
        }
        let vp = certified(sum_with(&plus, P, &cfg));
        let vm = certified(sum_with(&minus, P, &cfg));
        let vs = certified(sum_with(&s, P, &cfg));
        let recombined = ApproxElement::new(
            &vp.head - &vm.head,
            vp.tail_valuation.min(vm.tail_valuation),
        );
        assert!(recombined.agrees_with(&vs, P), "seed {}", seed);
    }
}

#[test]
fn divergence_witness_is_monotone_in_window() {
    // Constant-valuation terms keep the same witness floor as the window
    // grows; the verdict never flips to convergence.
    let one_minus_e = FieldElement::one() - FieldElement::epsilon();
    let r = FieldElement::one() / one_minus_e;
    let s = TermStream::from_fn(move |n| r.pow(n as i64));
    let mut floors = Vec::new();
    for window in [16u64, 32, 64, 128] {
        let cfg = SampleConfig::with_window(window);
        match sum_with(&s, 8, &cfg) {
            ConvergenceVerdict::Diverges(w) => floors.push(w.floor),
            v => panic!(
                "window {}: expected divergence, got {}",
                window,
                v.describe()
            ),
        }
    }
    assert!(floors.iter().all(|f| *f == floors[0]));
}

#[test]
fn comparison_test_requires_domination_on_window() {
    let cfg = SampleConfig::default();
    for seed in 0..20u64 {
        let a = random_certified_stream(seed);
        // b_n = a_n scaled down by 1/2: |b| <= |a| everywhere
        let a_for_b = random_certified_stream(seed);
        let half = FieldElement::from_ratio(1, 2);
        let b = TermStream::from_fn(move |n| a_for_b.term(n) * &half);
        let v = dominated_convergence_check(&a, &b, P, &cfg).unwrap();
        let vb = certified(v);
        let va = certified(sum_with(&a, P, &cfg));
        let expected =
            ApproxElement::new(va.head * FieldElement::from_ratio(1, 2), va.tail_valuation);
        assert!(vb.agrees_with(&expected, P), "seed {}", seed);
    }
}

#[test]
fn partial_sums_prefix_consistency() {
    for seed in 0..10u64 {
        let s = random_certified_stream(seed);
        let mut acc = FieldElement::zero();
        for n in 0..10i64 {
            acc = acc + s.term(n as u64);
            assert_eq!(partial_sum(&s, n), acc);
        }
    }
}

//! Field axioms, ultrametric valuation laws, order compatibility, and
//! expansion consistency on randomized elements.

mod common;

use std::cmp::Ordering;

use common::{nonzero_element, random_element, rng};
use epscalc::field::{FieldElement, Poly, Rat};
use epscalc::valuation::Valuation;
use proptest::prelude::*;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| Rat::new(n.into(), d.into()))
}

fn arb_poly(max_len: usize) -> impl Strategy<Value = Vec<Rat>> {
    proptest::collection::vec(arb_rat(), 1..=max_len)
}

prop_compose! {
    fn arb_element()(shift in -3i64..=3, num in arb_poly(4), mut den in arb_poly(3)) -> FieldElement {
        if den.iter().all(|c| c == &Rat::new(0.into(), 1.into())) {
            den[0] = Rat::new(1.into(), 1.into());
        } else if den[0] == Rat::new(0.into(), 1.into()) {
            den[0] = Rat::new(2.into(), 1.into());
        }
        FieldElement::from_parts(shift, Poly::new(num), Poly::new(den))
    }
}

proptest! {
    #[test]
    fn addition_is_commutative_and_associative(a in arb_element(), b in arb_element(), c in arb_element()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
    }

    #[test]
    fn multiplication_is_commutative_and_associative(a in arb_element(), b in arb_element(), c in arb_element()) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
    }

    #[test]
    fn distributivity(a in arb_element(), b in arb_element(), c in arb_element()) {
        prop_assert_eq!(&a * &(&b + &c), &a * &b + &a * &c);
    }

    #[test]
    fn additive_and_multiplicative_inverses(a in arb_element()) {
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.checked_inv().unwrap()).is_one());
        }
    }

    #[test]
    fn valuation_is_multiplicative(a in arb_element(), b in arb_element()) {
        prop_assert_eq!((&a * &b).valuation(), a.valuation().add(b.valuation()));
    }

    #[test]
    fn ultrametric_inequality(a in arb_element(), b in arb_element()) {
        let va = a.valuation();
        let vb = b.valuation();
        let vsum = (&a + &b).valuation();
        prop_assert!(vsum >= va.min(vb));
        if va != vb {
            prop_assert_eq!(vsum, va.min(vb));
        }
    }

    #[test]
    fn order_is_compatible(a in arb_element(), b in arb_element()) {
        if a.is_positive() && b.is_positive() {
            prop_assert!((&a + &b).is_positive());
            prop_assert!((&a * &b).is_positive());
        }
        // abs is multiplicative and satisfies the triangle inequality
        prop_assert_eq!((&a * &b).abs(), a.abs() * b.abs());
        let lhs = (&a + &b).abs();
        let rhs = a.abs() + b.abs();
        prop_assert_ne!(lhs.cmp_order(&rhs), Ordering::Greater);
    }

    #[test]
    fn expansions_agree_across_precisions(a in arb_element()) {
        let small = a.expand(5);
        let large = a.expand(11);
        for k in -6..5i64 {
            prop_assert_eq!(small.coeff_at(k), large.coeff_at(k));
        }
    }

    #[test]
    fn comparison_matches_leading_expansion_coefficient(a in arb_element(), b in arb_element()) {
        let diff = &a - &b;
        let expected = match diff.valuation() {
            Valuation::Infinite => Ordering::Equal,
            Valuation::Finite(v) => {
                let exp = diff.expand(v + 1);
                let lead = exp.leading().cloned().unwrap();
                if lead > Rat::new(0.into(), 1.into()) {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        };
        prop_assert_eq!(a.cmp_order(&b), expected);
    }

    #[test]
    fn printed_elements_reparse(a in arb_element()) {
        let text = a.to_string();
        let back = epscalc::parse::eval_element(&text, &epscalc::parse::ExprContext::new()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn subtraction_recovers_expansion_tail() {
    // a - (truncated expansion of a) always has valuation >= the cut.
    let mut r = rng(7);
    for _ in 0..50 {
        let a = random_element(&mut r, true);
        let p = 9;
        let exp = a.expand(p);
        let mut partial = FieldElement::zero();
        for (k, c) in exp.coeffs().iter().enumerate() {
            partial = partial + FieldElement::monomial(c.clone(), exp.v0() + k as i64);
        }
        assert!((a - partial).valuation().at_least(p));
    }
}

#[test]
fn division_round_trips() {
    let mut r = rng(13);
    for _ in 0..100 {
        let a = random_element(&mut r, true);
        let b = nonzero_element(&mut r);
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q * &b, a);
    }
}
